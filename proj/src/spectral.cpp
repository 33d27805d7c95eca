#include "covertime/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "covertime/parallel.hpp"
#include "covertime/stats.hpp"

namespace covertime {

std::string_view to_string(SpectralMethod method) {
    return method == SpectralMethod::PowerIteration ? "power-iteration" : "dense-exact";
}

std::string_view to_string(HittingMethod method) {
    switch (method) {
        case HittingMethod::ZSeries: return "zseries";
        case HittingMethod::ExactSolve: return "exact";
        case HittingMethod::MonteCarlo: return "montecarlo";
    }
    return "unknown";
}

namespace {

std::vector<char> membership(const Multigraph& g, std::span<const Vertex> set) {
    std::vector<char> in(g.vertex_count(), 0);
    for (Vertex v : set) {
        if (v >= g.vertex_count()) throw GraphError("vertex set: id out of range");
        in[v] = 1;
    }
    return in;
}

std::size_t distinct_count(const std::vector<char>& in) {
    return static_cast<std::size_t>(std::ranges::count(in, 1));
}

}  // namespace

SpectralReport second_eigenvalue_dense(const Multigraph& g) {
    SpectralReport report;
    report.method = SpectralMethod::DenseExact;
    report.converged = true;
    const std::uint32_t n = g.vertex_count();
    if (n <= 1) return report;
    const Eigen::MatrixXd a = Eigen::MatrixXd(normalized_adjacency(g));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        report.converged = false;
        return report;
    }
    const auto& ev = solver.eigenvalues();  // ascending; ev(n-1) = 1 when connected
    const double top = ev(n - 2);
    const double bottom = ev(0);
    report.lambda = std::max(std::abs(top), std::abs(bottom));
    report.signed_lambda = std::abs(top) >= std::abs(bottom) ? top : bottom;
    report.periodic = report.lambda >= 1.0 - 1e-6;
    return report;
}

SpectralReport second_eigenvalue(const Multigraph& g, const SpectralOptions& options) {
    const std::uint32_t n = g.vertex_count();
    if (n == 0) throw GraphError("second_eigenvalue: empty graph");
    SpectralReport report;
    if (n == 1) {
        report.converged = true;
        return report;
    }
    if (!is_connected(g)) throw GraphError("second_eigenvalue: graph is disconnected");

    const Eigen::SparseMatrix<double> a = normalized_adjacency(g);
    Eigen::VectorXd top = stationary_distribution(g).cwiseSqrt();
    top.normalize();

    Rng rng(options.seed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = gauss(rng);
    x -= top.dot(x) * top;
    x.normalize();

    Eigen::VectorXd y(n), z(n);
    double mu = 0.0;
    for (report.iterations = 1; report.iterations <= options.max_iter; ++report.iterations) {
        y.noalias() = a * x;
        z.noalias() = a * y;
        z -= top.dot(z) * top;
        mu = x.dot(z);
        report.residual = (z - mu * x).norm();
        report.signed_lambda = x.dot(y);
        const double norm = z.norm();
        if (norm == 0.0) {
            mu = 0.0;
            report.residual = 0.0;
            report.converged = true;
            break;
        }
        if (report.residual <= options.tol) {
            report.converged = true;
            break;
        }
        x = z / norm;
    }
    report.iterations = std::min(report.iterations, options.max_iter);
    report.lambda = std::sqrt(std::max(mu, 0.0));
    report.periodic = report.lambda >= 1.0 - 1e-6;
    if (!report.converged && options.dense_fallback && n <= options.dense_limit) {
        SpectralReport dense = second_eigenvalue_dense(g);
        dense.iterations = report.iterations;
        dense.residual = report.residual;
        return dense;
    }
    return report;
}

Contraction contract(const Multigraph& g, std::span<const Vertex> set) {
    if (set.empty()) throw GraphError("contract: empty set");
    const auto in = membership(g, set);
    Contraction out;
    out.relabel.resize(g.vertex_count());
    Vertex next = 0;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (!in[v]) out.relabel[v] = next++;
    }
    out.node = next;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (in[v]) out.relabel[v] = out.node;
    }
    std::vector<std::pair<Vertex, Vertex>> edges;
    edges.reserve(g.edge_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.endpoints(e);
        edges.emplace_back(out.relabel[u], out.relabel[v]);
    }
    out.graph = Multigraph::from_edges(next + 1, edges);
    return out;
}

std::vector<double> return_probabilities(const Multigraph& g, Vertex v, std::uint32_t horizon) {
    if (v >= g.vertex_count()) throw GraphError("return_probabilities: vertex out of range");
    const Eigen::SparseMatrix<double> pt = transition_matrix(g).transpose();
    Eigen::VectorXd dist = Eigen::VectorXd::Zero(g.vertex_count());
    dist(v) = 1.0;
    std::vector<double> out;
    out.reserve(horizon + 1);
    out.push_back(1.0);
    Eigen::VectorXd next(g.vertex_count());
    for (std::uint32_t t = 1; t <= horizon; ++t) {
        next.noalias() = pt * dist;
        dist.swap(next);
        out.push_back(dist(v));
    }
    return out;
}

HittingEstimate hitting_time_exact(const Multigraph& g, std::span<const Vertex> set, std::uint32_t max_unknowns) {
    const auto in = membership(g, set);
    HittingEstimate est;
    est.method = HittingMethod::ExactSolve;
    const std::uint32_t n = g.vertex_count();
    std::vector<Eigen::Index> index(n, -1);
    Eigen::Index unknowns = 0;
    for (Vertex v = 0; v < n; ++v) {
        if (!in[v]) index[v] = unknowns++;
    }
    if (unknowns == 0) return est;
    if (static_cast<std::uint64_t>(unknowns) > max_unknowns) {
        throw GraphError("hitting_time_exact: too many unknowns for the exact solve");
    }
    if (distinct_count(in) == 0) throw GraphError("hitting_time_exact: empty target set");

    // (I - Q) h = 1 over vertices outside the set, h = 0 inside.
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(g.half_edge_count() + unknowns);
    for (Vertex v = 0; v < n; ++v) {
        if (in[v]) continue;
        const double w = 1.0 / g.degree(v);
        entries.emplace_back(index[v], index[v], 1.0);
        for (HalfEdge h : g.half_edges_of(v)) {
            const Vertex u = g.head(h);
            if (!in[u]) entries.emplace_back(index[v], index[u], -w);
        }
    }
    Eigen::SparseMatrix<double> m(unknowns, unknowns);
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw GraphError("hitting_time_exact: singular system, graph disconnected");
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(unknowns);
    const Eigen::VectorXd h = lu.solve(ones);
    if (lu.info() != Eigen::Success || !h.allFinite()) {
        throw GraphError("hitting_time_exact: singular system, graph disconnected");
    }
    est.error = (m * h - ones).norm();
    if (est.error > 1e-6 * std::max(1.0, h.norm())) throw GraphError("hitting_time_exact: singular system, graph disconnected");
    const auto pi = stationary_distribution(g);
    for (Vertex v = 0; v < n; ++v) {
        if (!in[v]) est.value += pi(v) * h(index[v]);
    }
    return est;
}

HittingEstimate hitting_time_zseries(const Multigraph& g, std::span<const Vertex> set, double tol) {
    const auto in = membership(g, set);
    const std::size_t size = distinct_count(in);
    if (size == 0) throw GraphError("hitting_time_zseries: empty target set");
    HittingEstimate est;
    est.method = HittingMethod::ZSeries;
    if (size == g.vertex_count()) return est;
    if (!is_connected(g)) throw GraphError("hitting_time_zseries: graph is disconnected");

    const Contraction c = contract(g, set);
    const double pi_s = static_cast<double>(c.graph.degree(c.node)) / c.graph.half_edge_count();
    SpectralOptions spectral;
    spectral.tol = std::min(1e-6, tol);
    const SpectralReport rep = second_eigenvalue(c.graph, spectral);
    est.lambda = rep.lambda;

    auto fallback = [&](const std::string& why) {
        const std::size_t unknowns = g.vertex_count() - size;
        if (unknowns <= kExactSolveLimit) {
            HittingEstimate exact = hitting_time_exact(g, set);
            exact.lambda = rep.lambda;
            exact.note = why + "; fell back to exact solve";
            return exact;
        }
        est.ok = false;
        est.value = std::numeric_limits<double>::quiet_NaN();
        est.note = why;
        return est;
    };
    if (!rep.converged) return fallback("eigenvalue estimate did not converge");
    if (rep.lambda >= 1.0 - 1e-6) return fallback("contracted chain is periodic or nearly disconnected");

    // Smallest T with lambda^{T+1} / ((1 - lambda) pi_s) < tol.
    std::uint64_t horizon = 0;
    if (rep.lambda > 0.0) {
        const double bound = std::log(tol * (1.0 - rep.lambda) * pi_s) / std::log(rep.lambda);
        horizon = static_cast<std::uint64_t>(std::max(0.0, std::floor(bound)));
    }
    if (horizon > 50'000'000) return fallback("Z-series horizon too long");
    const auto returns = return_probabilities(c.graph, c.node, static_cast<std::uint32_t>(horizon));
    double z = 0.0;
    for (double p : returns) z += p - pi_s;
    est.value = z / pi_s;
    est.work = horizon;
    est.error = std::pow(rep.lambda, static_cast<double>(horizon + 1)) / ((1.0 - rep.lambda) * pi_s);
    return est;
}

HittingEstimate hitting_time_mc(const Multigraph& g, std::span<const Vertex> set, std::uint64_t trials,
                                std::uint64_t seed, const MonteCarloOptions& options) {
    if (trials < 1) throw GraphError("hitting_time_mc: need at least one trial");
    const auto in = membership(g, set);
    if (distinct_count(in) == 0) throw GraphError("hitting_time_mc: empty target set");
    const std::uint64_t cap = options.step_cap ? options.step_cap : std::max<std::uint64_t>(1, 1'000'000'000ULL / trials);

    std::vector<double> steps(trials, 0.0);
    std::vector<char> capped(trials, 0);
    parallel_for(trials, options.threads, [&](std::size_t i) {
        Rng rng(derive_seed(seed, i));
        Vertex v = g.owner(static_cast<HalfEdge>(uniform_index(rng, g.half_edge_count())));
        std::uint64_t k = 0;
        while (!in[v]) {
            if (k == cap) {
                capped[i] = 1;
                break;
            }
            v = g.head(g.first_half_edge(v) + static_cast<HalfEdge>(uniform_index(rng, g.degree(v))));
            ++k;
        }
        steps[i] = static_cast<double>(k);
    });
    Summary summary;
    for (double s : steps) summary.add(s);
    HittingEstimate est;
    est.method = HittingMethod::MonteCarlo;
    est.value = summary.mean();
    est.work = trials;
    est.error = trials > 1 ? summary.half_width(options.confidence) : std::numeric_limits<double>::infinity();
    if (summary.sd() == 0.0) est.error = 0.0;
    if (std::ranges::any_of(capped, [](char c) { return c != 0; })) {
        est.ok = false;
        est.note = "step cap exceeded";
    }
    return est;
}

AvoidanceResult aks_avoidance(const Multigraph& g, std::span<const Vertex> avoid, std::uint32_t ell,
                              std::uint64_t trials, std::uint64_t seed, std::optional<double> lambda_transition) {
    const std::uint32_t r = g.regular_degree();
    if (r == 0) throw GraphError("aks_avoidance: graph must be regular");
    const auto in = membership(g, avoid);
    const std::size_t size = distinct_count(in);
    if (size >= g.vertex_count()) throw GraphError("aks_avoidance: Z must be a proper subset");

    AvoidanceResult out;
    out.trials = trials;
    out.c = static_cast<double>(size) / g.vertex_count();
    out.lambda_transition = lambda_transition ? *lambda_transition : second_eigenvalue(g).lambda;
    out.lambda_adjacency = r * out.lambda_transition;
    const double base = ((1.0 - out.c) * r + out.c * out.lambda_adjacency) / r;
    out.bound = std::pow(base, static_cast<double>(ell));
    if (size == 0 || trials == 0) {
        out.empirical = 1.0;
        return out;
    }

    std::vector<Vertex> outside;
    outside.reserve(g.vertex_count() - size);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (!in[v]) outside.push_back(v);
    }
    std::vector<char> avoided(trials, 0);
    parallel_for(trials, 0, [&](std::size_t i) {
        Rng rng(derive_seed(seed, i));
        Vertex v = outside[uniform_index(rng, outside.size())];
        for (std::uint32_t step = 0; step < ell; ++step) {
            v = g.head(g.first_half_edge(v) + static_cast<HalfEdge>(uniform_index(rng, r)));
            if (in[v]) return;
        }
        avoided[i] = 1;
    });
    out.empirical = static_cast<double>(std::ranges::count(avoided, 1)) / static_cast<double>(trials);
    return out;
}

}  // namespace covertime
