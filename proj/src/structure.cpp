#include "covertime/structure.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <tuple>

#include "covertime/parallel.hpp"
#include "covertime/stats.hpp"

namespace covertime {

GreenStructure extract_green(const Trajectory& traj, const Multigraph* g) {
    if (traj.log.size() != traj.steps) throw GraphError("extract_green: step log incomplete");
    if (!g && traj.degree == 0) throw GraphError("extract_green: lazy trajectory without degree");
    auto owner = [&](HalfEdge p) { return g ? g->owner(p) : static_cast<Vertex>(p / traj.degree); };

    const std::size_t k = traj.log.size();
    std::vector<Vertex> path(k + 1);
    path[0] = traj.start;
    std::vector<HalfEdge> key(k);
    const std::size_t points = 2ULL * traj.edge_total;
    std::vector<std::uint32_t> uses(points, 0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& step = traj.log[i];
        if (step.from >= points || step.to >= points) throw GraphError("extract_green: bad point in step log");
        if (owner(step.from) != path[i]) throw GraphError("extract_green: step log not contiguous");
        key[i] = std::min(step.from, step.to);
        ++uses[key[i]];
        path[i + 1] = owner(step.to);
    }
    auto green = [&](std::size_t i) { return uses[key[i]] == 1; };

    std::vector<std::uint32_t> seen(traj.n, 0);
    for (Vertex v : path) ++seen[v];
    std::vector<char> in_y(traj.n, 0);
    GreenStructure out;
    for (std::size_t i = 1; i < k; ++i) {
        const Vertex v = path[i];
        if (seen[v] == 1 && v != path[0] && v != path[k] && green(i - 1) && green(i) && key[i - 1] != key[i]) {
            in_y[v] = 1;
            out.Y.push_back(v);
        }
    }
    std::ranges::sort(out.Y);

    std::uint32_t run = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (!green(i)) continue;
        ++out.Phi;
        ++run;
        if (!in_y[path[i + 1]]) {
            out.bridge_lengths.push_back(run);
            run = 0;
        }
    }
    if (run != 0) throw GraphError("extract_green: bridge left open at the head");
    out.phi = static_cast<std::uint32_t>(out.bridge_lengths.size());
    return out;
}

namespace {

struct PathCounter {
    const Multigraph& g;
    const std::vector<char>& in;
    std::uint32_t limit;
    std::vector<char> on_path;
    Vertex source = 0;
    std::uint64_t count = 0;

    void extend(Vertex v, std::uint32_t length) {
        for (HalfEdge h : g.half_edges_of(v)) {
            const Vertex u = g.head(h);
            if (in[u]) {
                // v is outside S here, so the edge is not internal
                if (length >= 1 && u > source) ++count;
                continue;
            }
            if (on_path[u] || length + 1 >= limit) continue;
            on_path[u] = 1;
            extend(u, length + 1);
            on_path[u] = 0;
        }
    }
};

}  // namespace

RootSetReport is_root_set(const Multigraph& g, std::span<const Vertex> set, double ell) {
    if (!(ell > 1.0)) throw GraphError("is_root_set: order must exceed 1");
    std::vector<char> in(g.vertex_count(), 0);
    for (Vertex v : set) {
        if (v >= g.vertex_count()) throw GraphError("is_root_set: vertex out of range");
        in[v] = 1;
    }
    RootSetReport r;
    r.ell = ell;
    r.size = static_cast<std::size_t>(std::ranges::count(in, 1));
    const double size = static_cast<double>(r.size);
    r.size_ok = size >= std::pow(ell, 5.0);

    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.endpoints(e);
        if (in[u] && in[v]) ++r.internal_edges;
    }
    const double internal = static_cast<double>(r.internal_edges);
    r.internal_ok = internal >= size / 2.0 && internal <= (0.5 + std::pow(ell, -3.0)) * size;

    PathCounter counter{g, in, static_cast<std::uint32_t>(std::floor(ell)), std::vector<char>(g.vertex_count(), 0)};
    if (counter.limit >= 2) {
        for (Vertex s = 0; s < g.vertex_count(); ++s) {
            if (!in[s]) continue;
            counter.source = s;
            for (HalfEdge h : g.half_edges_of(s)) {
                const Vertex u = g.head(h);
                if (in[u]) continue;
                counter.on_path[u] = 1;
                counter.extend(u, 1);
                counter.on_path[u] = 0;
            }
        }
    }
    r.short_paths = counter.count;
    r.paths_ok = static_cast<double>(r.short_paths) <= size / std::pow(ell, 3.0);
    r.verdict = r.size_ok && r.internal_ok && r.paths_ok;
    return r;
}

std::vector<std::uint32_t> polya_urn(std::uint32_t phi, std::uint32_t m, Rng& rng) {
    if (phi < 1) throw GraphError("polya_urn: need at least one colour");
    std::vector<std::uint32_t> balls(phi);
    for (std::uint32_t c = 0; c < phi; ++c) balls[c] = c;
    balls.reserve(phi + m);
    for (std::uint32_t i = 0; i < m; ++i) balls.push_back(balls[uniform_index(rng, balls.size())]);
    std::vector<std::uint32_t> sizes(phi, 0);
    for (std::uint32_t b : balls) ++sizes[b];
    return sizes;
}

boost::multiprecision::cpp_int equivalence_class_size(std::uint32_t phi, std::uint32_t y) {
    if (phi < 1) throw GraphError("equivalence_class_size: phi must be >= 1");
    boost::multiprecision::cpp_int out = 1;
    for (std::uint32_t i = 0; i < y; ++i) out *= phi + i;
    return out;
}

std::vector<double> first_bridge_pmf(std::uint32_t phi, std::uint32_t m) {
    if (phi < 1) throw GraphError("first_bridge_pmf: phi must be >= 1");
    std::vector<double> pmf(m + 1, 0.0);
    if (phi == 1) {
        pmf[m] = 1.0;
        return pmf;
    }
    auto log_choose = [](double a, double b) { return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1); };
    const double total = log_choose(m + phi - 1.0, phi - 1.0);
    for (std::uint32_t j = 0; j <= m; ++j) pmf[j] = std::exp(log_choose(m - j + phi - 2.0, phi - 2.0) - total);
    return pmf;
}

std::size_t UrnTestReport::retained() const { return buckets.size(); }

std::size_t UrnTestReport::passing(double alpha) const {
    return static_cast<std::size_t>(std::ranges::count_if(buckets, [&](const UrnBucket& b) { return b.p_value >= alpha; }));
}

namespace {

std::string format_ratio(double x) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << x;
    return os.str();
}

}  // namespace

UrnTestReport urn_bridge_test(std::span<const BridgeSample> samples, std::size_t min_bucket) {
    if (min_bucket < 1) throw GraphError("urn_bridge_test: bucket size must be positive");
    UrnTestReport report;
    std::vector<BridgeSample> mixed;
    UrnBucket single;
    single.label = "phi=1";
    single.degenerate = true;
    std::size_t single_bad = 0;
    for (const auto& s : samples) {
        if (s.phi == 0) {
            ++report.skipped_samples;
        } else if (s.phi == 1) {
            ++single.samples;
            if (s.first != s.m + 1) ++single_bad;
        } else {
            mixed.push_back(s);
        }
    }
    if (single.samples >= min_bucket) {
        single.p_value = single_bad == 0 ? 1.0 : 0.0;
        report.buckets.push_back(single);
    } else if (single.samples > 0) {
        report.skipped_samples += single.samples;
        report.notices.push_back("phi=1 bucket skipped: " + std::to_string(single.samples) + " samples");
    }

    std::ranges::sort(mixed, [](const BridgeSample& a, const BridgeSample& b) {
        const auto ra = static_cast<double>(a.m) / a.phi, rb = static_cast<double>(b.m) / b.phi;
        return std::tie(ra, a.phi, a.m, a.first) < std::tie(rb, b.phi, b.m, b.first);
    });
    const std::size_t groups = mixed.size() / min_bucket;
    if (groups == 0 && !mixed.empty()) {
        report.skipped_samples += mixed.size();
        report.notices.push_back("insufficient samples for a bucket: " + std::to_string(mixed.size()));
    }
    for (std::size_t b = 0; b < groups; ++b) {
        const std::size_t lo = mixed.size() * b / groups, hi = mixed.size() * (b + 1) / groups;
        std::vector<std::uint64_t> observed(kBridgeCap, 0);
        std::vector<double> expected(kBridgeCap, 0.0);
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& s = mixed[i];
            ++observed[std::min(s.first, kBridgeCap) - 1];
            const auto pmf = first_bridge_pmf(s.phi, s.m);
            for (std::size_t k = 0; k < pmf.size(); ++k) expected[std::min<std::size_t>(k, kBridgeCap - 1)] += pmf[k];
        }
        const double count = static_cast<double>(hi - lo);
        for (double& e : expected) e /= count;
        const auto chi = chi_square_gof(observed, expected, 5.0);
        UrnBucket bucket;
        bucket.label = "m/phi " + format_ratio(static_cast<double>(mixed[lo].m) / mixed[lo].phi) + "-" +
                       format_ratio(static_cast<double>(mixed[hi - 1].m) / mixed[hi - 1].phi);
        bucket.samples = hi - lo;
        bucket.chi2 = chi.statistic;
        bucket.df = chi.df;
        bucket.p_value = chi.p_value;
        report.buckets.push_back(bucket);
    }
    return report;
}

std::vector<BridgeSample> sample_bridges(const UrnWalkOptions& options) {
    if (!(options.delta > 0.0 && options.delta < 1.0)) throw GraphError("sample_bridges: delta must lie in (0, 1)");
    const std::uint64_t edges = static_cast<std::uint64_t>(options.n) * options.d / 2;
    const auto t = static_cast<std::uint64_t>(std::llround((1.0 - options.delta) * static_cast<double>(edges)));
    std::vector<BridgeSample> out(options.trials);
    parallel_for(options.trials, options.threads, [&](std::size_t i) {
        Rng rng(derive_seed(options.seed, i));
        WalkOptions walk;
        walk.stop = StopRule::edge_count(std::max<std::uint64_t>(t, 1));
        walk.record_series = false;
        walk.record_steps = true;
        const Trajectory traj = run_lazy_biased_walk(options.n, options.d, rng, walk);
        const GreenStructure green = extract_green(traj);
        out[i] = {green.phi, static_cast<std::uint32_t>(green.Y.size()),
                  green.bridge_lengths.empty() ? 0 : green.bridge_lengths.front()};
    });
    return out;
}

std::vector<BridgeSample> sample_urn_null(std::span<const BridgeSample> shapes, std::uint64_t seed) {
    std::vector<BridgeSample> out(shapes.begin(), shapes.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].phi == 0) continue;
        Rng rng(derive_seed(seed, i));
        out[i].first = polya_urn(out[i].phi, out[i].m, rng).front();
    }
    return out;
}

void write_rootset_header(std::ostream& out) {
    out << "# covertime-lab schema v1\n";
    out << "t,delta,size,internal_edges,short_paths,verdict\n";
}

void write_rootset_row(std::ostream& out, std::uint32_t t, double delta, const RootSetReport& report) {
    out << t << ',' << delta << ',' << report.size << ',' << report.internal_edges << ',' << report.short_paths << ','
        << (report.verdict ? "true" : "false") << '\n';
}

void write_urn_csv(std::ostream& out, const UrnTestReport& report) {
    out << "# covertime-lab schema v1\n";
    out << "bucket,samples,chi2,p\n";
    for (const auto& b : report.buckets) out << b.label << ',' << b.samples << ',' << b.chi2 << ',' << b.p_value << '\n';
}

}  // namespace covertime
