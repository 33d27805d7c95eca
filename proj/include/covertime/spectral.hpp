#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "covertime/multigraph.hpp"
#include "covertime/rng.hpp"

namespace covertime {

// Simple random walk on half-edges: from v each incident half-edge is taken
// with probability 1/deg(v), so a loop keeps the walk at v with 2/deg(v).
template <typename Scalar = double>
Eigen::SparseMatrix<Scalar> transition_matrix(const Multigraph& g) {
    std::vector<Eigen::Triplet<Scalar>> entries;
    entries.reserve(g.half_edge_count());
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        const Scalar w = Scalar(1) / Scalar(g.degree(v));
        for (HalfEdge h : g.half_edges_of(v)) entries.emplace_back(v, g.head(h), w);
    }
    Eigen::SparseMatrix<Scalar> p(g.vertex_count(), g.vertex_count());
    p.setFromTriplets(entries.begin(), entries.end());  // duplicates are summed
    return p;
}

// D^{-1/2} A D^{-1/2}; same spectrum as the transition matrix, symmetric.
template <typename Scalar = double>
Eigen::SparseMatrix<Scalar> normalized_adjacency(const Multigraph& g) {
    using std::sqrt;
    std::vector<Eigen::Triplet<Scalar>> entries;
    entries.reserve(g.half_edge_count());
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        for (HalfEdge h : g.half_edges_of(v)) {
            const Vertex u = g.head(h);
            entries.emplace_back(v, u, Scalar(1) / sqrt(Scalar(g.degree(v)) * Scalar(g.degree(u))));
        }
    }
    Eigen::SparseMatrix<Scalar> a(g.vertex_count(), g.vertex_count());
    a.setFromTriplets(entries.begin(), entries.end());
    return a;
}

// pi_v = deg(v) / (2 |E|).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> stationary_distribution(const Multigraph& g) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pi(g.vertex_count());
    const Scalar total = Scalar(g.half_edge_count());
    for (Vertex v = 0; v < g.vertex_count(); ++v) pi(v) = Scalar(g.degree(v)) / total;
    return pi;
}

enum class SpectralMethod { PowerIteration, DenseExact };
std::string_view to_string(SpectralMethod method);

struct SpectralReport {
    double lambda = 0.0;       // second largest |eigenvalue| of the transition matrix
    double signed_lambda = 0.0;  // Rayleigh quotient of the dominant direction; near -lambda when periodic
    SpectralMethod method = SpectralMethod::PowerIteration;
    std::uint64_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    bool periodic = false;  // lambda within 1e-6 of 1
};

struct SpectralOptions {
    double tol = 1e-6;
    std::uint64_t max_iter = 200000;
    std::uint32_t dense_limit = 2000;
    bool dense_fallback = true;
    std::uint64_t seed = 0x5eed;
};

// Power iteration on the squared, deflated normalized adjacency, so that a
// +lambda/-lambda pair cannot stall convergence. A single vertex has lambda 0.
SpectralReport second_eigenvalue(const Multigraph& g, const SpectralOptions& options = {});
SpectralReport second_eigenvalue_dense(const Multigraph& g);

struct Contraction {
    Multigraph graph;
    Vertex node = 0;             // the contracted vertex (last id)
    std::vector<Vertex> relabel; // old id -> new id
};

// Replaces `set` by one vertex, keeping every edge; edges inside the set
// become loops.
Contraction contract(const Multigraph& g, std::span<const Vertex> set);

// P_v^{(t)}(v) for t = 0..horizon, by forward propagation.
std::vector<double> return_probabilities(const Multigraph& g, Vertex v, std::uint32_t horizon);

enum class HittingMethod { ZSeries, ExactSolve, MonteCarlo };
std::string_view to_string(HittingMethod method);

struct HittingEstimate {
    double value = 0.0;  // E_pi H(S)
    HittingMethod method = HittingMethod::ExactSolve;
    std::uint64_t work = 0;  // Z-series truncation T, or Monte Carlo sample count
    double error = 0.0;      // tail bound, solve residual, or confidence half-width
    double lambda = 0.0;     // Z-series: lambda of the contracted graph
    bool ok = true;
    std::string note;
};

inline constexpr std::uint32_t kExactSolveLimit = 2000;

HittingEstimate hitting_time_exact(const Multigraph& g, std::span<const Vertex> set,
                                   std::uint32_t max_unknowns = kExactSolveLimit);
HittingEstimate hitting_time_zseries(const Multigraph& g, std::span<const Vertex> set, double tol = 1e-6);

struct MonteCarloOptions {
    double confidence = 0.99;
    std::uint64_t step_cap = 0;  // per trial; 0 means 1e9 / trials
    unsigned threads = 0;        // 0: hardware concurrency
};

HittingEstimate hitting_time_mc(const Multigraph& g, std::span<const Vertex> set, std::uint64_t trials,
                                std::uint64_t seed, const MonteCarloOptions& options = {});

struct AvoidanceResult {
    double empirical = 1.0;          // fraction of l-step walks from a uniform non-Z start avoiding Z
    double bound = 1.0;              // ((1-c) r + c lambda_adjacency)^l / r^l
    double lambda_transition = 0.0;
    double lambda_adjacency = 0.0;   // r * lambda_transition
    double c = 0.0;
    std::uint64_t trials = 0;
};

AvoidanceResult aks_avoidance(const Multigraph& g, std::span<const Vertex> avoid, std::uint32_t ell,
                              std::uint64_t trials, std::uint64_t seed,
                              std::optional<double> lambda_transition = std::nullopt);

}  // namespace covertime
