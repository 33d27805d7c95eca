#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covertime/multigraph.hpp"
#include "covertime/rng.hpp"

namespace covertime {

enum class WalkKind { BiasedEdgeProcess, SimpleWalk, NonBacktrackingWalk };

std::string_view to_string(WalkKind kind);
std::optional<WalkKind> parse_walk_kind(std::string_view text);

struct StopRule {
    enum class Kind { AllEdges, AllVertices, StepBudget, EdgeCount };
    Kind kind = Kind::AllEdges;
    std::uint64_t value = 0;

    static StopRule all_edges() { return {Kind::AllEdges, 0}; }
    static StopRule all_vertices() { return {Kind::AllVertices, 0}; }
    static StopRule step_budget(std::uint64_t steps) { return {Kind::StepBudget, steps}; }
    // Stop right after the t-th distinct edge is discovered.
    static StopRule edge_count(std::uint64_t t) { return {Kind::EdgeCount, t}; }
};

struct WalkOptions {
    StopRule stop = StopRule::all_edges();
    // Unset: start at the owner of a uniformly random half-edge.
    std::optional<Vertex> start;
    // Store the X_i / Phi series every `decimation` discoveries (and at the end).
    std::uint32_t decimation = 1;
    bool record_series = true;
    bool record_steps = false;
    // Fault injection for negative controls: the biased walk prefers blue
    // half-edges instead of red ones. Never set outside tests.
    bool fault_blue_first = false;
};

struct StepRecord {
    HalfEdge from = 0;
    HalfEdge to = 0;
    bool red = false;                   // edge was untraversed before this step
    std::uint32_t red_at_departure = 0; // red half-edges at the departing vertex
};

inline constexpr std::uint64_t kNotReached = static_cast<std::uint64_t>(-1);

// Measurements are taken immediately after the t-th distinct edge is first
// traversed (one half-step later than freezing the walk at 2t-1 visited
// points). Row 0 of the series is the state before the first step.
struct Trajectory {
    WalkKind kind = WalkKind::BiasedEdgeProcess;
    std::uint32_t n = 0;
    std::uint32_t degree = 0;      // width of the X histogram minus one
    std::uint32_t edge_total = 0;  // d*n/2 for regular graphs
    Vertex start = 0;
    std::uint64_t steps = 0;

    std::vector<std::uint64_t> edge_steps;    // [t-1] = C_E(t)
    std::vector<std::uint64_t> vertex_steps;  // [s-1] = C_V(s)
    std::vector<std::uint32_t> vertex_time;   // [s-1] = tau_s, edges found when s-th vertex is reached

    std::vector<std::uint32_t> sample_t;
    std::vector<std::uint32_t> x_counts;  // row-major, (degree + 1) per sample
    std::vector<std::uint32_t> phi;

    std::vector<StepRecord> log;
    // Lazy runs: the exposed part of the pairing (kUnpaired elsewhere).
    std::vector<HalfEdge> exposed;
    // Traversal count per edge id (eager) or per smaller point of each
    // exposed pair (lazy).
    std::vector<std::uint32_t> edge_uses;

    std::uint32_t edges_found() const { return static_cast<std::uint32_t>(edge_steps.size()); }
    std::uint32_t vertices_found() const { return static_cast<std::uint32_t>(vertex_steps.size()); }
    std::size_t rows() const { return sample_t.size(); }
    std::uint32_t x(std::size_t row, std::uint32_t i) const { return x_counts[row * (degree + 1) + i]; }
    double delta(std::uint64_t t) const {
        return static_cast<double>(2ULL * edge_total - 2 * t) / static_cast<double>(2ULL * edge_total);
    }
    // Row recorded at discovery time t, if any.
    std::optional<std::size_t> row_at(std::uint32_t t) const;
    // tau_s = min{t : s vertices visited at C_E(t)}.
    std::optional<std::uint32_t> tau(std::uint32_t s) const;
};

Trajectory run_walk(const Multigraph& g, WalkKind kind, Rng& rng, const WalkOptions& options = {});

inline Trajectory run_biased_walk(const Multigraph& g, Rng& rng, const WalkOptions& options = {}) {
    return run_walk(g, WalkKind::BiasedEdgeProcess, rng, options);
}

// Baselines: SimpleWalk or NonBacktrackingWalk.
Trajectory run_baseline_walk(const Multigraph& g, WalkKind kind, Rng& rng, const WalkOptions& options = {});

// Biased walk on a configuration multigraph whose pairing is exposed only when
// the walk first needs it. Same law as sample_pairing -> realize -> biased walk.
Trajectory run_lazy_biased_walk(std::uint32_t n, std::uint32_t d, Rng& rng, const WalkOptions& options = {});

struct PartialCover {
    std::uint64_t vertex_steps = kNotReached;  // C_V(s)
    std::uint64_t edge_steps = kNotReached;    // C_E(t)
};

PartialCover partial_cover(const Trajectory& traj, std::uint32_t s, std::uint32_t t);

// Invariant checks. Each returns a description of the first violation, or
// nothing when the trajectory is consistent.
std::optional<std::string> check_trajectory(const Trajectory& traj);
// A blue edge is taken only from a vertex with no red half-edge.
std::optional<std::string> check_red_preference(const Trajectory& traj);
// Replays the step log: contiguity, pairing, colour conservation, Phi and
// the final traversal counts. Lazy runs pass g = nullptr (owner = point / d).
std::optional<std::string> check_step_log(const Trajectory& traj, const Multigraph* g = nullptr);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_cover_summary_header(std::ostream& out);
void write_cover_summary_row(std::ostream& out, std::uint64_t seed, const Trajectory& traj);

}  // namespace covertime
