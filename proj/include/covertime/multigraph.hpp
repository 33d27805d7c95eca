#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <ranges>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "covertime/rng.hpp"

namespace covertime {

using Vertex = std::uint32_t;
using HalfEdge = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr HalfEdge kUnpaired = static_cast<HalfEdge>(-1);

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Perfect matching of the d*n configuration points, stored as an involution.
// Point p belongs to vertex p / d.
struct Pairing {
    std::uint32_t n = 0;
    std::uint32_t d = 0;
    std::vector<HalfEdge> mu;

    Vertex owner(HalfEdge p) const { return p / d; }
    std::size_t point_count() const { return mu.size(); }
    bool is_involution() const;
};

Pairing sample_pairing(std::uint32_t n, std::uint32_t d, Rng& rng);

// Half-edge multigraph. Loops are one edge with both half-edges at the same
// vertex; parallel edges are distinct edges. Immutable once built.
class Multigraph {
public:
    Multigraph() = default;

    // Edge e of the list keeps id e. Half-edges of a vertex are contiguous;
    // for from_pairing, half-edge ids equal configuration point ids.
    static Multigraph from_edges(std::uint32_t n, std::span<const std::pair<Vertex, Vertex>> edges);
    static Multigraph from_pairing(const Pairing& pairing);

    std::uint32_t vertex_count() const { return static_cast<std::uint32_t>(offset_.size()) - 1; }
    std::uint32_t edge_count() const { return static_cast<std::uint32_t>(edges_.size()); }
    std::uint32_t half_edge_count() const { return static_cast<std::uint32_t>(owner_.size()); }

    // Common degree if regular, else 0.
    std::uint32_t regular_degree() const { return regular_degree_; }
    std::uint32_t max_degree() const { return max_degree_; }
    std::uint32_t degree(Vertex v) const { return offset_[v + 1] - offset_[v]; }

    HalfEdge first_half_edge(Vertex v) const { return offset_[v]; }
    auto half_edges_of(Vertex v) const { return std::views::iota(offset_[v], offset_[v + 1]); }

    Vertex owner(HalfEdge h) const { return owner_[h]; }
    HalfEdge mate(HalfEdge h) const { return mate_[h]; }
    EdgeId edge_of(HalfEdge h) const { return edge_[h]; }
    Vertex head(HalfEdge h) const { return owner_[mate_[h]]; }

    std::pair<Vertex, Vertex> endpoints(EdgeId e) const {
        return {owner_[edges_[e].first], owner_[edges_[e].second]};
    }
    std::pair<HalfEdge, HalfEdge> edge_half_edges(EdgeId e) const { return edges_[e]; }
    bool is_loop(EdgeId e) const { return owner_[edges_[e].first] == owner_[edges_[e].second]; }

private:
    void finish();

    std::vector<HalfEdge> offset_{0};
    std::vector<Vertex> owner_;
    std::vector<HalfEdge> mate_;
    std::vector<EdgeId> edge_;
    std::vector<std::pair<HalfEdge, HalfEdge>> edges_;
    std::uint32_t regular_degree_ = 0;
    std::uint32_t max_degree_ = 0;
};

inline Multigraph realize(const Pairing& pairing) { return Multigraph::from_pairing(pairing); }

bool is_connected(const Multigraph& g);

struct GraphDiagnostics {
    bool simple = false;
    bool connected = false;
    std::uint64_t loop_count = 0;
    std::uint64_t parallel_pairs = 0;
    std::uint64_t short_cycle_count = 0;
    std::uint32_t omega = 0;
};

inline constexpr std::uint32_t kMaxCycleCutoff = 12;

// Cycles are edge sets of simple closed walks: a loop is a 1-cycle, two
// parallel edges form a 2-cycle.
std::uint64_t count_short_cycles(const Multigraph& g, std::uint32_t omega);
GraphDiagnostics diagnostics(const Multigraph& g, std::uint32_t omega);

using EdgeFilter = std::function<bool(EdgeId)>;

// |N_r(S)| for r = 1..radius, N_r = vertices at distance exactly r from S.
std::vector<std::uint64_t> neighborhood_sizes(const Multigraph& g, std::span<const Vertex> sources,
                                              std::uint32_t radius, const EdgeFilter& keep = {});

// Multi-source BFS distances, capped: vertices farther than `radius` get radius+1.
std::vector<std::uint32_t> bfs_distances(const Multigraph& g, std::span<const Vertex> sources,
                                         std::uint32_t radius, const EdgeFilter& keep = {});

// Plain-text edge list: "n d" header, then "u v" per edge in edge order.
void write_edge_list(std::ostream& out, const Multigraph& g);
Multigraph read_edge_list(std::istream& in);

enum class DisconnectedPolicy { Flag, Resample };

struct SampledGraph {
    Multigraph graph;
    bool connected = false;
    std::uint32_t attempts = 1;
};

SampledGraph sample_regular_multigraph(std::uint32_t n, std::uint32_t d, Rng& rng,
                                       DisconnectedPolicy policy, std::uint32_t max_attempts = 1000);

// Small named graphs used across tests and the oracle.
Multigraph complete_graph(std::uint32_t n);
Multigraph petersen_graph();
Multigraph path_graph(std::uint32_t n);
Multigraph cycle_graph(std::uint32_t n);

}  // namespace covertime
