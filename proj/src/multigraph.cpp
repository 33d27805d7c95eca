#include "covertime/multigraph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace covertime {

bool Pairing::is_involution() const {
    if (mu.size() != static_cast<std::size_t>(n) * d) return false;
    for (HalfEdge x = 0; x < mu.size(); ++x) {
        if (mu[x] >= mu.size() || mu[x] == x || mu[mu[x]] != x) return false;
    }
    return true;
}

Pairing sample_pairing(std::uint32_t n, std::uint32_t d, Rng& rng) {
    if (n < 2) throw GraphError("sample_pairing: need n >= 2");
    if (d < 1) throw GraphError("sample_pairing: need d >= 1");
    const std::uint64_t points = static_cast<std::uint64_t>(n) * d;
    if (points % 2 != 0) throw GraphError("sample_pairing: d*n must be even");
    if (points > 0xFFFFFFF0ULL) throw GraphError("sample_pairing: too many points");

    Pairing p{n, d, std::vector<HalfEdge>(points, kUnpaired)};
    // Unmatched points with O(1) removal; the first unmatched point is paired
    // with a uniform unmatched partner.
    std::vector<HalfEdge> pool(points);
    std::vector<HalfEdge> where(points);
    for (HalfEdge x = 0; x < points; ++x) pool[x] = where[x] = x;
    auto remove = [&](HalfEdge x) {
        const HalfEdge last = pool.back();
        pool[where[x]] = last;
        where[last] = where[x];
        pool.pop_back();
    };
    for (HalfEdge x = 0; x < points; ++x) {
        if (p.mu[x] != kUnpaired) continue;
        remove(x);
        const HalfEdge y = pool[uniform_index(rng, pool.size())];
        remove(y);
        p.mu[x] = y;
        p.mu[y] = x;
    }
    return p;
}

Multigraph Multigraph::from_edges(std::uint32_t n, std::span<const std::pair<Vertex, Vertex>> edges) {
    Multigraph g;
    g.offset_.assign(n + 1, 0);
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) throw GraphError("from_edges: vertex out of range");
        ++g.offset_[u + 1];
        ++g.offset_[v + 1];
    }
    for (std::uint32_t v = 0; v < n; ++v) g.offset_[v + 1] += g.offset_[v];
    const std::size_t halves = g.offset_[n];
    g.owner_.resize(halves);
    g.mate_.resize(halves);
    g.edge_.resize(halves);
    g.edges_.reserve(edges.size());
    std::vector<HalfEdge> cursor(g.offset_.begin(), g.offset_.end() - 1);
    for (EdgeId e = 0; e < edges.size(); ++e) {
        auto [u, v] = edges[e];
        const HalfEdge hu = cursor[u]++;
        const HalfEdge hv = cursor[v]++;
        g.owner_[hu] = u;
        g.owner_[hv] = v;
        g.mate_[hu] = hv;
        g.mate_[hv] = hu;
        g.edge_[hu] = g.edge_[hv] = e;
        g.edges_.emplace_back(hu, hv);
    }
    g.finish();
    return g;
}

Multigraph Multigraph::from_pairing(const Pairing& pairing) {
    if (!pairing.is_involution()) throw GraphError("from_pairing: not a fixed-point-free involution");
    Multigraph g;
    const std::uint32_t n = pairing.n;
    const std::uint32_t d = pairing.d;
    g.offset_.resize(n + 1);
    for (std::uint32_t v = 0; v <= n; ++v) g.offset_[v] = v * d;
    const std::size_t halves = pairing.point_count();
    g.owner_.resize(halves);
    g.mate_ = pairing.mu;
    g.edge_.resize(halves);
    g.edges_.reserve(halves / 2);
    for (HalfEdge x = 0; x < halves; ++x) {
        g.owner_[x] = x / d;
        if (x < pairing.mu[x]) {
            const auto e = static_cast<EdgeId>(g.edges_.size());
            g.edge_[x] = g.edge_[pairing.mu[x]] = e;
            g.edges_.emplace_back(x, pairing.mu[x]);
        }
    }
    g.finish();
    return g;
}

void Multigraph::finish() {
    const std::uint32_t n = vertex_count();
    max_degree_ = 0;
    regular_degree_ = n > 0 ? degree(0) : 0;
    for (Vertex v = 0; v < n; ++v) {
        max_degree_ = std::max(max_degree_, degree(v));
        if (degree(v) != regular_degree_) regular_degree_ = 0;
    }
}

std::vector<std::uint32_t> bfs_distances(const Multigraph& g, std::span<const Vertex> sources,
                                         std::uint32_t radius, const EdgeFilter& keep) {
    const std::uint32_t far = radius + 1;
    std::vector<std::uint32_t> dist(g.vertex_count(), far);
    std::vector<Vertex> frontier;
    for (Vertex s : sources) {
        if (s >= g.vertex_count()) throw GraphError("bfs: source out of range");
        if (dist[s] != 0) {
            dist[s] = 0;
            frontier.push_back(s);
        }
    }
    std::vector<Vertex> next;
    for (std::uint32_t r = 1; r <= radius && !frontier.empty(); ++r) {
        next.clear();
        for (Vertex u : frontier) {
            for (HalfEdge h : g.half_edges_of(u)) {
                if (keep && !keep(g.edge_of(h))) continue;
                const Vertex w = g.head(h);
                if (dist[w] == far) {
                    dist[w] = r;
                    next.push_back(w);
                }
            }
        }
        frontier.swap(next);
    }
    return dist;
}

std::vector<std::uint64_t> neighborhood_sizes(const Multigraph& g, std::span<const Vertex> sources,
                                              std::uint32_t radius, const EdgeFilter& keep) {
    if (sources.empty()) throw GraphError("neighborhood_sizes: empty source set");
    if (radius < 1) throw GraphError("neighborhood_sizes: radius must be >= 1");
    const auto dist = bfs_distances(g, sources, radius, keep);
    std::vector<std::uint64_t> sizes(radius, 0);
    for (auto r : dist) {
        if (r >= 1 && r <= radius) ++sizes[r - 1];
    }
    return sizes;
}

bool is_connected(const Multigraph& g) {
    if (g.vertex_count() == 0) return true;
    const Vertex root = 0;
    const auto dist = bfs_distances(g, std::span(&root, 1), g.vertex_count());
    return std::ranges::none_of(dist, [&](auto r) { return r > g.vertex_count(); });
}

namespace {

struct CycleCounter {
    const Multigraph& g;
    std::uint32_t omega;
    Vertex root = 0;
    EdgeId first_edge = 0;
    std::vector<char> on_path;
    std::uint64_t count = 0;

    void extend(Vertex u, std::uint32_t length, EdgeId via) {
        for (HalfEdge h : g.half_edges_of(u)) {
            const EdgeId e = g.edge_of(h);
            if (e == via || g.is_loop(e)) continue;
            const Vertex w = g.head(h);
            if (w == root) {
                // Each cycle is met in both directions; keep one.
                if (first_edge < e) ++count;
            } else if (w > root && !on_path[w] && length + 1 < omega) {
                on_path[w] = 1;
                extend(w, length + 1, e);
                on_path[w] = 0;
            }
        }
    }
};

}  // namespace

std::uint64_t count_short_cycles(const Multigraph& g, std::uint32_t omega) {
    if (omega < 1) throw GraphError("count_short_cycles: omega must be >= 1");
    if (omega > kMaxCycleCutoff) throw GraphError("count_short_cycles: omega capped at 12");
    std::uint64_t loops = 0;
    for (EdgeId e = 0; e < g.edge_count(); ++e) loops += g.is_loop(e);
    if (omega == 1) return loops;

    CycleCounter counter{g, omega, 0, 0, std::vector<char>(g.vertex_count(), 0), 0};
    for (Vertex r = 0; r < g.vertex_count(); ++r) {
        counter.root = r;
        counter.on_path[r] = 1;
        for (HalfEdge h : g.half_edges_of(r)) {
            const EdgeId e = g.edge_of(h);
            const Vertex w = g.head(h);
            if (g.is_loop(e) || w < r) continue;
            counter.first_edge = e;
            counter.on_path[w] = 1;
            counter.extend(w, 1, e);
            counter.on_path[w] = 0;
        }
        counter.on_path[r] = 0;
    }
    return loops + counter.count;
}

GraphDiagnostics diagnostics(const Multigraph& g, std::uint32_t omega) {
    GraphDiagnostics diag;
    diag.omega = omega;
    diag.connected = is_connected(g);
    std::vector<std::pair<Vertex, Vertex>> ends;
    ends.reserve(g.edge_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.endpoints(e);
        if (u == v) ++diag.loop_count;
        ends.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::ranges::sort(ends);
    for (std::size_t i = 0; i < ends.size();) {
        std::size_t j = i;
        while (j < ends.size() && ends[j] == ends[i]) ++j;
        const std::uint64_t mult = j - i;
        if (ends[i].first != ends[i].second) diag.parallel_pairs += mult * (mult - 1) / 2;
        i = j;
    }
    diag.simple = diag.loop_count == 0 && diag.parallel_pairs == 0;
    diag.short_cycle_count = count_short_cycles(g, omega);
    return diag;
}

void write_edge_list(std::ostream& out, const Multigraph& g) {
    out << g.vertex_count() << ' ' << g.regular_degree() << '\n';
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.endpoints(e);
        out << u << ' ' << v << '\n';
    }
}

Multigraph read_edge_list(std::istream& in) {
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            if (!line.empty() && line[0] != '#') return true;
        }
        return false;
    };
    if (!next_line()) throw GraphError("edge list: missing header");
    std::istringstream header(line);
    std::uint64_t n = 0, d = 0;
    if (!(header >> n >> d)) throw GraphError("edge list: bad header '" + line + "'");
    std::vector<std::pair<Vertex, Vertex>> edges;
    while (next_line()) {
        std::istringstream row(line);
        std::uint64_t u = 0, v = 0;
        if (!(row >> u >> v) || u >= n || v >= n) throw GraphError("edge list: bad edge '" + line + "'");
        edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    }
    auto g = Multigraph::from_edges(static_cast<std::uint32_t>(n), edges);
    if (d != 0 && g.regular_degree() != d) throw GraphError("edge list: graph is not " + std::to_string(d) + "-regular");
    return g;
}

SampledGraph sample_regular_multigraph(std::uint32_t n, std::uint32_t d, Rng& rng, DisconnectedPolicy policy,
                                       std::uint32_t max_attempts) {
    SampledGraph out;
    for (out.attempts = 1;; ++out.attempts) {
        out.graph = realize(sample_pairing(n, d, rng));
        out.connected = is_connected(out.graph);
        if (out.connected || policy == DisconnectedPolicy::Flag) return out;
        if (out.attempts >= max_attempts) throw GraphError("sample_regular_multigraph: no connected sample");
    }
}

Multigraph complete_graph(std::uint32_t n) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return Multigraph::from_edges(n, edges);
}

Multigraph petersen_graph() {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex i = 0; i < 5; ++i) {
        edges.emplace_back(i, (i + 1) % 5);          // outer cycle
        edges.emplace_back(i, i + 5);                // spokes
        edges.emplace_back(i + 5, (i + 2) % 5 + 5);  // inner pentagram
    }
    return Multigraph::from_edges(10, edges);
}

Multigraph path_graph(std::uint32_t n) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
    return Multigraph::from_edges(n, edges);
}

Multigraph cycle_graph(std::uint32_t n) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex v = 0; v < n; ++v) edges.emplace_back(v, (v + 1) % n);
    return Multigraph::from_edges(n, edges);
}

}  // namespace covertime
