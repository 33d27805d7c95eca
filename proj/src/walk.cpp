#include "covertime/walk.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace covertime {

std::string_view to_string(WalkKind kind) {
    switch (kind) {
        case WalkKind::BiasedEdgeProcess: return "biased";
        case WalkKind::SimpleWalk: return "simple";
        case WalkKind::NonBacktrackingWalk: return "nonbacktracking";
    }
    return "unknown";
}

std::optional<WalkKind> parse_walk_kind(std::string_view text) {
    if (text == "biased" || text == "edge-process") return WalkKind::BiasedEdgeProcess;
    if (text == "simple" || text == "srw") return WalkKind::SimpleWalk;
    if (text == "nonbacktracking" || text == "nbrw") return WalkKind::NonBacktrackingWalk;
    return std::nullopt;
}

std::optional<std::size_t> Trajectory::row_at(std::uint32_t t) const {
    auto it = std::ranges::lower_bound(sample_t, t);
    if (it == sample_t.end() || *it != t) return std::nullopt;
    return static_cast<std::size_t>(it - sample_t.begin());
}

std::optional<std::uint32_t> Trajectory::tau(std::uint32_t s) const {
    if (s < 1 || s > vertex_time.size()) return std::nullopt;
    return vertex_time[s - 1];
}

namespace {

struct EagerTopology {
    const Multigraph& g;

    std::uint32_t vertex_count() const { return g.vertex_count(); }
    std::uint32_t point_count() const { return g.half_edge_count(); }
    std::uint32_t edge_total() const { return g.edge_count(); }
    std::uint32_t max_degree() const { return g.max_degree(); }
    std::uint32_t degree(Vertex v) const { return g.degree(v); }
    HalfEdge first_point(Vertex v) const { return g.first_half_edge(v); }
    Vertex owner(HalfEdge p) const { return g.owner(p); }
    HalfEdge known_mate(HalfEdge p) const { return g.mate(p); }
    HalfEdge partner(HalfEdge p, Rng&) { return g.mate(p); }
};

// Pairing revealed on demand; the partner of a fresh point is uniform over
// all other unmatched points.
struct LazyTopology {
    std::uint32_t n;
    std::uint32_t d;
    std::vector<HalfEdge> mate;
    std::vector<HalfEdge> pool;
    std::vector<HalfEdge> where;

    LazyTopology(std::uint32_t n_, std::uint32_t d_) : n(n_), d(d_) {
        const std::size_t points = static_cast<std::size_t>(n) * d;
        mate.assign(points, kUnpaired);
        pool.resize(points);
        where.resize(points);
        for (HalfEdge x = 0; x < points; ++x) pool[x] = where[x] = x;
    }

    std::uint32_t vertex_count() const { return n; }
    std::uint32_t point_count() const { return static_cast<std::uint32_t>(mate.size()); }
    std::uint32_t edge_total() const { return point_count() / 2; }
    std::uint32_t max_degree() const { return d; }
    std::uint32_t degree(Vertex) const { return d; }
    HalfEdge first_point(Vertex v) const { return v * d; }
    Vertex owner(HalfEdge p) const { return p / d; }
    HalfEdge known_mate(HalfEdge p) const { return mate[p]; }

    void remove(HalfEdge x) {
        const HalfEdge last = pool.back();
        pool[where[x]] = last;
        where[last] = where[x];
        pool.pop_back();
    }

    HalfEdge partner(HalfEdge p, Rng& rng) {
        if (mate[p] != kUnpaired) return mate[p];
        remove(p);
        const HalfEdge q = pool[uniform_index(rng, pool.size())];
        remove(q);
        mate[p] = q;
        mate[q] = p;
        return q;
    }
};

template <class Topology>
class WalkEngine {
public:
    WalkEngine(Topology& topo, WalkKind kind, Rng& rng, const WalkOptions& options)
        : topo_(topo), kind_(kind), rng_(rng), opt_(options) {}

    Trajectory run() {
        const std::uint32_t n = topo_.vertex_count();
        traj_.kind = kind_;
        traj_.n = n;
        traj_.degree = topo_.max_degree();
        traj_.edge_total = topo_.edge_total();
        uses_.assign(topo_.point_count(), 0);
        red_.resize(n);
        hist_.assign(traj_.degree + 1, 0);
        visited_.assign(n, 0);
        for (Vertex v = 0; v < n; ++v) {
            red_[v] = topo_.degree(v);
            ++hist_[red_[v]];
        }
        if (opt_.decimation == 0) throw GraphError("walk: decimation must be >= 1");

        Vertex at = 0;
        if (opt_.start) {
            if (*opt_.start >= n) throw GraphError("walk: start vertex out of range");
            at = *opt_.start;
        } else {
            at = topo_.owner(static_cast<HalfEdge>(uniform_index(rng_, topo_.point_count())));
        }
        traj_.start = at;
        visit(at);
        record_row();

        HalfEdge arrival = kUnpaired;
        while (!done()) {
            if (frontier_ == 0 && opt_.stop.kind != StopRule::Kind::StepBudget) {
                throw GraphError("walk: cover unreachable, graph is disconnected");
            }
            std::uint32_t red_here = 0;
            const HalfEdge x = choose(at, arrival, red_here);
            const HalfEdge y = topo_.partner(x, rng_);
            const HalfEdge key = std::min(x, y);
            const bool was_red = uses_[key] == 0;
            ++uses_[key];
            ++traj_.steps;
            if (opt_.record_steps) traj_.log.push_back({x, y, was_red, red_here});

            const Vertex w = topo_.owner(y);
            if (was_red) {
                take_red(topo_.owner(x));
                take_red(w);
                ++t_;
                ++phi_;
                traj_.edge_steps.push_back(traj_.steps);
            } else if (uses_[key] == 2) {
                --phi_;
            }
            if (!visited_[w]) visit(w);
            if (was_red && (t_ % opt_.decimation == 0 || t_ == traj_.edge_total)) record_row();
            at = w;
            arrival = y;
        }
        if (opt_.record_series && (traj_.sample_t.empty() || traj_.sample_t.back() != t_)) record_row();
        return std::move(traj_);
    }

    std::vector<std::uint32_t>& uses() { return uses_; }

private:
    bool red(HalfEdge p) const {
        const HalfEdge q = topo_.known_mate(p);
        return q == kUnpaired || uses_[std::min(p, q)] == 0;
    }

    HalfEdge choose(Vertex v, HalfEdge arrival, std::uint32_t& red_here) {
        const HalfEdge first = topo_.first_point(v);
        const std::uint32_t deg = topo_.degree(v);
        red_here = red_[v];
        switch (kind_) {
            case WalkKind::SimpleWalk:
                return first + static_cast<HalfEdge>(uniform_index(rng_, deg));
            case WalkKind::NonBacktrackingWalk: {
                if (arrival == kUnpaired || deg == 1) return first + static_cast<HalfEdge>(uniform_index(rng_, deg));
                auto k = static_cast<HalfEdge>(uniform_index(rng_, deg - 1));
                const HalfEdge p = first + k;
                return p >= arrival ? p + 1 : p;
            }
            case WalkKind::BiasedEdgeProcess: break;
        }
        const bool want_red = opt_.fault_blue_first ? red_here == deg : red_here > 0;
        const std::uint32_t options = want_red ? red_here : deg - red_here;
        if (options == 0) return first + static_cast<HalfEdge>(uniform_index(rng_, deg));
        auto k = uniform_index(rng_, options);
        for (HalfEdge p = first; p < first + deg; ++p) {
            if (red(p) == want_red && k-- == 0) return p;
        }
        throw GraphError("walk: red incidence bookkeeping out of sync");
    }

    void take_red(Vertex v) {
        --hist_[red_[v]];
        --red_[v];
        ++hist_[red_[v]];
        if (visited_[v]) --frontier_;
    }

    void visit(Vertex v) {
        visited_[v] = 1;
        ++visited_count_;
        frontier_ += red_[v];
        traj_.vertex_steps.push_back(traj_.steps);
        traj_.vertex_time.push_back(t_);
    }

    void record_row() {
        if (!opt_.record_series) return;
        traj_.sample_t.push_back(t_);
        traj_.x_counts.insert(traj_.x_counts.end(), hist_.begin(), hist_.end());
        traj_.phi.push_back(phi_);
    }

    bool done() const {
        switch (opt_.stop.kind) {
            case StopRule::Kind::AllEdges: return t_ == traj_.edge_total;
            case StopRule::Kind::AllVertices: return visited_count_ == traj_.n;
            case StopRule::Kind::StepBudget: return traj_.steps >= opt_.stop.value;
            case StopRule::Kind::EdgeCount: return t_ >= std::min<std::uint64_t>(opt_.stop.value, traj_.edge_total);
        }
        return true;
    }

    Topology& topo_;
    WalkKind kind_;
    Rng& rng_;
    const WalkOptions& opt_;
    Trajectory traj_;
    std::vector<std::uint32_t> uses_;
    std::vector<std::uint32_t> red_;
    std::vector<std::uint32_t> hist_;
    std::vector<char> visited_;
    std::uint32_t visited_count_ = 0;
    std::uint64_t frontier_ = 0;  // red half-edges at visited vertices
    std::uint32_t t_ = 0;
    std::uint32_t phi_ = 0;
};

}  // namespace

Trajectory run_walk(const Multigraph& g, WalkKind kind, Rng& rng, const WalkOptions& options) {
    if (g.vertex_count() == 0) throw GraphError("walk: empty graph");
    if (options.stop.kind != StopRule::Kind::StepBudget && !is_connected(g)) {
        throw GraphError("walk: graph is disconnected, cover unreachable");
    }
    if (kind == WalkKind::NonBacktrackingWalk) {
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            if (g.degree(v) < 3) throw GraphError("walk: non-backtracking walk needs degree >= 3");
        }
    }
    EagerTopology topo{g};
    WalkEngine engine(topo, kind, rng, options);
    Trajectory traj = engine.run();
    traj.edge_uses.resize(g.edge_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        auto [a, b] = g.edge_half_edges(e);
        traj.edge_uses[e] = engine.uses()[std::min(a, b)];
    }
    return traj;
}

Trajectory run_baseline_walk(const Multigraph& g, WalkKind kind, Rng& rng, const WalkOptions& options) {
    if (kind == WalkKind::BiasedEdgeProcess) throw GraphError("run_baseline_walk: biased walk is not a baseline");
    return run_walk(g, kind, rng, options);
}

Trajectory run_lazy_biased_walk(std::uint32_t n, std::uint32_t d, Rng& rng, const WalkOptions& options) {
    if (n < 2 || d < 1) throw GraphError("lazy walk: need n >= 2 and d >= 1");
    if ((static_cast<std::uint64_t>(n) * d) % 2 != 0) throw GraphError("lazy walk: d*n must be even");
    if (options.start && *options.start >= n) throw GraphError("lazy walk: start vertex out of range");
    LazyTopology topo(n, d);
    WalkEngine engine(topo, WalkKind::BiasedEdgeProcess, rng, options);
    Trajectory traj = engine.run();
    traj.edge_uses = std::move(engine.uses());
    traj.exposed = std::move(topo.mate);
    return traj;
}

PartialCover partial_cover(const Trajectory& traj, std::uint32_t s, std::uint32_t t) {
    if (s < 1 || s > traj.n) throw GraphError("partial_cover: s out of [1, n]");
    if (t < 1 || t > traj.edge_total) throw GraphError("partial_cover: t out of [1, edge count]");
    PartialCover out;
    if (s <= traj.vertex_steps.size()) out.vertex_steps = traj.vertex_steps[s - 1];
    if (t <= traj.edge_steps.size()) out.edge_steps = traj.edge_steps[t - 1];
    return out;
}

namespace {

std::string describe(const std::string& what, std::uint64_t where) {
    std::ostringstream os;
    os << what << " at " << where;
    return os.str();
}

}  // namespace

std::optional<std::string> check_trajectory(const Trajectory& traj) {
    for (std::size_t i = 1; i < traj.edge_steps.size(); ++i) {
        if (traj.edge_steps[i] <= traj.edge_steps[i - 1]) return describe("C_E not strictly increasing", i + 1);
    }
    if (!traj.edge_steps.empty() && traj.edge_steps[0] != 1) return std::string("C_E(1) != 1");
    if (traj.vertex_steps.empty() || traj.vertex_steps[0] != 0) return std::string("C_V(1) != 0");
    for (std::size_t i = 1; i < traj.vertex_steps.size(); ++i) {
        if (traj.vertex_steps[i] < traj.vertex_steps[i - 1]) return describe("C_V decreasing", i + 1);
        const std::uint32_t tau = traj.vertex_time[i];
        if (tau == 0 || tau > traj.edge_steps.size() || traj.edge_steps[tau - 1] != traj.vertex_steps[i]) {
            return describe("C_V(s) != C_E(tau_s)", i + 1);
        }
    }
    if (!traj.edge_steps.empty() && traj.vertex_steps.back() > traj.edge_steps.back()) {
        return std::string("vertex cover later than last discovery");
    }
    const std::uint64_t points = 2ULL * traj.edge_total;
    for (std::size_t r = 0; r < traj.rows(); ++r) {
        const std::uint64_t t = traj.sample_t[r];
        std::uint64_t count = 0, incidences = 0;
        for (std::uint32_t i = 0; i <= traj.degree; ++i) {
            count += traj.x(r, i);
            incidences += static_cast<std::uint64_t>(i) * traj.x(r, i);
        }
        if (count != traj.n) return describe("sum X_i != n", t);
        if (incidences != points - 2 * t) return describe("sum i*X_i != dn - 2t", t);
        if (traj.phi[r] > t) return describe("Phi(t) > t", t);
    }
    return std::nullopt;
}

std::optional<std::string> check_red_preference(const Trajectory& traj) {
    if (traj.kind != WalkKind::BiasedEdgeProcess) return std::nullopt;
    for (std::size_t k = 0; k < traj.log.size(); ++k) {
        const auto& step = traj.log[k];
        if (!step.red && step.red_at_departure > 0) return describe("blue traversal with red available, step", k + 1);
    }
    return std::nullopt;
}

std::optional<std::string> check_step_log(const Trajectory& traj, const Multigraph* g) {
    if (traj.log.size() != traj.steps) return std::string("step log incomplete");
    auto owner = [&](HalfEdge p) { return g ? g->owner(p) : static_cast<Vertex>(p / traj.degree); };
    const std::size_t points = 2ULL * traj.edge_total;
    std::vector<HalfEdge> mate(points, kUnpaired);
    std::vector<std::uint32_t> uses(points, 0);
    std::uint64_t red_edges = traj.edge_total;
    std::uint64_t green = 0;
    std::uint32_t t = 0;
    std::vector<std::uint64_t> green_at{0};  // Phi right after each discovery
    Vertex at = traj.start;
    for (std::size_t k = 0; k < traj.log.size(); ++k) {
        const auto& step = traj.log[k];
        if (step.from >= points || step.to >= points || step.from == step.to) return describe("bad points in step", k + 1);
        if (owner(step.from) != at) return describe("walk not contiguous, step", k + 1);
        if (g && g->mate(step.from) != step.to) return describe("step does not follow an edge, step", k + 1);
        if (mate[step.from] == kUnpaired) {
            if (mate[step.to] != kUnpaired) return describe("pairing not an involution, step", k + 1);
            mate[step.from] = step.to;
            mate[step.to] = step.from;
        } else if (mate[step.from] != step.to) {
            return describe("pairing not an involution, step", k + 1);
        }
        auto& u = uses[std::min(step.from, step.to)];
        if ((u == 0) != step.red) return describe("recorded colour wrong, step", k + 1);
        ++u;
        if (u == 1) {
            --red_edges;
            ++green;
            ++t;
            if (traj.edge_steps[t - 1] != k + 1) return describe("C_E mismatch at t", t);
            if (red_edges != traj.edge_total - t) return describe("colour conservation fails at t", t);
            green_at.push_back(green);
        } else if (u == 2) {
            --green;
        }
        at = owner(step.to);
    }
    for (std::size_t r = 0; r < traj.rows(); ++r) {
        const std::uint32_t at_t = traj.sample_t[r];
        if (at_t > t || traj.phi[r] != green_at[at_t]) return describe("Phi differs from edges traversed once at t", at_t);
    }
    if (!g) {
        for (std::size_t p = 0; p < points; ++p) {
            if (traj.exposed.size() == points && traj.exposed[p] != mate[p]) return describe("exposed pairing mismatch, point", p);
        }
    }
    for (std::size_t p = 0; p < points; ++p) {
        if (mate[p] == kUnpaired || p > mate[p]) continue;
        const std::uint32_t expect = uses[p];
        const std::uint32_t got = g ? traj.edge_uses[g->edge_of(static_cast<HalfEdge>(p))] : traj.edge_uses[p];
        if (expect != got) return describe("traversal count mismatch, point", p);
    }
    return std::nullopt;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "# covertime-lab schema v1\n";
    out << "t,steps";
    for (std::uint32_t i = 0; i <= traj.degree; ++i) out << ",X" << i;
    out << ",Phi,delta\n";
    for (std::size_t r = 0; r < traj.rows(); ++r) {
        const std::uint32_t t = traj.sample_t[r];
        out << t << ',' << (t == 0 ? 0 : traj.edge_steps[t - 1]);
        for (std::uint32_t i = 0; i <= traj.degree; ++i) out << ',' << traj.x(r, i);
        out << ',' << traj.phi[r] << ',' << traj.delta(t) << '\n';
    }
}

void write_cover_summary_header(std::ostream& out) {
    out << "# covertime-lab schema v1\n";
    out << "seed,n,d,kind,CV_steps,CE_steps\n";
}

void write_cover_summary_row(std::ostream& out, std::uint64_t seed, const Trajectory& traj) {
    out << seed << ',' << traj.n << ',' << traj.degree << ',' << to_string(traj.kind) << ',';
    if (traj.vertices_found() == traj.n) out << traj.vertex_steps.back(); else out << "NA";
    out << ',';
    if (traj.edges_found() == traj.edge_total) out << traj.edge_steps.back(); else out << "NA";
    out << '\n';
}

}  // namespace covertime
