#include "covertime/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <string>

namespace covertime {

std::vector<Pairing> enumerate_pairings(std::uint32_t n, std::uint32_t d) {
    const std::uint64_t points = static_cast<std::uint64_t>(n) * d;
    if (points > kMaxEnumeratedPoints) throw GraphError("enumerate_pairings: d*n exceeds the enumeration guard");
    if (points % 2 != 0 || n == 0 || d == 0) throw GraphError("enumerate_pairings: d*n must be even and positive");
    std::vector<Pairing> out;
    Pairing current{n, d, std::vector<HalfEdge>(points, kUnpaired)};
    std::function<void()> recurse = [&] {
        auto it = std::ranges::find(current.mu, kUnpaired);
        if (it == current.mu.end()) {
            out.push_back(current);
            return;
        }
        const auto p = static_cast<HalfEdge>(it - current.mu.begin());
        for (HalfEdge q = p + 1; q < points; ++q) {
            if (current.mu[q] != kUnpaired) continue;
            current.mu[p] = q;
            current.mu[q] = p;
            recurse();
            current.mu[p] = current.mu[q] = kUnpaired;
        }
    };
    recurse();
    return out;
}

namespace {

template <typename Scalar>
Scalar magnitude(const Scalar& x) {
    return x < Scalar(0) ? Scalar(-x) : x;
}

// Dense Gaussian elimination with pivoting on the largest magnitude.
template <typename Scalar>
std::vector<Scalar> solve_dense(std::vector<std::vector<Scalar>> a, std::vector<Scalar> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (magnitude(a[r][c]) > magnitude(a[pivot][c])) pivot = r;
        }
        if (a[pivot][c] == Scalar(0)) throw GraphError("oracle: singular stage system, graph disconnected");
        std::swap(a[pivot], a[c]);
        std::swap(b[pivot], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            if (a[r][c] == Scalar(0)) continue;
            const Scalar f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<Scalar> x(n);
    for (std::size_t r = n; r-- > 0;) {
        Scalar s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

struct EdgeProcessSpace {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::vector<std::uint32_t> covered;  // visited vertex count per mask

    EdgeProcessSpace(const Multigraph& g, Vertex start) : n(g.vertex_count()), m(g.edge_count()) {
        if (m > kMaxOracleEdges) throw GraphError("oracle: too many edges for the state space guard");
        if (start >= n) throw GraphError("oracle: start vertex out of range");
        if (!is_connected(g)) throw GraphError("oracle: graph is disconnected");
        if (n > 64) throw GraphError("oracle: too many vertices");
        std::vector<std::uint64_t> vmask(std::size_t{1} << m, 0);
        covered.assign(vmask.size(), 1);
        vmask[0] = std::uint64_t{1} << start;
        for (std::size_t mask = 1; mask < vmask.size(); ++mask) {
            const auto e = static_cast<EdgeId>(std::countr_zero(mask));
            auto [u, v] = g.endpoints(e);
            vmask[mask] = vmask[mask & (mask - 1)] | (std::uint64_t{1} << u) | (std::uint64_t{1} << v);
            covered[mask] = static_cast<std::uint32_t>(std::popcount(vmask[mask]));
        }
    }
};

template <typename Scalar>
Scalar expected_time(const Multigraph& g, Vertex start, const std::function<bool(std::size_t)>& done) {
    const std::uint32_t n = g.vertex_count();
    const std::uint32_t m = g.edge_count();
    const std::size_t masks = std::size_t{1} << m;
    std::vector<Scalar> value(masks * n, Scalar(0));
    auto at = [&](std::size_t mask, Vertex v) -> Scalar& { return value[mask * n + v]; };
    std::vector<std::uint32_t> red(n);
    std::vector<std::int32_t> slot(n);
    for (std::size_t mask = masks; mask-- > 0;) {
        if (done(mask)) continue;
        std::vector<Vertex> stuck;
        for (Vertex v = 0; v < n; ++v) {
            red[v] = 0;
            for (HalfEdge h : g.half_edges_of(v)) red[v] += ((mask >> g.edge_of(h)) & 1) == 0;
            slot[v] = -1;
            if (red[v] == 0) {
                slot[v] = static_cast<std::int32_t>(stuck.size());
                stuck.push_back(v);
            }
        }
        for (Vertex v = 0; v < n; ++v) {
            if (red[v] == 0) continue;
            Scalar sum(0);
            for (HalfEdge h : g.half_edges_of(v)) {
                const EdgeId e = g.edge_of(h);
                if ((mask >> e) & 1) continue;
                sum += at(mask | (std::size_t{1} << e), g.head(h));
            }
            at(mask, v) = Scalar(1) + sum / Scalar(red[v]);
        }
        if (stuck.empty()) continue;
        const std::size_t k = stuck.size();
        std::vector<std::vector<Scalar>> a(k, std::vector<Scalar>(k, Scalar(0)));
        std::vector<Scalar> b(k, Scalar(1));
        for (std::size_t i = 0; i < k; ++i) {
            const Vertex v = stuck[i];
            const Scalar w = Scalar(1) / Scalar(g.degree(v));
            a[i][i] += Scalar(1);
            for (HalfEdge h : g.half_edges_of(v)) {
                const Vertex u = g.head(h);
                if (slot[u] >= 0) a[i][static_cast<std::size_t>(slot[u])] -= w;
                else b[i] += w * at(mask, u);
            }
        }
        const auto x = solve_dense(std::move(a), std::move(b));
        for (std::size_t i = 0; i < k; ++i) at(mask, stuck[i]) = x[i];
    }
    return at(0, start);
}

template <typename Scalar>
CoverExpectations<Scalar> exact_impl(const Multigraph& g, Vertex start) {
    const EdgeProcessSpace space(g, start);
    CoverExpectations<Scalar> out;
    for (std::uint32_t t = 1; t <= space.m; ++t) {
        out.edge.push_back(expected_time<Scalar>(g, start, [&](std::size_t mask) {
            return static_cast<std::uint32_t>(std::popcount(mask)) >= t;
        }));
    }
    for (std::uint32_t s = 1; s <= space.n; ++s) {
        out.vertex.push_back(expected_time<Scalar>(g, start, [&](std::size_t mask) { return space.covered[mask] >= s; }));
    }
    return out;
}

}  // namespace

CoverExpectations<Rational> exact_edge_process_rational(const Multigraph& g, Vertex start) {
    return exact_impl<Rational>(g, start);
}

CoverExpectations<long double> exact_edge_process_float(const Multigraph& g, Vertex start) {
    return exact_impl<long double>(g, start);
}

ExactCover exact_edge_process(const Multigraph& g, Vertex start) {
    ExactCover out;
    if (g.edge_count() <= kMaxRationalEdges) {
        const auto exact = exact_edge_process_rational(g, start);
        for (const auto& x : exact.edge) out.edge.push_back(x.convert_to<long double>());
        for (const auto& x : exact.vertex) out.vertex.push_back(x.convert_to<long double>());
        out.rational = true;
        return out;
    }
    const auto approx = exact_edge_process_float(g, start);
    out.edge = approx.edge;
    out.vertex = approx.vertex;
    return out;
}

ExactCover forward_edge_process(const Multigraph& g, Vertex start, long double mass_tol) {
    const EdgeProcessSpace space(g, start);
    const std::uint32_t n = space.n, m = space.m;
    const std::size_t masks = std::size_t{1} << m;
    const std::size_t full = masks - 1;
    std::vector<long double> dist(masks * n, 0.0L), next(masks * n, 0.0L);
    dist[start] = 1.0L;
    ExactCover out;
    out.edge.assign(m, 0.0L);
    out.vertex.assign(n, 0.0L);
    long double remaining = 1.0L;
    for (std::uint64_t step = 0; remaining > mass_tol; ++step) {
        if (step > 100'000'000) throw GraphError("forward_edge_process: no convergence");
        // P(C > step) for every target
        std::vector<long double> by_edges(m + 1, 0.0L), by_vertices(n + 1, 0.0L);
        for (std::size_t mask = 0; mask < full; ++mask) {
            long double mass = 0.0L;
            for (Vertex v = 0; v < n; ++v) mass += dist[mask * n + v];
            by_edges[std::popcount(mask)] += mass;
            by_vertices[space.covered[mask]] += mass;
        }
        long double below = 0.0L;
        for (std::uint32_t t = 1; t <= m; ++t) {
            below += by_edges[t - 1];
            out.edge[t - 1] += below;
        }
        below = 0.0L;
        for (std::uint32_t s = 1; s <= n; ++s) {
            below += by_vertices[s - 1];
            out.vertex[s - 1] += below;
        }
        remaining = below + by_vertices[n];

        std::ranges::fill(next, 0.0L);
        for (std::size_t mask = 0; mask < full; ++mask) {
            for (Vertex v = 0; v < n; ++v) {
                const long double p = dist[mask * n + v];
                if (p == 0.0L) continue;
                std::uint32_t red = 0;
                for (HalfEdge h : g.half_edges_of(v)) red += ((mask >> g.edge_of(h)) & 1) == 0;
                for (HalfEdge h : g.half_edges_of(v)) {
                    const std::size_t e = g.edge_of(h);
                    const bool is_red = ((mask >> e) & 1) == 0;
                    if (red > 0 && !is_red) continue;
                    const long double w = p / (red > 0 ? red : g.degree(v));
                    next[(mask | (std::size_t{1} << e)) * n + g.head(h)] += w;
                }
            }
        }
        dist.swap(next);
    }
    return out;
}

Rational exact_hitting_time_rational(const Multigraph& g, std::span<const Vertex> set) {
    const std::uint32_t n = g.vertex_count();
    std::vector<char> in(n, 0);
    for (Vertex v : set) {
        if (v >= n) throw GraphError("exact_hitting_time_rational: vertex out of range");
        in[v] = 1;
    }
    std::vector<std::uint32_t> index(n, 0);
    std::uint32_t unknowns = 0;
    for (Vertex v = 0; v < n; ++v) {
        if (!in[v]) index[v] = unknowns++;
    }
    if (unknowns == 0) return 0;
    if (unknowns == n) throw GraphError("exact_hitting_time_rational: empty target set");
    if (unknowns > kMaxRationalHittingUnknowns) throw GraphError("exact_hitting_time_rational: too many unknowns");
    // h(v) - sum_u P(v,u) h(u) = 1 outside S
    std::vector<std::vector<Rational>> a(unknowns, std::vector<Rational>(unknowns, 0));
    std::vector<Rational> b(unknowns, 1);
    for (Vertex v = 0; v < n; ++v) {
        if (in[v]) continue;
        const Rational w(1, g.degree(v));
        a[index[v]][index[v]] += 1;
        for (HalfEdge h : g.half_edges_of(v)) {
            const Vertex u = g.head(h);
            if (!in[u]) a[index[v]][index[u]] -= w;
        }
    }
    const auto h = solve_dense(std::move(a), std::move(b));
    Rational total = 0;
    for (Vertex v = 0; v < n; ++v) {
        if (!in[v]) total += Rational(g.degree(v), g.half_edge_count()) * h[index[v]];
    }
    return total;
}

std::map<std::vector<std::uint32_t>, Rational> urn_composition_law(std::uint32_t phi, std::uint32_t m) {
    if (phi < 1) throw GraphError("urn_composition_law: phi must be >= 1");
    if (m > 12) throw GraphError("urn_composition_law: too many draws to enumerate");
    std::map<std::vector<std::uint32_t>, Rational> law;
    std::vector<std::uint32_t> sizes(phi, 1);
    std::function<void(std::uint32_t, const Rational&)> draw = [&](std::uint32_t left, const Rational& prob) {
        if (left == 0) {
            law[sizes] += prob;
            return;
        }
        const int total = static_cast<int>(phi + m - left);
        for (std::uint32_t c = 0; c < phi; ++c) {
            const Rational next = prob * Rational(static_cast<int>(sizes[c]), total);
            ++sizes[c];
            draw(left - 1, next);
            --sizes[c];
        }
    };
    draw(m, Rational(1));
    return law;
}

double RecurrenceTable::closed_x3(std::uint32_t t) const {
    return n * std::pow(delta(t), 1.5);
}

double RecurrenceTable::closed_x1(std::uint32_t t) const {
    return (3.0 * n - 2.0 * t) * (1.0 - std::sqrt(delta(t)));
}

RecurrenceTable solve_recurrences(std::uint32_t n, Denominator denominator) {
    if (n < 2 || n % 2 != 0) throw GraphError("solve_recurrences: n must be even and at least 2");
    RecurrenceTable table;
    table.n = n;
    table.denominator = denominator;
    const std::uint32_t edges = 3 * n / 2;
    table.x0.resize(edges + 1);
    table.x1.resize(edges + 1);
    table.x2.resize(edges + 1);
    table.x3.resize(edges + 1);
    double x1 = 0.0, x2 = 0.0, x3 = n;
    for (std::uint32_t t = 0;; ++t) {
        table.x1[t] = x1;
        table.x2[t] = x2;
        table.x3[t] = x3;
        table.x0[t] = n - (x1 + x2 + x3);
        if (t == edges) break;
        const double d = 3.0 * n - 2.0 * t + (denominator == Denominator::MinusOne ? -1.0 : 1.0);
        const double from3 = std::min(x3, 3.0 * x3 / d);
        const double from2 = std::min(x2, 2.0 * x2 / d);
        const double from1 = std::min(x1, 2.0 * x1 / d);
        x3 -= from3;
        if (t == 0) {
            // the start vertex keeps two red edges after the first step
            x2 += from3 - from2;
            x1 += from2 - from1;
        } else {
            x2 -= from2;
            x1 += from3 + from2 - from1;
        }
    }
    return table;
}

void write_recurrence_csv(std::ostream& out, const RecurrenceTable& table, std::uint32_t stride) {
    out << "# covertime-lab schema v1\n";
    out << "t,delta,EX0,EX1,EX2,EX3,closed_X1,closed_X3\n";
    const auto last = static_cast<std::uint32_t>(table.x3.size() - 1);
    for (std::uint32_t t = 0; t <= last; t += std::max<std::uint32_t>(stride, 1)) {
        out << t << ',' << table.delta(t) << ',' << table.x0[t] << ',' << table.x1[t] << ',' << table.x2[t] << ','
            << table.x3[t] << ',' << table.closed_x1(t) << ',' << table.closed_x3(t) << '\n';
    }
}

namespace {

struct WalkEnumerator {
    std::uint32_t n, d, steps;
    std::vector<HalfEdge> mate;
    std::vector<std::uint32_t> uses;
    std::uint32_t unmatched;
    std::vector<std::pair<HalfEdge, HalfEdge>> path;
    Vertex start = 0;
    std::map<std::string, Rational> walk_probability;
    std::map<std::string, std::string> walk_class;
    std::map<std::string, std::pair<std::uint32_t, std::uint32_t>> class_shape;  // phi, |Y|

    WalkEnumerator(std::uint32_t n_, std::uint32_t d_, std::uint32_t steps_)
        : n(n_), d(d_), steps(steps_), mate(n_ * d_, kUnpaired), uses(n_ * d_, 0), unmatched(n_ * d_) {}

    Vertex owner(HalfEdge p) const { return p / d; }
    bool red(HalfEdge p) const { return mate[p] == kUnpaired || uses[std::min(p, mate[p])] == 0; }

    void record(const Rational& prob) {
        const std::size_t k = path.size();
        std::vector<Vertex> vertices{start};
        std::vector<HalfEdge> key(k);
        std::map<HalfEdge, std::uint32_t> count;
        for (std::size_t i = 0; i < k; ++i) {
            key[i] = std::min(path[i].first, path[i].second);
            ++count[key[i]];
            vertices.push_back(owner(path[i].second));
        }
        std::map<HalfEdge, std::uint32_t> rank;
        for (std::size_t i = 0; i < k; ++i) {
            if (count[key[i]] > 1 && !rank.contains(key[i])) {
                const auto next = static_cast<std::uint32_t>(rank.size());
                rank[key[i]] = next;
            }
        }
        auto green = [&](std::size_t i) { return count[key[i]] == 1; };
        std::vector<std::uint32_t> seen(n, 0);
        for (Vertex v : vertices) ++seen[v];
        std::vector<char> in_y(n, 0);
        std::string y_key;
        std::uint32_t y_size = 0;
        for (std::size_t i = 1; i < k; ++i) {
            const Vertex v = vertices[i];
            if (seen[v] == 1 && v != start && v != vertices[k] && green(i - 1) && green(i)) in_y[v] = 1;
        }
        for (Vertex v = 0; v < n; ++v) {
            if (in_y[v]) {
                y_key += std::to_string(v) + ",";
                ++y_size;
            }
        }

        std::string walk_key = std::to_string(start);
        std::string class_key = std::to_string(start);
        std::uint32_t phi = 0;
        Vertex bridge_from = start;
        bool in_bridge = false;
        for (std::size_t i = 0; i < k; ++i) {
            const Vertex a = vertices[i], b = vertices[i + 1];
            if (green(i)) {
                walk_key += ">" + std::to_string(b) + "g";
                if (!in_bridge) bridge_from = a;
                in_bridge = true;
                if (!in_y[b]) {
                    class_key += " B" + std::to_string(bridge_from) + ">" + std::to_string(b);
                    ++phi;
                    in_bridge = false;
                }
            } else {
                const std::string label = std::to_string(rank[key[i]]);
                walk_key += ">" + std::to_string(b) + "e" + label;
                class_key += " S" + std::to_string(a) + ">" + std::to_string(b) + "e" + label;
            }
        }
        class_key += " | Y " + y_key;
        walk_probability[walk_key] += prob;
        walk_class[walk_key] = class_key;
        class_shape[class_key] = {phi, y_size};
    }

    void extend(Vertex at, const Rational& prob) {
        if (path.size() == steps) {
            record(prob);
            return;
        }
        std::vector<HalfEdge> choices;
        for (HalfEdge p = at * d; p < (at + 1) * d; ++p) {
            if (red(p)) choices.push_back(p);
        }
        if (choices.empty()) {
            for (HalfEdge p = at * d; p < (at + 1) * d; ++p) choices.push_back(p);
        }
        const Rational pick = prob / static_cast<int>(choices.size());
        for (HalfEdge p : choices) {
            if (mate[p] != kUnpaired) {
                step(p, mate[p], pick);
                continue;
            }
            const Rational partner = pick / static_cast<int>(unmatched - 1);
            for (HalfEdge q = 0; q < mate.size(); ++q) {
                if (q == p || mate[q] != kUnpaired) continue;
                mate[p] = q;
                mate[q] = p;
                unmatched -= 2;
                step(p, q, partner);
                unmatched += 2;
                mate[p] = mate[q] = kUnpaired;
            }
        }
    }

    void step(HalfEdge p, HalfEdge q, const Rational& prob) {
        const HalfEdge key = std::min(p, q);
        ++uses[key];
        path.emplace_back(p, q);
        extend(owner(q), prob);
        path.pop_back();
        --uses[key];
    }
};

}  // namespace

ClassCheck check_walk_classes(std::uint32_t n, std::uint32_t d, std::uint32_t steps) {
    if (static_cast<std::uint64_t>(n) * d > kMaxEnumeratedPoints || (n * d) % 2 != 0 || n < 2 || d < 2) {
        throw GraphError("check_walk_classes: instance outside the enumeration guard");
    }
    WalkEnumerator en(n, d, steps);
    for (Vertex v = 0; v < n; ++v) {
        en.start = v;
        en.extend(v, Rational(1, n));
    }
    ClassCheck out;
    std::map<std::string, std::vector<Rational>> members;
    for (const auto& [walk, prob] : en.walk_probability) {
        out.total_probability += prob;
        if (prob == 0) continue;
        ++out.walks;
        members[en.walk_class[walk]].push_back(prob);
    }
    out.classes = members.size();
    for (const auto& [key, probs] : members) {
        const auto [phi, y] = en.class_shape[key];
        boost::multiprecision::cpp_int expected = 1;
        for (std::uint32_t i = 0; i < y; ++i) expected *= phi + i;
        if (expected != probs.size()) ++out.size_mismatches;
        if (std::ranges::any_of(probs, [&](const Rational& p) { return p != probs.front(); })) ++out.unequal_classes;
        if (y > 0 && phi > 1) ++out.nontrivial_classes;
    }
    return out;
}

}  // namespace covertime
