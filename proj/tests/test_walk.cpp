#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "covertime/oracle.hpp"
#include "covertime/stats.hpp"
#include "covertime/walk.hpp"

using namespace covertime;

namespace {

Multigraph triple_edge() {
    const std::vector<std::pair<Vertex, Vertex>> edges{{0, 1}, {0, 1}, {0, 1}};
    return Multigraph::from_edges(2, edges);
}

// Pearson homogeneity test of two count vectors.
double homogeneity_p(const std::map<std::uint64_t, std::uint64_t>& a, const std::map<std::uint64_t, std::uint64_t>& b) {
    std::map<std::uint64_t, std::pair<double, double>> table;
    double na = 0, nb = 0;
    for (auto [k, c] : a) table[k].first += c, na += c;
    for (auto [k, c] : b) table[k].second += c, nb += c;
    double stat = 0;
    int cells = 0;
    for (auto [k, cnt] : table) {
        const double total = cnt.first + cnt.second;
        const double ea = total * na / (na + nb), eb = total * nb / (na + nb);
        stat += (cnt.first - ea) * (cnt.first - ea) / ea + (cnt.second - eb) * (cnt.second - eb) / eb;
        ++cells;
    }
    return cells < 2 ? 1.0 : chi_square_survival(stat, cells - 1);
}

}  // namespace

TEST_CASE("triple edge is covered deterministically") {
    const auto g = triple_edge();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        WalkOptions opt;
        opt.start = 0;
        opt.record_steps = true;
        const auto tr = run_biased_walk(g, rng, opt);
        CHECK(tr.edge_steps == std::vector<std::uint64_t>{1, 2, 3});
        CHECK(tr.vertex_steps == std::vector<std::uint64_t>{0, 1});
        CHECK_FALSE(check_trajectory(tr));
        CHECK_FALSE(check_red_preference(tr));
        CHECK_FALSE(check_step_log(tr, &g));
    }
}

TEST_CASE("K4 edge cover mean matches the exact value") {
    const auto g = complete_graph(4);
    const auto exact = exact_edge_process(g, 0);
    REQUIRE(exact.rational);
    Summary s;
    Rng rng(404);
    WalkOptions opt;
    opt.start = 0;
    opt.record_series = false;
    for (int i = 0; i < 100000; ++i) s.add(static_cast<double>(run_biased_walk(g, rng, opt).edge_steps.back()));
    CHECK(std::abs(s.mean() / static_cast<double>(exact.edge.back()) - 1.0) < 0.01);
}

TEST_CASE("lazy and eager walks have the same cover law for n=2, d=3") {
    std::map<std::uint64_t, std::uint64_t> lazy, eager;
    Rng rng(8);
    WalkOptions opt;
    opt.record_series = false;
    for (int i = 0; i < 100000; ++i) {
        ++lazy[run_lazy_biased_walk(2, 3, rng, opt).edge_steps.back()];
        const auto g = realize(sample_pairing(2, 3, rng));
        ++eager[run_biased_walk(g, rng, opt).edge_steps.back()];
    }
    CHECK(lazy.size() > 1);
    CHECK(homogeneity_p(lazy, eager) > 0.01);
}

TEST_CASE("lazy walk exposes an involution") {
    Rng rng(21);
    for (auto [n, d] : {std::pair{2u, 3u}, {10u, 3u}, {100u, 3u}, {50u, 4u}, {7u, 2u}}) {
        WalkOptions opt;
        opt.record_steps = true;
        const auto tr = run_lazy_biased_walk(n, d, rng, opt);
        REQUIRE(tr.exposed.size() == std::size_t(n) * d);
        for (HalfEdge x = 0; x < tr.exposed.size(); ++x) {
            const HalfEdge y = tr.exposed[x];
            REQUIRE(y != kUnpaired);
            CHECK(y != x);
            CHECK(tr.exposed[y] == x);
        }
        CHECK_FALSE(check_step_log(tr));
        CHECK_FALSE(check_trajectory(tr));
    }
    // A partial run leaves unexposed points.
    WalkOptions opt;
    opt.stop = StopRule::edge_count(10);
    const auto part = run_lazy_biased_walk(1000, 3, rng, opt);
    CHECK(part.edges_found() == 10);
    CHECK(std::count(part.exposed.begin(), part.exposed.end(), kUnpaired) == 3000 - 20);
}

TEST_CASE("runs are reproducible from the seed") {
    auto render = [](std::uint64_t seed) {
        Rng rng(seed);
        std::ostringstream out;
        write_trajectory_csv(out, run_lazy_biased_walk(1000, 3, rng));
        return out.str();
    };
    CHECK(render(5) == render(5));
    CHECK(render(5) != render(6));
}

TEST_CASE("first cover steps") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const auto g = realize(sample_pairing(20, 3, rng));
        if (!is_connected(g)) continue;
        const auto tr = run_biased_walk(g, rng);
        const auto pc = partial_cover(tr, 1, 1);
        CHECK(pc.vertex_steps == 0);
        CHECK(pc.edge_steps == 1);
        CHECK(partial_cover(tr, g.vertex_count(), g.edge_count()).edge_steps == tr.steps);
        CHECK(tr.vertex_steps.back() <= tr.edge_steps.back());
    }
}

TEST_CASE("partial cover reports unreached targets") {
    Rng rng(1);
    WalkOptions opt;
    opt.stop = StopRule::edge_count(5);
    const auto tr = run_lazy_biased_walk(100, 3, rng, opt);
    CHECK(partial_cover(tr, 100, 5).vertex_steps == kNotReached);
    CHECK(partial_cover(tr, 2, 6).edge_steps == kNotReached);
    CHECK(partial_cover(tr, 2, 5).edge_steps == tr.edge_steps[4]);
    CHECK_THROWS_AS(partial_cover(tr, 0, 1), GraphError);
    CHECK_THROWS_AS(partial_cover(tr, 1, 151), GraphError);
}

TEST_CASE("stop rules") {
    Rng rng(30);
    const auto g = realize(sample_pairing(200, 3, rng));
    WalkOptions opt;
    opt.stop = StopRule::step_budget(0);
    const auto empty = run_biased_walk(g, rng, opt);
    CHECK(empty.steps == 0);
    CHECK(empty.edges_found() == 0);
    opt.stop = StopRule::step_budget(17);
    CHECK(run_biased_walk(g, rng, opt).steps == 17);
    if (is_connected(g)) {
        opt.stop = StopRule::all_vertices();
        CHECK(run_biased_walk(g, rng, opt).vertices_found() == 200);
    }
}

TEST_CASE("disconnected graphs are rejected") {
    const std::vector<std::pair<Vertex, Vertex>> edges{{0, 1}, {0, 1}, {0, 1}, {2, 3}, {2, 3}, {2, 3}};
    const auto g = Multigraph::from_edges(4, edges);
    Rng rng(1);
    CHECK_THROWS_AS(run_biased_walk(g, rng), GraphError);
    CHECK_THROWS_AS(run_baseline_walk(g, WalkKind::SimpleWalk, rng), GraphError);
}

TEST_CASE("simple walk returns to K4 start with probability 1/3 after two steps") {
    const auto g = complete_graph(4);
    Rng rng(2);
    WalkOptions opt;
    opt.start = 0;
    opt.stop = StopRule::step_budget(2);
    opt.record_steps = true;
    const int runs = 90000;
    int back = 0;
    for (int i = 0; i < runs; ++i) {
        const auto tr = run_baseline_walk(g, WalkKind::SimpleWalk, rng, opt);
        back += g.owner(tr.log.back().to) == 0;
    }
    const double p = back / double(runs);
    CHECK(std::abs(p - 1.0 / 3.0) < 4 * std::sqrt(2.0 / 9.0 / runs));
}

TEST_CASE("non-backtracking walk never reverses and needs degree 3") {
    Rng rng(3);
    const auto g = realize(sample_pairing(100, 3, rng));
    WalkOptions opt;
    opt.stop = StopRule::step_budget(2000);
    opt.record_steps = true;
    if (is_connected(g)) {
        const auto tr = run_baseline_walk(g, WalkKind::NonBacktrackingWalk, rng, opt);
        for (std::size_t k = 1; k < tr.log.size(); ++k) CHECK(tr.log[k].from != tr.log[k - 1].to);
    }
    CHECK_THROWS_AS(run_baseline_walk(cycle_graph(6), WalkKind::NonBacktrackingWalk, rng), GraphError);
    CHECK_THROWS_AS(run_baseline_walk(g, WalkKind::BiasedEdgeProcess, rng), GraphError);
}

TEST_CASE("walk kind names round trip") {
    for (auto k : {WalkKind::BiasedEdgeProcess, WalkKind::SimpleWalk, WalkKind::NonBacktrackingWalk}) {
        CHECK(parse_walk_kind(to_string(k)) == k);
    }
    CHECK_FALSE(parse_walk_kind("levy"));
}

TEST_CASE("series identities") {
    Rng rng(44);
    for (std::uint32_t d : {3u, 4u, 5u}) {
        const auto tr = run_lazy_biased_walk(300, d, rng);
        for (std::size_t r = 0; r < tr.rows(); ++r) {
            std::uint64_t sum = 0, weighted = 0;
            for (std::uint32_t i = 0; i <= d; ++i) sum += tr.x(r, i), weighted += std::uint64_t(i) * tr.x(r, i);
            CHECK(sum == tr.n);
            CHECK(weighted == std::uint64_t(tr.n) * d - 2ULL * tr.sample_t[r]);
            CHECK(tr.phi[r] <= tr.sample_t[r]);
        }
        CHECK_FALSE(check_trajectory(tr));
    }
}

TEST_CASE("decimation keeps every k-th row and the last") {
    Rng rng(4);
    WalkOptions opt;
    opt.decimation = 10;
    const auto tr = run_lazy_biased_walk(100, 3, rng, opt);
    CHECK(tr.sample_t.front() == 0);
    CHECK(tr.sample_t.back() == 150);
    for (std::size_t r = 0; r + 1 < tr.rows(); ++r) CHECK(tr.sample_t[r] % 10 == 0);
    CHECK(tr.row_at(20).has_value());
    CHECK_FALSE(tr.row_at(21).has_value());
    opt.decimation = 0;
    CHECK_THROWS_AS(run_lazy_biased_walk(100, 3, rng, opt), GraphError);
}

TEST_CASE("tau is the discovery count when s vertices are seen") {
    Rng rng(6);
    const auto tr = run_lazy_biased_walk(500, 3, rng);
    CHECK(tr.tau(1) == 0u);
    for (std::uint32_t s = 2; s <= tr.n; ++s) {
        const std::uint32_t t = *tr.tau(s);
        CHECK(tr.edge_steps[t - 1] == tr.vertex_steps[s - 1]);
    }
}

TEST_CASE("fault injection breaks red preference") {
    Rng rng(9);
    WalkOptions opt;
    opt.record_steps = true;
    opt.fault_blue_first = true;
    opt.stop = StopRule::step_budget(3000);
    int caught = 0;
    for (int i = 0; i < 20; ++i) caught += check_red_preference(run_lazy_biased_walk(200, 3, rng, opt)).has_value();
    CHECK(caught == 20);
}
