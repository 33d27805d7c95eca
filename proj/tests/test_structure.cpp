#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "covertime/oracle.hpp"
#include "covertime/stats.hpp"
#include "covertime/structure.hpp"

using namespace covertime;

namespace {

// Trajectory of an eager walk given as a list of traversed half-edges.
Trajectory scripted(const Multigraph& g, Vertex start, const std::vector<HalfEdge>& departures) {
    Trajectory t;
    t.n = g.vertex_count();
    t.degree = g.max_degree();
    t.edge_total = g.edge_count();
    t.start = start;
    for (HalfEdge h : departures) t.log.push_back({h, g.mate(h), false, 0});
    t.steps = t.log.size();
    return t;
}

HalfEdge leaving(const Multigraph& g, EdgeId e, Vertex from) {
    auto [a, b] = g.edge_half_edges(e);
    return g.owner(a) == from ? a : b;
}

}  // namespace

TEST_CASE("a single path is one bridge") {
    const auto g = path_graph(3);
    const auto tr = scripted(g, 0, {leaving(g, 0, 0), leaving(g, 1, 1)});
    const auto green = extract_green(tr, &g);
    CHECK(green.Y == std::vector<Vertex>{1});
    CHECK(green.Phi == 2);
    CHECK(green.phi == 1);
    CHECK(green.bridge_lengths == std::vector<std::uint32_t>{2});
}

TEST_CASE("no once-visited vertices gives unit bridges") {
    const std::vector<std::pair<Vertex, Vertex>> edges{{0, 1}, {0, 1}, {0, 1}};
    const auto g = Multigraph::from_edges(2, edges);
    const auto tr = scripted(g, 0, {leaving(g, 0, 0), leaving(g, 1, 1), leaving(g, 2, 0)});
    const auto green = extract_green(tr, &g);
    CHECK(green.Y.empty());
    CHECK(green.Phi == 3);
    CHECK(green.phi == 3);
    CHECK(green.bridge_lengths == std::vector<std::uint32_t>{1, 1, 1});
}

TEST_CASE("retraversed edges are not green") {
    const auto g = path_graph(4);
    // 0 -> 1 -> 0 -> 1 -> 2 -> 3: edge 0 used three times.
    const auto tr = scripted(g, 0, {leaving(g, 0, 0), leaving(g, 0, 1), leaving(g, 0, 0), leaving(g, 1, 1), leaving(g, 2, 2)});
    const auto green = extract_green(tr, &g);
    CHECK(green.Phi == 2);
    CHECK(green.Y == std::vector<Vertex>{2});
    CHECK(green.bridge_lengths == std::vector<std::uint32_t>{2});
}

TEST_CASE("extract_green needs the full log") {
    Rng rng(1);
    WalkOptions opt;
    opt.stop = StopRule::edge_count(20);
    opt.record_steps = true;
    auto tr = run_lazy_biased_walk(100, 3, rng, opt);
    CHECK_NOTHROW(extract_green(tr));
    tr.log.pop_back();
    CHECK_THROWS_AS(extract_green(tr), GraphError);
}

TEST_CASE("green identities on logged walks") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        WalkOptions opt;
        opt.stop = StopRule::edge_count(1 + uniform_index(rng, 149));
        opt.record_steps = true;
        const auto tr = run_lazy_biased_walk(100, 3, rng, opt);
        const auto green = extract_green(tr);
        CHECK(std::accumulate(green.bridge_lengths.begin(), green.bridge_lengths.end(), 0u) == green.Phi);
        CHECK(green.phi + green.Y.size() == green.Phi);
        CHECK(green.Phi == tr.phi.back());
        for (auto k : green.bridge_lengths) CHECK(k >= 1);
    }
}

TEST_CASE("green edges stay plentiful near the end") {
    const std::uint32_t n = 10000;
    const double delta = 0.05;
    const double delta0 = 1.0 / std::log(std::log(double(n)));
    const double floor_value = std::sqrt(delta0 * delta) * n;
    Rng rng(2025);
    int ok = 0;
    for (int i = 0; i < 100; ++i) {
        WalkOptions opt;
        opt.stop = StopRule::edge_count(static_cast<std::uint64_t>(std::llround((1 - delta) * 1.5 * n)));
        opt.record_series = true;
        opt.decimation = 1000000;
        const auto tr = run_lazy_biased_walk(n, 3, rng, opt);
        ok += tr.phi.back() >= floor_value;
    }
    CHECK(ok >= 95);
}

TEST_CASE("root set size threshold") {
    Rng rng(4);
    const auto g = realize(sample_pairing(1000, 3, rng));
    std::vector<Vertex> s(31);
    std::iota(s.begin(), s.end(), 0);
    const auto r = is_root_set(g, s, 2.0);
    CHECK_FALSE(r.size_ok);
    CHECK_FALSE(r.verdict);
    CHECK_THROWS_AS(is_root_set(g, s, 1.0), GraphError);
}

TEST_CASE("distant edges form a root set") {
    Rng rng(5);
    const std::uint32_t n = 100000;
    const auto g = realize(sample_pairing(n, 3, rng));
    std::vector<Vertex> chosen;
    std::vector<std::uint32_t> dist;
    while (chosen.size() < 32) {
        const EdgeId e = static_cast<EdgeId>(uniform_index(rng, g.edge_count()));
        auto [u, v] = g.endpoints(e);
        if (u == v) continue;
        const std::vector<Vertex> ends{u, v};
        if (neighborhood_sizes(g, ends, 3) != std::vector<std::uint64_t>{4, 8, 16}) continue;
        if (!chosen.empty()) {
            dist = bfs_distances(g, chosen, 5);
            if (dist[u] <= 5 || dist[v] <= 5) continue;
        }
        chosen.push_back(u);
        chosen.push_back(v);
    }
    const auto r = is_root_set(g, chosen, 2.0);
    CHECK(r.size == 32);
    CHECK(r.internal_edges == 16);
    CHECK(r.short_paths == 0);
    CHECK(r.verdict);
    const auto smaller = std::vector<Vertex>(chosen.begin(), chosen.begin() + 30);
    CHECK_FALSE(is_root_set(g, smaller, 2.0).verdict);
}

TEST_CASE("short paths between set vertices") {
    // 0 - 1 - 2 plus a parallel route 0 - 3 - 2.
    const std::vector<std::pair<Vertex, Vertex>> edges{{0, 1}, {1, 2}, {0, 3}, {3, 2}, {0, 2}};
    const auto g = Multigraph::from_edges(4, edges);
    const std::vector<Vertex> s{0, 2};
    const auto r = is_root_set(g, s, 2.5);
    CHECK(r.internal_edges == 1);
    CHECK(r.short_paths == 2);
    CHECK(is_root_set(g, s, 1.5).short_paths == 0);
    // Paths through another set vertex do not count.
    const std::vector<Vertex> s3{0, 1, 2};
    CHECK(is_root_set(g, s3, 3.0).short_paths == 1);
}

TEST_CASE("root-set conditions only get harder as the order grows") {
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
        const auto g = realize(sample_pairing(40, 3, rng));
        std::vector<Vertex> s;
        for (Vertex v = 0; v < 40; ++v) {
            if (uniform_real(rng) < 0.3) s.push_back(v);
        }
        bool internal_failed = false, paths_failed = false;
        for (double ell = 1.5; ell <= 6.0; ell += 0.5) {
            const auto r = is_root_set(g, s, ell);
            if (internal_failed) CHECK_FALSE(r.internal_ok);
            if (paths_failed) CHECK_FALSE(r.paths_ok);
            internal_failed = !r.internal_ok;
            paths_failed = !r.paths_ok;
            CHECK(r.verdict == (r.size_ok && r.internal_ok && r.paths_ok));
        }
    }
}

TEST_CASE("urn examples") {
    Rng rng(7);
    for (int i = 0; i < 10; ++i) CHECK(polya_urn(1, 5, rng) == std::vector<std::uint32_t>{6});
    int first_big = 0;
    const int runs = 40000;
    for (int i = 0; i < runs; ++i) {
        const auto sizes = polya_urn(2, 1, rng);
        CHECK(sizes[0] + sizes[1] == 3);
        first_big += sizes[0] == 2;
    }
    CHECK(std::abs(first_big / double(runs) - 0.5) < 4 * std::sqrt(0.25 / runs));

    std::map<std::vector<std::uint32_t>, std::uint64_t> seen;
    for (int i = 0; i < 60000; ++i) ++seen[polya_urn(3, 2, rng)];
    CHECK(seen.size() == 6);
    std::vector<std::uint64_t> counts;
    for (auto& [k, c] : seen) counts.push_back(c);
    const std::vector<double> uniform(6, 1.0 / 6);
    CHECK(chi_square_gof(counts, uniform).p_value > 1e-3);
}

TEST_CASE("exact urn law is uniform over compositions") {
    for (std::uint32_t phi = 1; phi <= 3; ++phi) {
        for (std::uint32_t m = 0; m <= 4; ++m) {
            const auto law = urn_composition_law(phi, m);
            const auto total = equivalence_class_size(m + 1, phi - 1) / equivalence_class_size(1, phi - 1);
            CHECK(law.size() == static_cast<std::size_t>(total));
            for (const auto& [sizes, p] : law) {
                CHECK(std::accumulate(sizes.begin(), sizes.end(), 0u) == phi + m);
                CHECK(p == Rational(1, static_cast<long long>(law.size())));
            }
        }
    }
}

TEST_CASE("first bridge law") {
    for (std::uint32_t phi = 1; phi <= 6; ++phi) {
        for (std::uint32_t m = 0; m <= 8; ++m) {
            const auto pmf = first_bridge_pmf(phi, m);
            REQUIRE(pmf.size() == m + 1);
            CHECK(std::accumulate(pmf.begin(), pmf.end(), 0.0) == doctest::Approx(1.0));
            // Marginal of the exact composition law.
            std::vector<double> exact(m + 1, 0.0);
            if (phi <= 3 && m <= 4) {
                for (const auto& [sizes, p] : urn_composition_law(phi, m)) exact[sizes[0] - 1] += static_cast<double>(p);
                for (std::uint32_t k = 0; k <= m; ++k) CHECK(pmf[k] == doctest::Approx(exact[k]));
            }
        }
    }
    CHECK(first_bridge_pmf(1, 4) == std::vector<double>{0, 0, 0, 0, 1});
}

TEST_CASE("equivalence class sizes") {
    CHECK(equivalence_class_size(3, 2) == 12);
    CHECK(equivalence_class_size(7, 0) == 1);
    CHECK(equivalence_class_size(1, 4) == 24);
    const auto big = equivalence_class_size(1, 10000);
    CHECK(big > 0);
    CHECK(big / equivalence_class_size(1, 9999) == 10000);
}

TEST_CASE("urn test: single-colour bucket is degenerate") {
    std::vector<BridgeSample> samples(600, BridgeSample{1, 4, 5});
    const auto report = urn_bridge_test(samples);
    REQUIRE(report.buckets.size() == 1);
    CHECK(report.buckets[0].degenerate);
    CHECK(report.buckets[0].p_value == 1.0);
    samples[0].first = 2;
    CHECK(urn_bridge_test(samples).buckets[0].p_value == 0.0);
    samples.resize(10);
    const auto small = urn_bridge_test(samples);
    CHECK(small.buckets.empty());
    CHECK(small.skipped_samples == 10);
    CHECK_FALSE(small.notices.empty());
}

TEST_CASE("urn test is calibrated under the null") {
    Rng rng(8);
    std::vector<BridgeSample> shapes(100000);
    for (auto& s : shapes) {
        s.phi = 2 + static_cast<std::uint32_t>(uniform_index(rng, 40));
        s.m = static_cast<std::uint32_t>(uniform_index(rng, 120));
    }
    const auto null = sample_urn_null(shapes, 99);
    const auto report = urn_bridge_test(null);
    std::vector<double> p;
    for (const auto& b : report.buckets) {
        CHECK(b.samples >= 500);
        p.push_back(b.p_value);
    }
    CHECK(p.size() >= 100);
    CHECK(ks_uniform(p).p_value > 0.01);
    CHECK(report.passing(0.01) >= report.buckets.size() * 95 / 100);

    // A shifted law is rejected.
    auto skewed = null;
    for (auto& s : skewed) s.first = std::min(s.first + 1, s.m + 1);
    CHECK(urn_bridge_test(skewed).passing(0.01) < report.buckets.size() / 2);
}

TEST_CASE("bridge samples from walks") {
    UrnWalkOptions opt;
    opt.n = 200;
    opt.trials = 50;
    const auto a = sample_bridges(opt);
    opt.threads = 1;
    const auto b = sample_bridges(opt);
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].phi == b[i].phi);
        CHECK(a[i].first == b[i].first);
        CHECK(a[i].phi >= 1);
        CHECK(a[i].first >= 1);
        CHECK(a[i].first <= a[i].m + 1);
    }
    std::ostringstream csv;
    write_urn_csv(csv, urn_bridge_test(a, 10));
    CHECK(csv.str().rfind("# covertime-lab schema v1\nbucket,samples,chi2,p\n", 0) == 0);
}
