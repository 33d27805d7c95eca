#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covertime/acceptance.hpp"
#include "covertime/spectral.hpp"
#include "covertime/stats.hpp"
#include "covertime/structure.hpp"

using namespace covertime;

namespace {

constexpr int kCases = 1000;

// Small random multigraph, possibly with loops and parallel edges.
Multigraph random_multigraph(Rng& rng, std::uint32_t max_n, std::uint32_t max_edges) {
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(uniform_index(rng, max_n));
    const std::size_t m = 1 + uniform_index(rng, max_edges);
    std::vector<std::pair<Vertex, Vertex>> edges;
    // Spanning path first so the graph is connected.
    for (Vertex v = 1; v < n; ++v) {
        edges.emplace_back(static_cast<Vertex>(uniform_index(rng, v)), v);
    }
    while (edges.size() < m) {
        edges.emplace_back(static_cast<Vertex>(uniform_index(rng, n)), static_cast<Vertex>(uniform_index(rng, n)));
    }
    return Multigraph::from_edges(n, edges);
}

std::vector<Vertex> random_subset(Rng& rng, std::uint32_t n, std::size_t k) {
    std::vector<Vertex> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k);
    return all;
}

}  // namespace

TEST_CASE("invariant suite") {
    const auto results = run_invariant_suite(kCases, 31337);
    CHECK(results.size() == 7);
    for (const auto& r : results) {
        CAPTURE(r.name);
        CAPTURE(r.first_failure);
        CHECK(r.cases >= kCases);
        CHECK(r.failures == 0);
    }
}

TEST_CASE("invariant suite catches a blue-first walker") {
    const auto results = run_invariant_suite(50, 1, true);
    const auto it = std::find_if(results.begin(), results.end(), [](const auto& r) { return r.name == "red-preference"; });
    REQUIRE(it != results.end());
    CHECK(it->failures > 0);
}

TEST_CASE("eager walks on random multigraphs keep their invariants") {
    Rng rng(1);
    for (int i = 0; i < kCases; ++i) {
        const auto g = random_multigraph(rng, 12, 20);
        WalkOptions opt;
        opt.record_steps = true;
        const auto tr = run_biased_walk(g, rng, opt);
        REQUIRE_FALSE(check_trajectory(tr));
        REQUIRE_FALSE(check_red_preference(tr));
        REQUIRE_FALSE(check_step_log(tr, &g));
        REQUIRE(tr.edges_found() == g.edge_count());
        REQUIRE(tr.vertices_found() == g.vertex_count());
        const auto green = extract_green(tr, &g);
        REQUIRE(std::accumulate(green.bridge_lengths.begin(), green.bridge_lengths.end(), 0u) == green.Phi);
        REQUIRE(green.phi + green.Y.size() == green.Phi);
    }
}

TEST_CASE("contraction preserves total degree and edges") {
    Rng rng(2);
    for (int i = 0; i < kCases; ++i) {
        const auto g = random_multigraph(rng, 15, 30);
        const std::size_t k = 1 + uniform_index(rng, g.vertex_count());
        const auto set = random_subset(rng, g.vertex_count(), k);
        const auto c = contract(g, set);
        std::uint32_t total = 0;
        for (Vertex v : set) total += g.degree(v);
        REQUIRE(c.graph.degree(c.node) == total);
        REQUIRE(c.graph.edge_count() == g.edge_count());
        REQUIRE(c.graph.vertex_count() == g.vertex_count() - k + 1);
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            if (std::find(set.begin(), set.end(), v) == set.end()) REQUIRE(c.graph.degree(c.relabel[v]) == g.degree(v));
        }
    }
}

TEST_CASE("transition rows sum to one") {
    Rng rng(3);
    for (int i = 0; i < kCases; ++i) {
        const auto g = random_multigraph(rng, 10, 25);
        const Eigen::MatrixXd p(transition_matrix(g));
        for (Eigen::Index r = 0; r < p.rows(); ++r) REQUIRE(std::abs(p.row(r).sum() - 1.0) < 1e-12);
        const auto pi = stationary_distribution(g);
        REQUIRE((p.transpose() * pi - pi).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("urn sizes are positive and sum to phi + m") {
    Rng rng(4);
    for (int i = 0; i < kCases; ++i) {
        const auto phi = 1 + static_cast<std::uint32_t>(uniform_index(rng, 20));
        const auto m = static_cast<std::uint32_t>(uniform_index(rng, 50));
        const auto sizes = polya_urn(phi, m, rng);
        REQUIRE(sizes.size() == phi);
        REQUIRE(std::accumulate(sizes.begin(), sizes.end(), 0u) == phi + m);
        REQUIRE(*std::min_element(sizes.begin(), sizes.end()) >= 1);
    }
}

TEST_CASE("hitting times: exact solve matches the Z-series") {
    Rng rng(5);
    int compared = 0;
    for (int i = 0; i < kCases; ++i) {
        const auto g = random_multigraph(rng, 14, 30);
        if (g.vertex_count() < 2) continue;
        const auto set = random_subset(rng, g.vertex_count(), 1 + uniform_index(rng, g.vertex_count() - 1));
        const auto exact = hitting_time_exact(g, set);
        const auto z = hitting_time_zseries(g, set, 1e-9);
        REQUIRE(exact.value >= 0);
        REQUIRE(std::abs(z.value - exact.value) <= 1e-6 * std::max(1.0, exact.value));
        ++compared;
    }
    CHECK(compared > kCases / 2);
}

TEST_CASE("summary statistics do not depend on insertion order") {
    Rng rng(6);
    for (int i = 0; i < kCases; ++i) {
        std::vector<double> values(1 + uniform_index(rng, 40));
        for (auto& v : values) v = std::exp(10 * uniform_real(rng)) - 1e3 * uniform_real(rng);
        Summary a, b, c;
        for (double v : values) a.add(v);
        std::shuffle(values.begin(), values.end(), rng);
        const std::size_t cut = uniform_index(rng, values.size() + 1);
        for (std::size_t k = 0; k < cut; ++k) b.add(values[k]);
        for (std::size_t k = cut; k < values.size(); ++k) c.add(values[k]);
        c.merge(b);
        REQUIRE(a.mean() == c.mean());
        REQUIRE(a.sd() == c.sd());
        REQUIRE(a.min() == c.min());
        REQUIRE(a.max() == c.max());
    }
}
