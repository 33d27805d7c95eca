#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covertime/spectral.hpp"

using namespace covertime;

namespace {

std::vector<Vertex> random_set(std::uint32_t n, std::size_t k, Rng& rng) {
    std::vector<Vertex> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k);
    return all;
}

Multigraph connected_cubic(std::uint32_t n, Rng& rng) {
    return sample_regular_multigraph(n, 3, rng, DisconnectedPolicy::Resample).graph;
}

}  // namespace

TEST_CASE("second eigenvalue of named graphs") {
    CHECK(second_eigenvalue(complete_graph(4)).lambda == doctest::Approx(1.0 / 3).epsilon(1e-9));
    CHECK(second_eigenvalue_dense(complete_graph(4)).lambda == doctest::Approx(1.0 / 3).epsilon(1e-12));
    const auto pet = second_eigenvalue(petersen_graph());
    CHECK(pet.converged);
    CHECK(pet.lambda == doctest::Approx(2.0 / 3).epsilon(1e-8));
    CHECK(second_eigenvalue_dense(petersen_graph()).lambda == doctest::Approx(2.0 / 3).epsilon(1e-12));
    // Even cycle: eigenvalue -1, periodic.
    const auto c6 = second_eigenvalue(cycle_graph(6));
    CHECK(c6.lambda == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(c6.periodic);
    const std::vector<std::pair<Vertex, Vertex>> loop{{0, 0}};
    CHECK(second_eigenvalue(Multigraph::from_edges(1, loop)).lambda == 0.0);
}

TEST_CASE("second eigenvalue rejects disconnected graphs") {
    const std::vector<std::pair<Vertex, Vertex>> edges{{0, 1}, {2, 3}};
    CHECK_THROWS(second_eigenvalue(Multigraph::from_edges(4, edges)));
}

TEST_CASE("power iteration agrees with the dense solver") {
    Rng rng(17);
    for (std::uint32_t n : {10u, 50u, 200u, 500u}) {
        for (int i = 0; i < 3; ++i) {
            const auto g = connected_cubic(n, rng);
            SpectralOptions opt;
            opt.dense_fallback = false;
            opt.tol = 1e-10;
            const auto power = second_eigenvalue(g, opt);
            const auto dense = second_eigenvalue_dense(g);
            CHECK(power.method == SpectralMethod::PowerIteration);
            CHECK(std::abs(power.lambda - dense.lambda) <= 1e-6);
            CHECK(dense.lambda <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("contraction keeps every edge") {
    const auto k4 = complete_graph(4);
    const std::vector<Vertex> s{0, 1};
    const auto c = contract(k4, s);
    const auto& g = c.graph;
    CHECK(g.vertex_count() == 3);
    CHECK(g.edge_count() == 6);
    CHECK(c.node == 2);
    CHECK(g.degree(c.node) == 6);
    int loops = 0, to_a = 0, to_b = 0;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.endpoints(e);
        if (u == v) ++loops;
        else if (u == c.relabel[2] || v == c.relabel[2]) to_a += (u == c.node || v == c.node);
        if (u != v && (u == c.relabel[3] || v == c.relabel[3])) to_b += (u == c.node || v == c.node);
    }
    CHECK(loops == 1);
    CHECK(to_a == 2);
    CHECK(to_b == 2);

    Rng rng(2);
    const auto h = connected_cubic(100, rng);
    auto [u, v] = h.endpoints(0);
    if (u != v) {
        const std::vector<Vertex> pair{u, v};
        const auto ch = contract(h, pair);
        CHECK(ch.graph.degree(ch.node) == 6);
        std::uint32_t node_loops = 0;
        for (EdgeId e = 0; e < ch.graph.edge_count(); ++e) {
            auto [a, b] = ch.graph.endpoints(e);
            node_loops += a == ch.node && b == ch.node;
        }
        // 1 plus any parallel edge between u and v or loop at u or v.
        CHECK(node_loops >= 1);
    }

    std::vector<Vertex> everything(4);
    std::iota(everything.begin(), everything.end(), 0);
    const auto whole = contract(k4, everything);
    CHECK(whole.graph.vertex_count() == 1);
    CHECK(second_eigenvalue(whole.graph).lambda == 0.0);
}

TEST_CASE("contraction preserves degree and does not raise lambda") {
    Rng rng(50);
    for (int i = 0; i < 10; ++i) {
        const auto g = connected_cubic(200, rng);
        const auto lambda = second_eigenvalue_dense(g).lambda;
        const auto set = random_set(200, 10, rng);
        const auto c = contract(g, set);
        CHECK(c.graph.degree(c.node) == 30);
        CHECK(c.graph.edge_count() == g.edge_count());
        CHECK(second_eigenvalue_dense(c.graph).lambda <= lambda + 1e-8);
    }
}

TEST_CASE("return probabilities") {
    const auto p = return_probabilities(complete_graph(4), 0, 3);
    REQUIRE(p.size() == 4);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));
    CHECK(p[2] == doctest::Approx(1.0 / 3));
    CHECK(p[3] == doctest::Approx(2.0 / 9));

    const std::vector<std::pair<Vertex, Vertex>> loop{{0, 0}};
    for (double x : return_probabilities(Multigraph::from_edges(1, loop), 0, 10)) CHECK(x == 1.0);

    Rng rng(8);
    for (int i = 0; i < 5; ++i) {
        const auto g = connected_cubic(60, rng);
        const double lambda = second_eigenvalue_dense(g).lambda;
        const auto pi = stationary_distribution(g);
        const Vertex v = static_cast<Vertex>(uniform_index(rng, 60));
        const auto series = return_probabilities(g, v, 200);
        double partial = 0;
        std::vector<double> sums;
        for (std::size_t t = 0; t < series.size(); ++t) {
            CHECK(std::abs(series[t] - pi(v)) <= std::pow(lambda, double(t)) + 1e-12);
            partial += series[t] - pi(v);
            sums.push_back(partial);
        }
        for (std::size_t t = 0; t + 1 < sums.size(); ++t) {
            CHECK(std::abs(sums.back() - sums[t]) <= std::pow(lambda, double(t + 1)) / (1 - lambda) + 1e-12);
        }
    }
}

TEST_CASE("hitting times on tiny graphs") {
    const Vertex v = 0;
    const auto k4 = complete_graph(4);
    CHECK(hitting_time_exact(k4, std::span(&v, 1)).value == doctest::Approx(2.25).epsilon(1e-12));
    const auto z = hitting_time_zseries(k4, std::span(&v, 1));
    CHECK(z.method == HittingMethod::ZSeries);
    CHECK(std::abs(z.value - 2.25) <= 1e-5);

    const Vertex end = 2;
    const auto path = path_graph(3);
    CHECK(hitting_time_exact(path, std::span(&end, 1)).value == doctest::Approx(2.5).epsilon(1e-12));
    const auto pz = hitting_time_zseries(path, std::span(&end, 1));
    CHECK(pz.value == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(pz.method == HittingMethod::ExactSolve);

    const std::vector<Vertex> all{0, 1, 2, 3};
    CHECK(hitting_time_exact(k4, all).value == 0.0);
    CHECK(hitting_time_mc(k4, all, 100, 1).value == 0.0);

    const std::vector<std::pair<Vertex, Vertex>> split{{0, 1}, {2, 3}};
    const Vertex three = 3;
    CHECK_THROWS(hitting_time_exact(Multigraph::from_edges(4, split), std::span(&three, 1)));
}

TEST_CASE("Monte Carlo hitting time on K4") {
    const Vertex v = 0;
    const auto mc = hitting_time_mc(complete_graph(4), std::span(&v, 1), 1000000, 123);
    CHECK(mc.method == HittingMethod::MonteCarlo);
    CHECK(mc.ok);
    CHECK(std::abs(mc.value - 2.25) <= 0.02);
    CHECK(mc.error > 0);
    CHECK(mc.error < 0.02);
    const auto again = hitting_time_mc(complete_graph(4), std::span(&v, 1), 1000, 5, {0.99, 0, 1});
    const auto threaded = hitting_time_mc(complete_graph(4), std::span(&v, 1), 1000, 5, {0.99, 0, 4});
    CHECK(again.value == threaded.value);
}

TEST_CASE("Monte Carlo flags the step cap") {
    const Vertex v = 0;
    MonteCarloOptions opt;
    opt.step_cap = 1;
    const auto mc = hitting_time_mc(cycle_graph(40), std::span(&v, 1), 200, 3, opt);
    CHECK_FALSE(mc.ok);
}

TEST_CASE("three hitting-time methods agree") {
    Rng rng(77);
    for (int i = 0; i < 4; ++i) {
        const auto g = connected_cubic(300, rng);
        const auto set = random_set(300, 1 + i * 3, rng);
        const auto exact = hitting_time_exact(g, set);
        const auto z = hitting_time_zseries(g, set);
        const auto mc = hitting_time_mc(g, set, 20000, derive_seed(9, i));
        CHECK(std::abs(z.value - exact.value) <= 1e-4 * exact.value);
        CHECK(std::abs(mc.value - exact.value) <= std::max(1e-4 * exact.value, 3 * mc.error));
        const double lambda = second_eigenvalue_dense(g).lambda;
        CHECK(z.value <= 1.0 / (1 - lambda) * 300.0 / set.size() * (1 + 1e-6));
    }
}

TEST_CASE("avoidance bound") {
    const auto k4 = complete_graph(4);
    const auto none = aks_avoidance(k4, {}, 5, 100, 1);
    CHECK(none.empirical == 1.0);
    CHECK(none.bound == doctest::Approx(1.0));
    const std::vector<Vertex> rest{1, 2, 3};
    const auto all_but_one = aks_avoidance(k4, rest, 1, 1000, 1);
    CHECK(all_but_one.empirical == 0.0);
    CHECK(all_but_one.lambda_adjacency == doctest::Approx(1.0).epsilon(1e-8));

    Rng rng(10);
    const auto g = connected_cubic(1000, rng);
    const auto z = random_set(1000, 100, rng);
    for (std::uint32_t ell : {5u, 10u}) {
        const auto r = aks_avoidance(g, z, ell, 20000, ell);
        CHECK(r.c == doctest::Approx(0.1));
        CHECK(r.empirical <= r.bound);
    }
    CHECK_THROWS(aks_avoidance(path_graph(4), {}, 1, 1, 1));
}
