#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "covertime/harness.hpp"

using namespace covertime;

namespace {

ExperimentPlan plan_from(const std::string& text) {
    std::istringstream in(text);
    ExperimentPlan plan;
    apply_config(plan, read_config(in));
    validate_plan(plan);
    return plan;
}

std::string run(int (*cmd)(const ExperimentPlan&, std::ostream&, std::ostream&), const ExperimentPlan& plan) {
    std::ostringstream out, log;
    REQUIRE(cmd(plan, out, log) == 0);
    return out.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto plan = plan_from(
        "# sweep\n"
        "command = cover\n"
        "n = 100, 1e3\n"
        "d = 3,4\n"
        "kind = biased, simple\n"
        "trials = 7\n"
        "seed = 42\n"
        "checkpoints = 0.5, 0.1, 20\n"
        "resample_disconnected = true\n"
        "threads = 2\n");
    CHECK(plan.command == "cover");
    CHECK(plan.n == std::vector<std::uint32_t>{100, 1000});
    CHECK(plan.d == std::vector<std::uint32_t>{3, 4});
    CHECK(plan.kinds == std::vector<WalkKind>{WalkKind::BiasedEdgeProcess, WalkKind::SimpleWalk});
    CHECK(plan.trials == 7);
    CHECK(plan.seed == 42);
    CHECK(plan.checkpoints == std::vector<double>{0.5, 0.1, 20});
    CHECK(plan.resample_disconnected);
    CHECK(plan.threads == 2);
}

TEST_CASE("bad plans are usage errors") {
    CHECK_THROWS_AS(plan_from("colour = red\n"), UsageError);
    CHECK_THROWS_AS(plan_from("n = ten\n"), UsageError);
    CHECK_THROWS_AS(plan_from("trials = 0\n"), UsageError);
    CHECK_THROWS_AS(plan_from("n = 5\nd = 3\n"), UsageError);
    CHECK_THROWS_AS(plan_from("kind = levy\n"), UsageError);
    CHECK_THROWS_AS(plan_from("checkpoints = 2.5\n"), UsageError);
    CHECK_THROWS_AS(plan_from("checkpoints = -1\n"), UsageError);
    CHECK_THROWS_AS(plan_from("just text\n"), UsageError);
    try {
        plan_from("colour = red\n");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("colour") != std::string::npos);
    }
}

TEST_CASE("checkpoint resolution") {
    CHECK(checkpoint_times({1.0, 0.5, 0.01, 20}, 150) == std::vector<std::uint32_t>{0, 20, 75, 149});
    CHECK(checkpoint_times({0.5, 0.5}, 10) == std::vector<std::uint32_t>{5});
    CHECK(parse_checkpoints("1e-2, 3") == std::vector<double>{0.01, 3});
    CHECK(parse_count_list("1e5", "n") == std::vector<std::uint32_t>{100000});
}

TEST_CASE("cover CSV is byte-identical across runs and thread counts") {
    auto plan = plan_from("n = 200, 300\nd = 3\nkind = biased, simple, nonbacktracking\ntrials = 6\nseed = 9\n");
    plan.threads = 1;
    const auto serial = run(cmd_cover, plan);
    plan.threads = 4;
    const auto parallel = run(cmd_cover, plan);
    CHECK(serial == parallel);
    CHECK(serial == run(cmd_cover, plan));
    const auto rows = lines(serial);
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0] == kSchemaLine);
    CHECK(rows[1] == "n,d,kind,metric,mean,sd,min,max,count");
    plan.seed = 10;
    CHECK(run(cmd_cover, plan) != serial);
}

TEST_CASE("cover statistics") {
    auto plan = plan_from("n = 500\nd = 4\ntrials = 5\nseed = 3\nresample_disconnected = true\n");
    const auto result = run_cover(plan);
    CHECK(result.disconnected == 0);
    REQUIRE_FALSE(result.rows.empty());
    for (const auto& row : result.rows) {
        CHECK(row.values.count() == 5);
        CHECK(row.values.min() <= row.values.mean());
        CHECK(row.values.mean() <= row.values.max());
    }
    std::ostringstream per_trial;
    run_cover(plan, &per_trial);
    CHECK(lines(per_trial.str()).size() == 2 + 5);
}

TEST_CASE("trajectory starts with every vertex at full red degree") {
    auto plan = plan_from("n = 400\nd = 3\ntrials = 3\nseed = 5\nresample_disconnected = true\ncheckpoints = 1, 0.5, 0.1\n");
    const auto rows = lines(run(cmd_trajectory, plan));
    REQUIRE(rows.size() == 2 + 9);
    CHECK(rows[1] == "n,d,kind,trial,t,delta,steps,X0,X1,X2,X3,Phi,pred_X3,pred_X1,Phi_lower");
    CHECK(rows[2].rfind("400,3,biased,0,0,1,0,0,0,0,400,0,", 0) == 0);
}

TEST_CASE("gen writes an edge list") {
    auto plan = plan_from("n = 20\nd = 3\nseed = 1\n");
    const auto rows = lines(run(cmd_gen, plan));
    REQUIRE_FALSE(rows.empty());
    CHECK(std::count_if(rows.begin(), rows.end(), [](const std::string& l) { return !l.empty() && l[0] != '#'; }) ==
          1 + 30);
}

TEST_CASE("spectra and hitting outputs") {
    auto plan = plan_from("n = 200\nd = 3\ntrials = 2\nseed = 2\nresample_disconnected = true\nquick = true\nsets = 2\n");
    const auto spectra = lines(run(cmd_spectra, plan));
    CHECK(spectra[1] == "n,d,seed,lambda,method,iterations");
    CHECK(spectra.size() == 4);
    const auto hitting = lines(run(cmd_hitting, plan));
    CHECK(hitting[0] == kSchemaLine);
    CHECK(hitting.size() > 2);
}

TEST_CASE("rootset and urn commands validate their checkpoints") {
    std::ostringstream out, log;
    auto plan = plan_from("n = 200\nd = 3\ncheckpoints = 0.5\n");
    CHECK_THROWS_AS(cmd_rootset(plan, out, log), UsageError);
    plan = plan_from("n = 200\nd = 3\ncheckpoints = 0.1, 0.2\n");
    CHECK_THROWS_AS(cmd_urntest(plan, out, log), UsageError);
    plan = plan_from("n = 2000\nd = 3\ncheckpoints = 0.01\ntrials = 2\nseed = 4\nresample_disconnected = true\n");
    const auto rows = lines(run(cmd_rootset, plan));
    CHECK(rows[1].find("verdict") != std::string::npos);
}

TEST_CASE("sweep dispatches on the configured command") {
    auto plan = plan_from("command = spectra\nn = 100, 200\nd = 3\ntrials = 2\nseed = 6\nresample_disconnected = true\n");
    CHECK(run(cmd_sweep, plan) == run(cmd_spectra, plan));
    plan.command = "validate";
    std::ostringstream out, log;
    CHECK_THROWS_AS(cmd_sweep(plan, out, log), UsageError);
}

TEST_CASE("plot script names the CSV") {
    std::ostringstream out;
    write_plot_script(out, "cover", "cover.csv");
    CHECK(out.str().find("cover.csv") != std::string::npos);
}

TEST_CASE("plan graphs depend only on the seed and trial") {
    auto plan = plan_from("n = 100\nd = 3\nseed = 8\n");
    std::ostringstream a, b;
    write_edge_list(a, plan_graph(plan, 100, 3, 4).graph);
    write_edge_list(b, plan_graph(plan, 100, 3, 4).graph);
    CHECK(a.str() == b.str());
    std::ostringstream c;
    write_edge_list(c, plan_graph(plan, 100, 3, 5).graph);
    CHECK(a.str() != c.str());
}
