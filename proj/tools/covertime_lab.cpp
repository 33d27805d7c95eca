#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "covertime/acceptance.hpp"
#include "covertime/harness.hpp"

using namespace covertime;

namespace {

struct PlanFlags {
    std::map<std::string, std::string> values;
    std::string config;
};

// Every plan flag is captured as text and fed through the same parser as the
// config file, so the two sources accept identical syntax.
void add_plan_flags(CLI::App* sub, PlanFlags& flags, bool lists = true) {
    auto text = [&](const std::string& key, const std::string& help) {
        sub->add_option("--" + key, flags.values[key], help);
    };
    auto toggle = [&](const std::string& key, const std::string& help) {
        sub->add_flag_function("--" + key, [&flags, key](std::int64_t) { flags.values[key] = "true"; }, help);
    };
    text("n", lists ? "vertex counts, comma separated" : "vertex count");
    text("d", lists ? "degrees, comma separated" : "degree");
    text("trials", "trials (graphs) per configuration");
    text("seed", "master seed");
    text("out", "output CSV path (default: stdout)");
    text("threads", "worker threads, 0 = all cores, 1 = serial");
    toggle("quick", "reduced workload");
    toggle("resample-disconnected", "redraw disconnected graphs instead of flagging them");
    toggle("emit-plot-script", "write a gnuplot script next to --out");
    sub->add_option("--config", flags.config, "flat key=value file; flags override it");
}

ExperimentPlan build_plan(const std::string& command, const PlanFlags& flags) {
    ExperimentPlan plan;
    plan.command = command;
    if (!flags.config.empty()) {
        std::ifstream in(flags.config);
        if (!in) throw UsageError("cannot open config file: " + flags.config);
        auto config = read_config(in);
        if (command != "sweep") config.erase("command");
        apply_config(plan, config);
    }
    ConfigMap overrides;
    for (const auto& [key, value] : flags.values) {
        if (!value.empty()) overrides[key] = value;
    }
    apply_config(plan, overrides);
    validate_plan(plan);
    if (plan.emit_plot_script && plan.out.empty()) throw UsageError("--emit-plot-script needs --out");
    return plan;
}

int run_plan_command(const std::string& name, const ExperimentPlan& plan,
                     int (*command)(const ExperimentPlan&, std::ostream&, std::ostream&)) {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!plan.out.empty()) {
        file.open(plan.out);
        if (!file) throw UsageError("cannot open output file: " + plan.out);
        out = &file;
    }
    const int code = command(plan, *out, std::cerr);
    if (plan.emit_plot_script) {
        std::ofstream script(plan.out + ".gp");
        write_plot_script(script, name == "sweep" && !plan.command.empty() ? plan.command : name, plan.out);
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"covertime-lab: experiments on the unvisited-edge walk over random regular graphs"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        int (*command)(const ExperimentPlan&, std::ostream&, std::ostream&);
        PlanFlags flags;
        CLI::App* sub = nullptr;
    };
    std::vector<Entry> entries{
        {"gen", "sample a random regular multigraph and write its edge list", cmd_gen, {}},
        {"cover", "cover-time statistics per (n, d, kind)", cmd_cover, {}},
        {"trajectory", "X_i and Phi at checkpoints against their predictions", cmd_trajectory, {}},
        {"spectra", "second eigenvalue of sampled graphs", cmd_spectra, {}},
        {"hitting", "hitting times of random vertex sets by three methods", cmd_hitting, {}},
        {"rootset", "root-set checks of the red-vertex set at checkpoints", cmd_rootset, {}},
        {"urn-test", "bridge lengths against the urn law", cmd_urntest, {}},
        {"sweep", "run the command named in --config over all listed values", cmd_sweep, {}},
    };
    for (auto& e : entries) {
        e.sub = app.add_subcommand(e.name, e.help);
        add_plan_flags(e.sub, e.flags);
        const std::string name = e.name;
        if (name != "gen") {
            e.sub->add_option("--kind", e.flags.values["kind"], "walk kinds: biased, simple, nonbacktracking");
            e.sub->add_option("--checkpoints", e.flags.values["checkpoints"],
                              "checkpoints: values <= 1 are delta, integers > 1 are t");
            e.sub->add_option("--decimation", e.flags.values["decimation"], "keep every k-th trajectory row");
        }
        if (name == "cover" || name == "sweep") e.sub->add_option("--summary", e.flags.values["summary"], "per-trial CSV path");
        if (name == "hitting" || name == "sweep") e.sub->add_option("--sets", e.flags.values["sets"], "set sizes");
        if (name == "urn-test") {
            e.sub->add_flag_function("--null", [&e](std::int64_t) { e.flags.values["null"] = "true"; },
                                     "feed urn samples instead of walks (calibration)");
        }
    }

    AcceptanceOptions acceptance;
    std::vector<int> only;
    std::string inject;
    auto* validate = app.add_subcommand("validate", "run the acceptance suite");
    validate->add_flag("--quick", acceptance.quick, "reduced-size versions of every criterion");
    validate->add_option("--seed", acceptance.seed, "master seed");
    validate->add_option("--threads", acceptance.threads, "worker threads, 0 = all cores");
    validate->add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, kCriterionCount));
    validate->add_option("--inject-fault", inject, "negative control: blue-first")->check(CLI::IsMember({"blue-first"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) {
            acceptance.only.insert(only.begin(), only.end());
            acceptance.inject_blue_first = inject == "blue-first";
            const auto start = std::chrono::steady_clock::now();
            const auto results = run_acceptance(acceptance, std::cout);
            std::size_t passed = 0;
            for (const auto& r : results) passed += r.passed;
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::cout << passed << "/" << results.size() << " criteria passed in " << std::fixed << std::setprecision(1) << seconds << "s\n";
            return passed == results.size() ? 0 : 1;
        }
        for (auto& e : entries) {
            if (!e.sub->parsed()) continue;
            const ExperimentPlan plan = build_plan(e.name, e.flags);
            return run_plan_command(e.name, plan, e.command);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
