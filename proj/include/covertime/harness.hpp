#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "covertime/multigraph.hpp"
#include "covertime/stats.hpp"
#include "covertime/walk.hpp"

namespace covertime {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kSchemaLine = "# covertime-lab schema v1";

struct ExperimentPlan {
    std::string command;
    std::vector<std::uint32_t> n{1000};
    std::vector<std::uint32_t> d{3};
    std::vector<WalkKind> kinds{WalkKind::BiasedEdgeProcess};
    std::uint64_t trials = 1;
    std::uint64_t seed = 1;
    // Values <= 1 are fractions delta of unvisited edges; larger integers are t.
    std::vector<double> checkpoints;
    std::string out;
    std::string summary;  // cover: optional per-trial CSV
    unsigned threads = 0;
    bool quick = false;
    bool resample_disconnected = false;
    bool emit_plot_script = false;
    std::uint32_t decimation = 1;
    std::vector<std::uint32_t> set_sizes{1, 4, 16};  // hitting
    bool null_model = false;                         // urn-test
};

using ConfigMap = std::map<std::string, std::string>;

// Flat "key = value" lines; '#' starts a comment.
ConfigMap read_config(std::istream& in);
// Throws UsageError naming the offending key.
void apply_config(ExperimentPlan& plan, const ConfigMap& config);
void validate_plan(const ExperimentPlan& plan);

std::vector<std::uint32_t> parse_count_list(const std::string& text, const std::string& key);
std::vector<double> parse_checkpoints(const std::string& text);
std::vector<WalkKind> parse_kind_list(const std::string& text);

// Checkpoints resolved to discovery counts t for a graph with `edges` edges,
// sorted and deduplicated.
std::vector<std::uint32_t> checkpoint_times(const std::vector<double>& checkpoints, std::uint64_t edges);

// Graph of trial `trial` for (n, d): a pure function of the plan seed.
SampledGraph plan_graph(const ExperimentPlan& plan, std::uint32_t n, std::uint32_t d, std::uint64_t trial);

struct CoverRow {
    std::uint32_t n = 0;
    std::uint32_t d = 0;
    WalkKind kind = WalkKind::BiasedEdgeProcess;
    std::string metric;
    Summary values;
};

struct CoverResult {
    std::vector<CoverRow> rows;
    std::uint64_t disconnected = 0;
};

CoverResult run_cover(const ExperimentPlan& plan, std::ostream* per_trial = nullptr);
void write_cover_rows(std::ostream& out, const std::vector<CoverRow>& rows);

// Each command writes its CSV to `out`; notes go to `log`. Return value is
// the process exit code.
int cmd_gen(const ExperimentPlan& plan, std::ostream& out, std::ostream& log);
int cmd_cover(const ExperimentPlan& plan, std::ostream& out, std::ostream& log);
int cmd_trajectory(const ExperimentPlan& plan, std::ostream& out, std::ostream& log);
int cmd_spectra(const ExperimentPlan& plan, std::ostream& out, std::ostream& log);
int cmd_hitting(const ExperimentPlan& plan, std::ostream& out, std::ostream& log);
int cmd_rootset(const ExperimentPlan& plan, std::ostream& out, std::ostream& log);
int cmd_urntest(const ExperimentPlan& plan, std::ostream& out, std::ostream& log);
int cmd_sweep(const ExperimentPlan& plan, std::ostream& out, std::ostream& log);

// Gnuplot script for the CSV written by `command` to `csv_path`.
void write_plot_script(std::ostream& out, const std::string& command, const std::string& csv_path);

}  // namespace covertime
