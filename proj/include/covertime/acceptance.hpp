#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace covertime {

struct AcceptanceOptions {
    bool quick = false;
    std::uint64_t seed = 20240917;
    unsigned threads = 0;
    std::set<int> only;  // empty: every criterion
    // Negative control: the invariant suite runs on walks that prefer blue edges.
    bool inject_blue_first = false;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

inline constexpr int kCriterionCount = 13;

// Runs the selected criteria, printing one line per criterion as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out);

struct PropertyResult {
    std::string name;
    std::uint64_t cases = 0;
    std::uint64_t failures = 0;
    std::string first_failure;
};

// Randomized invariant checks over small graphs, `cases` per property.
std::vector<PropertyResult> run_invariant_suite(std::uint64_t cases, std::uint64_t seed, bool inject_blue_first = false);

}  // namespace covertime
