#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "covertime/multigraph.hpp"
#include "covertime/rng.hpp"
#include "covertime/walk.hpp"

namespace covertime {

// Green edges are traversed exactly once. Y holds the vertices other than the
// tail and the head that the walk enters once and leaves once; a green bridge
// is a maximal run of green steps whose inner vertices all lie in Y.
struct GreenStructure {
    std::vector<Vertex> Y;  // sorted
    std::uint32_t phi = 0;  // green edges after collapsing bridges
    std::uint32_t Phi = 0;  // green edges of the walk
    std::vector<std::uint32_t> bridge_lengths;  // walk order
};

// Needs a complete step log. Eager walks pass their graph; lazy walks pass
// nullptr (point p belongs to vertex p / degree).
GreenStructure extract_green(const Trajectory& traj, const Multigraph* g = nullptr);

struct RootSetReport {
    double ell = 0.0;
    std::size_t size = 0;
    bool size_ok = false;
    std::uint64_t internal_edges = 0;
    bool internal_ok = false;
    std::uint64_t short_paths = 0;
    bool paths_ok = false;
    bool verdict = false;
};

// Order ell > 1, real valued; paths have length at most floor(ell), join two
// distinct vertices of S, avoid edges inside S and pass through no other
// vertex of S. Parallel paths are counted separately.
RootSetReport is_root_set(const Multigraph& g, std::span<const Vertex> set, double ell);

// One ball per colour, then m reinforced draws; returns the final class sizes.
std::vector<std::uint32_t> polya_urn(std::uint32_t phi, std::uint32_t m, Rng& rng);

// phi (phi + 1) ... (phi + y - 1).
boost::multiprecision::cpp_int equivalence_class_size(std::uint32_t phi, std::uint32_t y);

// P(K_1 = k) for k = 1..m+1 when (K_1, ..., K_phi) is uniform over
// compositions of phi + m into phi positive parts.
std::vector<double> first_bridge_pmf(std::uint32_t phi, std::uint32_t m);

inline constexpr std::uint32_t kBridgeCap = 10;

struct BridgeSample {
    std::uint32_t phi = 0;
    std::uint32_t m = 0;  // |Y|
    std::uint32_t first = 0;  // K_1
};

struct UrnBucket {
    std::string label;
    std::size_t samples = 0;
    double chi2 = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
    bool degenerate = false;  // phi = 1 only, K_1 = m + 1 forced
};

struct UrnTestReport {
    std::vector<UrnBucket> buckets;
    std::size_t skipped_samples = 0;
    std::vector<std::string> notices;

    std::size_t retained() const;
    std::size_t passing(double alpha) const;
};

// Samples with phi >= 2 are sorted by m / phi and cut into groups of at least
// `min_bucket` samples; each group's K_1 counts (capped at kBridgeCap) are
// tested against the mixture of the exact per-sample laws.
UrnTestReport urn_bridge_test(std::span<const BridgeSample> samples, std::size_t min_bucket = 500);

struct UrnWalkOptions {
    std::uint32_t n = 2000;
    std::uint32_t d = 3;
    double delta = 0.1;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::size_t min_bucket = 500;
};

// Lazy biased walks stopped at the checkpoint, one fresh configuration per trial.
std::vector<BridgeSample> sample_bridges(const UrnWalkOptions& options);

// Null calibration: "observed" data drawn from the urn itself.
std::vector<BridgeSample> sample_urn_null(std::span<const BridgeSample> shapes, std::uint64_t seed);

void write_rootset_header(std::ostream& out);
void write_rootset_row(std::ostream& out, std::uint32_t t, double delta, const RootSetReport& report);
void write_urn_csv(std::ostream& out, const UrnTestReport& report);

}  // namespace covertime
