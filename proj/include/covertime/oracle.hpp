#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "covertime/multigraph.hpp"

namespace covertime {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr std::uint32_t kMaxEnumeratedPoints = 12;
inline constexpr std::uint32_t kMaxOracleEdges = 16;
inline constexpr std::uint32_t kMaxRationalEdges = 12;

// All (dn - 1)!! pairings of the configuration points.
std::vector<Pairing> enumerate_pairings(std::uint32_t n, std::uint32_t d);

// Expected cover times of the biased walk from a fixed start.
// edge[t-1] = E[C_E(t)], vertex[s-1] = E[C_V(s)].
template <typename Scalar>
struct CoverExpectations {
    std::vector<Scalar> edge;
    std::vector<Scalar> vertex;
};

// First-step analysis over (traversed-edge mask, position). Masks only gain
// bits, so they are solved from the full mask downwards; positions with no
// untraversed edge form a small linear system inside each mask.
CoverExpectations<Rational> exact_edge_process_rational(const Multigraph& g, Vertex start);
CoverExpectations<long double> exact_edge_process_float(const Multigraph& g, Vertex start);

struct ExactCover {
    std::vector<long double> edge;
    std::vector<long double> vertex;
    bool rational = false;
};

// Rational arithmetic up to kMaxRationalEdges edges, long double beyond.
ExactCover exact_edge_process(const Multigraph& g, Vertex start);

// Independent check: propagates the state distribution step by step and
// sums P(C > k) until the remaining mass drops below `mass_tol`.
ExactCover forward_edge_process(const Multigraph& g, Vertex start, long double mass_tol = 1e-18L);

// E_pi H(S) of the simple walk by a rational first-step solve.
inline constexpr std::uint32_t kMaxRationalHittingUnknowns = 64;
Rational exact_hitting_time_rational(const Multigraph& g, std::span<const Vertex> set);

// Exact law of the urn's final class sizes, by enumerating draw sequences.
std::map<std::vector<std::uint32_t>, Rational> urn_composition_law(std::uint32_t phi, std::uint32_t m);

enum class Denominator { MinusOne, PlusOne };  // 3n - 2t - 1 or 3n - 2t + 1

struct RecurrenceTable {
    std::uint32_t n = 0;
    Denominator denominator = Denominator::MinusOne;
    std::vector<double> x0, x1, x2, x3;  // index t = 0..3n/2

    double delta(std::uint32_t t) const { return 1.0 - 2.0 * t / (3.0 * n); }
    // n delta^{3/2}
    double closed_x3(std::uint32_t t) const;
    // (3n - 2t)(1 - delta^{1/2})
    double closed_x1(std::uint32_t t) const;
};

// Mean-field iteration of the expected red-degree counts for d = 3.
RecurrenceTable solve_recurrences(std::uint32_t n, Denominator denominator = Denominator::MinusOne);

void write_recurrence_csv(std::ostream& out, const RecurrenceTable& table, std::uint32_t stride = 1);

// Exhaustive lazy biased walks of exactly `steps` steps on the configuration
// model, grouped by contracted walk and Y. Each class must contain
// phi (phi+1) ... (phi+|Y|-1) walks of equal probability.
struct ClassCheck {
    std::uint64_t walks = 0;        // distinct walks with positive probability
    std::uint64_t classes = 0;
    std::uint64_t size_mismatches = 0;
    std::uint64_t unequal_classes = 0;
    std::uint64_t nontrivial_classes = 0;  // |Y| > 0 and phi > 1
    Rational total_probability = 0;
};

ClassCheck check_walk_classes(std::uint32_t n, std::uint32_t d, std::uint32_t steps);

}  // namespace covertime
