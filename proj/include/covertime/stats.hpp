#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace covertime {

// Sample accumulator whose statistics do not depend on insertion or merge
// order: values are sorted before any floating-point reduction.
class Summary {
public:
    void add(double value) { values_.push_back(value); }
    void merge(const Summary& other) { values_.insert(values_.end(), other.values_.begin(), other.values_.end()); }

    std::size_t count() const { return values_.size(); }
    double mean() const;
    double sd() const;  // sample standard deviation, 0 for fewer than two values
    double min() const;
    double max() const;
    double median() const;
    // Half-width of the normal-approximation confidence interval of the mean.
    double half_width(double confidence) const;
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> sorted() const;
    std::vector<double> values_;
};

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
    std::size_t bins = 0;
};

// Pearson goodness of fit of integer counts against category probabilities.
// Adjacent categories are pooled until each pooled bin expects at least
// `min_expected` observations.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probabilities,
                               double min_expected = 5.0);

double chi_square_survival(double statistic, double df);
double normal_quantile(double p);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test against Uniform(0, 1), asymptotic p-value.
KsResult ks_uniform(std::span<const double> values);

}  // namespace covertime
