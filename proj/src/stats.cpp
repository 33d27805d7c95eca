#include "covertime/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace covertime {

std::vector<double> Summary::sorted() const {
    std::vector<double> v = values_;
    std::ranges::sort(v);
    return v;
}

double Summary::mean() const {
    if (values_.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto v = sorted();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double Summary::sd() const {
    if (values_.size() < 2) return 0.0;
    const auto v = sorted();
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double Summary::min() const {
    if (values_.empty()) return std::numeric_limits<double>::quiet_NaN();
    return *std::ranges::min_element(values_);
}

double Summary::max() const {
    if (values_.empty()) return std::numeric_limits<double>::quiet_NaN();
    return *std::ranges::max_element(values_);
}

double Summary::median() const {
    if (values_.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto v = sorted();
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

double Summary::half_width(double confidence) const {
    if (values_.size() < 2) return std::numeric_limits<double>::infinity();
    const double z = normal_quantile(0.5 + confidence / 2.0);
    return z * sd() / std::sqrt(static_cast<double>(values_.size()));
}

double chi_square_survival(double statistic, double df) {
    if (df <= 0) return 1.0;
    if (statistic <= 0) return 1.0;
    boost::math::chi_squared dist(df);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal(), p);
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probabilities,
                               double min_expected) {
    if (observed.size() != probabilities.size()) throw std::invalid_argument("chi_square_gof: size mismatch");
    const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
    const double mass = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    std::vector<double> obs_bins, exp_bins;
    double o = 0.0, e = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o += static_cast<double>(observed[i]);
        e += total * probabilities[i] / mass;
        if (e >= min_expected) {
            obs_bins.push_back(o);
            exp_bins.push_back(e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (exp_bins.empty()) {
            obs_bins.push_back(o);
            exp_bins.push_back(e);
        } else {
            obs_bins.back() += o;
            exp_bins.back() += e;
        }
    }
    ChiSquareResult r;
    r.bins = obs_bins.size();
    for (std::size_t i = 0; i < obs_bins.size(); ++i) {
        if (exp_bins[i] > 0.0) r.statistic += (obs_bins[i] - exp_bins[i]) * (obs_bins[i] - exp_bins[i]) / exp_bins[i];
    }
    r.df = r.bins > 0 ? r.bins - 1 : 0;
    r.p_value = chi_square_survival(r.statistic, static_cast<double>(r.df));
    return r;
}

KsResult ks_uniform(std::span<const double> values) {
    KsResult r;
    if (values.empty()) return r;
    std::vector<double> v(values.begin(), values.end());
    std::ranges::sort(v);
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = std::clamp(v[i], 0.0, 1.0);
        r.statistic = std::max({r.statistic, (static_cast<double>(i) + 1.0) / n - x, x - static_cast<double>(i) / n});
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * r.statistic;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    r.p_value = std::clamp(sum, 0.0, 1.0);
    if (lambda < 0.3) r.p_value = 1.0;
    return r;
}

}  // namespace covertime
