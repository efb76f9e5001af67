#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fakestream {

/// Weighted Welford accumulator.
class RunningStats {
public:
    void update(double x, double w = 1.0) noexcept {
        if (w <= 0.0) return;
        weight_ += w;
        const double delta = x - mean_;
        mean_ += delta * w / weight_;
        m2_ += w * delta * (x - mean_);
    }

    [[nodiscard]] double weight() const noexcept { return weight_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double m2() const noexcept { return m2_; }

    /// Divides by the total weight.
    [[nodiscard]] double population_variance() const noexcept {
        return weight_ > 0.0 ? std::max(0.0, m2_ / weight_) : 0.0;
    }

    /// Divides by weight - 1; zero until the weight exceeds one.
    [[nodiscard]] double sample_variance() const noexcept {
        return weight_ > 1.0 ? std::max(0.0, m2_ / (weight_ - 1.0)) : 0.0;
    }

    [[nodiscard]] double population_std() const noexcept { return std::sqrt(population_variance()); }

    template <class Archive>
    void serialize(Archive& ar) { ar(weight_, mean_, m2_); }

    friend bool operator==(const RunningStats&, const RunningStats&) = default;

private:
    double weight_ = 0.0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Univariate normal fitted incrementally, with observed range.
class GaussianEstimator {
public:
    void update(double x, double w = 1.0) noexcept {
        if (w <= 0.0) return;
        stats_.update(x, w);
        min_ = std::min(min_, x);
        max_ = std::max(max_, x);
    }

    [[nodiscard]] double weight() const noexcept { return stats_.weight(); }
    [[nodiscard]] double mean() const noexcept { return stats_.mean(); }
    [[nodiscard]] double variance() const noexcept { return stats_.sample_variance(); }
    [[nodiscard]] double stddev() const noexcept { return std::sqrt(variance()); }
    [[nodiscard]] double min() const noexcept { return min_; }
    [[nodiscard]] double max() const noexcept { return max_; }
    [[nodiscard]] const RunningStats& stats() const noexcept { return stats_; }

    /// P(X <= x); a degenerate distribution is a step at the mean.
    [[nodiscard]] double cdf(double x) const noexcept {
        const double sd = stddev();
        if (!(sd > 0.0)) return x >= mean() ? 1.0 : 0.0;
        return 0.5 * (1.0 + std::erf((x - mean()) / (sd * std::numbers::sqrt2)));
    }

    /// Log density with the variance floored at `var_floor`.
    [[nodiscard]] double log_pdf(double x, double var_floor) const noexcept {
        const double var = std::max(variance(), var_floor);
        const double d = x - mean();
        return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
    }

    template <class Archive>
    void serialize(Archive& ar) { ar(stats_, min_, max_); }

    friend bool operator==(const GaussianEstimator&, const GaussianEstimator&) = default;

private:
    RunningStats stats_;
    double min_ = std::numeric_limits<double>::infinity();
    double max_ = -std::numeric_limits<double>::infinity();
};

}  // namespace fakestream
