#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fakestream/core.hpp"
#include "fakestream/stats.hpp"

namespace fakestream {

/// Gaussian naive Bayes with per-class running means and sample variances.
/// Features that appear after some samples were seen are back-filled as
/// zeros for those samples, matching the sparse "absent reads as 0" rule.
class GaussianNB {
public:
    explicit GaussianNB(double var_floor = 1e-9) : var_floor_(var_floor) {}

    void learn(std::span<const double> x, Label y, double w = 1.0) {
        if (!(w > 0.0)) return;
        grow(x.size());
        const std::size_t c = class_index(y);
        class_weight_[c] += w;
        for (std::size_t f = 0; f < stats_.size(); ++f) stats_[f][c].update(f < x.size() ? x[f] : 0.0, w);
    }

    /// Uniform before any sample; an unseen class gets probability 0.
    [[nodiscard]] ClassDist predict_proba(std::span<const double> x) const {
        const auto logp = log_joint(x);
        if (!logp) return uniform_dist();
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : *logp) mx = std::max(mx, v);
        ClassDist out{};
        for (std::size_t c = 0; c < kNumClasses; ++c)
            out[c] = std::isfinite((*logp)[c]) ? std::exp((*logp)[c] - mx) : 0.0;
        normalize(out);
        return out;
    }

    /// log P(c) + sum_f log N(x_f; mean_fc, var_fc); -inf for an unseen
    /// class, nullopt before any sample.
    [[nodiscard]] std::optional<ClassDist> log_joint(std::span<const double> x) const {
        double total = 0.0;
        for (double w : class_weight_) total += w;
        if (!(total > 0.0)) return std::nullopt;
        ClassDist logp{};
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (!(class_weight_[c] > 0.0)) {
                logp[c] = -std::numeric_limits<double>::infinity();
                continue;
            }
            logp[c] = std::log(class_weight_[c] / total);
            for (std::size_t f = 0; f < stats_.size(); ++f)
                logp[c] += stats_[f][c].log_pdf(f < x.size() ? x[f] : 0.0, var_floor_);
        }
        return logp;
    }

    [[nodiscard]] bool cold() const noexcept { return !(class_weight_[0] + class_weight_[1] > 0.0); }
    [[nodiscard]] const ClassDist& class_weights() const noexcept { return class_weight_; }
    [[nodiscard]] const GaussianEstimator& estimator(std::size_t feature, Label y) const {
        return stats_.at(feature)[class_index(y)];
    }
    [[nodiscard]] std::size_t dims() const noexcept { return stats_.size(); }

    template <class Archive>
    void serialize(Archive& ar) { ar(var_floor_, class_weight_, stats_); }

private:
    void grow(std::size_t dims) {
        while (stats_.size() < dims) {
            std::array<GaussianEstimator, kNumClasses> fresh{};
            for (std::size_t c = 0; c < kNumClasses; ++c)
                if (class_weight_[c] > 0.0) fresh[c].update(0.0, class_weight_[c]);
            stats_.push_back(fresh);
        }
    }

    double var_floor_;
    ClassDist class_weight_{};
    std::vector<std::array<GaussianEstimator, kNumClasses>> stats_;
};

}  // namespace fakestream
