#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fakestream {

/// Adaptive windowing change detector over values in [0, 1].
///
/// The window is an exponential histogram: row i holds up to
/// `max_buckets` buckets of 2^i values each, oldest first. Every `clock`
/// inserts the detector scans all split points (oldest to newest) and drops
/// the oldest bucket while some split separates two sub-windows whose means
/// differ by more than the bound
///   eps = sqrt(2 m v dd) + 2/3 dd m,   dd = ln(2 ln(n) / delta),
///   m = 1/(n0 - L + 1) + 1/(n1 - L + 1)
/// with v the window variance and L the minimum sub-window length.
class Adwin {
public:
    explicit Adwin(double delta = 0.002, std::size_t clock = 32, std::size_t max_buckets = 5,
                   std::size_t min_window_length = 5, std::size_t grace_period = 10)
        : delta_(delta), clock_(clock), max_buckets_(max_buckets), min_len_(min_window_length), grace_(grace_period) {}

    /// Returns true when a change was detected (and the window truncated).
    bool update(double value) {
        insert(value);
        return detect();
    }

    [[nodiscard]] double estimation() const noexcept { return width_ > 0 ? total_ / static_cast<double>(width_) : 0.0; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] double variance() const noexcept { return width_ > 0 ? variance_ / static_cast<double>(width_) : 0.0; }
    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] std::size_t detections() const noexcept { return detections_; }

    template <class Archive>
    void serialize(Archive& ar) {
        ar(delta_, clock_, max_buckets_, min_len_, grace_, rows_, width_, total_, variance_, tick_, detections_);
    }

    friend bool operator==(const Adwin&, const Adwin&) = default;

    struct Bucket {
        double total = 0.0;
        double variance = 0.0;

        template <class Archive>
        void serialize(Archive& ar) { ar(total, variance); }

        friend bool operator==(const Bucket&, const Bucket&) = default;
    };

private:
    [[nodiscard]] static double row_size(std::size_t row) noexcept { return std::ldexp(1.0, static_cast<int>(row)); }

    void insert(double value) {
        if (rows_.empty()) rows_.emplace_back();
        rows_[0].push_back({value, 0.0});
        ++width_;
        if (width_ > 1) {
            const double w = static_cast<double>(width_);
            const double d = value - total_ / (w - 1.0);
            variance_ += (w - 1.0) * d * d / w;
        }
        total_ += value;
        compress();
    }

    void compress() {
        for (std::size_t row = 0; row < rows_.size(); ++row) {
            if (rows_[row].size() <= max_buckets_) break;
            if (row + 1 == rows_.size()) rows_.emplace_back();
            const Bucket a = rows_[row][0];
            const Bucket b = rows_[row][1];
            const double n = row_size(row);
            const double d = a.total / n - b.total / n;
            const Bucket merged{a.total + b.total, a.variance + b.variance + n * n * d * d / (2.0 * n)};
            rows_[row].erase(rows_[row].begin(), rows_[row].begin() + 2);
            rows_[row + 1].push_back(merged);
        }
    }

    [[nodiscard]] bool cut(double n0, double n1, double abs_diff) const {
        const double n = static_cast<double>(width_);
        const double dd = std::log(2.0 * std::log(n) / delta_);
        const double v = variance();
        const double lm = static_cast<double>(min_len_);
        const double m = 1.0 / (n0 - lm + 1.0) + 1.0 / (n1 - lm + 1.0);
        const double eps = std::sqrt(2.0 * m * v * dd) + 2.0 / 3.0 * dd * m;
        return std::fabs(abs_diff) > eps;
    }

    /// Drops the oldest bucket; returns the number of values removed.
    double drop_oldest() {
        auto& row = rows_.back();
        const std::size_t row_idx = rows_.size() - 1;
        const double n = row_size(row_idx);
        const Bucket b = row.front();
        width_ -= static_cast<std::size_t>(n);
        total_ -= b.total;
        if (width_ > 0) {
            const double w = static_cast<double>(width_);
            const double mu = b.total / n;
            const double mu_window = total_ / w;
            variance_ -= b.variance + n * w * (mu - mu_window) * (mu - mu_window) / (n + w);
            if (variance_ < 0.0) variance_ = 0.0;
        } else {
            variance_ = 0.0;
            total_ = 0.0;
        }
        row.erase(row.begin());
        if (row.empty()) rows_.pop_back();
        return n;
    }

    bool detect() {
        bool changed = false;
        ++tick_;
        if (tick_ % clock_ != 0 || width_ <= grace_) return false;
        bool reduce = true;
        while (reduce && width_ > 0) {
            reduce = false;
            double n0 = 0.0, n1 = static_cast<double>(width_);
            double u0 = 0.0, u1 = total_;
            bool stop = false;
            for (std::size_t r = rows_.size(); r-- > 0 && !stop;) {
                const double n2 = row_size(r);
                const auto& row = rows_[r];
                for (std::size_t k = 0; k < row.size(); ++k) {
                    n0 += n2;
                    n1 -= n2;
                    u0 += row[k].total;
                    u1 -= row[k].total;
                    if (r == 0 && k + 1 == row.size()) {
                        stop = true;
                        break;
                    }
                    if (n1 >= static_cast<double>(min_len_) && n0 >= static_cast<double>(min_len_) &&
                        cut(n0, n1, u0 / n0 - u1 / n1)) {
                        reduce = true;
                        changed = true;
                        drop_oldest();
                        stop = true;
                        break;
                    }
                }
            }
        }
        if (changed) ++detections_;
        return changed;
    }

    double delta_;
    std::size_t clock_;
    std::size_t max_buckets_;
    std::size_t min_len_;
    std::size_t grace_;
    std::vector<std::vector<Bucket>> rows_;  // rows_[i]: buckets of 2^i values, oldest first
    std::size_t width_ = 0;
    double total_ = 0.0;
    double variance_ = 0.0;  // sum of squared deviations over the window
    std::uint64_t tick_ = 0;
    std::size_t detections_ = 0;
};

enum class DriftSignal : std::uint8_t { stable, warning, drift };

/// Paired detectors: a looser one raising warnings, a stricter one confirming drift.
class DriftMonitor {
public:
    DriftMonitor() = default;
    DriftMonitor(double warning_delta, double drift_delta) : warning_(warning_delta), drift_(drift_delta) {}

    DriftSignal update(double error) {
        const bool warn = warning_.update(error);
        const bool drift = drift_.update(error);
        if (drift) return DriftSignal::drift;
        if (warn) return DriftSignal::warning;
        return DriftSignal::stable;
    }

    void reset() {
        warning_ = Adwin(warning_.delta());
        drift_ = Adwin(drift_.delta());
    }

    [[nodiscard]] const Adwin& drift_detector() const noexcept { return drift_; }
    [[nodiscard]] const Adwin& warning_detector() const noexcept { return warning_; }

    template <class Archive>
    void serialize(Archive& ar) { ar(warning_, drift_); }

private:
    Adwin warning_{0.01};
    Adwin drift_{0.002};
};

}  // namespace fakestream
