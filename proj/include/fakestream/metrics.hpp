#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "fakestream/core.hpp"

namespace fakestream {

/// confusion[actual][predicted]
using Confusion = std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>;

struct Metrics {
    std::uint64_t samples = 0;
    double accuracy = 0.0;
    double f_fake = 0.0;
    double f_non_fake = 0.0;
    double macro_f = 0.0;

    friend bool operator==(const Metrics&, const Metrics&) = default;

    template <class Archive>
    void serialize(Archive& ar) { ar(samples, accuracy, f_fake, f_non_fake, macro_f); }
};

/// F score of one class; 0 when precision and recall are both undefined or zero.
[[nodiscard]] inline double class_f(const Confusion& m, std::size_t c) noexcept {
    const double tp = static_cast<double>(m[c][c]);
    double predicted = 0.0, actual = 0.0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
        predicted += static_cast<double>(m[k][c]);
        actual += static_cast<double>(m[c][k]);
    }
    const double denom = predicted + actual;
    return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

[[nodiscard]] inline std::optional<Metrics> metrics_from(const Confusion& m) {
    Metrics out;
    std::uint64_t correct = 0;
    for (std::size_t a = 0; a < kNumClasses; ++a)
        for (std::size_t p = 0; p < kNumClasses; ++p) {
            out.samples += m[a][p];
            if (a == p) correct += m[a][p];
        }
    if (out.samples == 0) return std::nullopt;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(out.samples);
    out.f_fake = class_f(m, class_index(Label::fake));
    out.f_non_fake = class_f(m, class_index(Label::non_fake));
    out.macro_f = (out.f_fake + out.f_non_fake) / 2.0;
    return out;
}

enum class WindowMode : std::uint8_t { full, fraction, count };

struct WindowSpec {
    WindowMode mode = WindowMode::full;
    double fraction = 1.0;
    std::uint64_t count = 0;

    /// Capacity for a stream of `stream_size` events (0 = unbounded).
    [[nodiscard]] std::uint64_t capacity(std::uint64_t stream_size) const {
        switch (mode) {
            case WindowMode::full: return 0;
            case WindowMode::count: return count;
            case WindowMode::fraction:
                return std::max<std::uint64_t>(
                    1, static_cast<std::uint64_t>(std::ceil(fraction * static_cast<double>(stream_size) - 1e-9)));
        }
        return 0;
    }

    template <class Archive>
    void serialize(Archive& ar) { ar(mode, fraction, count); }

    [[nodiscard]] std::string describe() const {
        switch (mode) {
            case WindowMode::full: return "full";
            case WindowMode::count: return "count:" + std::to_string(count);
            case WindowMode::fraction: {
                nlohmann::json j = fraction;
                return "fraction:" + j.dump();
            }
        }
        return "full";
    }
};

/// Sliding window of (predicted, actual) pairs with incremental confusion counts.
class MetricsWindow {
public:
    explicit MetricsWindow(std::uint64_t capacity = 0) : capacity_(capacity) {}

    void add(Label predicted, Label actual) {
        pairs_.emplace_back(predicted, actual);
        ++confusion_[class_index(actual)][class_index(predicted)];
        if (capacity_ > 0 && pairs_.size() > capacity_) {
            const auto [p, a] = pairs_.front();
            --confusion_[class_index(a)][class_index(p)];
            pairs_.pop_front();
        }
    }

    [[nodiscard]] const Confusion& confusion() const noexcept { return confusion_; }
    [[nodiscard]] const std::deque<std::pair<Label, Label>>& pairs() const noexcept { return pairs_; }
    [[nodiscard]] std::uint64_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] std::size_t size() const noexcept { return pairs_.size(); }

    template <class Archive>
    void serialize(Archive& ar) { ar(capacity_, pairs_, confusion_); }

private:
    std::uint64_t capacity_;
    std::deque<std::pair<Label, Label>> pairs_;
    Confusion confusion_{};
};

[[nodiscard]] inline std::optional<Metrics> compute_metrics(const MetricsWindow& window) {
    return metrics_from(window.confusion());
}

/// Confusion matrix rebuilt from the stored pairs.
[[nodiscard]] inline Confusion recount(const MetricsWindow& window) {
    Confusion m{};
    for (const auto& [p, a] : window.pairs()) ++m[class_index(a)][class_index(p)];
    return m;
}

struct RunReport {
    std::string classifier;
    std::string feature_set;
    std::string window;
    std::uint64_t samples = 0;
    std::uint64_t window_samples = 0;
    std::uint64_t cold_predictions = 0;
    std::optional<Metrics> metrics;

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j = {{"classifier", classifier},
                            {"feature_set", feature_set},
                            {"window", window},
                            {"samples", samples},
                            {"window_samples", window_samples},
                            {"cold_predictions", cold_predictions}};
        if (metrics) {
            j["accuracy"] = metrics->accuracy;
            j["macro_f"] = metrics->macro_f;
            j["f_fake"] = metrics->f_fake;
            j["f_non_fake"] = metrics->f_non_fake;
        } else {
            j["accuracy"] = nullptr;
            j["macro_f"] = nullptr;
            j["f_fake"] = nullptr;
            j["f_non_fake"] = nullptr;
        }
        return j;
    }
};

}  // namespace fakestream
