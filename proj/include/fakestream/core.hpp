#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fakestream {

/// Class index layout used by every model: 0 = non-fake, 1 = fake.
enum class Label : std::uint8_t { non_fake = 0, fake = 1 };

inline constexpr std::size_t kNumClasses = 2;

using ClassDist = std::array<double, kNumClasses>;
using FeatureId = std::uint32_t;

[[nodiscard]] constexpr std::size_t class_index(Label label) noexcept { return static_cast<std::size_t>(label); }

[[nodiscard]] constexpr Label label_from_index(std::size_t index) noexcept {
    return index == 0 ? Label::non_fake : Label::fake;
}

[[nodiscard]] inline std::string_view label_name(Label label) noexcept {
    return label == Label::fake ? "fake" : "non_fake";
}

[[nodiscard]] inline std::optional<Label> parse_label(std::string_view text) noexcept {
    if (text == "fake") return Label::fake;
    if (text == "non_fake" || text == "non-fake") return Label::non_fake;
    return std::nullopt;
}

/// Lowest index wins ties.
[[nodiscard]] inline std::size_t argmax(const ClassDist& dist) noexcept {
    std::size_t best = 0;
    for (std::size_t c = 1; c < dist.size(); ++c)
        if (dist[c] > dist[best]) best = c;
    return best;
}

[[nodiscard]] inline ClassDist uniform_dist() noexcept {
    ClassDist d{};
    d.fill(1.0 / static_cast<double>(kNumClasses));
    return d;
}

/// Normalizes in place; an all-zero vector becomes uniform.
inline void normalize(ClassDist& dist) noexcept {
    double total = 0.0;
    for (double v : dist) total += v;
    if (!(total > 0.0)) {
        dist = uniform_dist();
        return;
    }
    for (double& v : dist) v /= total;
}

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace fakestream
