#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fakestream {

/// Seeded generator whose derived draws (uniform, Poisson, subsets) are
/// implemented here rather than through <random> distributions, so streams
/// are identical across standard libraries and survive snapshot round-trips.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r = engine_();
        while (r >= limit) r = engine_();
        return r % n;
    }

    /// Knuth's multiplication method; exact enough for lambda up to a few hundred.
    std::uint32_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda > 500.0) {
            // Normal approximation keeps the loop bounded for huge rates.
            const double u1 = std::max(uniform(), 1e-300);
            const double u2 = uniform();
            const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            const double v = std::round(lambda + std::sqrt(lambda) * z);
            return v < 0.0 ? 0u : static_cast<std::uint32_t>(v);
        }
        const double limit = std::exp(-lambda);
        double product = uniform();
        std::uint32_t k = 0;
        while (product > limit) {
            ++k;
            product *= uniform();
        }
        return k;
    }

    /// `count` distinct values from [0, n) in draw order (partial Fisher-Yates).
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t count) {
        std::vector<std::uint32_t> pool(n);
        for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
        if (count > n) count = n;
        for (std::uint32_t i = 0; i < count; ++i) {
            const auto j = i + static_cast<std::uint32_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(count);
        return pool;
    }

    [[nodiscard]] std::string state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void set_state(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
    }

    template <class Archive>
    void save(Archive& ar) const { ar(state()); }

    template <class Archive>
    void load(Archive& ar) {
        std::string s;
        ar(s);
        set_state(s);
    }

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; derives independent child seeds from one run seed.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace fakestream
