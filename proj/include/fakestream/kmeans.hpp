#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace fakestream {

/// Sequential k-means: the first k distinct inputs seed the centroids and
/// each centroid tracks the running mean of the points assigned to it
/// (learning rate 1/count). Vectors of different lengths are compared with
/// missing coordinates read as 0.
class OnlineKMeans {
public:
    explicit OnlineKMeans(std::size_t k = 10) : k_(k == 0 ? 1 : k) {}

    [[nodiscard]] static double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
        const std::size_t n = std::max(a.size(), b.size());
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = i < a.size() ? a[i] : 0.0;
            const double bv = i < b.size() ? b[i] : 0.0;
            d += (av - bv) * (av - bv);
        }
        return d;
    }

    /// Nearest centroid (lowest id on ties). While fewer than k centroids
    /// exist, an input that matches none of them exactly gets the next id.
    [[nodiscard]] std::size_t assign(std::span<const double> x) const {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids_.size(); ++c) {
            const double d = squared_distance(x, centroids_[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        if (centroids_.size() < k_ && !(best_d == 0.0)) return centroids_.size();
        return best;
    }

    /// centroid += (x - centroid) / count; an id equal to the number of
    /// centroids seeds a new one at x.
    void update(std::span<const double> x, std::size_t cluster) {
        if (cluster == centroids_.size() && centroids_.size() < k_) {
            centroids_.emplace_back(x.begin(), x.end());
            counts_.push_back(1);
            return;
        }
        auto& c = centroids_.at(cluster);
        if (c.size() < x.size()) c.resize(x.size(), 0.0);
        const double n = static_cast<double>(++counts_[cluster]);
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double v = i < x.size() ? x[i] : 0.0;
            c[i] += (v - c[i]) / n;
        }
    }

    [[nodiscard]] std::size_t k() const noexcept { return k_; }
    [[nodiscard]] std::size_t initialized() const noexcept { return centroids_.size(); }
    [[nodiscard]] const std::vector<double>& centroid(std::size_t c) const { return centroids_.at(c); }
    [[nodiscard]] std::uint64_t count(std::size_t c) const { return c < counts_.size() ? counts_[c] : 0; }

    template <class Archive>
    void serialize(Archive& ar) { ar(k_, centroids_, counts_); }

private:
    std::size_t k_;
    std::vector<std::vector<double>> centroids_;
    std::vector<std::uint64_t> counts_;
};

}  // namespace fakestream
