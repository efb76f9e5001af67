#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fakestream/adwin.hpp"
#include "fakestream/core.hpp"
#include "fakestream/hoeffding_tree.hpp"
#include "fakestream/random.hpp"

namespace fakestream {

struct ForestConfig {
    std::size_t n_models = 200;
    std::size_t max_features = 50;  ///< random subset size per leaf
    double lambda = 50.0;           ///< Poisson resampling rate
    double warning_delta = 0.01;
    double drift_delta = 0.002;
    bool resampling = true;
    bool drift_detection = true;
    TreeConfig tree = default_tree();

    static TreeConfig default_tree() {
        TreeConfig t;
        t.tie_threshold = 0.05;
        t.max_size = 0;
        return t;
    }

    template <class Archive>
    void serialize(Archive& ar) {
        ar(n_models, max_features, lambda, warning_delta, drift_delta, resampling, drift_detection, tree);
    }
};

/// Online bagging of Hoeffding trees with per-leaf random feature subsets.
/// Each member has a warning detector that starts a background tree and a
/// drift detector that swaps the background tree in (or restarts the member).
class AdaptiveRandomForest {
public:
    struct Member {
        std::unique_ptr<HoeffdingTree> tree;
        std::unique_ptr<HoeffdingTree> background;
        DriftMonitor monitor;
        Rng rng;
        std::size_t warnings = 0;
        std::size_t drifts = 0;

        template <class Archive>
        void serialize(Archive& ar) { ar(tree, background, monitor, rng, warnings, drifts); }
    };

    AdaptiveRandomForest() : AdaptiveRandomForest(ForestConfig{}, 0) {}

    explicit AdaptiveRandomForest(ForestConfig config, std::uint64_t seed = 0) : config_(config) {
        config_.tree.subspace_size = config_.max_features;
        members_.resize(config_.n_models);
        for (std::size_t i = 0; i < members_.size(); ++i) {
            auto& m = members_[i];
            m.rng = Rng(mix_seed(seed, i));
            m.tree = make_tree(m.rng);
            m.monitor = DriftMonitor(config_.warning_delta, config_.drift_delta);
        }
    }

    void learn(std::span<const double> x, Label y) {
        ++samples_seen_;
        const std::size_t cls = class_index(y);
        for (auto& m : members_) {
            const bool wrong = argmax(m.tree->predict_proba(x)) != cls;
            const std::uint32_t k = config_.resampling ? m.rng.poisson(config_.lambda) : 1u;
            if (k == 0) continue;
            m.tree->learn(x, y, static_cast<double>(k));
            if (m.background) m.background->learn(x, y, static_cast<double>(k));
            if (!config_.drift_detection) continue;
            switch (m.monitor.update(wrong ? 1.0 : 0.0)) {
                case DriftSignal::stable: break;
                case DriftSignal::warning:
                    ++m.warnings;
                    if (!m.background) m.background = make_tree(m.rng);
                    break;
                case DriftSignal::drift:
                    ++m.drifts;
                    m.tree = m.background ? std::move(m.background) : make_tree(m.rng);
                    m.background.reset();
                    m.monitor.reset();
                    break;
            }
        }
    }

    /// Unweighted mean of the member distributions.
    [[nodiscard]] ClassDist predict_proba(std::span<const double> x) const {
        ClassDist sum{};
        for (const auto& m : members_) {
            const auto p = m.tree->predict_proba(x);
            for (std::size_t c = 0; c < kNumClasses; ++c) sum[c] += p[c];
        }
        if (members_.empty()) return uniform_dist();
        for (auto& v : sum) v /= static_cast<double>(members_.size());
        return sum;
    }

    /// Member whose own prediction agrees with `label` with the highest
    /// confidence (lowest index on ties); falls back to the most confident member.
    [[nodiscard]] std::size_t explaining_member(std::span<const double> x, Label label) const {
        const std::size_t want = class_index(label);
        std::optional<std::size_t> best_agree;
        double agree_conf = -1.0;
        std::size_t best_any = 0;
        double any_conf = -1.0;
        for (std::size_t i = 0; i < members_.size(); ++i) {
            const auto p = members_[i].tree->predict_proba(x);
            const std::size_t a = argmax(p);
            if (p[a] > any_conf) {
                any_conf = p[a];
                best_any = i;
            }
            if (a == want && p[a] > agree_conf) {
                agree_conf = p[a];
                best_agree = i;
            }
        }
        return best_agree.value_or(best_any);
    }

    [[nodiscard]] const HoeffdingTree& member_tree(std::size_t i) const { return *members_.at(i).tree; }
    [[nodiscard]] const Member& member(std::size_t i) const { return members_.at(i); }
    [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
    [[nodiscard]] std::uint64_t samples_seen() const noexcept { return samples_seen_; }
    [[nodiscard]] bool cold() const noexcept { return samples_seen_ == 0; }
    [[nodiscard]] const ForestConfig& config() const noexcept { return config_; }

    [[nodiscard]] std::size_t total_drifts() const {
        std::size_t n = 0;
        for (const auto& m : members_) n += m.drifts;
        return n;
    }

    template <class Archive>
    void serialize(Archive& ar) { ar(config_, members_, samples_seen_); }

private:
    std::unique_ptr<HoeffdingTree> make_tree(Rng& rng) const {
        return std::make_unique<HoeffdingTree>(config_.tree, rng.next());
    }

    ForestConfig config_;
    std::vector<Member> members_;
    std::uint64_t samples_seen_ = 0;
};

}  // namespace fakestream
