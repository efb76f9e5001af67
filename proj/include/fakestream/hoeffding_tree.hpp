#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fakestream/adwin.hpp"
#include "fakestream/core.hpp"
#include "fakestream/random.hpp"
#include "fakestream/stats.hpp"

namespace fakestream {

/// eps = sqrt(R^2 ln(1/delta) / (2n)).
[[nodiscard]] inline double hoeffding_bound(double range, double confidence, double n) noexcept {
    return std::sqrt(range * range * std::log(1.0 / confidence) / (2.0 * n));
}

/// Shannon entropy in bits of an unnormalized distribution.
[[nodiscard]] inline double entropy_bits(const ClassDist& dist) noexcept {
    double total = 0.0;
    for (double v : dist) total += v;
    if (!(total > 0.0)) return 0.0;
    double h = 0.0;
    for (double v : dist)
        if (v > 0.0) {
            const double p = v / total;
            h -= p * std::log2(p);
        }
    return h;
}

/// Information gain of a binary partition; -inf when fewer than two
/// branches carry more than `min_branch_fraction` of the weight.
[[nodiscard]] inline double info_gain(const ClassDist& pre, const ClassDist& left, const ClassDist& right,
                                      double min_branch_fraction) noexcept {
    double total = 0.0, wl = 0.0, wr = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        wl += left[c];
        wr += right[c];
    }
    total = wl + wr;
    if (!(total > 0.0)) return -std::numeric_limits<double>::infinity();
    const int big = (wl / total > min_branch_fraction) + (wr / total > min_branch_fraction);
    if (big < 2) return -std::numeric_limits<double>::infinity();
    return entropy_bits(pre) - (wl / total) * entropy_bits(left) - (wr / total) * entropy_bits(right);
}

/// Per-class Gaussian summaries of one numeric feature inside a leaf.
struct FeatureObserver {
    std::array<GaussianEstimator, kNumClasses> per_class{};

    void update(double x, std::size_t cls, double w) { per_class[cls].update(x, w); }

    template <class Archive>
    void serialize(Archive& ar) { ar(per_class); }

    friend bool operator==(const FeatureObserver&, const FeatureObserver&) = default;
};

struct SplitCandidate {
    FeatureId feature = 0;
    double threshold = 0.0;
    double merit = -std::numeric_limits<double>::infinity();
    ClassDist left{};
    ClassDist right{};
    bool is_null = true;
};

/// Best threshold among `n_points` evenly spaced values strictly inside the
/// observed range, with per-class mass split through the Gaussian CDF.
[[nodiscard]] inline SplitCandidate best_numeric_split(const FeatureObserver& obs, FeatureId feature,
                                                       const ClassDist& pre, std::size_t n_points,
                                                       double min_branch_fraction) {
    SplitCandidate best;
    best.feature = feature;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& est : obs.per_class)
        if (est.weight() > 0.0) {
            lo = std::min(lo, est.min());
            hi = std::max(hi, est.max());
        }
    if (!(lo < hi)) return best;
    const double step = (hi - lo) / static_cast<double>(n_points + 1);
    for (std::size_t i = 1; i <= n_points; ++i) {
        const double t = lo + step * static_cast<double>(i);
        ClassDist l{}, r{};
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const auto& est = obs.per_class[c];
            const double w = est.weight();
            if (!(w > 0.0)) continue;
            if (t < est.min()) {
                r[c] += w;
            } else if (t >= est.max()) {
                l[c] += w;
            } else {
                const double lw = est.cdf(t) * w;
                l[c] += lw;
                r[c] += w - lw;
            }
        }
        const double merit = info_gain(pre, l, r, min_branch_fraction);
        if (merit > best.merit) {
            best.merit = merit;
            best.threshold = t;
            best.left = l;
            best.right = r;
            best.is_null = false;
        }
    }
    return best;
}

enum class LeafPrediction : std::uint8_t { majority_class, naive_bayes, naive_bayes_adaptive };

struct TreeConfig {
    double grace_period = 200.0;
    double split_confidence = 1e-7;
    double tie_threshold = 0.5;
    std::size_t max_depth = 50;
    std::size_t max_size = 50;  ///< node count cap, 0 = unlimited
    std::size_t n_split_points = 10;
    double min_branch_fraction = 0.01;
    LeafPrediction leaf_prediction = LeafPrediction::naive_bayes_adaptive;
    double nb_var_floor = 1e-9;

    /// Adaptive (drift-aware) variant.
    bool adaptive = false;
    double adwin_delta = 0.002;
    std::size_t drift_window_threshold = 300;
    double switch_significance = 0.05;
    bool bootstrap_sampling = false;

    /// Random feature subset per leaf (0 = all features).
    std::size_t subspace_size = 0;
    bool record_splits = false;

    template <class Archive>
    void serialize(Archive& ar) {
        ar(grace_period, split_confidence, tie_threshold, max_depth, max_size, n_split_points, min_branch_fraction,
           leaf_prediction, nb_var_floor, adaptive, adwin_delta, drift_window_threshold, switch_significance,
           bootstrap_sampling, subspace_size, record_splits);
    }
};

struct TreeNode {
    std::uint64_t id = 0;
    std::uint32_t depth = 0;
    bool is_leaf = true;

    // Internal node test: x[feature] <= threshold goes left.
    FeatureId feature = 0;
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;

    // Leaf statistics. `subspace` empty means observers are indexed by feature id.
    ClassDist class_weights{};
    std::vector<FeatureObserver> observers;
    std::vector<FeatureId> subspace;
    bool subspace_fixed = false;
    double weight_at_last_attempt = 0.0;
    double mc_correct = 0.0;
    double nb_correct = 0.0;
    bool frozen = false;

    // Adaptive variant.
    Adwin error_detector;
    bool has_detector = false;
    std::unique_ptr<TreeNode> alternate;

    [[nodiscard]] double total_weight() const noexcept {
        double s = 0.0;
        for (double v : class_weights) s += v;
        return s;
    }

    [[nodiscard]] const TreeNode& child_for(std::span<const double> x) const {
        const double v = feature < x.size() ? x[feature] : 0.0;
        return v <= threshold ? *left : *right;
    }

    template <class Archive>
    void serialize(Archive& ar) {
        ar(id, depth, is_leaf, feature, threshold, left, right, class_weights, observers, subspace, subspace_fixed,
           weight_at_last_attempt, mc_correct, nb_correct, frozen, error_detector, has_detector, alternate);
    }
};

/// Statistics captured at the moment a leaf was split, sufficient to
/// recompute every candidate's merit.
struct SplitRecord {
    std::uint64_t node_id = 0;
    std::uint32_t depth = 0;
    double weight = 0.0;
    double epsilon = 0.0;
    double tie_threshold = 0.0;
    double best_merit = 0.0;
    double second_merit = 0.0;
    FeatureId feature = 0;
    double threshold = 0.0;
    ClassDist class_weights{};
    std::vector<FeatureId> observed_features;
    std::vector<FeatureObserver> observers;
};

struct AdaptiveStats {
    std::size_t alternates_created = 0;
    std::size_t switches = 0;
    std::size_t pruned = 0;

    template <class Archive>
    void serialize(Archive& ar) { ar(alternates_created, switches, pruned); }
};

/// Incremental decision tree with Hoeffding-bound split decisions over
/// Gaussian-approximated numeric features. With `adaptive` set, every node
/// monitors its error with ADWIN, grows an alternate subtree when the error
/// rises, and swaps it in once it is significantly better.
class HoeffdingTree {
public:
    explicit HoeffdingTree(TreeConfig config = {}, std::uint64_t seed = 0) : config_(config), rng_(seed) {
        root_ = new_leaf(0);
    }

    HoeffdingTree(const HoeffdingTree&) = delete;
    HoeffdingTree& operator=(const HoeffdingTree&) = delete;
    HoeffdingTree(HoeffdingTree&&) noexcept = default;
    HoeffdingTree& operator=(HoeffdingTree&&) noexcept = default;

    void learn(std::span<const double> x, Label y, double weight = 1.0) {
        if (!(weight > 0.0)) return;
        weight_seen_ += weight;
        learn_at(root_, x, class_index(y), weight);
    }

    [[nodiscard]] ClassDist predict_proba(std::span<const double> x) const { return leaf_prediction(leaf_for(x), x); }

    [[nodiscard]] const TreeNode& leaf_for(std::span<const double> x) const { return leaf_from(*root_, x); }

    /// Class distribution a given leaf emits for `x`.
    [[nodiscard]] ClassDist leaf_prediction(const TreeNode& leaf, std::span<const double> x) const {
        if (!(leaf.total_weight() > 0.0)) return uniform_dist();
        ClassDist mc = leaf.class_weights;
        normalize(mc);
        switch (config_.leaf_prediction) {
            case LeafPrediction::majority_class: return mc;
            case LeafPrediction::naive_bayes: return naive_bayes(leaf, x);
            case LeafPrediction::naive_bayes_adaptive:
                return leaf.mc_correct > leaf.nb_correct ? mc : naive_bayes(leaf, x);
        }
        return mc;
    }

    [[nodiscard]] const TreeNode& root() const noexcept { return *root_; }
    [[nodiscard]] const TreeConfig& config() const noexcept { return config_; }
    [[nodiscard]] double weight_seen() const noexcept { return weight_seen_; }
    [[nodiscard]] bool cold() const noexcept { return !(weight_seen_ > 0.0); }
    [[nodiscard]] const std::vector<SplitRecord>& split_log() const noexcept { return split_log_; }
    [[nodiscard]] const AdaptiveStats& adaptive_stats() const noexcept { return adaptive_stats_; }

    [[nodiscard]] std::size_t node_count() const { return count_nodes(*root_); }

    [[nodiscard]] std::size_t leaf_count() const {
        std::size_t n = 0;
        visit(*root_, [&](const TreeNode& node) { n += node.is_leaf; });
        return n;
    }

    [[nodiscard]] std::size_t height() const { return height_of(*root_); }

    /// Feature ids of internal nodes, most recently created first, without repeats.
    [[nodiscard]] std::vector<FeatureId> recent_split_features() const {
        std::vector<std::pair<std::uint64_t, FeatureId>> splits;
        visit(*root_, [&](const TreeNode& node) {
            if (!node.is_leaf) splits.emplace_back(node.id, node.feature);
        });
        std::sort(splits.begin(), splits.end(), [](auto& a, auto& b) { return a.first > b.first; });
        std::vector<FeatureId> out;
        for (auto [id, f] : splits)
            if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
        return out;
    }

    template <class Fn>
    void visit(const TreeNode& node, Fn&& fn) const {
        fn(node);
        if (!node.is_leaf) {
            visit(*node.left, fn);
            visit(*node.right, fn);
        }
    }

    template <class Archive>
    void serialize(Archive& ar) {
        ar(config_, rng_, root_, next_id_, weight_seen_, adaptive_stats_);
    }

private:
    [[nodiscard]] static const TreeNode& leaf_from(const TreeNode& start, std::span<const double> x) {
        const TreeNode* node = &start;
        while (!node->is_leaf) node = &node->child_for(x);
        return *node;
    }

    [[nodiscard]] static std::size_t count_nodes(const TreeNode& node) {
        return node.is_leaf ? 1 : 1 + count_nodes(*node.left) + count_nodes(*node.right);
    }

    [[nodiscard]] static std::size_t height_of(const TreeNode& node) {
        return node.is_leaf ? 0 : 1 + std::max(height_of(*node.left), height_of(*node.right));
    }

    [[nodiscard]] std::unique_ptr<TreeNode> new_leaf(std::uint32_t depth, ClassDist initial = {}) {
        auto leaf = std::make_unique<TreeNode>();
        leaf->id = next_id_++;
        leaf->depth = depth;
        leaf->class_weights = initial;
        leaf->weight_at_last_attempt = leaf->total_weight();
        if (config_.adaptive) {
            leaf->error_detector = Adwin(config_.adwin_delta);
            leaf->has_detector = true;
        }
        return leaf;
    }

    [[nodiscard]] ClassDist naive_bayes(const TreeNode& leaf, std::span<const double> x) const {
        const double total = leaf.total_weight();
        std::array<double, kNumClasses> logp{};
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (!(leaf.class_weights[c] > 0.0)) {
                logp[c] = -std::numeric_limits<double>::infinity();
                continue;
            }
            logp[c] = std::log(leaf.class_weights[c] / total);
        }
        for (std::size_t i = 0; i < leaf.observers.size(); ++i) {
            const FeatureId f = leaf.subspace.empty() ? static_cast<FeatureId>(i) : leaf.subspace[i];
            const double v = f < x.size() ? x[f] : 0.0;
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                const auto& est = leaf.observers[i].per_class[c];
                if (est.weight() > 0.0 && std::isfinite(logp[c])) logp[c] += est.log_pdf(v, config_.nb_var_floor);
            }
        }
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : logp) mx = std::max(mx, v);
        ClassDist out{};
        if (!std::isfinite(mx)) return uniform_dist();
        for (std::size_t c = 0; c < kNumClasses; ++c) out[c] = std::isfinite(logp[c]) ? std::exp(logp[c] - mx) : 0.0;
        normalize(out);
        return out;
    }

    void fix_subspace(TreeNode& leaf, std::size_t dims) {
        leaf.subspace_fixed = true;
        const std::size_t m = config_.subspace_size;
        if (m == 0 || m >= dims) return;
        auto picked = rng_.sample_without_replacement(static_cast<std::uint32_t>(dims), static_cast<std::uint32_t>(m));
        std::sort(picked.begin(), picked.end());
        leaf.subspace.assign(picked.begin(), picked.end());
        leaf.observers.resize(leaf.subspace.size());
    }

    void learn_leaf(std::unique_ptr<TreeNode>& slot, std::span<const double> x, std::size_t y, double w) {
        TreeNode& leaf = *slot;
        if (config_.adaptive && config_.bootstrap_sampling) {
            const auto k = rng_.poisson(1.0);
            if (k == 0) return;
            w *= static_cast<double>(k);
        }
        if (!leaf.subspace_fixed) fix_subspace(leaf, x.size());
        if (leaf.total_weight() > 0.0) {
            if (argmax(leaf.class_weights) == y) leaf.mc_correct += w;
            if (config_.leaf_prediction == LeafPrediction::naive_bayes_adaptive && argmax(naive_bayes(leaf, x)) == y)
                leaf.nb_correct += w;
        }
        leaf.class_weights[y] += w;
        if (leaf.subspace.empty()) {
            if (leaf.observers.size() < x.size()) leaf.observers.resize(x.size());
            for (std::size_t f = 0; f < x.size(); ++f) leaf.observers[f].update(x[f], y, w);
        } else {
            for (std::size_t i = 0; i < leaf.subspace.size(); ++i) {
                const FeatureId f = leaf.subspace[i];
                leaf.observers[i].update(f < x.size() ? x[f] : 0.0, y, w);
            }
        }
        if (!leaf.frozen && leaf.total_weight() - leaf.weight_at_last_attempt >= config_.grace_period) {
            attempt_split(slot);
            if (slot->is_leaf) slot->weight_at_last_attempt = slot->total_weight();
        }
    }

    void attempt_split(std::unique_ptr<TreeNode>& slot) {
        TreeNode& leaf = *slot;
        int classes_present = 0;
        for (double v : leaf.class_weights) classes_present += v > 0.0;
        if (classes_present < 2) return;

        std::vector<SplitCandidate> candidates;
        candidates.reserve(leaf.observers.size() + 1);
        candidates.push_back(SplitCandidate{});  // null split, merit 0
        candidates.back().merit = 0.0;
        for (std::size_t i = 0; i < leaf.observers.size(); ++i) {
            const FeatureId f = leaf.subspace.empty() ? static_cast<FeatureId>(i) : leaf.subspace[i];
            auto cand = best_numeric_split(leaf.observers[i], f, leaf.class_weights, config_.n_split_points,
                                           config_.min_branch_fraction);
            if (!cand.is_null) candidates.push_back(cand);
        }
        // Descending merit; lower feature id first on equal merit.
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const SplitCandidate& a, const SplitCandidate& b) { return a.merit > b.merit; });
        const auto& best = candidates[0];
        const double second = candidates.size() > 1 ? candidates[1].merit : 0.0;
        const double n = leaf.total_weight();
        const double eps = hoeffding_bound(1.0, config_.split_confidence, n);
        if (best.is_null || !(best.merit - second > eps || eps < config_.tie_threshold)) return;

        if (leaf.depth >= config_.max_depth || (config_.max_size > 0 && count_nodes(*root_) + 2 > config_.max_size)) {
            leaf.frozen = true;
            return;
        }

        if (config_.record_splits) {
            SplitRecord rec;
            rec.node_id = leaf.id;
            rec.depth = leaf.depth;
            rec.weight = n;
            rec.epsilon = eps;
            rec.tie_threshold = config_.tie_threshold;
            rec.best_merit = best.merit;
            rec.second_merit = second;
            rec.feature = best.feature;
            rec.threshold = best.threshold;
            rec.class_weights = leaf.class_weights;
            for (std::size_t i = 0; i < leaf.observers.size(); ++i)
                rec.observed_features.push_back(leaf.subspace.empty() ? static_cast<FeatureId>(i) : leaf.subspace[i]);
            rec.observers = leaf.observers;
            split_log_.push_back(std::move(rec));
        }

        leaf.is_leaf = false;
        leaf.feature = best.feature;
        leaf.threshold = best.threshold;
        leaf.left = new_leaf(leaf.depth + 1, best.left);
        leaf.right = new_leaf(leaf.depth + 1, best.right);
        leaf.observers.clear();
        leaf.observers.shrink_to_fit();
        leaf.subspace.clear();
    }

    void learn_at(std::unique_ptr<TreeNode>& slot, std::span<const double> x, std::size_t y, double w) {
        TreeNode& node = *slot;
        if (config_.adaptive) {
            const bool wrong = argmax(leaf_prediction(leaf_from(node, x), x)) != y;
            const double old_error = node.error_detector.estimation();
            bool change = node.error_detector.update(wrong ? 1.0 : 0.0);
            if (change && old_error > node.error_detector.estimation()) change = false;

            if (!node.is_leaf) {
                if (change) {
                    node.alternate = new_leaf(node.depth);
                    ++adaptive_stats_.alternates_created;
                } else if (node.alternate && node.alternate->error_detector.width() > 0) {
                    const auto& alt_det = node.alternate->error_detector;
                    const auto& own_det = node.error_detector;
                    if (own_det.width() > config_.drift_window_threshold &&
                        alt_det.width() > config_.drift_window_threshold) {
                        const double old_rate = own_det.estimation();
                        const double alt_rate = alt_det.estimation();
                        const double fn = 1.0 / static_cast<double>(alt_det.width()) +
                                          1.0 / static_cast<double>(own_det.width());
                        const double bound = std::sqrt(2.0 * old_rate * (1.0 - old_rate) *
                                                       std::log(2.0 / config_.switch_significance) * fn);
                        if (bound < old_rate - alt_rate) {
                            auto replacement = std::move(node.alternate);
                            slot = std::move(replacement);  // destroys the old branch
                            ++adaptive_stats_.switches;
                            learn_at(slot, x, y, w);
                            return;
                        }
                        if (bound < alt_rate - old_rate) {
                            node.alternate.reset();
                            ++adaptive_stats_.pruned;
                        }
                    }
                }
                if (node.alternate) learn_at(node.alternate, x, y, w);
            }
        }
        if (node.is_leaf) {
            learn_leaf(slot, x, y, w);
            return;
        }
        const double v = node.feature < x.size() ? x[node.feature] : 0.0;
        learn_at(v <= node.threshold ? node.left : node.right, x, y, w);
    }

    TreeConfig config_;
    Rng rng_;
    std::unique_ptr<TreeNode> root_;
    std::uint64_t next_id_ = 0;
    double weight_seen_ = 0.0;
    AdaptiveStats adaptive_stats_;
    std::vector<SplitRecord> split_log_;  // not persisted in snapshots
};

}  // namespace fakestream
