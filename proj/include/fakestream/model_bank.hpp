#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fakestream/core.hpp"
#include "fakestream/forest.hpp"
#include "fakestream/hoeffding_tree.hpp"
#include "fakestream/kmeans.hpp"
#include "fakestream/naive_bayes.hpp"
#include "fakestream/random.hpp"

namespace fakestream {

enum class ClassifierFamily : std::uint8_t { majority, gnb, htc, hatc, arfc };

[[nodiscard]] inline std::string_view family_name(ClassifierFamily f) noexcept {
    switch (f) {
        case ClassifierFamily::majority: return "majority";
        case ClassifierFamily::gnb: return "gnb";
        case ClassifierFamily::htc: return "htc";
        case ClassifierFamily::hatc: return "hatc";
        case ClassifierFamily::arfc: return "arfc";
    }
    return "arfc";
}

[[nodiscard]] inline std::optional<ClassifierFamily> parse_family(std::string_view s) noexcept {
    for (auto f : {ClassifierFamily::majority, ClassifierFamily::gnb, ClassifierFamily::htc, ClassifierFamily::hatc,
                   ClassifierFamily::arfc})
        if (family_name(f) == s) return f;
    return std::nullopt;
}

/// Always predicts one fixed class.
class ConstantClassifier {
public:
    explicit ConstantClassifier(Label label = Label::non_fake) : label_(label) {}

    void learn(std::span<const double>, Label, double = 1.0) { ++seen_; }

    [[nodiscard]] ClassDist predict_proba(std::span<const double>) const {
        ClassDist d{};
        d[class_index(label_)] = 1.0;
        return d;
    }

    [[nodiscard]] bool cold() const noexcept { return false; }
    [[nodiscard]] Label label() const noexcept { return label_; }

    template <class Archive>
    void serialize(Archive& ar) { ar(label_, seen_); }

private:
    Label label_;
    std::uint64_t seen_ = 0;
};

[[nodiscard]] inline TreeConfig htc_defaults() { return TreeConfig{}; }

[[nodiscard]] inline TreeConfig hatc_defaults() {
    TreeConfig t;
    t.max_size = 200;
    t.adaptive = true;
    return t;
}

struct ModelConfig {
    ClassifierFamily family = ClassifierFamily::arfc;
    std::size_t k = 10;
    Label majority_label = Label::non_fake;
    double nb_var_floor = 1e-9;
    TreeConfig htc = htc_defaults();
    TreeConfig hatc = hatc_defaults();
    ForestConfig arfc{};

    template <class Archive>
    void serialize(Archive& ar) { ar(family, k, majority_label, nb_var_floor, htc, hatc, arfc); }
};

using AnyClassifier = std::variant<ConstantClassifier, GaussianNB, HoeffdingTree, AdaptiveRandomForest>;

[[nodiscard]] inline AnyClassifier make_classifier(const ModelConfig& cfg, std::uint64_t seed) {
    switch (cfg.family) {
        case ClassifierFamily::majority: return ConstantClassifier(cfg.majority_label);
        case ClassifierFamily::gnb: return GaussianNB(cfg.nb_var_floor);
        case ClassifierFamily::htc: return HoeffdingTree(cfg.htc, seed);
        case ClassifierFamily::hatc: return HoeffdingTree(cfg.hatc, seed);
        case ClassifierFamily::arfc: return AdaptiveRandomForest(cfg.arfc, seed);
    }
    throw ConfigError("unknown classifier family");
}

[[nodiscard]] inline ClassDist predict_proba(const AnyClassifier& model, std::span<const double> x) {
    return std::visit([&](const auto& m) { return m.predict_proba(x); }, model);
}

[[nodiscard]] inline bool is_cold(const AnyClassifier& model) {
    return std::visit([](const auto& m) { return m.cold(); }, model);
}

inline void learn(AnyClassifier& model, std::span<const double> x, Label y) {
    std::visit(
        [&](auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, AdaptiveRandomForest>)
                m.learn(x, y);
            else
                m.learn(x, y, 1.0);
        },
        model);
}

/// Tree whose path explains the prediction `label` for `x`: the tree itself,
/// or the agreeing forest member with the highest confidence.
[[nodiscard]] inline const HoeffdingTree* explaining_tree(const AnyClassifier& model, std::span<const double> x,
                                                          Label label) {
    if (const auto* t = std::get_if<HoeffdingTree>(&model)) return t;
    if (const auto* f = std::get_if<AdaptiveRandomForest>(&model)) return &f->member_tree(f->explaining_member(x, label));
    return nullptr;
}

struct Prediction {
    Label label = Label::non_fake;
    ClassDist dist = uniform_dist();
    std::size_t cluster = 0;
    bool cold = true;

    [[nodiscard]] double confidence() const noexcept { return dist[argmax(dist)]; }
};

/// k-means router in front of one classifier per cluster.
class ModelBank {
public:
    ModelBank() : ModelBank(ModelConfig{}, 0) {}

    ModelBank(ModelConfig config, std::uint64_t seed) : config_(config), kmeans_(config.k) {
        models_.reserve(config_.k);
        for (std::size_t c = 0; c < config_.k; ++c) models_.push_back(make_classifier(config_, mix_seed(seed, c)));
    }

    [[nodiscard]] std::size_t route(std::span<const double> z) const { return kmeans_.assign(z); }

    [[nodiscard]] Prediction predict(std::span<const double> x, std::size_t cluster) const {
        Prediction p;
        p.cluster = cluster;
        const auto& model = models_.at(cluster);
        p.cold = is_cold(model);
        p.dist = p.cold ? uniform_dist() : predict_proba(model, x);
        p.label = label_from_index(argmax(p.dist));
        return p;
    }

    /// Classifier first, then the centroid.
    void learn(std::span<const double> x, std::span<const double> z, Label y, std::size_t cluster) {
        learn_classifier(x, y, cluster);
        kmeans_.update(z, cluster);
    }

    void learn_classifier(std::span<const double> x, Label y, std::size_t cluster) {
        fakestream::learn(models_.at(cluster), x, y);
    }

    [[nodiscard]] const AnyClassifier& model(std::size_t cluster) const { return models_.at(cluster); }
    [[nodiscard]] std::size_t size() const noexcept { return models_.size(); }
    [[nodiscard]] const OnlineKMeans& kmeans() const noexcept { return kmeans_; }
    [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }

    template <class Archive>
    void serialize(Archive& ar) { ar(config_, kmeans_, models_); }

private:
    ModelConfig config_;
    OnlineKMeans kmeans_;
    std::vector<AnyClassifier> models_;
};

}  // namespace fakestream
