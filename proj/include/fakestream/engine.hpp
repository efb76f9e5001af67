#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fakestream/core.hpp"
#include "fakestream/explain.hpp"
#include "fakestream/features.hpp"
#include "fakestream/ingest.hpp"
#include "fakestream/lexicon.hpp"
#include "fakestream/metrics.hpp"
#include "fakestream/model_bank.hpp"
#include "fakestream/resources.hpp"
#include "fakestream/textproc.hpp"

namespace fakestream {

struct EngineConfig {
    FeatureSet feature_set = FeatureSet::C;
    ModelConfig model{};
    VectorizerConfig vectorizer{};
    LexiconConfig lexicon{};
    double variance_threshold = 0.0;
    double ms_per_char = kDefaultMsPerChar;
    bool expand_hashtags = true;
    std::size_t explain_k = 5;
    std::uint64_t seed = 42;

    template <class Archive>
    void serialize(Archive& ar) {
        ar(feature_set, model, vectorizer, lexicon, variance_threshold, ms_per_char, expand_hashtags, explain_k, seed);
    }
};

/// One event, featurized and scored, before any state has learned from it.
struct Observation {
    const TweetEvent* event = nullptr;
    ProcessedText processed;
    std::map<std::string, std::size_t> lexicon_ngrams;
    bool duplicated = false;
    FeatureVector raw;
    FeatureVector selected;
    std::vector<double> z;
    Prediction prediction;
};

/// Featurization, selection, routing and classification state for one stream.
class Engine {
public:
    Engine(EngineConfig config, std::shared_ptr<const TextResources> resources)
        : config_(config),
          resources_(std::move(resources)),
          registry_(config.feature_set),
          vectorizer_(config.vectorizer),
          lexicon_(config.lexicon),
          selector_(config.variance_threshold),
          bank_(config.model, config.seed) {
        if (!resources_) throw ConfigError("text resources are required");
    }

    /// Test half of the prequential step; learns nothing.
    [[nodiscard]] Observation observe(const TweetEvent& ev) {
        const auto& res = *resources_;
        Observation o;
        o.event = &ev;
        o.processed = normalize_and_tokenize(ev.text, res.stopwords, res.lemmas,
                                             config_.expand_hashtags ? &res.word_corpus : nullptr);
        const StyleCounts style =
            style_counts(ev.text, o.processed, ev.context, res.bad_words, res.easy_words, res.pos);
        const ReadabilityScores read = readability(ev.text, config_.ms_per_char);
        const AffectScores affect = affect_scores(o.processed, res.polarity, res.emotion);
        const UserProfile& profile = profiles_.get(ev.user_id);
        const CreatorPart creator = creator_features(ev.creator, profile, ev.timestamp);
        const ContextPart context = context_features(ev.context);
        o.duplicated = duplicates_.seen(o.processed);

        FeatureParts parts;
        parts.event = &ev;
        parts.processed = &o.processed;
        parts.style = &style;
        parts.readability = &read;
        parts.affect = &affect;
        parts.creator = &creator;
        parts.context = &context;
        parts.profile = &profile;
        parts.duplicated = o.duplicated;
        SparseCounts ngrams;
        if (config_.feature_set != FeatureSet::A) {
            ngrams = vectorizer_.transform(o.processed.lemmas);
            parts.ngrams = &ngrams;
        }
        if (config_.feature_set == FeatureSet::C) {
            o.lexicon_ngrams = lexicon_.ngrams_of(o.processed);
            parts.lexicon = lexicon_features(o.lexicon_ngrams, lexicon_.lexica());
        }
        o.raw = assemble(parts, registry_);
        o.selected = selector_.select(o.raw, registry_);
        o.z = standardizer_.standardize(o.selected);
        for (std::size_t i = 0; i < o.z.size(); ++i)
            if (!selector_.keeps(static_cast<FeatureId>(i), registry_)) o.z[i] = 0.0;
        o.prediction = bank_.predict(o.selected.values, bank_.route(o.z));
        return o;
    }

    [[nodiscard]] Explanation explain(const Observation& o) const {
        ExplainInputs in;
        in.event = o.event;
        in.registry = &registry_;
        in.raw = &o.raw;
        in.selected = &o.selected;
        in.z = o.z;
        in.prediction = &o.prediction;
        in.selector = &selector_;
        in.profile = &profiles_.get(o.event->user_id);
        in.lexica = &lexicon_.lexica();
        in.kmeans = &bank_.kmeans();
        in.cluster_stats = &cluster_stats_;
        in.model = &bank_.model(o.prediction.cluster);
        in.classifier = std::string(family_name(config_.model.family));
        in.k = config_.explain_k;
        return build_explanation(in);
    }

    /// Train half: classifier, centroid, then every featurization store.
    void learn(const Observation& o, Label y) {
        const TweetEvent& ev = *o.event;
        bank_.learn(o.selected.values, o.z, y, o.prediction.cluster);
        selector_.update(o.raw);
        standardizer_.update(o.raw);
        cluster_stats_.update(o.z);
        if (config_.feature_set != FeatureSet::A) vectorizer_.update(o.processed.lemmas);
        if (config_.feature_set == FeatureSet::C) lexicon_.update(o.processed, y);
        UserProfile& p = profiles_.upsert(ev.user_id);
        p.registered_at = ev.creator.registered_at;
        update_profile(p, profiled_values(o.raw, registry_), ev.timestamp);
        duplicates_.insert(o.processed);
        ++events_;
    }

    [[nodiscard]] const EngineConfig& config() const noexcept { return config_; }
    [[nodiscard]] const FeatureRegistry& registry() const noexcept { return registry_; }
    [[nodiscard]] const ModelBank& bank() const noexcept { return bank_; }
    [[nodiscard]] const FrequencyLexicon& lexicon() const noexcept { return lexicon_; }
    [[nodiscard]] const NgramVectorizer& vectorizer() const noexcept { return vectorizer_; }
    [[nodiscard]] const VarianceSelector& selector() const noexcept { return selector_; }
    [[nodiscard]] const Standardizer& standardizer() const noexcept { return standardizer_; }
    [[nodiscard]] const ProfileStore& profiles() const noexcept { return profiles_; }
    [[nodiscard]] std::uint64_t events() const noexcept { return events_; }
    [[nodiscard]] const TextResources& resources() const noexcept { return *resources_; }
    [[nodiscard]] std::shared_ptr<const TextResources> shared_resources() const noexcept { return resources_; }

    template <class Archive>
    void serialize(Archive& ar) {
        ar(config_, registry_, profiles_, duplicates_, vectorizer_, lexicon_, selector_, standardizer_,
           cluster_stats_, bank_, events_);
    }

private:
    EngineConfig config_;
    std::shared_ptr<const TextResources> resources_;
    FeatureRegistry registry_;
    ProfileStore profiles_;
    DuplicateStore duplicates_;
    NgramVectorizer vectorizer_;
    FrequencyLexicon lexicon_;
    VarianceSelector selector_;
    Standardizer standardizer_;
    Standardizer cluster_stats_;  // running stats of the clustering inputs
    ModelBank bank_;
    std::uint64_t events_ = 0;
};

struct SeriesRow {
    std::uint64_t samples = 0;
    Metrics metrics;

    template <class Archive>
    void serialize(Archive& ar) { ar(samples, metrics); }
};

/// Test-then-train driver with windowed metrics and a periodic series.
class PrequentialRunner {
public:
    /// Called after prediction (and explanation, when requested) and before learning.
    using Hook = std::function<void(const Observation&, const Explanation*)>;

    PrequentialRunner(Engine engine, WindowSpec window, std::uint64_t stream_size, std::uint64_t series_every = 100)
        : engine_(std::move(engine)),
          window_spec_(window),
          window_(window.capacity(stream_size)),
          series_every_(series_every) {}

    /// One event; throws when the event is unlabeled.
    Prediction step(const TweetEvent& ev, bool want_explanation = false, const Hook& hook = {}) {
        if (!ev.label) throw Error("unlabeled event in prequential mode: " + ev.tweet_id);
        Observation o = engine_.observe(ev);
        std::optional<Explanation> expl;
        if (want_explanation) expl = engine_.explain(o);
        if (hook) hook(o, expl ? &*expl : nullptr);
        if (expl) last_explanation_ = std::move(expl);
        else last_explanation_.reset();
        engine_.learn(o, *ev.label);
        window_.add(o.prediction.label, *ev.label);
        cold_ += o.prediction.cold;
        ++samples_;
        if (series_every_ > 0 && samples_ % series_every_ == 0)
            if (auto m = compute_metrics(window_)) series_.push_back({samples_, *m});
        return o.prediction;
    }

    [[nodiscard]] RunReport report() const {
        RunReport r;
        r.classifier = std::string(family_name(engine_.config().model.family));
        r.feature_set = std::string(feature_set_name(engine_.config().feature_set));
        r.window = window_spec_.describe();
        r.samples = samples_;
        r.window_samples = window_.size();
        r.cold_predictions = cold_;
        r.metrics = compute_metrics(window_);
        return r;
    }

    [[nodiscard]] const std::optional<Explanation>& last_explanation() const noexcept { return last_explanation_; }
    [[nodiscard]] const std::vector<SeriesRow>& series() const noexcept { return series_; }
    [[nodiscard]] const MetricsWindow& window() const noexcept { return window_; }
    [[nodiscard]] const Engine& engine() const noexcept { return engine_; }
    [[nodiscard]] Engine& engine() noexcept { return engine_; }
    [[nodiscard]] std::uint64_t samples() const noexcept { return samples_; }

    template <class Archive>
    void serialize(Archive& ar) { ar(engine_, window_spec_, window_, series_every_, samples_, cold_, series_); }

private:
    Engine engine_;
    WindowSpec window_spec_;
    MetricsWindow window_;
    std::uint64_t series_every_;
    std::uint64_t samples_ = 0;
    std::uint64_t cold_ = 0;
    std::vector<SeriesRow> series_;
    std::optional<Explanation> last_explanation_;
};

[[nodiscard]] inline std::string series_csv(const std::vector<SeriesRow>& rows) {
    std::string out = "samples,accuracy,macro_f,fake_f,nonfake_f\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%llu,%.6f,%.6f,%.6f,%.6f\n", static_cast<unsigned long long>(r.samples),
                      r.metrics.accuracy, r.metrics.macro_f, r.metrics.f_fake, r.metrics.f_non_fake);
        out += buf;
    }
    return out;
}

}  // namespace fakestream
