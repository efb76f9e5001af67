#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fakestream/core.hpp"
#include "fakestream/features.hpp"
#include "fakestream/textproc.hpp"

namespace fakestream {

struct LexiconConfig {
    std::size_t ngram_min = 2;
    std::size_t ngram_max = 4;
    std::size_t num_elements = 700;
    std::uint64_t threshold = 1;  ///< a term qualifies with frequency strictly above this
    double warm_up_fraction = 0.05;
    std::uint64_t expected_stream_size = 0;  ///< 0: open-ended stream
    std::uint64_t open_ended_warm_up = 300;
    std::uint64_t rebuild_every = 100;

    [[nodiscard]] std::uint64_t warm_up_samples() const {
        if (expected_stream_size == 0) return open_ended_warm_up;
        return static_cast<std::uint64_t>(
            std::ceil(warm_up_fraction * static_cast<double>(expected_stream_size) - 1e-9));
    }

    template <class Archive>
    void serialize(Archive& ar) {
        ar(ngram_min, ngram_max, num_elements, threshold, warm_up_fraction, expected_stream_size, open_ended_warm_up,
           rebuild_every);
    }
};

struct LexiconEntry {
    std::string ngram;
    std::uint64_t frequency = 0;

    friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;

    template <class Archive>
    void serialize(Archive& ar) { ar(ngram, frequency); }
};

/// Ranked, disjoint top terms per class.
struct ClassLexica {
    std::vector<LexiconEntry> fake;
    std::vector<LexiconEntry> non_fake;

    [[nodiscard]] const std::vector<LexiconEntry>& of(Label y) const { return y == Label::fake ? fake : non_fake; }
    [[nodiscard]] bool empty() const noexcept { return fake.empty() && non_fake.empty(); }

    friend bool operator==(const ClassLexica&, const ClassLexica&) = default;

    template <class Archive>
    void serialize(Archive& ar) { ar(fake, non_fake); }
};

/// Per-class n-gram occurrence counts over labeled training steps.
class FrequencyLexicon {
public:
    explicit FrequencyLexicon(LexiconConfig config = {}) : config_(config) {}

    [[nodiscard]] std::map<std::string, std::size_t> ngrams_of(const ProcessedText& processed) const {
        return ngram_counts(processed.lemmas, config_.ngram_min, config_.ngram_max);
    }

    /// Counts the tweet's n-grams under `y`; rebuilds the lexica once warm-up
    /// is reached and then every `rebuild_every` samples.
    void update(const ProcessedText& processed, Label y) {
        auto& table = freq_[class_index(y)];
        for (const auto& [gram, count] : ngrams_of(processed)) table[gram] += count;
        ++samples_seen_;
        if (samples_seen_ < config_.warm_up_samples()) return;
        if (!last_build_ || samples_seen_ - *last_build_ >= std::max<std::uint64_t>(config_.rebuild_every, 1)) {
            lexica_ = build_class_lexica();
            last_build_ = samples_seen_;
        }
    }

    [[nodiscard]] std::uint64_t frequency(const std::string& gram, Label y) const {
        const auto& table = freq_[class_index(y)];
        auto it = table.find(gram);
        return it == table.end() ? 0 : it->second;
    }

    /// Both lists from the current counts; empty before warm-up.
    [[nodiscard]] ClassLexica build_class_lexica() const {
        ClassLexica out;
        if (samples_seen_ < config_.warm_up_samples()) return out;
        const auto& fake = freq_[class_index(Label::fake)];
        const auto& non_fake = freq_[class_index(Label::non_fake)];
        auto collect = [&](const auto& mine, const auto& other, std::vector<LexiconEntry>& dest) {
            for (const auto& [gram, f] : mine) {
                if (f <= config_.threshold) continue;
                auto it = other.find(gram);
                if (it != other.end() && it->second > config_.threshold && it->second >= f) continue;
                dest.push_back({gram, f});
            }
            std::sort(dest.begin(), dest.end(), [](const LexiconEntry& a, const LexiconEntry& b) {
                return a.frequency != b.frequency ? a.frequency > b.frequency : a.ngram < b.ngram;
            });
            if (dest.size() > config_.num_elements) dest.resize(config_.num_elements);
        };
        collect(fake, non_fake, out.fake);
        collect(non_fake, fake, out.non_fake);
        return out;
    }

    [[nodiscard]] const ClassLexica& lexica() const noexcept { return lexica_; }
    [[nodiscard]] std::uint64_t samples_seen() const noexcept { return samples_seen_; }
    [[nodiscard]] const LexiconConfig& config() const noexcept { return config_; }

    /// Ranked audit export: one row per lexicon entry.
    [[nodiscard]] nlohmann::json export_ranked() const {
        auto rows = nlohmann::json::array();
        for (Label y : {Label::fake, Label::non_fake}) {
            std::size_t rank = 0;
            for (const auto& e : lexica_.of(y))
                rows.push_back({{"rank", ++rank}, {"ngram", e.ngram}, {"class", label_name(y)}, {"frequency", e.frequency}});
        }
        return rows;
    }

    template <class Archive>
    void save(Archive& ar) const {
        std::map<std::string, std::uint64_t> f0(freq_[0].begin(), freq_[0].end());
        std::map<std::string, std::uint64_t> f1(freq_[1].begin(), freq_[1].end());
        ar(config_, f0, f1, samples_seen_, last_build_, lexica_);
    }

    template <class Archive>
    void load(Archive& ar) {
        std::map<std::string, std::uint64_t> f0, f1;
        ar(config_, f0, f1, samples_seen_, last_build_, lexica_);
        freq_[0] = {f0.begin(), f0.end()};
        freq_[1] = {f1.begin(), f1.end()};
    }

private:
    LexiconConfig config_;
    std::array<std::unordered_map<std::string, std::uint64_t>, kNumClasses> freq_;
    std::uint64_t samples_seen_ = 0;
    std::optional<std::uint64_t> last_build_;
    ClassLexica lexica_;
};

/// Occurrences of the tweet's n-grams in each lexicon.
[[nodiscard]] inline LexiconHits lexicon_features(const std::map<std::string, std::size_t>& tweet_ngrams,
                                                  const ClassLexica& lexica) {
    std::unordered_set<std::string> fake, non_fake;
    for (const auto& e : lexica.fake) fake.insert(e.ngram);
    for (const auto& e : lexica.non_fake) non_fake.insert(e.ngram);
    LexiconHits hits;
    for (const auto& [gram, count] : tweet_ngrams) {
        if (fake.contains(gram)) hits.fake += count;
        if (non_fake.contains(gram)) hits.non_fake += count;
    }
    return hits;
}

}  // namespace fakestream
