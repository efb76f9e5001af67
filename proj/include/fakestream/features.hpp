#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fakestream/core.hpp"
#include "fakestream/ingest.hpp"
#include "fakestream/stats.hpp"
#include "fakestream/textproc.hpp"

namespace fakestream {

enum class FeatureSet : std::uint8_t { A = 0, B = 1, C = 2 };

[[nodiscard]] inline std::string_view feature_set_name(FeatureSet s) noexcept {
    switch (s) {
        case FeatureSet::A: return "A";
        case FeatureSet::B: return "B";
        case FeatureSet::C: return "C";
    }
    return "C";
}

[[nodiscard]] inline std::optional<FeatureSet> parse_feature_set(std::string_view s) noexcept {
    if (s == "A" || s == "a") return FeatureSet::A;
    if (s == "B" || s == "b") return FeatureSet::B;
    if (s == "C" || s == "c") return FeatureSet::C;
    return std::nullopt;
}

enum class ProfileClass : std::uint8_t { creator, content, context };
enum class DataType : std::uint8_t { boolean, categorical, numerical, textual };
enum class FeatureKind : std::uint8_t { base, user_average, trend, timezone, ngram, lexicon };

[[nodiscard]] inline std::string_view profile_class_name(ProfileClass p) noexcept {
    switch (p) {
        case ProfileClass::creator: return "creator";
        case ProfileClass::content: return "content";
        case ProfileClass::context: return "context";
    }
    return "content";
}

[[nodiscard]] inline std::string_view data_type_name(DataType t) noexcept {
    switch (t) {
        case DataType::boolean: return "boolean";
        case DataType::categorical: return "categorical";
        case DataType::numerical: return "numerical";
        case DataType::textual: return "textual";
    }
    return "numerical";
}

[[nodiscard]] inline std::string_view feature_kind_name(FeatureKind k) noexcept {
    switch (k) {
        case FeatureKind::base: return "base";
        case FeatureKind::user_average: return "user_average";
        case FeatureKind::trend: return "trend";
        case FeatureKind::timezone: return "timezone";
        case FeatureKind::ngram: return "ngram";
        case FeatureKind::lexicon: return "lexicon";
    }
    return "base";
}

struct FeatureInfo {
    std::string name;
    ProfileClass profile = ProfileClass::content;
    DataType type = DataType::numerical;
    FeatureKind kind = FeatureKind::base;
    int table_row = 0;
    FeatureSet min_set = FeatureSet::A;
    std::optional<FeatureId> base;  ///< for companions: the feature they describe

    /// Textual blocks pass the variance selector untouched.
    [[nodiscard]] bool selection_exempt() const noexcept {
        return kind == FeatureKind::ngram || kind == FeatureKind::lexicon;
    }

    template <class Archive>
    void serialize(Archive& ar) { ar(name, profile, type, kind, table_row, min_set, base); }
};

// Slots of the numeric rows that carry a per-user average and trend flag.
enum class Profiled : std::uint8_t {
    follower_count,
    friend_count,
    friends_followers_ratio,
    user_favourite_count,
    adjective_count,
    auxiliary_count,
    bad_word_count,
    char_count,
    determiner_count,
    difficult_word_count,
    hashtag_count,
    image_count,
    link_count,
    link_repeated_count,
    noun_count,
    pronoun_count,
    punctuation_count,
    uppercase_word_count,
    video_count,
    word_count,
    retweet_count,
    favourite_count,
};
inline constexpr std::size_t kNumProfiled = 22;

struct BaseFeatureSpec {
    std::string_view name;
    ProfileClass profile;
    DataType type;
    int row;
    int profiled;  // index into Profiled, or -1
};

// Table order; timezone (row 5) and n-grams (row 34) are registered dynamically.
inline constexpr std::array<BaseFeatureSpec, 42> kBaseFeatures{{
    {"has_description", ProfileClass::creator, DataType::boolean, 1, -1},
    {"has_profile_image", ProfileClass::creator, DataType::boolean, 2, -1},
    {"protected", ProfileClass::creator, DataType::boolean, 3, -1},
    {"verified", ProfileClass::creator, DataType::boolean, 4, -1},
    {"follower_count", ProfileClass::creator, DataType::numerical, 6, 0},
    {"friend_count", ProfileClass::creator, DataType::numerical, 7, 1},
    {"friends_followers_ratio", ProfileClass::creator, DataType::numerical, 8, 2},
    {"user_favourite_count", ProfileClass::creator, DataType::numerical, 9, 3},
    {"registration_time_span_days", ProfileClass::creator, DataType::numerical, 10, -1},
    {"weekly_tweet_frequency", ProfileClass::creator, DataType::numerical, 11, -1},
    {"text_duplicated", ProfileClass::content, DataType::boolean, 12, -1},
    {"adjective_count", ProfileClass::content, DataType::numerical, 13, 4},
    {"auxiliary_count", ProfileClass::content, DataType::numerical, 14, 5},
    {"bad_word_count", ProfileClass::content, DataType::numerical, 15, 6},
    {"char_count", ProfileClass::content, DataType::numerical, 16, 7},
    {"determiner_count", ProfileClass::content, DataType::numerical, 17, 8},
    {"difficult_word_count", ProfileClass::content, DataType::numerical, 18, 9},
    {"anger", ProfileClass::content, DataType::numerical, 19, -1},
    {"fear", ProfileClass::content, DataType::numerical, 19, -1},
    {"happiness", ProfileClass::content, DataType::numerical, 19, -1},
    {"sadness", ProfileClass::content, DataType::numerical, 19, -1},
    {"surprise", ProfileClass::content, DataType::numerical, 19, -1},
    {"flesch_reading_ease", ProfileClass::content, DataType::numerical, 20, -1},
    {"hashtag_count", ProfileClass::content, DataType::numerical, 21, 10},
    {"image_count", ProfileClass::content, DataType::numerical, 22, 11},
    {"link_count", ProfileClass::content, DataType::numerical, 23, 12},
    {"link_repeated_count", ProfileClass::content, DataType::numerical, 24, 13},
    {"mcalpine_eflaw", ProfileClass::content, DataType::numerical, 25, -1},
    {"noun_count", ProfileClass::content, DataType::numerical, 26, 14},
    {"polarity", ProfileClass::content, DataType::numerical, 27, -1},
    {"pronoun_count", ProfileClass::content, DataType::numerical, 28, 15},
    {"punctuation_count", ProfileClass::content, DataType::numerical, 29, 16},
    {"reading_time", ProfileClass::content, DataType::numerical, 30, -1},
    {"uppercase_word_count", ProfileClass::content, DataType::numerical, 31, 17},
    {"video_count", ProfileClass::content, DataType::numerical, 32, 18},
    {"word_count", ProfileClass::content, DataType::numerical, 33, 19},
    {"retweeted", ProfileClass::context, DataType::boolean, 35, -1},
    {"favourited", ProfileClass::context, DataType::boolean, 36, -1},
    {"distribution_depth", ProfileClass::context, DataType::numerical, 37, -1},
    {"first_level_retweets", ProfileClass::context, DataType::numerical, 38, -1},
    {"retweet_count", ProfileClass::context, DataType::numerical, 39, 20},
    {"favourite_count", ProfileClass::context, DataType::numerical, 40, 21},
}};
inline constexpr std::size_t kNumBaseFeatures = kBaseFeatures.size();

inline constexpr std::string_view kLexiconFakeHits = "lexicon_fake_hits";
inline constexpr std::string_view kLexiconNonFakeHits = "lexicon_nonfake_hits";
inline constexpr std::string_view kNgramPrefix = "ngram:";
inline constexpr std::string_view kTimezonePrefix = "timezone=";
inline constexpr std::size_t kMaxTimezones = 64;

[[nodiscard]] inline std::string average_name(std::string_view base) { return std::string(base) + "_user_avg"; }
[[nodiscard]] inline std::string trend_name(std::string_view base) { return std::string(base) + "_trend"; }

/// Name <-> id mapping; ids are assigned in order of first registration and never reused.
class FeatureRegistry {
public:
    FeatureRegistry() = default;

    /// Fixed layout for `set`: base rows, their companions, then the lexicon pair.
    explicit FeatureRegistry(FeatureSet set) : set_(set) {
        for (std::size_t i = 0; i < kNumBaseFeatures; ++i) {
            const auto& b = kBaseFeatures[i];
            intern({std::string(b.name), b.profile, b.type, FeatureKind::base, b.row, FeatureSet::A, std::nullopt});
        }
        for (std::size_t i = 0; i < kNumBaseFeatures; ++i) {
            const auto& b = kBaseFeatures[i];
            if (b.profiled < 0) continue;
            const FeatureId base = static_cast<FeatureId>(i);
            profiled_base_[static_cast<std::size_t>(b.profiled)] = base;
            profiled_avg_[static_cast<std::size_t>(b.profiled)] =
                intern({average_name(b.name), b.profile, DataType::numerical, FeatureKind::user_average, b.row,
                        FeatureSet::A, base});
            profiled_trend_[static_cast<std::size_t>(b.profiled)] = intern(
                {trend_name(b.name), b.profile, DataType::boolean, FeatureKind::trend, b.row, FeatureSet::A, base});
        }
        if (set_ == FeatureSet::C) {
            lexicon_fake_ = intern({std::string(kLexiconFakeHits), ProfileClass::content, DataType::numerical,
                                    FeatureKind::lexicon, 0, FeatureSet::C, std::nullopt});
            lexicon_nonfake_ = intern({std::string(kLexiconNonFakeHits), ProfileClass::content, DataType::numerical,
                                       FeatureKind::lexicon, 0, FeatureSet::C, std::nullopt});
        }
    }

    FeatureId intern(FeatureInfo info) {
        if (auto it = index_.find(info.name); it != index_.end()) return it->second;
        const auto id = static_cast<FeatureId>(infos_.size());
        index_.emplace(info.name, id);
        if (info.kind == FeatureKind::timezone) ++timezone_count_;
        infos_.push_back(std::move(info));
        return id;
    }

    [[nodiscard]] std::optional<FeatureId> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] FeatureId id_of(std::string_view name) const {
        if (auto id = find(name)) return *id;
        throw Error("unknown feature: " + std::string(name));
    }

    [[nodiscard]] const FeatureInfo& info(FeatureId id) const { return infos_.at(id); }
    [[nodiscard]] const std::string& name(FeatureId id) const { return infos_.at(id).name; }
    [[nodiscard]] std::size_t size() const noexcept { return infos_.size(); }
    [[nodiscard]] FeatureSet feature_set() const noexcept { return set_; }
    [[nodiscard]] std::size_t timezone_count() const noexcept { return timezone_count_; }

    [[nodiscard]] FeatureId profiled_base(std::size_t slot) const { return profiled_base_.at(slot); }
    [[nodiscard]] FeatureId profiled_average(std::size_t slot) const { return profiled_avg_.at(slot); }
    [[nodiscard]] FeatureId profiled_trend(std::size_t slot) const { return profiled_trend_.at(slot); }
    [[nodiscard]] FeatureId lexicon_fake() const { return lexicon_fake_.value(); }
    [[nodiscard]] FeatureId lexicon_nonfake() const { return lexicon_nonfake_.value(); }

    /// Profiled slot of a base feature id, if it has one.
    [[nodiscard]] std::optional<std::size_t> profiled_slot(FeatureId id) const {
        for (std::size_t s = 0; s < kNumProfiled; ++s)
            if (profiled_base_[s] == id) return s;
        return std::nullopt;
    }

    [[nodiscard]] nlohmann::json dictionary() const {
        auto out = nlohmann::json::array();
        for (std::size_t i = 0; i < infos_.size(); ++i) {
            const auto& f = infos_[i];
            nlohmann::json sets = nlohmann::json::array();
            for (int s = static_cast<int>(f.min_set); s <= 2; ++s)
                sets.push_back(std::string(feature_set_name(static_cast<FeatureSet>(s))));
            nlohmann::json row = {{"id", i},
                                  {"name", f.name},
                                  {"profile", profile_class_name(f.profile)},
                                  {"data_type", data_type_name(f.type)},
                                  {"kind", feature_kind_name(f.kind)},
                                  {"sets", sets}};
            if (f.table_row > 0) row["table_row"] = f.table_row;
            if (f.base) row["base"] = infos_[*f.base].name;
            out.push_back(std::move(row));
        }
        return out;
    }

    template <class Archive>
    void serialize(Archive& ar) {
        ar(set_, infos_, index_, profiled_base_, profiled_avg_, profiled_trend_, lexicon_fake_, lexicon_nonfake_,
           timezone_count_);
    }

private:
    FeatureSet set_ = FeatureSet::A;
    std::vector<FeatureInfo> infos_;
    std::map<std::string, FeatureId> index_;
    std::array<FeatureId, kNumProfiled> profiled_base_{};
    std::array<FeatureId, kNumProfiled> profiled_avg_{};
    std::array<FeatureId, kNumProfiled> profiled_trend_{};
    std::optional<FeatureId> lexicon_fake_;
    std::optional<FeatureId> lexicon_nonfake_;
    std::size_t timezone_count_ = 0;
};

/// Dense vector indexed by feature id; ids beyond `values.size()` read as 0.
struct FeatureVector {
    FeatureSet set = FeatureSet::A;
    std::vector<double> values;

    [[nodiscard]] double at(FeatureId id) const noexcept { return id < values.size() ? values[id] : 0.0; }

    void set_value(FeatureId id, double v) {
        if (values.size() <= id) values.resize(id + 1, 0.0);
        values[id] = v;
    }
};

struct RunningMean {
    std::uint64_t count = 0;
    double mean = 0.0;

    void update(double x) noexcept {
        ++count;
        mean += (x - mean) / static_cast<double>(count);
    }

    template <class Archive>
    void serialize(Archive& ar) { ar(count, mean); }

    friend bool operator==(const RunningMean&, const RunningMean&) = default;
};

struct UserProfile {
    std::string user_id;
    std::uint64_t n_posts = 0;
    std::array<RunningMean, kNumProfiled> means{};
    Timestamp first_seen{};
    Timestamp registered_at{};

    [[nodiscard]] std::optional<double> mean_of(std::size_t slot) const {
        const auto& m = means.at(slot);
        if (m.count == 0) return std::nullopt;
        return m.mean;
    }

    template <class Archive>
    void serialize(Archive& ar) {
        std::int64_t first = first_seen.time_since_epoch().count();
        std::int64_t reg = registered_at.time_since_epoch().count();
        ar(user_id, n_posts, means, first, reg);
        first_seen = Timestamp(std::chrono::milliseconds(first));
        registered_at = Timestamp(std::chrono::milliseconds(reg));
    }
};

using ProfiledValues = std::array<double, kNumProfiled>;

/// One more observation per tracked feature.
inline void update_profile(UserProfile& profile, const ProfiledValues& current, Timestamp now) {
    if (profile.n_posts == 0) profile.first_seen = now;
    ++profile.n_posts;
    for (std::size_t s = 0; s < kNumProfiled; ++s) profile.means[s].update(current[s]);
}

/// True when `current` is at or above the user's average; true without history.
[[nodiscard]] inline bool trend_flag(double current, std::optional<double> mean) noexcept {
    return !mean || current >= *mean;
}

class ProfileStore {
public:
    /// Existing profile, or an empty one (not stored) for a new user.
    [[nodiscard]] const UserProfile& get(const std::string& user_id) const {
        if (auto it = profiles_.find(user_id); it != profiles_.end()) return it->second;
        empty_.user_id = user_id;
        return empty_;
    }

    UserProfile& upsert(const std::string& user_id) {
        auto [it, inserted] = profiles_.try_emplace(user_id);
        if (inserted) it->second.user_id = user_id;
        return it->second;
    }

    [[nodiscard]] std::size_t size() const noexcept { return profiles_.size(); }

    template <class Archive>
    void serialize(Archive& ar) { ar(profiles_); }

private:
    std::map<std::string, UserProfile> profiles_;
    mutable UserProfile empty_;
};

struct CreatorPart {
    bool has_description = false;
    bool has_profile_image = false;
    bool is_protected = false;
    bool verified = false;
    std::string timezone;
    double follower_count = 0.0;
    double friend_count = 0.0;
    double friends_followers_ratio = 0.0;
    double user_favourite_count = 0.0;
    double registration_days = 0.0;
    double weekly_frequency = 0.0;
};

/// `profile` holds the posts seen before this one; the current post is counted.
[[nodiscard]] inline CreatorPart creator_features(const CreatorMeta& creator, const UserProfile& profile,
                                                  Timestamp now) {
    CreatorPart p;
    p.has_description = creator.has_description;
    p.has_profile_image = creator.has_profile_image;
    p.is_protected = creator.is_protected;
    p.verified = creator.verified;
    p.timezone = creator.timezone;
    p.follower_count = static_cast<double>(creator.follower_count);
    p.friend_count = static_cast<double>(creator.friend_count);
    p.friends_followers_ratio =
        creator.follower_count > 0 ? p.friend_count / static_cast<double>(creator.follower_count) : 0.0;
    p.user_favourite_count = static_cast<double>(creator.user_favourite_count);
    const auto span_ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - creator.registered_at).count();
    p.registration_days = std::max(0.0, static_cast<double>(span_ms) / 86'400'000.0);
    const double weeks = p.registration_days / 7.0;
    p.weekly_frequency = static_cast<double>(profile.n_posts + 1) / std::max(weeks, 1.0);
    return p;
}

struct ContextPart {
    bool retweeted = false;
    bool favourited = false;
    double distribution_depth = 0.0;
    double first_level_retweets = 0.0;
    double retweet_count = 0.0;
    double favourite_count = 0.0;
};

[[nodiscard]] inline ContextPart context_features(const ContextMeta& ctx) {
    return {ctx.retweeted,
            ctx.favourited,
            static_cast<double>(ctx.distribution_depth),
            static_cast<double>(ctx.first_level_retweets),
            static_cast<double>(ctx.retweet_count),
            static_cast<double>(ctx.favourite_count)};
}

[[nodiscard]] inline std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Hashes of every normalized text seen so far in the stream.
class DuplicateStore {
public:
    [[nodiscard]] static std::uint64_t key(const ProcessedText& processed) {
        std::string s;
        for (const auto& t : processed.tokens) {
            if (!s.empty()) s.push_back(' ');
            s += t;
        }
        return fnv1a64(s);
    }

    [[nodiscard]] bool seen(const ProcessedText& processed) const { return hashes_.contains(key(processed)); }

    /// Flag for this text, then remember it.
    bool check_and_insert(const ProcessedText& processed) {
        return !hashes_.insert(key(processed)).second;
    }

    void insert(const ProcessedText& processed) { hashes_.insert(key(processed)); }
    [[nodiscard]] std::size_t size() const noexcept { return hashes_.size(); }

    template <class Archive>
    void save(Archive& ar) const {
        std::vector<std::uint64_t> sorted(hashes_.begin(), hashes_.end());
        std::sort(sorted.begin(), sorted.end());
        ar(sorted);
    }

    template <class Archive>
    void load(Archive& ar) {
        std::vector<std::uint64_t> sorted;
        ar(sorted);
        hashes_ = {sorted.begin(), sorted.end()};
    }

private:
    std::unordered_set<std::uint64_t> hashes_;
};

using SparseCounts = std::vector<std::pair<std::string, double>>;

struct VectorizerConfig {
    std::size_t ngram_min = 1;
    std::size_t ngram_max = 3;
    double max_df = 0.7;
    double min_df = 0.01;

    template <class Archive>
    void serialize(Archive& ar) { ar(ngram_min, ngram_max, max_df, min_df); }
};

/// Count vectorizer over an accumulating corpus: a term is active while
/// min_df <= df / documents <= max_df.
class NgramVectorizer {
public:
    explicit NgramVectorizer(VectorizerConfig config = {}) : config_(config) {}

    [[nodiscard]] bool active(const std::string& gram) const {
        if (documents_ == 0) return false;
        auto it = df_.find(gram);
        if (it == df_.end()) return false;
        const double ratio = static_cast<double>(it->second) / static_cast<double>(documents_);
        return ratio >= config_.min_df && ratio <= config_.max_df;
    }

    /// Counts of this document's n-grams that are in the active vocabulary, sorted by n-gram.
    [[nodiscard]] SparseCounts transform(const std::vector<std::string>& tokens) const {
        SparseCounts out;
        for (const auto& [gram, count] : ngram_counts(tokens, config_.ngram_min, config_.ngram_max))
            if (active(gram)) out.emplace_back(gram, static_cast<double>(count));
        return out;
    }

    void update(const std::vector<std::string>& tokens) {
        ++documents_;
        for (const auto& [gram, count] : ngram_counts(tokens, config_.ngram_min, config_.ngram_max)) ++df_[gram];
    }

    SparseCounts update_transform(const std::vector<std::string>& tokens) {
        update(tokens);
        return transform(tokens);
    }

    [[nodiscard]] std::vector<std::string> vocabulary() const {
        std::vector<std::string> out;
        for (const auto& [gram, df] : df_)
            if (active(gram)) out.push_back(gram);
        std::sort(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] std::uint64_t documents() const noexcept { return documents_; }

    [[nodiscard]] std::uint64_t document_frequency(const std::string& gram) const {
        auto it = df_.find(gram);
        return it == df_.end() ? 0 : it->second;
    }

    [[nodiscard]] const VectorizerConfig& config() const noexcept { return config_; }

    template <class Archive>
    void save(Archive& ar) const {
        std::map<std::string, std::uint64_t> ordered(df_.begin(), df_.end());
        ar(config_, documents_, ordered);
    }

    template <class Archive>
    void load(Archive& ar) {
        std::map<std::string, std::uint64_t> ordered;
        ar(config_, documents_, ordered);
        df_ = {ordered.begin(), ordered.end()};
    }

private:
    VectorizerConfig config_;
    std::uint64_t documents_ = 0;
    std::unordered_map<std::string, std::uint64_t> df_;
};

struct LexiconHits {
    std::size_t fake = 0;
    std::size_t non_fake = 0;
};

/// Everything `assemble` consumes for one event; null members are missing parts.
struct FeatureParts {
    const TweetEvent* event = nullptr;
    const ProcessedText* processed = nullptr;
    const StyleCounts* style = nullptr;
    const ReadabilityScores* readability = nullptr;
    const AffectScores* affect = nullptr;
    const CreatorPart* creator = nullptr;
    const ContextPart* context = nullptr;
    const UserProfile* profile = nullptr;  ///< prior state of the author
    std::optional<bool> duplicated;
    const SparseCounts* ngrams = nullptr;
    std::optional<LexiconHits> lexicon;
};

class AssemblyError : public Error {
public:
    explicit AssemblyError(std::string part) : Error("missing feature part: " + part), part_(std::move(part)) {}
    [[nodiscard]] const std::string& part() const noexcept { return part_; }

private:
    std::string part_;
};

/// Values of the 22 tracked rows in Profiled order.
[[nodiscard]] inline ProfiledValues profiled_values(const FeatureVector& v, const FeatureRegistry& reg) {
    ProfiledValues out{};
    for (std::size_t s = 0; s < kNumProfiled; ++s) out[s] = v.at(reg.profiled_base(s));
    return out;
}

/// Builds the vector for `reg.feature_set()`, registering new timezone and
/// n-gram dimensions as they appear.
[[nodiscard]] inline FeatureVector assemble(const FeatureParts& parts, FeatureRegistry& reg) {
    const FeatureSet set = reg.feature_set();
    if (!parts.event) throw AssemblyError("event");
    if (!parts.processed) throw AssemblyError("processed");
    if (!parts.style) throw AssemblyError("style");
    if (!parts.readability) throw AssemblyError("readability");
    if (!parts.affect) throw AssemblyError("affect");
    if (!parts.creator) throw AssemblyError("creator");
    if (!parts.context) throw AssemblyError("context");
    if (!parts.profile) throw AssemblyError("profile");
    if (!parts.duplicated) throw AssemblyError("duplicate");
    if (set != FeatureSet::A && !parts.ngrams) throw AssemblyError("ngram");
    if (set == FeatureSet::C && !parts.lexicon) throw AssemblyError("lexicon");

    FeatureVector v;
    v.set = set;
    v.values.assign(reg.size(), 0.0);
    auto put = [&](std::string_view name, double value) { v.set_value(reg.id_of(name), value); };
    auto b = [](bool f) { return f ? 1.0 : 0.0; };
    auto n = [](std::size_t c) { return static_cast<double>(c); };

    const auto& cr = *parts.creator;
    put("has_description", b(cr.has_description));
    put("has_profile_image", b(cr.has_profile_image));
    put("protected", b(cr.is_protected));
    put("verified", b(cr.verified));
    put("follower_count", cr.follower_count);
    put("friend_count", cr.friend_count);
    put("friends_followers_ratio", cr.friends_followers_ratio);
    put("user_favourite_count", cr.user_favourite_count);
    put("registration_time_span_days", cr.registration_days);
    put("weekly_tweet_frequency", cr.weekly_frequency);

    const auto& st = *parts.style;
    put("text_duplicated", b(*parts.duplicated));
    put("adjective_count", n(st.adjective));
    put("auxiliary_count", n(st.auxiliary));
    put("bad_word_count", n(st.bad_word));
    put("char_count", n(st.character));
    put("determiner_count", n(st.determiner));
    put("difficult_word_count", n(st.difficult_word));
    for (std::size_t e = 0; e < kNumEmotions; ++e) put(kEmotionNames[e], parts.affect->emotions[e]);
    put("flesch_reading_ease", parts.readability->flesch_reading_ease);
    put("hashtag_count", n(st.hashtag));
    put("image_count", n(st.image));
    put("link_count", n(st.link));
    put("link_repeated_count", n(st.link_repeated));
    put("mcalpine_eflaw", parts.readability->mcalpine_eflaw);
    put("noun_count", n(st.noun));
    put("polarity", parts.affect->polarity);
    put("pronoun_count", n(st.pronoun));
    put("punctuation_count", n(st.punctuation));
    put("reading_time", parts.readability->reading_time_s);
    put("uppercase_word_count", n(st.uppercase_word));
    put("video_count", n(st.video));
    put("word_count", n(st.word));

    const auto& cx = *parts.context;
    put("retweeted", b(cx.retweeted));
    put("favourited", b(cx.favourited));
    put("distribution_depth", cx.distribution_depth);
    put("first_level_retweets", cx.first_level_retweets);
    put("retweet_count", cx.retweet_count);
    put("favourite_count", cx.favourite_count);

    // Companions compare against strictly earlier posts; without history the
    // current value stands in for the average.
    for (std::size_t s = 0; s < kNumProfiled; ++s) {
        const double current = v.at(reg.profiled_base(s));
        const auto mean = parts.profile->mean_of(s);
        v.set_value(reg.profiled_average(s), mean.value_or(current));
        v.set_value(reg.profiled_trend(s), b(trend_flag(current, mean)));
    }

    std::string tz = cr.timezone.empty() ? "none" : cr.timezone;
    std::string tz_name = std::string(kTimezonePrefix) + tz;
    if (!reg.find(tz_name) && reg.timezone_count() >= kMaxTimezones) tz_name = std::string(kTimezonePrefix) + "other";
    v.set_value(reg.intern({tz_name, ProfileClass::creator, DataType::categorical, FeatureKind::timezone, 5,
                            FeatureSet::A, std::nullopt}),
                1.0);

    if (set != FeatureSet::A) {
        for (const auto& [gram, count] : *parts.ngrams) {
            const FeatureId id = reg.intern({std::string(kNgramPrefix) + gram, ProfileClass::content,
                                             DataType::textual, FeatureKind::ngram, 34, FeatureSet::B, std::nullopt});
            v.set_value(id, count);
        }
    }
    if (set == FeatureSet::C) {
        v.set_value(reg.lexicon_fake(), n(parts.lexicon->fake));
        v.set_value(reg.lexicon_nonfake(), n(parts.lexicon->non_fake));
    }
    v.values.resize(reg.size(), 0.0);
    return v;
}

/// Online variance-threshold selection: a feature survives while it has
/// fewer than two observations or its population variance exceeds the
/// threshold. Textual dimensions are exempt.
class VarianceSelector {
public:
    explicit VarianceSelector(double threshold = 0.0) : threshold_(threshold) {}

    [[nodiscard]] bool keeps(FeatureId id, const FeatureRegistry& reg) const {
        if (reg.info(id).selection_exempt()) return true;
        if (id >= stats_.size() || stats_[id].weight() < 2.0) return true;
        return stats_[id].population_variance() > threshold_;
    }

    /// Copy of `v` with dropped dimensions zeroed (ids keep their positions).
    [[nodiscard]] FeatureVector select(const FeatureVector& v, const FeatureRegistry& reg) const {
        FeatureVector out = v;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            if (!keeps(static_cast<FeatureId>(i), reg)) out.values[i] = 0.0;
        return out;
    }

    [[nodiscard]] std::vector<FeatureId> selected(const FeatureRegistry& reg) const {
        std::vector<FeatureId> out;
        for (std::size_t i = 0; i < reg.size(); ++i)
            if (keeps(static_cast<FeatureId>(i), reg)) out.push_back(static_cast<FeatureId>(i));
        return out;
    }

    void update(const FeatureVector& v) {
        if (stats_.size() < v.values.size()) stats_.resize(v.values.size());
        for (std::size_t i = 0; i < v.values.size(); ++i) stats_[i].update(v.values[i]);
    }

    [[nodiscard]] double variance(FeatureId id) const {
        return id < stats_.size() ? stats_[id].population_variance() : 0.0;
    }

    [[nodiscard]] double threshold() const noexcept { return threshold_; }

    template <class Archive>
    void serialize(Archive& ar) { ar(threshold_, stats_); }

private:
    double threshold_;
    std::vector<RunningStats> stats_;
};

/// z-scores against the running mean and population std of earlier values.
class Standardizer {
public:
    [[nodiscard]] double z(FeatureId id, double x) const {
        if (id >= stats_.size() || !(stats_[id].weight() > 0.0)) return x;
        const double sd = stats_[id].population_std();
        return sd > 0.0 ? (x - stats_[id].mean()) / sd : 0.0;
    }

    [[nodiscard]] std::vector<double> standardize(const FeatureVector& v) const {
        std::vector<double> out(v.values.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = z(static_cast<FeatureId>(i), v.values[i]);
        return out;
    }

    void update(const FeatureVector& v) { update(v.values); }

    void update(const std::vector<double>& values) {
        if (stats_.size() < values.size()) stats_.resize(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) stats_[i].update(values[i]);
    }

    [[nodiscard]] const RunningStats& stats(FeatureId id) const { return stats_.at(id); }
    [[nodiscard]] std::size_t dims() const noexcept { return stats_.size(); }

    template <class Archive>
    void serialize(Archive& ar) { ar(stats_); }

private:
    std::vector<RunningStats> stats_;
};

}  // namespace fakestream
