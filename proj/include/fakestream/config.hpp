#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fakestream/core.hpp"
#include "fakestream/engine.hpp"
#include "fakestream/explain.hpp"
#include "fakestream/features.hpp"
#include "fakestream/metrics.hpp"
#include "fakestream/model_bank.hpp"
#include "fakestream/resources.hpp"

namespace fakestream {

enum class KeyType : std::uint8_t { text, path, integer, real, flag, choice };

struct ConfigKey {
    std::string_view name;
    std::string_view default_value;
    KeyType type;
    std::string_view choices;  // '|'-separated for KeyType::choice
    std::string_view help;
};

// Defaults are the best values of the hyperparameter search where one exists.
inline constexpr ConfigKey kConfigKeys[] = {
    {"input", "", KeyType::path, "", "line-delimited event file"},
    {"output_dir", "run", KeyType::path, "", "artifact directory"},
    {"classifier", "arfc", KeyType::choice, "gnb|htc|hatc|arfc|majority", "classifier family"},
    {"feature_set", "C", KeyType::choice, "A|B|C", "feature set"},
    {"window", "full", KeyType::choice, "full|fraction|count", "metric window mode"},
    {"window_fraction", "0.2", KeyType::real, "", "window size as a fraction of the stream"},
    {"window_count", "1000", KeyType::integer, "", "window size in events"},
    {"k", "10", KeyType::integer, "", "number of clusters"},
    {"seed", "42", KeyType::integer, "", "run seed"},
    {"majority_label", "auto", KeyType::choice, "auto|fake|non_fake", "label of the majority baseline"},
    {"explain_k", "5", KeyType::integer, "", "lexicon and centroid block size"},
    {"explain_every", "0", KeyType::integer, "", "emit an explanation every N events (0 = off)"},
    {"explain_ids", "", KeyType::path, "", "file of tweet ids to explain"},
    {"explain_format", "all", KeyType::choice, "all|text|structured|html", "report format"},
    {"series_every", "100", KeyType::integer, "", "metric series period"},
    {"snapshot_every", "0", KeyType::integer, "", "snapshot period in events (0 = final only)"},
    {"data_dir", "", KeyType::path, "", "directory of lexicon files (default: bundled data)"},
    {"stopwords", "", KeyType::path, "", "stopword list"},
    {"lemmas", "", KeyType::path, "", "lemma table"},
    {"bad_words", "", KeyType::path, "", "bad word list"},
    {"easy_words", "", KeyType::path, "", "easy word list"},
    {"pos_tags", "", KeyType::path, "", "part-of-speech lexicon"},
    {"polarity", "", KeyType::path, "", "polarity lexicon"},
    {"emotion", "", KeyType::path, "", "emotion lexicon"},
    {"word_corpus", "", KeyType::path, "", "English word list for hashtag splitting"},
    {"expand_hashtags", "true", KeyType::flag, "", "split hashtags into words"},
    {"ms_per_char", "14.69", KeyType::real, "", "reading time per character in milliseconds"},
    {"variance_threshold", "0", KeyType::real, "", "selector threshold"},
    {"ngram_min", "1", KeyType::integer, "", "vectorizer n-gram lower bound"},
    {"ngram_max", "3", KeyType::integer, "", "vectorizer n-gram upper bound"},
    {"max_df", "0.7", KeyType::real, "", "vectorizer maximum document frequency"},
    {"min_df", "0.01", KeyType::real, "", "vectorizer minimum document frequency"},
    {"lexicon_ngram_min", "2", KeyType::integer, "", "lexicon n-gram lower bound"},
    {"lexicon_ngram_max", "4", KeyType::integer, "", "lexicon n-gram upper bound"},
    {"lexicon_elements", "700", KeyType::integer, "", "entries per class lexicon"},
    {"lexicon_min_freq", "1", KeyType::integer, "", "frequency a term must exceed"},
    {"lexicon_warm_up_fraction", "0.05", KeyType::real, "", "warm-up as a fraction of the stream"},
    {"lexicon_open_ended", "false", KeyType::flag, "", "ignore the stream size for warm-up"},
    {"lexicon_open_ended_warm_up", "300", KeyType::integer, "", "warm-up events in open-ended mode"},
    {"lexicon_rebuild_every", "100", KeyType::integer, "", "lexicon rebuild period"},
    {"nb_var_floor", "1e-9", KeyType::real, "", "Gaussian variance floor"},
    {"htc_grace_period", "200", KeyType::real, "", ""},
    {"htc_split_confidence", "1e-7", KeyType::real, "", ""},
    {"htc_tie_threshold", "0.5", KeyType::real, "", ""},
    {"htc_max_depth", "50", KeyType::integer, "", ""},
    {"htc_max_size", "50", KeyType::integer, "", "node cap (0 = none)"},
    {"hatc_grace_period", "200", KeyType::real, "", ""},
    {"hatc_split_confidence", "1e-7", KeyType::real, "", ""},
    {"hatc_tie_threshold", "0.5", KeyType::real, "", ""},
    {"hatc_max_depth", "50", KeyType::integer, "", ""},
    {"hatc_max_size", "200", KeyType::integer, "", "node cap (0 = none)"},
    {"hatc_adwin_delta", "0.002", KeyType::real, "", ""},
    {"hatc_bootstrap_sampling", "false", KeyType::flag, "", ""},
    {"arfc_models", "200", KeyType::integer, "", ""},
    {"arfc_features", "50", KeyType::integer, "", "random subspace size per leaf"},
    {"arfc_lambda", "50", KeyType::real, "", "Poisson resampling rate"},
    {"arfc_warning_delta", "0.01", KeyType::real, "", ""},
    {"arfc_drift_delta", "0.002", KeyType::real, "", ""},
    {"arfc_grace_period", "200", KeyType::real, "", ""},
    {"arfc_split_confidence", "1e-7", KeyType::real, "", ""},
    {"arfc_tie_threshold", "0.05", KeyType::real, "", ""},
    {"arfc_max_depth", "50", KeyType::integer, "", ""},
    {"arfc_max_size", "0", KeyType::integer, "", "node cap (0 = none)"},
};

[[nodiscard]] inline const ConfigKey* find_key(std::string_view name) {
    for (const auto& k : kConfigKeys)
        if (k.name == name) return &k;
    return nullptr;
}

namespace detail {

[[nodiscard]] inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

[[nodiscard]] inline std::optional<bool> parse_flag(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    return std::nullopt;
}

[[nodiscard]] inline std::optional<std::int64_t> parse_int(std::string_view v) {
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) return std::nullopt;
    return out;
}

[[nodiscard]] inline std::optional<double> parse_real(std::string_view v) {
    if (v.empty()) return std::nullopt;
    std::string s(v);
    char* end = nullptr;
    const double out = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(out)) return std::nullopt;
    return out;
}

}  // namespace detail

/// Flat key=value run configuration. Every key has a default; unknown keys
/// and ill-typed values are rejected with the offending key named.
class RunConfig {
public:
    RunConfig() {
        for (const auto& k : kConfigKeys) values_[std::string(k.name)] = std::string(k.default_value);
    }

    /// `key = value` lines; '#' starts a comment.
    static RunConfig from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file: " + path.string());
        RunConfig cfg;
        cfg.merge_text(in, path.string());
        return cfg;
    }

    void merge_text(std::istream& in, const std::string& source = "<config>") {
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const std::string t = detail::trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(source + ":" + std::to_string(n) + ": expected key = value");
            set(detail::trim(std::string_view(t).substr(0, eq)), detail::trim(std::string_view(t).substr(eq + 1)));
        }
    }

    void set(const std::string& key, const std::string& value) {
        const ConfigKey* k = find_key(key);
        if (!k) throw ConfigError("unknown config key: " + key);
        validate(*k, value);
        values_[key] = value;
        explicit_.insert(key);
    }

    /// True when the key was set from a file or flag rather than defaulted.
    [[nodiscard]] bool is_explicit(const std::string& key) const { return explicit_.contains(key); }

    [[nodiscard]] const std::string& get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key: " + key);
        return it->second;
    }

    [[nodiscard]] std::int64_t integer(const std::string& key) const { return *detail::parse_int(get(key)); }
    [[nodiscard]] double real(const std::string& key) const { return *detail::parse_real(get(key)); }
    [[nodiscard]] bool flag(const std::string& key) const { return *detail::parse_flag(get(key)); }

    /// Fully resolved configuration in key order of the documented list.
    /// Makes implied settings explicit so the echo reloads to the same run.
    void resolve_implied() {
        if (!is_explicit("window")) {
            if (is_explicit("window_fraction")) set("window", "fraction");
            else if (is_explicit("window_count")) set("window", "count");
        }
    }

    [[nodiscard]] std::string resolved_text() const {
        std::string out;
        for (const auto& k : kConfigKeys) {
            out += k.name;
            out += " = ";
            out += get(std::string(k.name));
            out += '\n';
        }
        return out;
    }

    [[nodiscard]] ClassifierFamily family() const { return *parse_family(get("classifier")); }
    [[nodiscard]] FeatureSet feature_set() const { return *parse_feature_set(get("feature_set")); }

    [[nodiscard]] WindowSpec window() const {
        WindowSpec w;
        std::string mode = get("window");
        // A size given without a mode selects that mode.
        if (!is_explicit("window")) {
            if (is_explicit("window_fraction")) mode = "fraction";
            else if (is_explicit("window_count")) mode = "count";
        }
        if (mode == "fraction") {
            w.mode = WindowMode::fraction;
            w.fraction = real("window_fraction");
        } else if (mode == "count") {
            w.mode = WindowMode::count;
            w.count = static_cast<std::uint64_t>(integer("window_count"));
        }
        return w;
    }

    [[nodiscard]] ResourcePaths resource_paths() const {
        const auto& dir = get("data_dir");
        ResourcePaths p = dir.empty() ? ResourcePaths::defaults() : ResourcePaths::in_directory(dir);
        auto over = [&](const char* key, std::filesystem::path& slot) {
            if (!get(key).empty()) slot = get(key);
        };
        over("stopwords", p.stopwords);
        over("lemmas", p.lemmas);
        over("bad_words", p.bad_words);
        over("easy_words", p.easy_words);
        over("pos_tags", p.pos_tags);
        over("polarity", p.polarity);
        over("emotion", p.emotion);
        over("word_corpus", p.word_corpus);
        return p;
    }

    /// Engine settings for a stream of `stream_size` events with the given label counts.
    [[nodiscard]] EngineConfig engine_config(std::uint64_t stream_size, std::size_t fake = 0,
                                             std::size_t non_fake = 0) const {
        EngineConfig e;
        e.feature_set = feature_set();
        e.seed = static_cast<std::uint64_t>(integer("seed"));
        e.explain_k = static_cast<std::size_t>(integer("explain_k"));
        e.expand_hashtags = flag("expand_hashtags");
        e.ms_per_char = real("ms_per_char");
        e.variance_threshold = real("variance_threshold");

        e.vectorizer.ngram_min = static_cast<std::size_t>(integer("ngram_min"));
        e.vectorizer.ngram_max = static_cast<std::size_t>(integer("ngram_max"));
        e.vectorizer.max_df = real("max_df");
        e.vectorizer.min_df = real("min_df");

        e.lexicon.ngram_min = static_cast<std::size_t>(integer("lexicon_ngram_min"));
        e.lexicon.ngram_max = static_cast<std::size_t>(integer("lexicon_ngram_max"));
        e.lexicon.num_elements = static_cast<std::size_t>(integer("lexicon_elements"));
        e.lexicon.threshold = static_cast<std::uint64_t>(integer("lexicon_min_freq"));
        e.lexicon.warm_up_fraction = real("lexicon_warm_up_fraction");
        e.lexicon.expected_stream_size = flag("lexicon_open_ended") ? 0 : stream_size;
        e.lexicon.open_ended_warm_up = static_cast<std::uint64_t>(integer("lexicon_open_ended_warm_up"));
        e.lexicon.rebuild_every = static_cast<std::uint64_t>(integer("lexicon_rebuild_every"));

        auto& m = e.model;
        m.family = family();
        m.k = static_cast<std::size_t>(integer("k"));
        m.nb_var_floor = real("nb_var_floor");
        const auto& ml = get("majority_label");
        if (ml == "auto")
            m.majority_label = fake > non_fake ? Label::fake : Label::non_fake;
        else
            m.majority_label = *parse_label(ml);

        auto tree = [&](const std::string& prefix, TreeConfig& t) {
            t.grace_period = real(prefix + "_grace_period");
            t.split_confidence = real(prefix + "_split_confidence");
            t.tie_threshold = real(prefix + "_tie_threshold");
            t.max_depth = static_cast<std::size_t>(integer(prefix + "_max_depth"));
            t.max_size = static_cast<std::size_t>(integer(prefix + "_max_size"));
            t.nb_var_floor = m.nb_var_floor;
        };
        tree("htc", m.htc);
        tree("hatc", m.hatc);
        m.hatc.adwin_delta = real("hatc_adwin_delta");
        m.hatc.bootstrap_sampling = flag("hatc_bootstrap_sampling");
        tree("arfc", m.arfc.tree);
        m.arfc.n_models = static_cast<std::size_t>(integer("arfc_models"));
        m.arfc.max_features = static_cast<std::size_t>(integer("arfc_features"));
        m.arfc.lambda = real("arfc_lambda");
        m.arfc.warning_delta = real("arfc_warning_delta");
        m.arfc.drift_delta = real("arfc_drift_delta");
        return e;
    }

private:
    static void validate(const ConfigKey& k, const std::string& v) {
        auto fail = [&](const std::string& why) {
            throw ConfigError("config key '" + std::string(k.name) + "': " + why + " (got '" + v + "')");
        };
        switch (k.type) {
            case KeyType::text:
            case KeyType::path: break;
            case KeyType::integer: {
                auto n = detail::parse_int(v);
                if (!n) fail("expected an integer");
                if (*n < 0) fail("must be non-negative");
                if ((k.name == "k" || k.name == "arfc_models" || k.name == "ngram_min" ||
                     k.name == "lexicon_ngram_min" || k.name == "htc_max_depth" || k.name == "hatc_max_depth" ||
                     k.name == "arfc_max_depth") &&
                    *n == 0)
                    fail("must be at least 1");
                break;
            }
            case KeyType::real: {
                auto x = detail::parse_real(v);
                if (!x) fail("expected a number");
                if (*x < 0.0) fail("must be non-negative");
                if ((k.name == "max_df" || k.name == "min_df" || k.name == "window_fraction" ||
                     k.name == "lexicon_warm_up_fraction") &&
                    *x > 1.0)
                    fail("must be at most 1");
                if ((k.name == "window_fraction" || k.name.ends_with("_delta") ||
                     k.name.ends_with("_split_confidence")) &&
                    *x <= 0.0)
                    fail("must be positive");
                break;
            }
            case KeyType::flag:
                if (!detail::parse_flag(v)) fail("expected true or false");
                break;
            case KeyType::choice: {
                std::string_view rest = k.choices;
                while (!rest.empty()) {
                    const auto bar = rest.find('|');
                    if (rest.substr(0, bar) == v) return;
                    if (bar == std::string_view::npos) break;
                    rest.remove_prefix(bar + 1);
                }
                fail("expected one of " + std::string(k.choices));
            }
        }
    }

public:
    /// Cross-key checks that need the whole configuration.
    void check_consistency() const {
        if (integer("ngram_min") > integer("ngram_max"))
            throw ConfigError("config key 'ngram_min': exceeds ngram_max");
        if (integer("lexicon_ngram_min") > integer("lexicon_ngram_max"))
            throw ConfigError("config key 'lexicon_ngram_min': exceeds lexicon_ngram_max");
        if (real("min_df") > real("max_df")) throw ConfigError("config key 'min_df': exceeds max_df");
        if (get("window") == "count" && integer("window_count") == 0)
            throw ConfigError("config key 'window_count': must be at least 1");
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> explicit_;
};

}  // namespace fakestream
