#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fakestream/core.hpp"
#include "fakestream/features.hpp"
#include "fakestream/hoeffding_tree.hpp"
#include "fakestream/ingest.hpp"
#include "fakestream/kmeans.hpp"
#include "fakestream/lexicon.hpp"
#include "fakestream/model_bank.hpp"

namespace fakestream {

struct PathStep {
    FeatureId feature = 0;
    std::string name;
    double threshold = 0.0;
    double value = 0.0;
    bool left = true;

    friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// Root-to-leaf tests `tree` applies to `x`.
[[nodiscard]] inline std::vector<PathStep> decision_path(const HoeffdingTree& tree, std::span<const double> x) {
    std::vector<PathStep> path;
    const TreeNode* node = &tree.root();
    while (!node->is_leaf) {
        const double v = node->feature < x.size() ? x[node->feature] : 0.0;
        path.push_back({node->feature, {}, node->threshold, v, v <= node->threshold});
        node = v <= node->threshold ? node->left.get() : node->right.get();
    }
    return path;
}

/// Follows recorded branch directions; null when a step does not match the tree.
[[nodiscard]] inline const TreeNode* replay_path(const HoeffdingTree& tree, const std::vector<PathStep>& path) {
    const TreeNode* node = &tree.root();
    for (const auto& step : path) {
        if (node->is_leaf || node->feature != step.feature || node->threshold != step.threshold) return nullptr;
        node = step.left ? node->left.get() : node->right.get();
    }
    return node->is_leaf ? node : nullptr;
}

struct ClusterFeature {
    FeatureId feature = 0;
    std::string name;
    double centroid = 0.0;
    double z = 0.0;

    friend bool operator==(const ClusterFeature&, const ClusterFeature&) = default;
};

/// Dimensions ordered by |centroid - mean| / std (std 0 scores 0), largest
/// first, lower id on ties, truncated to `k`.
[[nodiscard]] inline std::vector<ClusterFeature> rank_centroid_features(std::span<const double> centroid,
                                                                        const Standardizer& global, std::size_t k) {
    std::vector<ClusterFeature> all;
    all.reserve(centroid.size());
    for (std::size_t j = 0; j < centroid.size(); ++j) {
        double z = 0.0;
        if (j < global.dims()) {
            const auto& s = global.stats(static_cast<FeatureId>(j));
            const double sd = s.population_std();
            if (s.weight() > 0.0 && sd > 0.0) z = (centroid[j] - s.mean()) / sd;
        }
        all.push_back({static_cast<FeatureId>(j), {}, centroid[j], z});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const ClusterFeature& a, const ClusterFeature& b) { return std::fabs(a.z) > std::fabs(b.z); });
    if (all.size() > k) all.resize(k);
    return all;
}

/// Empty when the cluster has no assigned points yet.
[[nodiscard]] inline std::vector<ClusterFeature> cluster_characteristic_features(const OnlineKMeans& km,
                                                                                 std::size_t cluster,
                                                                                 const Standardizer& global,
                                                                                 std::size_t k) {
    if (cluster >= km.initialized() || km.count(cluster) == 0) return {};
    return rank_centroid_features(km.centroid(cluster), global, k);
}

struct FeatureLine {
    FeatureId feature = 0;
    std::string name;
    ProfileClass profile = ProfileClass::content;
    double value = 0.0;
    std::optional<double> user_average;
    bool warning = false;

    friend bool operator==(const FeatureLine&, const FeatureLine&) = default;
};

struct Explanation {
    std::string tweet_id;
    std::string user_id;
    std::string timestamp;
    std::string classifier;
    std::string feature_set;

    std::vector<FeatureLine> features;

    Label label = Label::non_fake;
    double probability = 0.5;
    int confidence_percent = 50;
    ClassDist distribution = uniform_dist();
    bool cold = true;

    std::vector<LexiconEntry> fake_lexicon;
    std::vector<LexiconEntry> non_fake_lexicon;

    std::size_t cluster = 0;
    std::vector<ClusterFeature> cluster_features;
    bool cluster_empty = false;

    bool has_tree = false;
    bool insufficient_history = false;
    std::optional<std::size_t> ensemble_member;
    std::vector<PathStep> path;
    std::vector<std::string> transcript;

    friend bool operator==(const Explanation&, const Explanation&) = default;
};

[[nodiscard]] inline int confidence_percent(double probability) noexcept {
    return static_cast<int>(std::clamp<long>(std::lround(probability * 100.0), 0, 100));
}

namespace detail {

[[nodiscard]] inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace detail

[[nodiscard]] inline std::string prediction_sentence(const Explanation& e) {
    return "The model classified the tweet as " + std::string(label_name(e.label)) + " with " +
           std::to_string(e.confidence_percent) + "% confidence.";
}

/// One sentence per path step plus a closing sentence with the label.
[[nodiscard]] inline std::vector<std::string> render_text(const Explanation& e) {
    std::vector<std::string> out;
    if (!e.has_tree) {
        out.push_back("The " + e.classifier + " model has no decision path; it classified the tweet as " +
                      std::string(label_name(e.label)) + " with " + std::to_string(e.confidence_percent) +
                      "% confidence.");
        return out;
    }
    if (e.path.empty()) {
        out.emplace_back("The model predicted from overall class frequencies (no splits yet).");
        return out;
    }
    for (const auto& s : e.path)
        out.push_back("Because " + s.name + " was " + detail::fixed2(s.value) + ", which is " +
                      (s.left ? "≤ " : "> ") + detail::fixed2(s.threshold) + ", the model followed the " +
                      (s.left ? "left" : "right") + " branch.");
    out.push_back(prediction_sentence(e));
    return out;
}

/// Everything needed to describe one prediction, taken before the model learns from the event.
struct ExplainInputs {
    const TweetEvent* event = nullptr;
    const FeatureRegistry* registry = nullptr;
    const FeatureVector* raw = nullptr;
    const FeatureVector* selected = nullptr;
    std::span<const double> z;
    const Prediction* prediction = nullptr;
    const VarianceSelector* selector = nullptr;
    const UserProfile* profile = nullptr;
    const ClassLexica* lexica = nullptr;
    const OnlineKMeans* kmeans = nullptr;
    const Standardizer* cluster_stats = nullptr;
    const AnyClassifier* model = nullptr;
    std::string classifier;
    std::size_t k = 5;
    std::size_t max_features = 8;
};

[[nodiscard]] inline Explanation build_explanation(const ExplainInputs& in) {
    const auto& reg = *in.registry;
    const auto& pred = *in.prediction;
    Explanation e;
    e.tweet_id = in.event->tweet_id;
    e.user_id = in.event->user_id;
    e.timestamp = format_rfc3339(in.event->timestamp);
    e.classifier = in.classifier;
    e.feature_set = std::string(feature_set_name(reg.feature_set()));
    e.label = pred.label;
    e.distribution = pred.dist;
    e.probability = pred.confidence();
    e.confidence_percent = confidence_percent(e.probability);
    e.cold = pred.cold;
    e.cluster = pred.cluster;

    const HoeffdingTree* tree = explaining_tree(*in.model, in.selected->values, pred.label);
    if (const auto* forest = std::get_if<AdaptiveRandomForest>(in.model))
        e.ensemble_member = forest->explaining_member(in.selected->values, pred.label);
    e.has_tree = tree != nullptr;
    e.insufficient_history = pred.cold;
    if (tree && !pred.cold) {
        e.path = decision_path(*tree, in.selected->values);
        for (auto& s : e.path) s.name = reg.name(s.feature);
    }

    // Split features, newest first, then the selected features furthest from their running mean.
    std::vector<FeatureId> shown;
    auto add = [&](FeatureId f) {
        if (shown.size() >= in.max_features) return;
        if (f >= reg.size() || !in.selector->keeps(f, reg)) return;
        if (std::find(shown.begin(), shown.end(), f) != shown.end()) return;
        shown.push_back(f);
    };
    if (tree)
        for (FeatureId f : tree->recent_split_features()) add(f);
    if (shown.size() < in.max_features) {
        std::vector<FeatureId> by_z;
        for (FeatureId f : in.selector->selected(reg)) by_z.push_back(f);
        std::stable_sort(by_z.begin(), by_z.end(), [&](FeatureId a, FeatureId b) {
            const double za = a < in.z.size() ? std::fabs(in.z[a]) : 0.0;
            const double zb = b < in.z.size() ? std::fabs(in.z[b]) : 0.0;
            return za > zb;
        });
        for (FeatureId f : by_z) add(f);
    }
    for (FeatureId f : shown) {
        FeatureLine line;
        line.feature = f;
        line.name = reg.name(f);
        line.profile = reg.info(f).profile;
        line.value = in.raw->at(f);
        if (auto slot = reg.profiled_slot(f)) {
            line.user_average = in.profile->mean_of(*slot);
            line.warning = line.user_average && line.value != *line.user_average;
        }
        e.features.push_back(std::move(line));
    }
    std::stable_sort(e.features.begin(), e.features.end(), [](const FeatureLine& a, const FeatureLine& b) {
        return static_cast<int>(a.profile) < static_cast<int>(b.profile);
    });

    auto top = [&](const std::vector<LexiconEntry>& src) {
        std::vector<LexiconEntry> out(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(std::min(in.k, src.size())));
        return out;
    };
    e.fake_lexicon = top(in.lexica->fake);
    e.non_fake_lexicon = top(in.lexica->non_fake);

    e.cluster_features = cluster_characteristic_features(*in.kmeans, pred.cluster, *in.cluster_stats, in.k);
    e.cluster_empty = e.cluster_features.empty();
    for (auto& c : e.cluster_features) c.name = reg.name(c.feature);

    e.transcript = render_text(e);
    return e;
}

// ---- structured form ----

inline void to_json(nlohmann::json& j, const PathStep& s) {
    j = {{"feature", s.feature}, {"name", s.name}, {"threshold", s.threshold}, {"value", s.value},
         {"branch", s.left ? "left" : "right"}};
}

inline void from_json(const nlohmann::json& j, PathStep& s) {
    s.feature = j.at("feature").get<FeatureId>();
    s.name = j.at("name").get<std::string>();
    s.threshold = j.at("threshold").get<double>();
    s.value = j.at("value").get<double>();
    s.left = j.at("branch").get<std::string>() == "left";
}

inline void to_json(nlohmann::json& j, const LexiconEntry& l) { j = {{"ngram", l.ngram}, {"frequency", l.frequency}}; }

inline void from_json(const nlohmann::json& j, LexiconEntry& l) {
    l.ngram = j.at("ngram").get<std::string>();
    l.frequency = j.at("frequency").get<std::uint64_t>();
}

[[nodiscard]] inline nlohmann::json explanation_to_json(const Explanation& e) {
    using nlohmann::json;
    json groups = json::object();
    for (auto pc : {ProfileClass::creator, ProfileClass::content, ProfileClass::context}) {
        json rows = json::array();
        for (const auto& f : e.features) {
            if (f.profile != pc) continue;
            json row = {{"feature", f.feature}, {"name", f.name}, {"value", f.value}, {"warning", f.warning}};
            row["user_average"] = f.user_average ? json(*f.user_average) : json(nullptr);
            rows.push_back(std::move(row));
        }
        groups[std::string(profile_class_name(pc))] = std::move(rows);
    }
    json cluster_rows = json::array();
    for (const auto& c : e.cluster_features)
        cluster_rows.push_back({{"feature", c.feature}, {"name", c.name}, {"centroid", c.centroid}, {"z", c.z}});

    json j;
    j["tweet_id"] = e.tweet_id;
    j["user_id"] = e.user_id;
    j["timestamp"] = e.timestamp;
    j["classifier"] = e.classifier;
    j["feature_set"] = e.feature_set;
    j["features"] = std::move(groups);
    j["prediction"] = {{"label", label_name(e.label)},
                       {"probability", e.probability},
                       {"confidence_percent", e.confidence_percent},
                       {"distribution", {{"non_fake", e.distribution[0]}, {"fake", e.distribution[1]}}},
                       {"cold", e.cold}};
    j["lexicon"] = {{"fake", e.fake_lexicon}, {"non_fake", e.non_fake_lexicon}};
    j["cluster"] = {{"id", e.cluster}, {"empty", e.cluster_empty}, {"features", std::move(cluster_rows)}};
    j["decision_path"] = {{"has_tree", e.has_tree},
                          {"insufficient_history", e.insufficient_history},
                          {"ensemble_member", e.ensemble_member ? json(*e.ensemble_member) : json(nullptr)},
                          {"steps", e.path},
                          {"transcript", e.transcript}};
    return j;
}

[[nodiscard]] inline Explanation explanation_from_json(const nlohmann::json& j) {
    Explanation e;
    e.tweet_id = j.at("tweet_id").get<std::string>();
    e.user_id = j.at("user_id").get<std::string>();
    e.timestamp = j.at("timestamp").get<std::string>();
    e.classifier = j.at("classifier").get<std::string>();
    e.feature_set = j.at("feature_set").get<std::string>();
    for (auto pc : {ProfileClass::creator, ProfileClass::content, ProfileClass::context}) {
        for (const auto& row : j.at("features").at(std::string(profile_class_name(pc)))) {
            FeatureLine f;
            f.feature = row.at("feature").get<FeatureId>();
            f.name = row.at("name").get<std::string>();
            f.profile = pc;
            f.value = row.at("value").get<double>();
            f.warning = row.at("warning").get<bool>();
            if (!row.at("user_average").is_null()) f.user_average = row.at("user_average").get<double>();
            e.features.push_back(std::move(f));
        }
    }
    const auto& p = j.at("prediction");
    auto label = parse_label(p.at("label").get<std::string>());
    if (!label) throw Error("explanation: bad label");
    e.label = *label;
    e.probability = p.at("probability").get<double>();
    e.confidence_percent = p.at("confidence_percent").get<int>();
    e.distribution = {p.at("distribution").at("non_fake").get<double>(), p.at("distribution").at("fake").get<double>()};
    e.cold = p.at("cold").get<bool>();
    e.fake_lexicon = j.at("lexicon").at("fake").get<std::vector<LexiconEntry>>();
    e.non_fake_lexicon = j.at("lexicon").at("non_fake").get<std::vector<LexiconEntry>>();
    const auto& c = j.at("cluster");
    e.cluster = c.at("id").get<std::size_t>();
    e.cluster_empty = c.at("empty").get<bool>();
    for (const auto& row : c.at("features"))
        e.cluster_features.push_back({row.at("feature").get<FeatureId>(), row.at("name").get<std::string>(),
                                      row.at("centroid").get<double>(), row.at("z").get<double>()});
    const auto& d = j.at("decision_path");
    e.has_tree = d.at("has_tree").get<bool>();
    e.insufficient_history = d.at("insufficient_history").get<bool>();
    if (!d.at("ensemble_member").is_null()) e.ensemble_member = d.at("ensemble_member").get<std::size_t>();
    e.path = d.at("steps").get<std::vector<PathStep>>();
    e.transcript = d.at("transcript").get<std::vector<std::string>>();
    return e;
}

enum class ReportFormat : std::uint8_t { text, structured, html };

[[nodiscard]] inline std::optional<ReportFormat> parse_report_format(std::string_view s) noexcept {
    if (s == "text") return ReportFormat::text;
    if (s == "structured" || s == "json") return ReportFormat::structured;
    if (s == "html") return ReportFormat::html;
    return std::nullopt;
}

[[nodiscard]] inline std::string_view report_extension(ReportFormat f) noexcept {
    switch (f) {
        case ReportFormat::text: return ".txt";
        case ReportFormat::structured: return ".json";
        case ReportFormat::html: return ".html";
    }
    return ".json";
}

namespace detail {

inline constexpr std::size_t kTextWidth = 100;

/// Greedy word wrap; continuation lines get `indent`.
inline void wrap_into(std::ostringstream& os, std::string_view line, std::string_view indent) {
    std::size_t width = 0;
    bool first_word = true;
    std::size_t i = 0;
    auto display_len = [](std::string_view w) {
        std::size_t n = 0;
        for (unsigned char c : w) n += (c & 0xC0) != 0x80;
        return n;
    };
    os << indent;
    width = indent.size();
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        if (j == i) break;
        const auto word = line.substr(i, j - i);
        const std::size_t wl = display_len(word);
        if (!first_word && width + 1 + wl > kTextWidth) {
            os << '\n' << indent << "  ";
            width = indent.size() + 2;
            first_word = true;
        }
        if (!first_word) {
            os << ' ';
            ++width;
        }
        os << word;
        width += wl;
        first_word = false;
        i = j;
    }
    os << '\n';
}

[[nodiscard]] inline std::string html_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

[[nodiscard]] inline std::string feature_row_text(const FeatureLine& f) {
    std::string name = f.name;
    if (name.size() > 40) name = name.substr(0, 37) + "...";
    char buf[160];
    const std::string avg = f.user_average ? detail::fixed2(*f.user_average) : "-";
    std::snprintf(buf, sizeof buf, "    %-40s %12s  avg %12s  %s", name.c_str(), detail::fixed2(f.value).c_str(),
                  avg.c_str(), f.warning ? "WARNING" : "OK");
    return buf;
}

}  // namespace detail

[[nodiscard]] inline std::string emit_text(const Explanation& e) {
    std::ostringstream os;
    detail::wrap_into(os, "Tweet " + e.tweet_id + " by user " + e.user_id + " at " + e.timestamp, "");
    detail::wrap_into(os,
                      "Classifier " + e.classifier + ", feature set " + e.feature_set + ", cluster " +
                          std::to_string(e.cluster),
                      "");
    os << '\n' << "[1] Selected features\n";
    for (auto pc : {ProfileClass::creator, ProfileClass::content, ProfileClass::context}) {
        os << "  " << profile_class_name(pc) << '\n';
        bool any = false;
        for (const auto& f : e.features)
            if (f.profile == pc) {
                os << detail::feature_row_text(f) << '\n';
                any = true;
            }
        if (!any) os << "    (none)\n";
    }
    os << '\n' << "[2] Prediction\n";
    detail::wrap_into(os, std::string(label_name(e.label)) + " with " + std::to_string(e.confidence_percent) +
                              "% confidence" + (e.cold ? " (cold model, no training data yet)" : ""),
                      "  ");
    os << '\n' << "[3] Lexicon elements\n";
    for (Label y : {Label::fake, Label::non_fake}) {
        const auto& list = y == Label::fake ? e.fake_lexicon : e.non_fake_lexicon;
        std::string line = std::string(label_name(y)) + ":";
        if (list.empty()) line += " (empty)";
        for (std::size_t i = 0; i < list.size(); ++i)
            line += (i ? ", \"" : " \"") + list[i].ngram + "\" (" + std::to_string(list[i].frequency) + ")";
        detail::wrap_into(os, line, "  ");
    }
    os << '\n' << "[4] Cluster " << e.cluster << " characteristic features\n";
    if (e.cluster_empty) os << "  (cluster has no members yet)\n";
    for (const auto& c : e.cluster_features) {
        char buf[160];
        std::string name = c.name.size() > 40 ? c.name.substr(0, 37) + "..." : c.name;
        std::snprintf(buf, sizeof buf, "  %-40s centroid %10.2f  z %+8.2f", name.c_str(), c.centroid, c.z);
        os << buf << '\n';
    }
    os << '\n' << "Decision path";
    if (e.ensemble_member) os << " (forest member " << *e.ensemble_member << ")";
    os << '\n';
    if (e.insufficient_history) os << "  insufficient history\n";
    for (const auto& s : e.transcript) detail::wrap_into(os, s, "  ");
    return os.str();
}

[[nodiscard]] inline std::string emit_structured(const Explanation& e) { return explanation_to_json(e).dump(2) + "\n"; }

[[nodiscard]] inline std::string emit_html(const Explanation& e) {
    using detail::html_escape;
    std::ostringstream os;
    os << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>Tweet "
       << html_escape(e.tweet_id) << "</title>\n</head>\n<body>\n";
    os << "<h1>Tweet " << html_escape(e.tweet_id) << "</h1>\n<p>User " << html_escape(e.user_id) << ", "
       << html_escape(e.timestamp) << ", classifier " << html_escape(e.classifier) << ", feature set "
       << html_escape(e.feature_set) << "</p>\n";

    os << "<section id=\"features\">\n<h2>Selected features</h2>\n";
    for (auto pc : {ProfileClass::creator, ProfileClass::content, ProfileClass::context}) {
        os << "<h3>" << profile_class_name(pc) << "</h3>\n<table>\n<tr><th>feature</th><th>value</th>"
           << "<th>user average</th><th>status</th></tr>\n";
        for (const auto& f : e.features) {
            if (f.profile != pc) continue;
            os << "<tr><td>" << html_escape(f.name) << "</td><td>" << detail::fixed2(f.value) << "</td><td>"
               << (f.user_average ? detail::fixed2(*f.user_average) : "-") << "</td><td>"
               << (f.warning ? "&#9888; warning" : "&#10004; OK") << "</td></tr>\n";
        }
        os << "</table>\n";
    }
    os << "</section>\n";

    os << "<section id=\"prediction\">\n<h2>Prediction</h2>\n<p>" << label_name(e.label) << " with "
       << e.confidence_percent << "% confidence" << (e.cold ? " (cold model)" : "") << "</p>\n</section>\n";

    os << "<section id=\"lexicon\">\n<h2>Lexicon elements</h2>\n";
    for (Label y : {Label::fake, Label::non_fake}) {
        const auto& list = y == Label::fake ? e.fake_lexicon : e.non_fake_lexicon;
        os << "<h3>" << label_name(y) << "</h3>\n<ol>\n";
        for (const auto& l : list) os << "<li>" << html_escape(l.ngram) << " (" << l.frequency << ")</li>\n";
        os << "</ol>\n";
    }
    os << "</section>\n";

    os << "<section id=\"cluster\">\n<h2>Cluster " << e.cluster << " characteristic features</h2>\n<ol>\n";
    for (const auto& c : e.cluster_features)
        os << "<li>" << html_escape(c.name) << ": centroid " << detail::fixed2(c.centroid) << ", z "
           << detail::fixed2(c.z) << "</li>\n";
    os << "</ol>\n";
    if (e.cluster_empty) os << "<p>Cluster has no members yet.</p>\n";
    os << "</section>\n";

    os << "<section id=\"decision-path\">\n<h2>Decision path</h2>\n";
    if (e.insufficient_history) os << "<p>Insufficient history.</p>\n";
    os << "<ol>\n";
    for (const auto& s : e.transcript) os << "<li>" << html_escape(s) << "</li>\n";
    os << "</ol>\n</section>\n</body>\n</html>\n";
    return os.str();
}

[[nodiscard]] inline std::string emit_report(const Explanation& e, ReportFormat format) {
    switch (format) {
        case ReportFormat::text: return emit_text(e);
        case ReportFormat::structured: return emit_structured(e);
        case ReportFormat::html: return emit_html(e);
    }
    throw Error("unknown report format");
}

}  // namespace fakestream
