#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fakestream/core.hpp"
#include "fakestream/ingest.hpp"

namespace fakestream::pheme {

namespace fs = std::filesystem;
using nlohmann::json;

/// Twitter API date: `Wed Jan 07 11:06:08 +0000 2015`.
[[nodiscard]] inline std::optional<Timestamp> parse_twitter_date(std::string_view s) {
    static constexpr std::string_view months[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    if (s.size() != 30) return std::nullopt;
    int mon = 0;
    for (int i = 0; i < 12; ++i)
        if (s.substr(4, 3) == months[i]) mon = i + 1;
    if (mon == 0) return std::nullopt;
    const std::string iso = std::string(s.substr(26, 4)) + "-" + (mon < 10 ? "0" : "") + std::to_string(mon) + "-" +
                            std::string(s.substr(8, 2)) + "T" + std::string(s.substr(11, 8)) +
                            std::string(s.substr(20, 3)) + ":" + std::string(s.substr(23, 2));
    return parse_rfc3339(iso);
}

/// Longest root-to-leaf path in edges; a thread with no reactions has depth 0.
[[nodiscard]] inline std::int64_t tree_depth(const json& node) {
    if (!node.is_object() || node.empty()) return 0;
    std::int64_t best = 0;
    for (const auto& [_, child] : node.items()) best = std::max(best, 1 + tree_depth(child));
    return best;
}

/// Depth below the source tweet and the number of its direct children.
struct ThreadShape {
    std::int64_t depth = 0;
    std::int64_t first_level = 0;
};

[[nodiscard]] inline ThreadShape thread_shape(const json& structure) {
    ThreadShape s;
    if (!structure.is_object() || structure.empty()) return s;
    const json& root = structure.begin().value();
    s.depth = tree_depth(root);
    s.first_level = root.is_object() ? static_cast<std::int64_t>(root.size()) : 0;
    return s;
}

namespace detail {

inline json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("cannot read " + p.string());
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("malformed JSON in " + p.string());
    return j;
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        return fallback;
    }
}

inline std::string id_of(const json& obj, const char* str_key, const char* num_key) {
    if (auto it = obj.find(str_key); it != obj.end() && it->is_string()) return it->get<std::string>();
    if (auto it = obj.find(num_key); it != obj.end() && it->is_number_integer())
        return std::to_string(it->get<std::int64_t>());
    return {};
}

inline void collect_media(const json& tweet, ContextMeta& ctx) {
    std::set<std::string> images, videos;
    for (const char* section : {"entities", "extended_entities"}) {
        auto ent = tweet.find(section);
        if (ent == tweet.end() || !ent->is_object()) continue;
        auto media = ent->find("media");
        if (media == ent->end() || !media->is_array()) continue;
        for (const auto& m : *media) {
            const std::string url = get_or<std::string>(m, "media_url_https", get_or<std::string>(m, "media_url", ""));
            const std::string type = get_or<std::string>(m, "type", "photo");
            if (url.empty()) continue;
            (type == "photo" ? images : videos).insert(url);
        }
    }
    ctx.image_urls.assign(images.begin(), images.end());
    ctx.video_urls.assign(videos.begin(), videos.end());
    if (auto ent = tweet.find("entities"); ent != tweet.end() && ent->is_object())
        if (auto urls = ent->find("urls"); urls != ent->end() && urls->is_array())
            for (const auto& u : *urls) {
                const std::string url = get_or<std::string>(u, "expanded_url", get_or<std::string>(u, "url", ""));
                if (!url.empty()) ctx.link_urls.push_back(url);
            }
}

}  // namespace detail

/// One event from a source tweet record and its thread structure.
[[nodiscard]] inline TweetEvent event_from_source(const json& tweet, const json& structure, Label label) {
    TweetEvent ev;
    ev.tweet_id = detail::id_of(tweet, "id_str", "id");
    ev.text = detail::get_or<std::string>(tweet, "full_text", detail::get_or<std::string>(tweet, "text", ""));
    ev.label = label;
    if (ev.tweet_id.empty()) throw Error("source tweet without id");
    auto ts = parse_twitter_date(detail::get_or<std::string>(tweet, "created_at", ""));
    if (!ts) throw Error("source tweet " + ev.tweet_id + " has no parseable created_at");
    ev.timestamp = *ts;

    const json user = tweet.contains("user") && tweet["user"].is_object() ? tweet["user"] : json::object();
    ev.user_id = detail::id_of(user, "id_str", "id");
    if (ev.user_id.empty()) throw Error("source tweet " + ev.tweet_id + " has no user id");
    auto& c = ev.creator;
    c.has_description = !detail::get_or<std::string>(user, "description", "").empty();
    c.has_profile_image = !detail::get_or<bool>(user, "default_profile_image", false);
    c.is_protected = detail::get_or<bool>(user, "protected", false);
    c.verified = detail::get_or<bool>(user, "verified", false);
    c.timezone = detail::get_or<std::string>(user, "time_zone", "");
    c.follower_count = std::max<std::int64_t>(0, detail::get_or<std::int64_t>(user, "followers_count", 0));
    c.friend_count = std::max<std::int64_t>(0, detail::get_or<std::int64_t>(user, "friends_count", 0));
    c.user_favourite_count = std::max<std::int64_t>(0, detail::get_or<std::int64_t>(user, "favourites_count", 0));
    auto reg = parse_twitter_date(detail::get_or<std::string>(user, "created_at", ""));
    c.registered_at = reg && *reg <= ev.timestamp ? *reg : ev.timestamp;

    auto& x = ev.context;
    x.retweeted = detail::get_or<bool>(tweet, "retweeted", false);
    x.favourited = detail::get_or<bool>(tweet, "favorited", false);
    x.retweet_count = std::max<std::int64_t>(0, detail::get_or<std::int64_t>(tweet, "retweet_count", 0));
    x.favourite_count = std::max<std::int64_t>(0, detail::get_or<std::int64_t>(tweet, "favorite_count", 0));
    const ThreadShape shape = thread_shape(structure);
    x.distribution_depth = shape.depth;
    x.first_level_retweets = shape.first_level;
    detail::collect_media(tweet, x);
    return ev;
}

struct ConvertReport {
    std::string source;
    std::size_t threads = 0;
    std::size_t events = 0;
    std::size_t fake = 0;
    std::size_t non_fake = 0;
    std::size_t distinct_users = 0;
    std::size_t duplicates = 0;
    std::map<std::string, std::size_t> per_event;  ///< PHEME event (story) → converted threads
    std::vector<std::string> errors;

    [[nodiscard]] json to_json() const {
        return {{"source", source},     {"threads", threads},
                {"events", events},     {"labels", {{"fake", fake}, {"non_fake", non_fake}}},
                {"distinct_users", distinct_users}, {"duplicates", duplicates},
                {"per_event", per_event}, {"errors", errors}};
    }
};

struct Conversion {
    std::vector<TweetEvent> events;  ///< sorted by (timestamp, tweet_id)
    ConvertReport report;
};

namespace detail {

inline std::vector<fs::path> sorted_children(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::optional<fs::path> source_file(const fs::path& thread) {
    for (const char* sub : {"source-tweet", "source-tweets"}) {
        const fs::path d = thread / sub;
        if (!fs::is_directory(d)) continue;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(d))
            if (e.is_regular_file() && e.path().extension() == ".json" && !e.path().filename().string().starts_with("."))
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (!files.empty()) return files.front();
    }
    return std::nullopt;
}

/// Every `rumours`/`non-rumours` directory below `root`, sorted.
inline std::vector<std::pair<fs::path, Label>> class_dirs(const fs::path& root) {
    std::vector<std::pair<fs::path, Label>> out;
    for (const auto& e : fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied)) {
        if (!e.is_directory()) continue;
        const std::string name = e.path().filename().string();
        if (name == "rumours") out.emplace_back(e.path(), Label::fake);
        else if (name == "non-rumours") out.emplace_back(e.path(), Label::non_fake);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

/// Walks `<story>/{rumours,non-rumours}/<thread>/source-tweet/*.json`.
/// Throws when the directory is missing or holds no class directories.
[[nodiscard]] inline Conversion convert_directory(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error("not a directory: " + root.string());
    const auto classes = detail::class_dirs(root);
    if (classes.empty()) throw Error("no rumours/non-rumours directories under " + root.string());
    Conversion out;
    auto& rep = out.report;
    rep.source = root.string();
    std::set<std::string> ids, users;
    for (const auto& [dir, label] : classes) {
        const std::string story = fs::relative(dir.parent_path(), root).generic_string();
        for (const auto& thread : detail::sorted_children(dir)) {
            ++rep.threads;
            const auto src = detail::source_file(thread);
            if (!src) {
                rep.errors.push_back(thread.filename().string() + ": no source tweet");
                continue;
            }
            try {
                const json tweet = detail::read_json(*src);
                const fs::path sp = thread / "structure.json";
                const json structure = fs::exists(sp) ? detail::read_json(sp) : json::object();
                TweetEvent ev = event_from_source(tweet, structure, label);
                if (!ids.insert(ev.tweet_id).second) {
                    ++rep.duplicates;
                    continue;
                }
                users.insert(ev.user_id);
                ++(label == Label::fake ? rep.fake : rep.non_fake);
                ++rep.per_event[story.empty() ? "." : story];
                out.events.push_back(std::move(ev));
            } catch (const std::exception& e) {
                rep.errors.push_back(thread.filename().string() + ": " + e.what());
            }
        }
    }
    if (rep.threads == 0) throw Error("no threads found under " + root.string());
    std::sort(out.events.begin(), out.events.end(), [](const TweetEvent& a, const TweetEvent& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.tweet_id < b.tweet_id;
    });
    rep.events = out.events.size();
    rep.distinct_users = users.size();
    return out;
}

inline void write_events(const std::vector<TweetEvent>& events, std::ostream& out) {
    for (const auto& ev : events) out << event_to_json(ev).dump() << '\n';
}

}  // namespace fakestream::pheme
