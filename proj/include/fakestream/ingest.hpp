#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fakestream/core.hpp"

namespace fakestream {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

namespace detail {

inline bool parse_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

/// Accepts `YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]` (space also allowed as separator).
[[nodiscard]] inline std::optional<Timestamp> parse_rfc3339(std::string_view s) {
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    if (s.size() < 19) return std::nullopt;
    if (!detail::parse_digits(s, 0, 4, y) || s[4] != '-' || !detail::parse_digits(s, 5, 2, mo) || s[7] != '-' ||
        !detail::parse_digits(s, 8, 2, d) || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
        !detail::parse_digits(s, 11, 2, h) || s[13] != ':' || !detail::parse_digits(s, 14, 2, mi) || s[16] != ':' ||
        !detail::parse_digits(s, 17, 2, se))
        return std::nullopt;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 60) return std::nullopt;

    std::size_t pos = 19;
    long long millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (digits < 3) millis = millis * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) return std::nullopt;
        for (int i = digits; i < 3; ++i) millis *= 10;
    }
    long long offset_minutes = 0;
    if (pos == s.size()) return std::nullopt;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        int oh = 0, om = 0;
        if (!detail::parse_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
            !detail::parse_digits(s, pos + 4, 2, om))
            return std::nullopt;
        offset_minutes = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{se} + milliseconds{millis} -
                    minutes{offset_minutes};
    return time_point_cast<milliseconds>(tp);
}

/// UTC with `Z`; milliseconds are printed only when non-zero.
[[nodiscard]] inline std::string format_rfc3339(Timestamp t) {
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    char buf[40];
    const auto ms = hms.subseconds().count();
    if (ms != 0)
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                      static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                      static_cast<int>(hms.seconds().count()), static_cast<int>(ms));
    else
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                      static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                      static_cast<int>(hms.seconds().count()));
    return buf;
}

struct CreatorMeta {
    bool has_description = false;
    bool has_profile_image = false;
    bool is_protected = false;
    bool verified = false;
    std::string timezone;
    std::int64_t follower_count = 0;
    std::int64_t friend_count = 0;
    std::int64_t user_favourite_count = 0;
    Timestamp registered_at{};

    friend bool operator==(const CreatorMeta&, const CreatorMeta&) = default;
};

struct ContextMeta {
    bool retweeted = false;
    bool favourited = false;
    std::int64_t distribution_depth = 0;
    std::int64_t first_level_retweets = 0;
    std::int64_t retweet_count = 0;
    std::int64_t favourite_count = 0;
    std::vector<std::string> image_urls;
    std::vector<std::string> video_urls;
    std::vector<std::string> link_urls;

    friend bool operator==(const ContextMeta&, const ContextMeta&) = default;
};

struct TweetEvent {
    std::string tweet_id;
    std::string user_id;
    Timestamp timestamp{};
    std::string text;
    std::optional<Label> label;
    CreatorMeta creator;
    ContextMeta context;

    friend bool operator==(const TweetEvent&, const TweetEvent&) = default;
};

struct ValidationError {
    std::string field;
    std::string message;
};

/// A validated event plus the optional fields that were filled with defaults.
struct ValidatedEvent {
    TweetEvent event;
    std::vector<std::string> defaulted;
    bool inconsistent_context = false;
};

namespace detail {

using nlohmann::json;

struct FieldReader {
    const json& obj;
    std::string prefix;
    std::vector<std::string>& defaulted;
    std::optional<ValidationError> error;

    bool flag(const char* name, bool& out) {
        if (error) return false;
        auto it = obj.find(name);
        if (it == obj.end() || it->is_null()) {
            defaulted.push_back(prefix + name);
            out = false;
            return true;
        }
        if (!it->is_boolean()) return fail(name, "expected boolean");
        out = it->get<bool>();
        return true;
    }

    bool count(const char* name, std::int64_t& out) {
        if (error) return false;
        auto it = obj.find(name);
        if (it == obj.end() || it->is_null()) {
            defaulted.push_back(prefix + name);
            out = 0;
            return true;
        }
        if (!it->is_number_integer()) return fail(name, "expected integer count");
        out = it->get<std::int64_t>();
        if (out < 0) return fail(name, "negative count");
        return true;
    }

    bool text(const char* name, std::string& out) {
        if (error) return false;
        auto it = obj.find(name);
        if (it == obj.end() || it->is_null()) {
            defaulted.push_back(prefix + name);
            out.clear();
            return true;
        }
        if (!it->is_string()) return fail(name, "expected string");
        out = it->get<std::string>();
        return true;
    }

    bool urls(const char* name, std::vector<std::string>& out) {
        if (error) return false;
        auto it = obj.find(name);
        if (it == obj.end() || it->is_null()) {
            defaulted.push_back(prefix + name);
            out.clear();
            return true;
        }
        if (!it->is_array()) return fail(name, "expected array of strings");
        out.clear();
        for (const auto& v : *it) {
            if (!v.is_string()) return fail(name, "expected array of strings");
            out.push_back(v.get<std::string>());
        }
        return true;
    }

    bool fail(const char* name, std::string message) {
        error = ValidationError{prefix + name, std::move(message)};
        return false;
    }
};

inline std::optional<std::string> id_string(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) {
        auto s = it->get<std::string>();
        if (s.empty()) return std::nullopt;
        return s;
    }
    if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
    if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
    return std::nullopt;
}

}  // namespace detail

/// Validates one parsed record. Missing optional fields are defaulted
/// (flags false, counts 0, registration date = tweet time) and listed in
/// `defaulted`; missing identifiers, timestamp or text reject the record.
[[nodiscard]] inline std::variant<ValidatedEvent, ValidationError> validate_event(const nlohmann::json& raw) {
    using nlohmann::json;
    if (!raw.is_object()) return ValidationError{"", "record is not an object"};

    ValidatedEvent out;
    TweetEvent& ev = out.event;

    auto tweet_id = detail::id_string(raw, "tweet_id");
    if (!tweet_id) return ValidationError{"tweet_id", "missing or empty"};
    ev.tweet_id = *tweet_id;
    auto user_id = detail::id_string(raw, "user_id");
    if (!user_id) return ValidationError{"user_id", "missing or empty"};
    ev.user_id = *user_id;

    auto ts = raw.find("timestamp");
    if (ts == raw.end() || !ts->is_string()) return ValidationError{"timestamp", "missing"};
    auto parsed = parse_rfc3339(ts->get<std::string>());
    if (!parsed) return ValidationError{"timestamp", "not RFC 3339"};
    ev.timestamp = *parsed;

    auto text = raw.find("text");
    if (text == raw.end() || !text->is_string()) return ValidationError{"text", "missing"};
    ev.text = text->get<std::string>();

    if (auto lbl = raw.find("label"); lbl != raw.end() && !lbl->is_null()) {
        if (!lbl->is_string()) return ValidationError{"label", "expected \"fake\" or \"non_fake\""};
        ev.label = parse_label(lbl->get<std::string>());
        if (!ev.label) return ValidationError{"label", "expected \"fake\" or \"non_fake\""};
    }

    static const json empty_object = json::object();
    auto section = [&](const char* name) -> const json* {
        auto it = raw.find(name);
        if (it == raw.end() || it->is_null()) {
            out.defaulted.push_back(name);
            return &empty_object;
        }
        return it->is_object() ? &*it : nullptr;
    };

    const json* creator = section("creator");
    if (!creator) return ValidationError{"creator", "expected object"};
    detail::FieldReader cr{*creator, "creator.", out.defaulted, std::nullopt};
    CreatorMeta& cm = ev.creator;
    cr.flag("has_description", cm.has_description);
    cr.flag("has_profile_image", cm.has_profile_image);
    cr.flag("protected", cm.is_protected);
    cr.flag("verified", cm.verified);
    cr.text("timezone", cm.timezone);
    cr.count("follower_count", cm.follower_count);
    cr.count("friend_count", cm.friend_count);
    cr.count("user_favourite_count", cm.user_favourite_count);
    if (cr.error) return *cr.error;
    if (auto reg = creator->find("registered_at"); reg != creator->end() && !reg->is_null()) {
        if (!reg->is_string()) return ValidationError{"creator.registered_at", "not RFC 3339"};
        auto r = parse_rfc3339(reg->get<std::string>());
        if (!r) return ValidationError{"creator.registered_at", "not RFC 3339"};
        if (*r > ev.timestamp) return ValidationError{"creator.registered_at", "later than tweet timestamp"};
        cm.registered_at = *r;
    } else {
        out.defaulted.push_back("creator.registered_at");
        cm.registered_at = ev.timestamp;
    }

    const json* context = section("context");
    if (!context) return ValidationError{"context", "expected object"};
    detail::FieldReader cx{*context, "context.", out.defaulted, std::nullopt};
    ContextMeta& ctx = ev.context;
    cx.flag("retweeted", ctx.retweeted);
    cx.flag("favourited", ctx.favourited);
    cx.count("distribution_depth", ctx.distribution_depth);
    cx.count("first_level_retweets", ctx.first_level_retweets);
    cx.count("retweet_count", ctx.retweet_count);
    cx.count("favourite_count", ctx.favourite_count);
    cx.urls("image_urls", ctx.image_urls);
    cx.urls("video_urls", ctx.video_urls);
    cx.urls("link_urls", ctx.link_urls);
    if (cx.error) return *cx.error;
    out.inconsistent_context = ctx.distribution_depth >= 1 && ctx.retweet_count < 1;
    return out;
}

[[nodiscard]] inline nlohmann::json event_to_json(const TweetEvent& ev) {
    using nlohmann::json;
    json j;
    j["tweet_id"] = ev.tweet_id;
    j["user_id"] = ev.user_id;
    j["timestamp"] = format_rfc3339(ev.timestamp);
    j["text"] = ev.text;
    if (ev.label) j["label"] = std::string(label_name(*ev.label));
    const auto& c = ev.creator;
    j["creator"] = {{"has_description", c.has_description},
                    {"has_profile_image", c.has_profile_image},
                    {"protected", c.is_protected},
                    {"verified", c.verified},
                    {"timezone", c.timezone},
                    {"follower_count", c.follower_count},
                    {"friend_count", c.friend_count},
                    {"user_favourite_count", c.user_favourite_count},
                    {"registered_at", format_rfc3339(c.registered_at)}};
    const auto& x = ev.context;
    j["context"] = {{"retweeted", x.retweeted},
                    {"favourited", x.favourited},
                    {"distribution_depth", x.distribution_depth},
                    {"first_level_retweets", x.first_level_retweets},
                    {"retweet_count", x.retweet_count},
                    {"favourite_count", x.favourite_count},
                    {"image_urls", x.image_urls},
                    {"video_urls", x.video_urls},
                    {"link_urls", x.link_urls}};
    return j;
}

struct LineError {
    std::size_t line = 0;  // 1-based
    std::string field;
    std::string message;
};

struct LoadReport {
    std::string source;
    std::size_t lines = 0;
    std::size_t valid = 0;
    std::size_t invalid = 0;
    std::size_t events_with_defaults = 0;
    std::map<std::string, std::size_t> defaulted_fields;
    std::size_t inconsistent_context = 0;
    bool out_of_order = false;
    std::size_t fake = 0;
    std::size_t non_fake = 0;
    std::size_t unlabeled = 0;
    std::size_t distinct_users = 0;
    std::vector<LineError> errors;

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json errs = nlohmann::json::array();
        for (const auto& e : errors) errs.push_back({{"line", e.line}, {"field", e.field}, {"message", e.message}});
        return {{"source", source},
                {"lines", lines},
                {"valid", valid},
                {"invalid", invalid},
                {"events_with_defaults", events_with_defaults},
                {"defaulted_fields", defaulted_fields},
                {"inconsistent_context", inconsistent_context},
                {"out_of_order", out_of_order},
                {"sorted", out_of_order},
                {"labels", {{"fake", fake}, {"non_fake", non_fake}, {"unlabeled", unlabeled}}},
                {"distinct_users", distinct_users},
                {"errors", errs}};
    }
};

struct LoadedStream {
    std::vector<TweetEvent> events;
    LoadReport report;
};

/// Parses line-delimited records. Blank lines are ignored and not counted;
/// every other line yields either an event or an error record, so
/// `valid + invalid == lines`. Out-of-order input is stably sorted by time.
[[nodiscard]] inline LoadedStream read_stream(std::istream& in, std::string source_name = "<stream>") {
    LoadedStream out;
    LoadReport& rep = out.report;
    rep.source = std::move(source_name);
    std::set<std::string> seen_ids;
    std::set<std::string> users;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        ++rep.lines;
        auto parsed = nlohmann::json::parse(line, nullptr, false);
        if (parsed.is_discarded()) {
            rep.errors.push_back({line_no, "", "malformed JSON"});
            continue;
        }
        auto result = validate_event(parsed);
        if (auto* err = std::get_if<ValidationError>(&result)) {
            rep.errors.push_back({line_no, err->field, err->message});
            continue;
        }
        auto& ve = std::get<ValidatedEvent>(result);
        if (!seen_ids.insert(ve.event.tweet_id).second) {
            rep.errors.push_back({line_no, "tweet_id", "duplicate tweet_id " + ve.event.tweet_id});
            continue;
        }
        if (!ve.defaulted.empty()) ++rep.events_with_defaults;
        for (const auto& f : ve.defaulted) ++rep.defaulted_fields[f];
        if (ve.inconsistent_context) ++rep.inconsistent_context;
        users.insert(ve.event.user_id);
        if (!ve.event.label)
            ++rep.unlabeled;
        else if (*ve.event.label == Label::fake)
            ++rep.fake;
        else
            ++rep.non_fake;
        out.events.push_back(std::move(ve.event));
    }
    rep.valid = out.events.size();
    rep.invalid = rep.errors.size();
    rep.distinct_users = users.size();
    auto by_time = [](const TweetEvent& a, const TweetEvent& b) { return a.timestamp < b.timestamp; };
    if (!std::is_sorted(out.events.begin(), out.events.end(), by_time)) {
        rep.out_of_order = true;
        std::stable_sort(out.events.begin(), out.events.end(), by_time);
    }
    return out;
}

/// Throws when the file cannot be opened.
[[nodiscard]] inline LoadedStream read_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open input stream: " + path.string());
    return read_stream(in, path.string());
}

}  // namespace fakestream
