#pragma once

#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fakestream/ingest.hpp"
#include "fakestream/pheme.hpp"
#include "fakestream/random.hpp"

namespace fakestream::fixtures {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("fakestream_" + tag + "_" + std::to_string(rd()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const fs::path& path() const noexcept { return path_; }
    [[nodiscard]] fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline constexpr std::int64_t kStreamEpochMs = 1420070400000LL;  // 2015-01-01T00:00:00Z

struct StreamShape {
    std::size_t events = 500;
    std::size_t users = 40;
    double fake_rate = 0.4;
    /// Probability that a tweet uses the other class's vocabulary.
    double noise = 0.1;
    std::uint64_t seed = 11;
    /// Labels flip (fake <-> non_fake) from this index on; 0 disables.
    std::size_t flip_at = 0;
};

/// Labeled tweets whose wording, punctuation and creator metadata depend on
/// the class, so every feature family carries some signal.
[[nodiscard]] inline std::vector<TweetEvent> synthetic_stream(const StreamShape& shape) {
    static const std::vector<std::string> fake_words = {
        "shocking", "breaking", "hoax", "gunman", "hostage", "rumour", "unconfirmed", "secret",
        "exposed", "cover", "panic", "leaked", "insane", "massive", "truth", "hidden"};
    static const std::vector<std::string> real_words = {
        "report", "officials", "statement", "update", "police", "city", "council", "minister",
        "press", "conference", "confirmed", "investigation", "witnesses", "agency", "court", "hospital"};
    static const std::vector<std::string> tags = {"BreakingNews", "prayforparis", "JeSuisCharlie", "news", "update"};
    Rng rng(shape.seed);
    std::vector<TweetEvent> out;
    out.reserve(shape.events);
    for (std::size_t i = 0; i < shape.events; ++i) {
        TweetEvent e;
        e.tweet_id = std::to_string(500000000000ULL + i * 7);
        const std::size_t u = rng.below(shape.users);
        e.user_id = "user" + std::to_string(u);
        e.timestamp = Timestamp{std::chrono::milliseconds(kStreamEpochMs + static_cast<std::int64_t>(i) * 45000)};
        bool fake = rng.uniform() < shape.fake_rate;
        const bool style_fake = rng.uniform() < shape.noise ? !fake : fake;
        const auto& words = style_fake ? fake_words : real_words;
        std::string text;
        const std::size_t len = 6 + rng.below(8);
        for (std::size_t w = 0; w < len; ++w) {
            std::string word = words[rng.below(words.size())];
            if (style_fake && rng.uniform() < 0.2)
                for (char& c : word) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            text += word;
            text += ' ';
        }
        if (rng.uniform() < 0.5) text += "#" + tags[rng.below(tags.size())] + " ";
        text += style_fake ? "!!!" : ".";
        if (!style_fake && rng.uniform() < 0.4) text += " https://news.example/" + std::to_string(i);
        e.text = text;
        if (shape.flip_at > 0 && i >= shape.flip_at) fake = !fake;
        e.label = fake ? Label::fake : Label::non_fake;

        auto& c = e.creator;
        c.has_description = u % 3 != 0;
        c.has_profile_image = u % 5 != 0;
        c.verified = !style_fake && u % 4 == 0;
        c.timezone = u % 2 ? "London" : (u % 3 ? "Paris" : "");
        c.follower_count = static_cast<std::int64_t>(style_fake ? 20 + rng.below(300) : 800 + rng.below(20000));
        c.friend_count = static_cast<std::int64_t>(100 + rng.below(900));
        c.user_favourite_count = static_cast<std::int64_t>(rng.below(5000));
        c.registered_at = e.timestamp - std::chrono::hours(24 * static_cast<std::int64_t>(30 + u * 20));

        auto& x = e.context;
        x.retweet_count = static_cast<std::int64_t>(style_fake ? rng.below(400) : rng.below(60));
        x.favourite_count = static_cast<std::int64_t>(rng.below(200));
        x.distribution_depth = x.retweet_count > 0 ? 1 + static_cast<std::int64_t>(rng.below(4)) : 0;
        x.first_level_retweets = x.retweet_count > 0 ? 1 + static_cast<std::int64_t>(rng.below(5)) : 0;
        if (rng.uniform() < 0.2) x.image_urls.push_back("https://img.example/" + std::to_string(i) + ".jpg");
        out.push_back(std::move(e));
    }
    return out;
}

inline void write_stream(const std::vector<TweetEvent>& events, const fs::path& path) {
    std::ofstream out(path);
    for (const auto& e : events) out << event_to_json(e).dump() << '\n';
}

/// Twitter API timestamp for an offset in seconds from the stream epoch.
[[nodiscard]] inline std::string twitter_date(std::int64_t seconds) {
    static const char* weekdays[] = {"Thu", "Fri", "Sat", "Sun", "Mon", "Tue", "Wed"};  // epoch day is a Thursday
    static const char* months[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                   "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    using namespace std::chrono;
    const sys_seconds t{std::chrono::seconds(seconds + kStreamEpochMs / 1000)};
    const auto dp = floor<days>(t);
    const year_month_day ymd{dp};
    const hh_mm_ss hms{t - dp};
    const auto weekday = static_cast<std::size_t>(dp.time_since_epoch().count() % 7);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%s %s %02u %02d:%02d:%02d +0000 %04d", weekdays[weekday],
                  months[static_cast<unsigned>(ymd.month()) - 1], static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()), static_cast<int>(ymd.year()));
    return buf;
}

struct PhemeShape {
    std::size_t fake = 30;
    std::size_t non_fake = 50;
    std::size_t users = 25;
    std::vector<std::string> stories = {"charliehebdo", "germanwings-crash", "sydneysiege"};
};

/// Writes a directory in the public PHEME layout: one source tweet and a
/// reaction structure per thread.
inline void write_pheme_tree(const fs::path& root, const PhemeShape& shape) {
    Rng rng(99);
    const std::size_t total = shape.fake + shape.non_fake;
    for (std::size_t i = 0; i < total; ++i) {
        const bool fake = i < shape.fake;
        const std::string story = shape.stories[i % shape.stories.size()];
        const std::string id = std::to_string(552780000000000000ULL + i * 13);
        const fs::path thread = root / story / (fake ? "rumours" : "non-rumours") / id;
        fs::create_directories(thread / "source-tweet");
        fs::create_directories(thread / "reactions");
        const std::size_t user = i % shape.users;
        nlohmann::json tweet = {
            {"id", 552780000000000000ULL + i * 13},
            {"id_str", id},
            {"created_at", twitter_date(static_cast<std::int64_t>((i * 7919) % (total * 60)))},
            {"text", std::string(fake ? "BREAKING gunman reported inside" : "Police statement on the incident") +
                         " #" + story},
            {"retweet_count", static_cast<int>(rng.below(50))},
            {"favorite_count", static_cast<int>(rng.below(20))},
            {"retweeted", false},
            {"favorited", false},
            {"entities", {{"urls", nlohmann::json::array({{{"expanded_url", "https://example.org/" + id}}})}}},
            {"user",
             {{"id", 1000 + user},
              {"id_str", std::to_string(1000 + user)},
              {"description", user % 3 ? "journalist" : ""},
              {"default_profile_image", user % 4 == 0},
              {"protected", false},
              {"verified", user % 5 == 0},
              {"time_zone", user % 2 ? nlohmann::json("London") : nlohmann::json(nullptr)},
              {"followers_count", 100 + static_cast<int>(user) * 37},
              {"friends_count", 50 + static_cast<int>(user)},
              {"favourites_count", static_cast<int>(user) * 3},
              {"created_at", "Mon Mar 02 10:00:00 +0000 2009"}}}};
        std::ofstream(thread / "source-tweet" / (id + ".json")) << tweet.dump();
        // Root with i % 3 children; the first child has one reply of its own.
        nlohmann::json children = nlohmann::json::object();
        for (std::size_t c = 0; c < i % 3; ++c)
            children[id + "0" + std::to_string(c)] =
                c == 0 ? nlohmann::json{{id + "00x", nlohmann::json::array()}} : nlohmann::json::array();
        nlohmann::json structure = {{id, children.empty() ? nlohmann::json::array() : children}};
        std::ofstream(thread / "structure.json") << structure.dump();
    }
}

}  // namespace fakestream::fixtures
