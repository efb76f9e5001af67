#include <gtest/gtest.h>

#include <sstream>

#include "fakestream/ingest.hpp"
#include "support.hpp"

using namespace fakestream;
using nlohmann::json;

namespace {

json full_record() {
    return json::parse(R"({
      "tweet_id": "1", "user_id": "u1", "timestamp": "2015-01-07T11:06:08Z", "text": "hello world",
      "label": "fake",
      "creator": {"has_description": true, "has_profile_image": true, "protected": false, "verified": false,
                  "timezone": "London", "follower_count": 10, "friend_count": 5, "user_favourite_count": 2,
                  "registered_at": "2010-01-01T00:00:00Z"},
      "context": {"retweeted": false, "favourited": false, "distribution_depth": 1, "first_level_retweets": 1,
                  "retweet_count": 3, "favourite_count": 4, "image_urls": [], "video_urls": [], "link_urls": []}
    })");
}

std::string line_at(const std::string& id, const std::string& ts) {
    json j = full_record();
    j["tweet_id"] = id;
    j["timestamp"] = ts;
    return j.dump();
}

}  // namespace

TEST(Validate, FullRecordHasNoDefaults) {
    auto r = validate_event(full_record());
    ASSERT_TRUE(std::holds_alternative<ValidatedEvent>(r));
    const auto& v = std::get<ValidatedEvent>(r);
    EXPECT_TRUE(v.defaulted.empty());
    EXPECT_EQ(v.event.tweet_id, "1");
    EXPECT_EQ(v.event.label, Label::fake);
    EXPECT_EQ(v.event.creator.follower_count, 10);
    EXPECT_EQ(v.event.context.favourite_count, 4);
}

TEST(Validate, MissingCountIsDefaultedAndMarked) {
    json j = full_record();
    j["context"].erase("favourite_count");
    auto r = validate_event(j);
    ASSERT_TRUE(std::holds_alternative<ValidatedEvent>(r));
    const auto& v = std::get<ValidatedEvent>(r);
    EXPECT_EQ(v.event.context.favourite_count, 0);
    ASSERT_EQ(v.defaulted.size(), 1u);
    EXPECT_EQ(v.defaulted[0], "context.favourite_count");
}

TEST(Validate, NegativeCountNamesTheField) {
    json j = full_record();
    j["creator"]["follower_count"] = -1;
    auto r = validate_event(j);
    ASSERT_TRUE(std::holds_alternative<ValidationError>(r));
    EXPECT_NE(std::get<ValidationError>(r).field.find("follower_count"), std::string::npos);
}

TEST(Validate, RequiredFieldsReject) {
    for (const char* field : {"tweet_id", "user_id", "timestamp", "text"}) {
        json j = full_record();
        j.erase(field);
        auto r = validate_event(j);
        ASSERT_TRUE(std::holds_alternative<ValidationError>(r)) << field;
        EXPECT_EQ(std::get<ValidationError>(r).field, field);
    }
}

TEST(Validate, RegistrationAfterTweetRejected) {
    json j = full_record();
    j["creator"]["registered_at"] = "2016-01-01T00:00:00Z";
    EXPECT_TRUE(std::holds_alternative<ValidationError>(validate_event(j)));
}

TEST(Validate, DepthWithoutRetweetsIsFlagged) {
    json j = full_record();
    j["context"]["retweet_count"] = 0;
    auto r = validate_event(j);
    ASSERT_TRUE(std::holds_alternative<ValidatedEvent>(r));
    EXPECT_TRUE(std::get<ValidatedEvent>(r).inconsistent_context);
}

TEST(Timestamps, Rfc3339RoundTrip) {
    auto t = parse_rfc3339("2015-01-07T11:06:08.250+01:00");
    ASSERT_TRUE(t);
    EXPECT_EQ(format_rfc3339(*t), "2015-01-07T10:06:08.250Z");
    EXPECT_FALSE(parse_rfc3339("2015-13-07T11:06:08Z"));
    EXPECT_FALSE(parse_rfc3339("yesterday"));
}

TEST(ReadStream, OrdersByTimestamp) {
    std::stringstream in;
    in << line_at("c", "2015-01-03T00:00:00Z") << "\n"
       << line_at("a", "2015-01-01T00:00:00Z") << "\n"
       << line_at("b", "2015-01-02T00:00:00Z") << "\n";
    auto s = read_stream(in);
    ASSERT_EQ(s.events.size(), 3u);
    EXPECT_EQ(s.events[0].tweet_id, "a");
    EXPECT_EQ(s.events[1].tweet_id, "b");
    EXPECT_EQ(s.events[2].tweet_id, "c");
    EXPECT_TRUE(s.report.out_of_order);
}

TEST(ReadStream, BadLineBecomesErrorRecord) {
    json missing = full_record();
    missing.erase("tweet_id");
    std::stringstream in;
    in << line_at("a", "2015-01-01T00:00:00Z") << "\n" << missing.dump() << "\n"
       << line_at("b", "2015-01-02T00:00:00Z") << "\n";
    auto s = read_stream(in);
    EXPECT_EQ(s.events.size(), 2u);
    ASSERT_EQ(s.report.errors.size(), 1u);
    EXPECT_EQ(s.report.errors[0].line, 2u);
    EXPECT_EQ(s.report.errors[0].field, "tweet_id");
}

TEST(ReadStream, ValidPlusInvalidEqualsLines) {
    std::stringstream in;
    in << "{not json\n" << line_at("a", "2015-01-01T00:00:00Z") << "\n"
       << line_at("a", "2015-01-02T00:00:00Z") << "\n"  // duplicate id
       << "[]\n" << line_at("b", "2015-01-02T00:00:00Z") << "\n";
    auto s = read_stream(in);
    EXPECT_EQ(s.report.lines, 5u);
    EXPECT_EQ(s.report.valid + s.report.invalid, s.report.lines);
    EXPECT_EQ(s.report.valid, 2u);
}

TEST(ReadStream, MissingFileIsFatal) {
    EXPECT_THROW((void)read_stream(std::filesystem::path("/nonexistent/stream.jsonl")), Error);
}

TEST(ReadStream, ReplayIsDeterministic) {
    fixtures::TempDir dir("ingest");
    fixtures::StreamShape shape;
    shape.events = 200;
    fixtures::write_stream(fixtures::synthetic_stream(shape), dir / "s.jsonl");
    const auto a = read_stream(dir / "s.jsonl");
    const auto b = read_stream(dir / "s.jsonl");
    ASSERT_EQ(a.events.size(), 200u);
    EXPECT_EQ(a.events, b.events);
    std::string da, db;
    for (const auto& e : a.events) da += event_to_json(e).dump();
    for (const auto& e : b.events) db += event_to_json(e).dump();
    EXPECT_EQ(da, db);
    EXPECT_EQ(a.report.to_json(), b.report.to_json());
}

TEST(ReadStream, EventJsonRoundTrip) {
    fixtures::StreamShape shape;
    shape.events = 50;
    for (const auto& e : fixtures::synthetic_stream(shape)) {
        auto r = validate_event(event_to_json(e));
        ASSERT_TRUE(std::holds_alternative<ValidatedEvent>(r));
        EXPECT_EQ(std::get<ValidatedEvent>(r).event, e);
    }
}
