#include <gtest/gtest.h>

#include <cmath>

#include "twin/error.hpp"
#include "twin/types.hpp"

using namespace twin;

TEST(Types, CategoryDeterminesStream) {
  for (const auto c : {Category::UserProfile, Category::Interests, Category::Preferences, Category::Knowledge,
                       Category::BehavioralTraits, Category::Goals, Category::HistoricalData,
                       Category::SocialContactFact}) {
    EXPECT_EQ(stream_of(c), Stream::ProfileStream) << to_string(c);
  }
  for (const auto c : {Category::Dialogue, Category::Reflection, Category::VitalEvent, Category::VitalSummary}) {
    EXPECT_EQ(stream_of(c), Stream::MemoryStream) << to_string(c);
  }
}

TEST(Types, EnumNamesRoundTrip) {
  for (int i = 0; i < 12; ++i) {
    const auto c = static_cast<Category>(i);
    EXPECT_EQ(parse_category(to_string(c)), c);
  }
  for (const auto m : {VitalMetric::HeartRate, VitalMetric::Stress, VitalMetric::Sleep, VitalMetric::Activity}) {
    EXPECT_EQ(parse_metric(to_string(m)), m);
  }
  EXPECT_EQ(to_string(VitalMetric::HeartRate), "heart_rate");
  EXPECT_EQ(parse_source("ReflectionJob"), Source::ReflectionJob);
  EXPECT_EQ(parse_category("Gossip"), std::nullopt);
  EXPECT_EQ(parse_period("weekly"), std::nullopt);
}

TEST(Types, CosineHandlesDegenerateVectors) {
  const Embedding a{1.0f, 0.0f};
  const Embedding b{0.0f, 1.0f};
  const Embedding zero{0.0f, 0.0f};
  EXPECT_DOUBLE_EQ(cosine(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine(a, Embedding{-1.0f, 0.0f}), -1.0);
  EXPECT_DOUBLE_EQ(cosine(a, zero), 0.0);
  EXPECT_DOUBLE_EQ(cosine(a, Embedding{1.0f}), 0.0);
  EXPECT_NEAR(norm(Embedding{3.0f, 4.0f}), 5.0, 1e-12);
}

TEST(Types, ErrorCodesHaveStableNames) {
  EXPECT_EQ(to_string(ErrorCode::MalformedScore), "malformed_score");
  EXPECT_EQ(to_string(ErrorCode::UnknownPersona), "unknown_persona");
  const Error e(ErrorCode::ParseError, "bad", 7);
  EXPECT_EQ(e.line(), 7u);
  EXPECT_EQ(Error(ErrorCode::IoFailure, "x").line(), std::nullopt);
}
