#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twin/ids.hpp"
#include "twin/time.hpp"

namespace twin {

enum class Stream { ProfileStream, MemoryStream };

enum class Category {
  // profile stream
  UserProfile,
  Interests,
  Preferences,
  Knowledge,
  BehavioralTraits,
  Goals,
  HistoricalData,
  SocialContactFact,
  // memory stream
  Dialogue,
  Reflection,
  VitalEvent,
  VitalSummary,
};

enum class Source { ManualInput, DialogueLog, VitalsPipeline, ReflectionJob, Import };

enum class VitalMetric { HeartRate, Stress, Sleep, Activity };

enum class VitalPeriod { Hourly, Daily };

Stream stream_of(Category category) noexcept;

std::string_view to_string(Stream stream) noexcept;
std::string_view to_string(Category category) noexcept;
std::string_view to_string(Source source) noexcept;
std::string_view to_string(VitalMetric metric) noexcept;
std::string_view to_string(VitalPeriod period) noexcept;

// Inverse of to_string; std::nullopt for unknown names.
std::optional<Stream> parse_stream(std::string_view name) noexcept;
std::optional<Category> parse_category(std::string_view name) noexcept;
std::optional<Source> parse_source(std::string_view name) noexcept;
std::optional<VitalMetric> parse_metric(std::string_view name) noexcept;
std::optional<VitalPeriod> parse_period(std::string_view name) noexcept;

struct EmotionAnnotation {
  std::string label;
  double confidence = 0.0;

  friend bool operator==(const EmotionAnnotation&, const EmotionAnnotation&) = default;
};

struct TopicScore {
  std::string label;
  double score = 0.0;

  friend bool operator==(const TopicScore&, const TopicScore&) = default;
};

struct PersonaProfile {
  PersonaId persona_id;
  std::string name;
  std::map<std::string, std::string> core_identity;
  Timestamp created_at{};

  friend bool operator==(const PersonaProfile&, const PersonaProfile&) = default;
};

struct SocialContact {
  ContactId contact_id;
  std::string name;
  std::string relationship;
  std::string preferred_address;
  std::vector<std::string> interests;
  std::string conversational_tendencies;

  friend bool operator==(const SocialContact&, const SocialContact&) = default;
};

struct VitalSample {
  Timestamp timestamp{};
  VitalMetric metric = VitalMetric::HeartRate;
  double value = 0.0;

  friend bool operator==(const VitalSample&, const VitalSample&) = default;
};

// Conversation metadata carried by Dialogue and Reflection records. Parties
// are either the persona id or a contact id.
struct DialogueMeta {
  SessionId session_id;
  TurnId turn_id;  // empty on reflections
  std::string sender;
  std::string recipient;
  std::vector<TopicScore> topics;

  friend bool operator==(const DialogueMeta&, const DialogueMeta&) = default;
};

using Embedding = std::vector<float>;

struct MemoryRecord {
  MemoryId memory_id;
  Stream stream = Stream::ProfileStream;
  Category category = Category::UserProfile;
  std::string content;
  Timestamp created_at{};
  Timestamp last_accessed_at{};
  int importance_raw = 0;
  Embedding embedding;  // empty or all-zero = unembedded
  std::vector<ContactId> participants;
  std::vector<EmotionAnnotation> emotions;
  Source source = Source::ManualInput;
  std::optional<DialogueMeta> dialogue;
  std::map<std::string, std::string> metadata;

  bool embedded() const noexcept;

  friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

struct ConversationTurn {
  TurnId turn_id;
  SessionId session_id;
  std::string sender;
  std::string recipient;
  Timestamp timestamp{};
  std::string text;
  std::vector<EmotionAnnotation> emotions;
  std::vector<TopicScore> topics;

  friend bool operator==(const ConversationTurn&, const ConversationTurn&) = default;
};

// Euclidean norm, accumulated in double.
double norm(const Embedding& v) noexcept;

// Cosine similarity; 0 when either side is zero.
double cosine(const Embedding& a, const Embedding& b) noexcept;

}  // namespace twin
