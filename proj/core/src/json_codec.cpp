#include "json_codec.hpp"

#include "twin/error.hpp"

namespace twin {

namespace {

template <typename E>
E require_enum(const json& j, const char* key, std::optional<E> (*parse)(std::string_view) noexcept) {
  const auto text = require_string(j, key);
  const auto value = parse(text);
  if (!value) {
    throw Error(ErrorCode::ParseError, std::string("unknown value for '") + key + "': " + text);
  }
  return *value;
}

}  // namespace

std::string require_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::ParseError, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::string optional_string(const json& j, const char* key, std::string fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    return fallback;
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

void to_json(json& j, const EmotionAnnotation& e) { j = json{{"label", e.label}, {"confidence", e.confidence}}; }

void from_json(const json& j, EmotionAnnotation& e) {
  e.label = require_string(j, "label");
  e.confidence = j.at("confidence").get<double>();
}

void to_json(json& j, const TopicScore& t) { j = json{{"label", t.label}, {"score", t.score}}; }

void from_json(const json& j, TopicScore& t) {
  t.label = require_string(j, "label");
  t.score = j.at("score").get<double>();
}

void to_json(json& j, const SocialContact& c) {
  j = json{{"contact_id", c.contact_id.str()},
           {"name", c.name},
           {"relationship", c.relationship},
           {"preferred_address", c.preferred_address},
           {"interests", c.interests},
           {"conversational_tendencies", c.conversational_tendencies}};
}

void from_json(const json& j, SocialContact& c) {
  c.contact_id = ContactId{require_string(j, "contact_id")};
  c.name = require_string(j, "name");
  c.relationship = optional_string(j, "relationship");
  c.preferred_address = optional_string(j, "preferred_address");
  c.interests = j.value("interests", std::vector<std::string>{});
  c.conversational_tendencies = optional_string(j, "conversational_tendencies");
}

void to_json(json& j, const VitalSample& s) {
  j = json{{"timestamp", format_rfc3339(s.timestamp)}, {"metric", to_string(s.metric)}, {"value", s.value}};
}

void from_json(const json& j, VitalSample& s) {
  s.timestamp = parse_rfc3339(require_string(j, "timestamp"));
  s.metric = require_enum<VitalMetric>(j, "metric", &parse_metric);
  s.value = j.at("value").get<double>();
}

void to_json(json& j, const DialogueMeta& d) {
  j = json{{"session_id", d.session_id.str()},
           {"turn_id", d.turn_id.str()},
           {"sender", d.sender},
           {"recipient", d.recipient},
           {"topics", d.topics}};
}

void from_json(const json& j, DialogueMeta& d) {
  d.session_id = SessionId{require_string(j, "session_id")};
  d.turn_id = TurnId{optional_string(j, "turn_id")};
  d.sender = optional_string(j, "sender");
  d.recipient = optional_string(j, "recipient");
  d.topics = j.value("topics", std::vector<TopicScore>{});
}

void to_json(json& j, const MemoryRecord& r) {
  std::vector<std::string> participants;
  participants.reserve(r.participants.size());
  for (const auto& p : r.participants) {
    participants.push_back(p.str());
  }
  j = json{{"memory_id", r.memory_id.str()},
           {"stream", to_string(r.stream)},
           {"category", to_string(r.category)},
           {"content", r.content},
           {"created_at", format_rfc3339(r.created_at)},
           {"last_accessed_at", format_rfc3339(r.last_accessed_at)},
           {"importance_raw", r.importance_raw},
           {"embedding", r.embedding},
           {"participants", participants},
           {"emotions", r.emotions},
           {"source", to_string(r.source)},
           {"metadata", r.metadata}};
  if (r.dialogue) {
    j["dialogue"] = *r.dialogue;
  }
}

void from_json(const json& j, MemoryRecord& r) {
  r.memory_id = MemoryId{require_string(j, "memory_id")};
  r.stream = require_enum<Stream>(j, "stream", &parse_stream);
  r.category = require_enum<Category>(j, "category", &parse_category);
  r.content = require_string(j, "content");
  r.created_at = parse_rfc3339(require_string(j, "created_at"));
  r.last_accessed_at = parse_rfc3339(require_string(j, "last_accessed_at"));
  r.importance_raw = j.at("importance_raw").get<int>();
  r.embedding = j.value("embedding", Embedding{});
  r.participants.clear();
  for (const auto& p : j.value("participants", std::vector<std::string>{})) {
    r.participants.emplace_back(p);
  }
  r.emotions = j.value("emotions", std::vector<EmotionAnnotation>{});
  r.source = require_enum<Source>(j, "source", &parse_source);
  r.metadata = j.value("metadata", std::map<std::string, std::string>{});
  if (const auto it = j.find("dialogue"); it != j.end() && !it->is_null()) {
    r.dialogue = it->get<DialogueMeta>();
  } else {
    r.dialogue.reset();
  }
}

void to_json(json& j, const ConversationTurn& t) {
  j = json{{"turn_id", t.turn_id.str()},
           {"session_id", t.session_id.str()},
           {"sender", t.sender},
           {"recipient", t.recipient},
           {"timestamp", format_rfc3339(t.timestamp)},
           {"text", t.text},
           {"emotions", t.emotions},
           {"topics", t.topics}};
}

json persona_body(const PersonaProfile& p) {
  return json{{"name", p.name}, {"core_identity", p.core_identity}, {"created_at", format_rfc3339(p.created_at)}};
}

PersonaProfile persona_from(const std::string& persona_id, const json& body) {
  PersonaProfile p;
  p.persona_id = PersonaId{persona_id};
  p.name = require_string(body, "name");
  p.core_identity = body.value("core_identity", std::map<std::string, std::string>{});
  p.created_at = parse_rfc3339(require_string(body, "created_at"));
  return p;
}

}  // namespace twin
