#pragma once

// nlohmann::json bindings for the domain types. Private to the core library;
// public headers expose serialized strings only.

#include "json.hpp"
#include "twin/retrieval.hpp"
#include "twin/types.hpp"

namespace twin {

using nlohmann::json;

void to_json(json& j, const EmotionAnnotation& e);
void from_json(const json& j, EmotionAnnotation& e);
void to_json(json& j, const TopicScore& t);
void from_json(const json& j, TopicScore& t);
void to_json(json& j, const SocialContact& c);
void from_json(const json& j, SocialContact& c);
void to_json(json& j, const VitalSample& s);
void from_json(const json& j, VitalSample& s);
void to_json(json& j, const DialogueMeta& d);
void from_json(const json& j, DialogueMeta& d);
void to_json(json& j, const MemoryRecord& r);
void from_json(const json& j, MemoryRecord& r);
void to_json(json& j, const ConversationTurn& t);

// One row of an explain table.
json explain_row(const ScoredMemory& scored);
json explain_rows(const std::vector<ScoredMemory>& ranked);

// Persona fields other than persona_id, which lives in the snapshot header.
json persona_body(const PersonaProfile& p);
PersonaProfile persona_from(const std::string& persona_id, const json& body);

// Typed accessors that convert nlohmann type errors into Error(ParseError).
std::string require_string(const json& j, const char* key);
std::string optional_string(const json& j, const char* key, std::string fallback = {});

}  // namespace twin
