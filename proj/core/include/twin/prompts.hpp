#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace twin::prompts {

using Vars = std::map<std::string, std::string, std::less<>>;

// Substitutes every {{name}} placeholder. Throws PreconditionViolation when a
// placeholder has no value. Inserted values are never re-scanned.
std::string render(std::string_view tmpl, const Vars& vars);

// The literal segments between placeholders, in order.
std::vector<std::string> literals(std::string_view tmpl);
std::vector<std::string> placeholders(std::string_view tmpl);

// First line of every system prompt; the scripted backend routes on it.
inline constexpr std::string_view kTagPrefix = "#tag: ";

inline constexpr std::string_view kNoFabricationDirective =
    "Use only the facts given above. Do not add or infer any detail that is not explicitly provided.";

inline constexpr std::string_view kImportanceSystem =
    "#tag: {{tag}}\n"
    "You estimate how significant a memory is to a specific person. Rate it on a scale from 0 to 10, "
    "where 0 is trivial and 10 is life-changing for this person.\n\n"
    "About the person:\n{{context}}";

inline constexpr std::string_view kImportanceUser =
    "Memory: {{memory}}\n"
    "Answer with the rating only.";

inline constexpr std::string_view kImportanceRetry = "Reply with exactly one integer between 0 and 10 and nothing else.";

inline constexpr std::string_view kReflectionSystem =
    "#tag: {{tag}}\n"
    "You review a finished conversation of {{persona}}. Describe its emotional tone, what was discussed, "
    "and what it reveals about motivations and the relationship between the participants. "
    "Write at most five sentences.";

inline constexpr std::string_view kReflectionUser = "Conversation:\n{{log}}";

inline constexpr std::string_view kVitalsSystem =
    "#tag: {{tag}}\n"
    "You summarize wearable health readings into a short {{period}} well-being note of one to three sentences. "
    "Mention only what the numbers support.";

inline constexpr std::string_view kVitalsUser = "Period starting {{start}} ({{period}}):\n{{stats}}";

inline constexpr std::string_view kStage1System =
    "#tag: {{tag}}\n"
    "You are {{persona_name}}. You reply to messages exactly as {{persona_name}} would.";

inline constexpr std::string_view kStage1User =
    "## Persona\n{{persona_block}}\n\n"
    "## Current situation and conversation partner\n{{situation_block}}\n\n"
    "## Ongoing conversation\n{{log_block}}\n\n"
    "## Profile memories\n{{profile_block}}\n\n"
    "## Recent memories\n{{stream_block}}\n\n"
    "## Instructions\n{{instruction_block}}";

inline constexpr std::string_view kStage1Instructions =
    "{{contact_name}} just wrote: \"{{query}}\"\n"
    "Write {{persona_name}}'s reply. Keep it accurate and concise (at most {{word_cap}} words), grounded in the "
    "context and conversation above, and consistent with {{persona_name}}'s personality and current emotional "
    "state.\n"
    "{{directive}}";

inline constexpr std::string_view kStage2System =
    "#tag: {{tag}}\n"
    "You rewrite a draft reply so it sounds like {{persona_name}}. Study the earlier messages for vocabulary, "
    "slang, emoji use, punctuation and recurring themes; check the ongoing conversation so the reply continues "
    "its style; then adjust the draft accordingly. Keep the meaning of the draft unchanged. Address "
    "{{contact_name}} as \"{{preferred_address}}\". Return only the rewritten reply.";

inline constexpr std::string_view kStage2User =
    "## Earlier messages\n{{style_block}}\n\n"
    "## Ongoing conversation\n{{log_block}}\n\n"
    "## Draft reply\n{{draft}}";

// Section headers of the Stage-1 user prompt, in order.
inline constexpr std::string_view kStage1Sections[] = {
    "## Persona",      "## Current situation and conversation partner", "## Ongoing conversation",
    "## Profile memories", "## Recent memories",                        "## Instructions",
};

}  // namespace twin::prompts
