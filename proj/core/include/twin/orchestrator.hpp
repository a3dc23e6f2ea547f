#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "twin/dialogue.hpp"
#include "twin/llm_gateway.hpp"
#include "twin/retrieval.hpp"

namespace twin {

struct OrchestratorConfig {
  RetrievalWeights weights;
  std::size_t k_profile = 10;
  std::size_t k_stream = 25;
  std::size_t word_cap = 50;   // Stage-1 length instruction
  std::size_t style_cap = 50;  // Stage-2 style history
  // Labels used to pick a routing topic when the caller gives none.
  std::vector<std::string> topic_labels{"interests", "plans", "health", "relationships", "work"};
};

enum class StyleSource { None, Contact, OtherContacts };

std::string_view to_string(StyleSource source) noexcept;

struct StyleHistory {
  std::vector<ConversationTurn> turns;  // chronological
  StyleSource source = StyleSource::None;
};

struct ResponseTrace {
  std::string query;
  PersonaId persona_id;
  ContactId contact_id;
  SessionId session_id;
  Timestamp at{};
  std::string topic;
  std::vector<ScoredMemory> profile;  // ranked, as scored before the access touch
  std::vector<ScoredMemory> stream;
  std::vector<ChatMessage> stage1_prompt;
  std::string stage1_draft;
  std::size_t style_history_size = 0;
  StyleSource style_source = StyleSource::None;
  std::vector<ChatMessage> stage2_prompt;
  std::string final_reply;
  // Stage 2 failed and the draft was returned as is.
  bool fallback = false;
  std::string fallback_reason;

  std::vector<MemoryId> profile_ids() const;
  std::vector<MemoryId> stream_ids() const;
};

std::string trace_json(const ResponseTrace& trace, int indent = -1);

struct RespondOptions {
  // Routing topic for the stage prompts; derived from the message if empty.
  std::string topic;
};

struct Reply {
  std::string text;
  ResponseTrace trace;
};

// Two-stage reply generation: a context-grounded draft from retrieved
// memories, then a rewrite in the persona's style with this contact.
class Orchestrator {
 public:
  Orchestrator(MemoryStore& store, DialogueIngestor& ingestor, const RetrievalEngine& engine,
               std::shared_ptr<const LlmGateway> gateway, OrchestratorConfig config = {});

  const OrchestratorConfig& config() const noexcept { return config_; }

  // Stage-1 messages: system line, then one user message holding the six
  // blocks in fixed order. Throws UnknownPersona.
  std::vector<ChatMessage> assemble_stage1(const std::string& query, const SessionState& session,
                                           const RetrievalResult& retrieved, Timestamp now,
                                           const std::string& topic) const;

  // Up to style_cap turns with this contact; when there are none, up to
  // style_cap of the persona's messages to anyone. Turns of `exclude` are
  // left out.
  StyleHistory select_style_history(const ContactId& contact, const std::optional<SessionId>& exclude = {}) const;

  std::vector<ChatMessage> stage2_prompt(const std::string& draft, const StyleHistory& style,
                                         const SessionState& session, const std::string& topic) const;

  // Backend output, or the draft when the backend is unavailable.
  std::string refine_stage2(const std::string& draft, const StyleHistory& style, const SessionState& session,
                            const std::string& topic, ResponseTrace& trace) const;

  // Logs the incoming message, retrieves (touching access times), drafts,
  // refines and logs the reply. Throws UnknownPersona before any write.
  Reply respond(const PersonaId& persona_id, const ContactId& contact, const std::string& message, Timestamp now,
                const RespondOptions& options = {});

  std::string routing_topic(const std::string& message) const;

 private:
  std::shared_ptr<std::mutex> contact_lock(const ContactId& contact);

  MemoryStore& store_;
  DialogueIngestor& ingestor_;
  const RetrievalEngine& engine_;
  std::shared_ptr<const LlmGateway> gateway_;
  OrchestratorConfig config_;

  std::mutex locks_mutex_;
  std::map<ContactId, std::shared_ptr<std::mutex>> contact_locks_;
};

}  // namespace twin
