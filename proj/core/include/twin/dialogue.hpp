#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "twin/llm_gateway.hpp"
#include "twin/memory_store.hpp"
#include "twin/nlp.hpp"

namespace twin {

struct IngestionConfig {
  std::vector<std::string> topic_labels{"interests", "plans", "health", "relationships", "work"};
  // Inactivity longer than this closes a dialogue.
  std::chrono::milliseconds session_gap{std::chrono::hours(4)};
};

enum class SessionStatus { Open, Finalized };

struct SessionState {
  SessionId session_id;
  PersonaId persona_id;
  ContactId contact_id;
  std::vector<ConversationTurn> log;  // timestamp order
  Timestamp opened_at{};
  SessionStatus status = SessionStatus::Open;
};

// One line of a chat import file:
//   {"sender":"peter","recipient":"martin","ts":"2025-01-06T19:02:00Z","text":"..."}
struct ChatLine {
  std::string sender;
  std::string recipient;
  Timestamp ts{};
  std::string text;
  std::size_t line = 0;
};

struct ImportSummary {
  std::size_t sessions = 0;
  std::size_t turns = 0;

  friend bool operator==(const ImportSummary&, const ImportSummary&) = default;
};

// Parses every line up front; throws ParseError carrying the 1-based line.
std::vector<ChatLine> parse_chat_jsonl(std::istream& in);

// Turns chat messages into enriched Dialogue records and writes a Reflection
// record when a dialogue ends. Sessions are reconstructed from the store, so
// an ingestor can be attached to a freshly loaded snapshot.
class DialogueIngestor {
 public:
  DialogueIngestor(MemoryStore& store, NlpAdapters adapters, std::shared_ptr<const LlmGateway> gateway,
                   IngestionConfig config = {});

  const IngestionConfig& config() const noexcept { return config_; }

  SessionId open_session(const ContactId& contact, Timestamp opened_at);

  // Logs one message into an open session and returns the created record
  // ids (always exactly one).
  std::vector<MemoryId> log_turn(const SessionId& session_id, ConversationTurn turn);

  MemoryId finalize_session(const SessionId& session_id);

  // Open session with `contact` that is still live at `now`. A session idle
  // for longer than the gap is finalized first and a new one opened.
  SessionId active_session(const ContactId& contact, Timestamp now);

  // All-or-nothing on parse: a malformed line leaves the store unchanged.
  ImportSummary import_history(const std::filesystem::path& path);
  ImportSummary import_history(std::istream& in);

  std::optional<SessionState> session(const SessionId& id) const;
  std::vector<SessionState> sessions() const;

  // Dialogue turns with one contact, chronological.
  std::vector<ConversationTurn> turns_with(const ContactId& contact) const;
  // Messages sent by the persona to anyone, chronological.
  std::vector<ConversationTurn> persona_turns() const;

  // Registers an unknown party as a contact with relationship "unknown".
  SocialContact ensure_contact(const ContactId& contact);

  // Persona identity and profile facts, for importance scoring.
  std::string importance_context() const;
  PartyNames party_names() const;

  // Re-derives session state from Dialogue and Reflection records.
  void rebuild_from_store();

  // Resolves a free-form party name to the persona id when it names the
  // persona (by id or by name, case-insensitive).
  std::string canonical_party(const std::string& party) const;

 private:
  struct Slot {
    std::mutex mutex;
    SessionState state;
  };

  std::shared_ptr<Slot> slot(const SessionId& id) const;
  PersonaProfile require_persona() const;
  MemoryId finalize_locked(Slot& slot);

  MemoryStore& store_;
  NlpAdapters adapters_;
  NlpAdapters fallback_;
  std::shared_ptr<const LlmGateway> gateway_;
  IngestionConfig config_;

  mutable std::mutex sessions_mutex_;
  std::map<SessionId, std::shared_ptr<Slot>> sessions_;
  std::uint64_t next_session_seq_ = 1;
};

ConversationTurn turn_from_record(const MemoryRecord& record);

// Persona identity plus stored profile facts; the only context importance
// scoring sees. Throws UnknownPersona.
std::string importance_context(const MemoryStore& store);

}  // namespace twin
