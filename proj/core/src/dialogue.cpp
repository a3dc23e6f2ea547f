#include "twin/dialogue.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "json_codec.hpp"
#include "twin/error.hpp"
#include "twin/text.hpp"

namespace twin {

namespace {

std::string display_name(const std::string& id) {
  std::string out = id;
  if (!out.empty()) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

SessionId make_session_id(std::uint64_t seq) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "s%04llu", static_cast<unsigned long long>(seq));
  return SessionId{buf};
}

std::uint64_t session_seq(const SessionId& id) {
  const auto& s = id.str();
  if (s.size() < 2 || s[0] != 's') {
    return 0;
  }
  try {
    return std::stoull(s.substr(1));
  } catch (const std::exception&) {
    return 0;
  }
}

bool chronological(const MemoryRecord& a, const MemoryRecord& b) {
  if (a.created_at != b.created_at) {
    return a.created_at < b.created_at;
  }
  return a.memory_id < b.memory_id;
}

}  // namespace

std::vector<ChatLine> parse_chat_jsonl(std::istream& in) {
  std::vector<ChatLine> lines;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) {
      continue;
    }
    try {
      const auto j = json::parse(raw);
      if (!j.is_object()) {
        throw Error(ErrorCode::ParseError, "expected a JSON object", line_no);
      }
      ChatLine line;
      line.sender = require_string(j, "sender");
      line.recipient = require_string(j, "recipient");
      line.ts = parse_rfc3339(require_string(j, "ts"));
      line.text = require_string(j, "text");
      line.line = line_no;
      if (trim(line.text).empty()) {
        throw Error(ErrorCode::ParseError, "empty message text", line_no);
      }
      if (line.sender.empty() || line.recipient.empty() || line.sender == line.recipient) {
        throw Error(ErrorCode::ParseError, "sender and recipient must be distinct and non-empty", line_no);
      }
      lines.push_back(std::move(line));
    } catch (const Error& e) {
      if (e.line()) {
        throw;
      }
      throw Error(ErrorCode::ParseError, e.what(), line_no);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what(), line_no);
    }
  }
  return lines;
}

std::string importance_context(const MemoryStore& store) {
  const auto persona = store.persona();
  if (!persona) {
    throw Error(ErrorCode::UnknownPersona, "store has no persona");
  }
  std::string out = "Name: " + persona->name + "\n";
  for (const auto& [key, value] : persona->core_identity) {
    out += key + ": " + value + "\n";
  }
  const auto facts = store.memories_where([](const MemoryRecord& r) {
    return r.category == Category::UserProfile || r.category == Category::Goals ||
           r.category == Category::Preferences || r.category == Category::Interests;
  });
  for (const auto& f : facts) {
    out += "- " + f.content + "\n";
  }
  out.pop_back();
  return out;
}

ConversationTurn turn_from_record(const MemoryRecord& record) {
  ConversationTurn turn;
  if (record.dialogue) {
    turn.turn_id = record.dialogue->turn_id;
    turn.session_id = record.dialogue->session_id;
    turn.sender = record.dialogue->sender;
    turn.recipient = record.dialogue->recipient;
    turn.topics = record.dialogue->topics;
  }
  turn.timestamp = record.created_at;
  turn.text = record.content;
  turn.emotions = record.emotions;
  return turn;
}

DialogueIngestor::DialogueIngestor(MemoryStore& store, NlpAdapters adapters,
                                   std::shared_ptr<const LlmGateway> gateway, IngestionConfig config)
    : store_(store),
      adapters_(std::move(adapters)),
      fallback_(NlpAdapters::stub(store.embedding_dim())),
      gateway_(std::move(gateway)),
      config_(std::move(config)) {
  if (!gateway_) {
    throw Error(ErrorCode::ConfigError, "ingestion needs a language-model gateway");
  }
  rebuild_from_store();
}

PersonaProfile DialogueIngestor::require_persona() const {
  auto persona = store_.persona();
  if (!persona) {
    throw Error(ErrorCode::UnknownPersona, "store has no persona");
  }
  return std::move(*persona);
}

std::string DialogueIngestor::canonical_party(const std::string& party) const {
  const auto persona = store_.persona();
  if (persona && (party == persona->persona_id.str() || to_lower(party) == to_lower(persona->name) ||
                  to_lower(party) == to_lower(persona->persona_id.str()))) {
    return persona->persona_id.str();
  }
  return party;
}

SocialContact DialogueIngestor::ensure_contact(const ContactId& contact) {
  if (auto existing = store_.find_contact(contact)) {
    return std::move(*existing);
  }
  SocialContact c;
  c.contact_id = contact;
  c.name = display_name(contact.str());
  c.relationship = "unknown";
  c.preferred_address = c.name;
  store_.upsert_contact(c);
  return c;
}

std::string DialogueIngestor::importance_context() const { return twin::importance_context(store_); }

PartyNames DialogueIngestor::party_names() const {
  PartyNames names;
  if (const auto persona = store_.persona()) {
    names[persona->persona_id.str()] = persona->name;
  }
  for (const auto& c : store_.contacts()) {
    names[c.contact_id.str()] = c.name;
  }
  return names;
}

std::shared_ptr<DialogueIngestor::Slot> DialogueIngestor::slot(const SessionId& id) const {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::UnknownSession, "unknown session '" + id.str() + "'");
  }
  return it->second;
}

SessionId DialogueIngestor::open_session(const ContactId& contact, Timestamp opened_at) {
  const auto persona = require_persona();
  ensure_contact(contact);
  auto s = std::make_shared<Slot>();
  s->state.persona_id = persona.persona_id;
  s->state.contact_id = contact;
  s->state.opened_at = opened_at;
  std::lock_guard lock(sessions_mutex_);
  s->state.session_id = make_session_id(next_session_seq_++);
  auto id = s->state.session_id;
  sessions_.emplace(id, std::move(s));
  return id;
}

std::vector<MemoryId> DialogueIngestor::log_turn(const SessionId& session_id, ConversationTurn turn) {
  const auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  auto& state = s->state;
  if (state.status != SessionStatus::Open) {
    throw Error(ErrorCode::SessionClosed, "session '" + session_id.str() + "' is finalized");
  }
  turn.sender = canonical_party(turn.sender);
  turn.recipient = canonical_party(turn.recipient);
  if (turn.sender == turn.recipient) {
    throw Error(ErrorCode::InvariantViolation, "sender and recipient must differ");
  }
  const auto& persona = state.persona_id.str();
  const auto& contact = state.contact_id.str();
  const bool parties_ok = (turn.sender == persona && turn.recipient == contact) ||
                          (turn.sender == contact && turn.recipient == persona);
  if (!parties_ok) {
    throw Error(ErrorCode::InvariantViolation, "turn parties do not match session '" + session_id.str() + "'");
  }
  if (trim(turn.text).empty()) {
    throw Error(ErrorCode::InvariantViolation, "turn text must not be empty");
  }
  if (!state.log.empty() && turn.timestamp < state.log.back().timestamp) {
    throw Error(ErrorCode::NonMonotonicTimestamp, "turn predates the previous turn of session '" +
                                                      session_id.str() + "'");
  }

  std::map<std::string, std::string> metadata;
  try {
    turn.emotions = adapters_.emotion->classify_emotion(turn.text);
    turn.topics = adapters_.zero_shot->zero_shot(turn.text, config_.topic_labels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::Timeout) {
      throw;
    }
    turn.emotions = fallback_.emotion->classify_emotion(turn.text);
    turn.topics = fallback_.zero_shot->zero_shot(turn.text, config_.topic_labels);
    metadata["enrichment"] = "stub_fallback";
  }

  Embedding embedding;
  try {
    embedding = adapters_.embedder->embed(turn.text);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::Timeout &&
        e.code() != ErrorCode::EmptyText) {
      throw;
    }
    metadata["embedding"] = "pending";
  }

  const int importance = gateway_->score_importance({turn.text, importance_context()});

  if (turn.turn_id.empty()) {
    turn.turn_id = TurnId{session_id.str() + "." + std::to_string(state.log.size() + 1)};
  }
  turn.session_id = session_id;

  MemoryRecord record;
  record.stream = Stream::MemoryStream;
  record.category = Category::Dialogue;
  record.content = turn.text;
  record.created_at = turn.timestamp;
  record.last_accessed_at = turn.timestamp;
  record.importance_raw = importance;
  record.embedding = std::move(embedding);
  record.participants = {state.contact_id};
  record.emotions = turn.emotions;
  record.source = Source::DialogueLog;
  record.dialogue = DialogueMeta{session_id, turn.turn_id, turn.sender, turn.recipient, turn.topics};
  record.metadata = std::move(metadata);

  auto id = store_.insert_memory(std::move(record));
  state.log.push_back(std::move(turn));
  return {id};
}

MemoryId DialogueIngestor::finalize_locked(Slot& s) {
  auto& state = s.state;
  if (state.status == SessionStatus::Finalized) {
    throw Error(ErrorCode::AlreadyFinalized, "session '" + state.session_id.str() + "' is already finalized");
  }
  if (state.log.empty()) {
    throw Error(ErrorCode::EmptySession, "session '" + state.session_id.str() + "' has no turns");
  }
  const auto persona = require_persona();
  const auto text = gateway_->reflect_dialogue(state.log, persona.name, party_names());
  if (trim(text).empty()) {
    throw Error(ErrorCode::BackendUnavailable, "backend returned an empty reflection");
  }

  MemoryRecord record;
  record.stream = Stream::MemoryStream;
  record.category = Category::Reflection;
  record.content = text;
  record.created_at = state.log.back().timestamp;
  record.last_accessed_at = record.created_at;
  try {
    record.embedding = adapters_.embedder->embed(text);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::Timeout &&
        e.code() != ErrorCode::EmptyText) {
      throw;
    }
    record.metadata["embedding"] = "pending";
  }
  record.importance_raw = gateway_->score_importance({text, importance_context()});
  record.participants = {state.contact_id};
  record.emotions = fallback_.emotion->classify_emotion(text);
  record.source = Source::ReflectionJob;
  record.dialogue = DialogueMeta{state.session_id, TurnId{}, state.persona_id.str(), state.contact_id.str(), {}};

  auto id = store_.insert_memory(std::move(record));
  state.status = SessionStatus::Finalized;
  return id;
}

MemoryId DialogueIngestor::finalize_session(const SessionId& session_id) {
  const auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return finalize_locked(*s);
}

SessionId DialogueIngestor::active_session(const ContactId& contact, Timestamp now) {
  std::shared_ptr<Slot> current;
  {
    std::lock_guard lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) {
      if (s->state.contact_id == contact && s->state.status == SessionStatus::Open) {
        current = s;
      }
    }
  }
  if (current) {
    std::unique_lock lock(current->mutex);
    if (current->state.status == SessionStatus::Open) {
      const auto last = current->state.log.empty() ? current->state.opened_at : current->state.log.back().timestamp;
      if (now - last <= config_.session_gap) {
        return current->state.session_id;
      }
      if (current->state.log.empty()) {
        current->state.status = SessionStatus::Finalized;
      } else {
        finalize_locked(*current);
      }
    }
  }
  return open_session(contact, now);
}

ImportSummary DialogueIngestor::import_history(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open chat history '" + path.string() + "'");
  }
  return import_history(in);
}

ImportSummary DialogueIngestor::import_history(std::istream& in) {
  const auto persona = require_persona();
  auto lines = parse_chat_jsonl(in);

  // Resolve every party before anything is written.
  std::vector<ContactId> contact_of(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto& line = lines[i];
    line.sender = canonical_party(line.sender);
    line.recipient = canonical_party(line.recipient);
    const auto& pid = persona.persona_id.str();
    if (line.sender != pid && line.recipient != pid) {
      throw Error(ErrorCode::ParseError, "neither party is the persona", line.line);
    }
    if (line.sender == line.recipient) {
      throw Error(ErrorCode::ParseError, "sender and recipient must differ", line.line);
    }
    contact_of[i] = ContactId{line.sender == pid ? line.recipient : line.sender};
  }

  std::vector<std::size_t> order(lines.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lines[a].ts < lines[b].ts; });

  ImportSummary summary;
  std::map<ContactId, std::pair<SessionId, Timestamp>> open;
  std::vector<SessionId> created;
  for (const auto idx : order) {
    const auto& line = lines[idx];
    const auto& contact = contact_of[idx];
    auto it = open.find(contact);
    if (it != open.end() && line.ts - it->second.second > config_.session_gap) {
      finalize_session(it->second.first);
      open.erase(it);
      it = open.end();
    }
    if (it == open.end()) {
      const auto sid = open_session(contact, line.ts);
      created.push_back(sid);
      ++summary.sessions;
      it = open.emplace(contact, std::make_pair(sid, line.ts)).first;
    }
    ConversationTurn turn;
    turn.sender = line.sender;
    turn.recipient = line.recipient;
    turn.timestamp = line.ts;
    turn.text = line.text;
    log_turn(it->second.first, std::move(turn));
    it->second.second = line.ts;
    ++summary.turns;
  }
  for (const auto& sid : created) {
    if (const auto s = session(sid); s && s->status == SessionStatus::Open) {
      finalize_session(sid);
    }
  }
  return summary;
}

std::optional<SessionState> DialogueIngestor::session(const SessionId& id) const {
  std::shared_ptr<Slot> s;
  {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) {
      return std::nullopt;
    }
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  return s->state;
}

std::vector<SessionState> DialogueIngestor::sessions() const {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::lock_guard lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) {
      slots.push_back(s);
    }
  }
  std::vector<SessionState> out;
  for (const auto& s : slots) {
    std::lock_guard lock(s->mutex);
    out.push_back(s->state);
  }
  return out;
}

std::vector<ConversationTurn> DialogueIngestor::turns_with(const ContactId& contact) const {
  auto records = store_.memories_where([&](const MemoryRecord& r) {
    return r.category == Category::Dialogue &&
           std::find(r.participants.begin(), r.participants.end(), contact) != r.participants.end();
  });
  std::sort(records.begin(), records.end(), chronological);
  std::vector<ConversationTurn> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(turn_from_record(r));
  }
  return out;
}

std::vector<ConversationTurn> DialogueIngestor::persona_turns() const {
  const auto persona = store_.persona();
  if (!persona) {
    return {};
  }
  const auto pid = persona->persona_id.str();
  auto records = store_.memories_where([&](const MemoryRecord& r) {
    return r.category == Category::Dialogue && r.dialogue && r.dialogue->sender == pid;
  });
  std::sort(records.begin(), records.end(), chronological);
  std::vector<ConversationTurn> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(turn_from_record(r));
  }
  return out;
}

void DialogueIngestor::rebuild_from_store() {
  std::map<SessionId, std::shared_ptr<Slot>> rebuilt;
  std::uint64_t next_seq = 1;
  const auto persona = store_.persona();
  if (persona) {
    auto records = store_.memories_where([](const MemoryRecord& r) {
      return r.dialogue && (r.category == Category::Dialogue || r.category == Category::Reflection);
    });
    std::sort(records.begin(), records.end(), chronological);
    std::set<SessionId> finalized;
    for (const auto& r : records) {
      const auto& sid = r.dialogue->session_id;
      next_seq = std::max(next_seq, session_seq(sid) + 1);
      if (r.category == Category::Reflection) {
        finalized.insert(sid);
        continue;
      }
      auto& s = rebuilt[sid];
      if (!s) {
        s = std::make_shared<Slot>();
        s->state.session_id = sid;
        s->state.persona_id = persona->persona_id;
        s->state.contact_id = r.participants.empty() ? ContactId{} : r.participants.front();
        s->state.opened_at = r.created_at;
      }
      s->state.log.push_back(turn_from_record(r));
    }
    for (const auto& sid : finalized) {
      if (const auto it = rebuilt.find(sid); it != rebuilt.end()) {
        it->second->state.status = SessionStatus::Finalized;
      }
    }
  }
  std::lock_guard lock(sessions_mutex_);
  sessions_ = std::move(rebuilt);
  next_session_seq_ = next_seq;
}

}  // namespace twin
