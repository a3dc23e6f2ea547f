#include "twin/orchestrator.hpp"

#include <algorithm>

#include "json_codec.hpp"
#include "twin/error.hpp"
#include "twin/prompts.hpp"
#include "twin/text.hpp"

namespace twin {

namespace {

const char* weekday_name(Timestamp ts) {
  static constexpr const char* kNames[] = {"Sunday",   "Monday", "Tuesday", "Wednesday",
                                           "Thursday", "Friday", "Saturday"};
  const std::chrono::weekday wd{std::chrono::floor<std::chrono::days>(ts)};
  return kNames[wd.c_encoding()];
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) {
      out += sep;
    }
    out += item;
  }
  return out;
}

std::string log_lines(std::span<const ConversationTurn> log, const PartyNames& names) {
  return log.empty() ? std::string("(no messages yet)") : render_log(log, names);
}

std::string memory_lines(const std::vector<ScoredMemory>& ranked, bool dated) {
  if (ranked.empty()) {
    return "(none)";
  }
  std::string out;
  for (const auto& s : ranked) {
    out += "- ";
    if (dated) {
      out += "[" + format_minute(s.record.created_at) + "] ";
    }
    out += "(" + std::string(to_string(s.record.category)) + ") " + s.record.content + "\n";
  }
  out.pop_back();
  return out;
}

json messages_json(const std::vector<ChatMessage>& messages) {
  json out = json::array();
  for (const auto& m : messages) {
    out.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return out;
}

}  // namespace

std::string_view to_string(StyleSource source) noexcept {
  switch (source) {
    case StyleSource::None: return "none";
    case StyleSource::Contact: return "contact";
    case StyleSource::OtherContacts: return "other_contacts";
  }
  return "none";
}

std::vector<MemoryId> ResponseTrace::profile_ids() const {
  std::vector<MemoryId> ids;
  for (const auto& s : profile) {
    ids.push_back(s.breakdown.memory_id);
  }
  return ids;
}

std::vector<MemoryId> ResponseTrace::stream_ids() const {
  std::vector<MemoryId> ids;
  for (const auto& s : stream) {
    ids.push_back(s.breakdown.memory_id);
  }
  return ids;
}

std::string trace_json(const ResponseTrace& t, int indent) {
  json profile_ids = json::array();
  for (const auto& id : t.profile_ids()) {
    profile_ids.push_back(id.str());
  }
  json stream_ids = json::array();
  for (const auto& id : t.stream_ids()) {
    stream_ids.push_back(id.str());
  }
  const json j{
      {"query", t.query},
      {"persona_id", t.persona_id.str()},
      {"contact_id", t.contact_id.str()},
      {"session_id", t.session_id.str()},
      {"at", format_rfc3339(t.at)},
      {"topic", t.topic},
      {"profile_ids", profile_ids},
      {"stream_ids", stream_ids},
      {"profile", explain_rows(t.profile)},
      {"stream", explain_rows(t.stream)},
      {"stage1_prompt", messages_json(t.stage1_prompt)},
      {"stage1_draft", t.stage1_draft},
      {"style_history_size", t.style_history_size},
      {"style_source", to_string(t.style_source)},
      {"stage2_prompt", messages_json(t.stage2_prompt)},
      {"final_reply", t.final_reply},
      {"fallback", t.fallback},
      {"fallback_reason", t.fallback_reason},
  };
  return j.dump(indent);
}

Orchestrator::Orchestrator(MemoryStore& store, DialogueIngestor& ingestor, const RetrievalEngine& engine,
                           std::shared_ptr<const LlmGateway> gateway, OrchestratorConfig config)
    : store_(store), ingestor_(ingestor), engine_(engine), gateway_(std::move(gateway)), config_(std::move(config)) {
  config_.weights.validate();
  if (!gateway_) {
    throw Error(ErrorCode::ConfigError, "orchestrator needs a language-model gateway");
  }
  if (config_.word_cap == 0) {
    throw Error(ErrorCode::ConfigError, "word_cap must be positive");
  }
}

std::string Orchestrator::routing_topic(const std::string& message) const {
  if (!config_.topic_labels.empty() && !trim(message).empty()) {
    const auto scores = engine_.adapters().zero_shot->zero_shot(message, config_.topic_labels);
    if (!scores.empty() && scores.front().score > 0.0) {
      return scores.front().label;
    }
  }
  return "general";
}

std::vector<ChatMessage> Orchestrator::assemble_stage1(const std::string& query, const SessionState& session,
                                                       const RetrievalResult& retrieved, Timestamp now,
                                                       const std::string& topic) const {
  const auto persona = store_.persona();
  if (!persona || persona->persona_id != session.persona_id) {
    throw Error(ErrorCode::UnknownPersona, "unknown persona '" + session.persona_id.str() + "'");
  }
  const auto contact = store_.find_contact(session.contact_id);
  const std::string contact_name = contact ? contact->name : session.contact_id.str();

  std::string persona_block = "Name: " + persona->name;
  for (const auto& [key, value] : persona->core_identity) {
    persona_block += "\n" + key + ": " + value;
  }

  std::string situation = "Current date: " + format_minute(now) + " UTC (" + weekday_name(now) + ")\n";
  if (session.log.size() <= 1) {
    situation += "Conversation status: new conversation";
  } else {
    situation += "Conversation status: ongoing, " + std::to_string(session.log.size()) + " messages since " +
                 format_minute(session.log.front().timestamp);
  }
  situation += "\nConversation partner: " + contact_name;
  if (contact) {
    situation += "\nRelationship: " + contact->relationship;
    situation += "\nPreferred address: " + contact->preferred_address;
    if (!contact->interests.empty()) {
      situation += "\nInterests: " + join(contact->interests, ", ");
    }
    if (!contact->conversational_tendencies.empty()) {
      situation += "\nConversational tendencies: " + contact->conversational_tendencies;
    }
  }

  const auto instructions = prompts::render(prompts::kStage1Instructions,
                                            {{"contact_name", contact_name},
                                             {"query", query},
                                             {"persona_name", persona->name},
                                             {"word_cap", std::to_string(config_.word_cap)},
                                             {"directive", std::string(prompts::kNoFabricationDirective)}});

  return {
      {Role::System,
       prompts::render(prompts::kStage1System, {{"tag", "stage1:" + topic}, {"persona_name", persona->name}})},
      {Role::User, prompts::render(prompts::kStage1User, {{"persona_block", persona_block},
                                                          {"situation_block", situation},
                                                          {"log_block", log_lines(session.log, ingestor_.party_names())},
                                                          {"profile_block", memory_lines(retrieved.profile, false)},
                                                          {"stream_block", memory_lines(retrieved.stream, true)},
                                                          {"instruction_block", instructions}})},
  };
}

StyleHistory Orchestrator::select_style_history(const ContactId& contact, const std::optional<SessionId>& exclude) const {
  const auto keep = [&](const ConversationTurn& t) { return !exclude || t.session_id != *exclude; };
  const auto newest = [&](std::vector<ConversationTurn> all) {
    std::vector<ConversationTurn> kept;
    for (auto& t : all) {
      if (keep(t)) {
        kept.push_back(std::move(t));
      }
    }
    if (kept.size() > config_.style_cap) {
      kept.erase(kept.begin(), kept.end() - static_cast<std::ptrdiff_t>(config_.style_cap));
    }
    return kept;
  };

  StyleHistory out;
  out.turns = newest(ingestor_.turns_with(contact));
  if (!out.turns.empty()) {
    out.source = StyleSource::Contact;
    return out;
  }
  out.turns = newest(ingestor_.persona_turns());
  out.source = out.turns.empty() ? StyleSource::None : StyleSource::OtherContacts;
  return out;
}

std::vector<ChatMessage> Orchestrator::stage2_prompt(const std::string& draft, const StyleHistory& style,
                                                     const SessionState& session, const std::string& topic) const {
  const auto persona = store_.persona();
  if (!persona) {
    throw Error(ErrorCode::UnknownPersona, "store has no persona");
  }
  const auto contact = store_.find_contact(session.contact_id);
  const std::string contact_name = contact ? contact->name : session.contact_id.str();
  const std::string address = contact && !contact->preferred_address.empty() ? contact->preferred_address : contact_name;
  const auto names = ingestor_.party_names();
  const auto style_block = style.turns.empty() ? std::string("(no earlier messages)") : render_log(style.turns, names);
  return {
      {Role::System, prompts::render(prompts::kStage2System, {{"tag", "stage2:" + topic},
                                                              {"persona_name", persona->name},
                                                              {"contact_name", contact_name},
                                                              {"preferred_address", address}})},
      {Role::User, prompts::render(prompts::kStage2User,
                                   {{"style_block", style_block}, {"log_block", log_lines(session.log, names)}, {"draft", draft}})},
  };
}

std::string Orchestrator::refine_stage2(const std::string& draft, const StyleHistory& style,
                                        const SessionState& session, const std::string& topic,
                                        ResponseTrace& trace) const {
  if (trim(draft).empty()) {
    throw Error(ErrorCode::PreconditionViolation, "stage-1 draft is empty");
  }
  trace.stage2_prompt = stage2_prompt(draft, style, session, topic);
  trace.style_history_size = style.turns.size();
  trace.style_source = style.source;
  try {
    auto refined = trim(gateway_->complete(trace.stage2_prompt));
    if (refined.empty()) {
      throw Error(ErrorCode::BackendUnavailable, "backend returned an empty refinement");
    }
    return refined;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::Timeout) {
      throw;
    }
    trace.fallback = true;
    trace.fallback_reason = std::string(to_string(e.code()));
    return draft;
  }
}

std::shared_ptr<std::mutex> Orchestrator::contact_lock(const ContactId& contact) {
  std::lock_guard lock(locks_mutex_);
  auto& m = contact_locks_[contact];
  if (!m) {
    m = std::make_shared<std::mutex>();
  }
  return m;
}

Reply Orchestrator::respond(const PersonaId& persona_id, const ContactId& contact, const std::string& message,
                            Timestamp now, const RespondOptions& options) {
  store_.require_persona(persona_id);
  if (contact.empty() || contact.str() == persona_id.str()) {
    throw Error(ErrorCode::PreconditionViolation, "invalid contact id '" + contact.str() + "'");
  }
  if (trim(message).empty()) {
    throw Error(ErrorCode::PreconditionViolation, "message must not be empty");
  }
  const auto guard = contact_lock(contact);
  std::lock_guard lock(*guard);

  ingestor_.ensure_contact(contact);
  const auto sid = ingestor_.active_session(contact, now);
  ConversationTurn incoming;
  incoming.sender = contact.str();
  incoming.recipient = persona_id.str();
  incoming.timestamp = now;
  incoming.text = message;
  ingestor_.log_turn(sid, std::move(incoming));

  ResponseTrace trace;
  trace.query = message;
  trace.persona_id = persona_id;
  trace.contact_id = contact;
  trace.session_id = sid;
  trace.at = now;
  trace.topic = options.topic.empty() ? routing_topic(message) : options.topic;

  RetrievalOptions ropts;
  ropts.k_profile = config_.k_profile;
  ropts.k_stream = config_.k_stream;
  ropts.touch = true;
  ropts.exclude_session = sid;
  auto retrieved = engine_.retrieve(message, persona_id, now, config_.weights, ropts);

  auto session = ingestor_.session(sid);
  if (!session) {
    throw Error(ErrorCode::UnknownSession, "session '" + sid.str() + "' vanished");
  }
  trace.stage1_prompt = assemble_stage1(message, *session, retrieved, now, trace.topic);
  trace.profile = std::move(retrieved.profile);
  trace.stream = std::move(retrieved.stream);
  trace.stage1_draft = trim(gateway_->complete(trace.stage1_prompt));

  const auto style = select_style_history(contact, sid);
  trace.final_reply = refine_stage2(trace.stage1_draft, style, *session, trace.topic, trace);

  ConversationTurn outgoing;
  outgoing.sender = persona_id.str();
  outgoing.recipient = contact.str();
  outgoing.timestamp = now;
  outgoing.text = trace.final_reply;
  ingestor_.log_turn(sid, std::move(outgoing));

  return {trace.final_reply, std::move(trace)};
}

}  // namespace twin
