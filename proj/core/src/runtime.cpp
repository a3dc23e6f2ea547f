#include "twin/runtime.hpp"

#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "twin/error.hpp"
#include "twin/nlp_service.hpp"

namespace twin {

namespace {

NlpAdapters make_adapters(const NlpSettings& nlp) {
  if (nlp.mode == NlpMode::Service) {
    return make_service_adapters(nlp.service, nlp.embedding_dim, nlp.seed);
  }
  return NlpAdapters::stub(nlp.embedding_dim, nlp.seed);
}

}  // namespace

PersonaSeed parse_persona(const std::string& text) {
  PersonaSeed seed;
  try {
    const auto j = json::parse(text);
    if (!j.is_object()) {
      throw Error(ErrorCode::ParseError, "persona file must hold a JSON object");
    }
    seed.profile = persona_from(require_string(j, "persona_id"), j);
    for (const auto& f : j.value("profile", json::array())) {
      ProfileFact fact;
      const auto cat = require_string(f, "category");
      const auto parsed = parse_category(cat);
      if (!parsed || stream_of(*parsed) != Stream::ProfileStream) {
        throw Error(ErrorCode::ParseError, "'" + cat + "' is not a profile category");
      }
      fact.category = *parsed;
      fact.content = require_string(f, "content");
      if (f.contains("importance")) {
        fact.importance = f.at("importance").get<int>();
      }
      if (f.contains("created_at")) {
        fact.created_at = parse_rfc3339(require_string(f, "created_at"));
      }
      seed.facts.push_back(std::move(fact));
    }
    for (const auto& c : j.value("contacts", json::array())) {
      auto contact = c.get<SocialContact>();
      if (contact.preferred_address.empty()) {
        contact.preferred_address = contact.name;
      }
      seed.contacts.push_back(std::move(contact));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("persona file: ") + e.what());
  }
  return seed;
}

PersonaSeed load_persona_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open persona file '" + path.string() + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_persona(text.str());
}

Runtime::Runtime(AppConfig config, std::shared_ptr<LlmGateway> gateway)
    : config_(std::move(config)),
      store_(config_.nlp.embedding_dim),
      adapters_(make_adapters(config_.nlp)),
      gateway_(gateway ? std::move(gateway) : LlmGateway::from_config(config_.backend)),
      engine_(store_, adapters_),
      ingestor_(store_, adapters_, gateway_, config_.ingestion),
      vitals_(store_, adapters_, gateway_, config_.vitals),
      orchestrator_(store_, ingestor_, engine_, gateway_, config_.orchestrator) {}

PersonaId Runtime::persona_id() const {
  const auto persona = store_.persona();
  if (!persona) {
    throw Error(ErrorCode::UnknownPersona, "no persona has been initialized");
  }
  return persona->persona_id;
}

void Runtime::init_persona(const PersonaSeed& seed) {
  store_.create_persona(seed.profile);
  for (const auto& c : seed.contacts) {
    store_.upsert_contact(c);
  }
  for (const auto& fact : seed.facts) {
    MemoryRecord r;
    r.stream = Stream::ProfileStream;
    r.category = fact.category;
    r.content = fact.content;
    r.created_at = fact.created_at.value_or(seed.profile.created_at);
    r.last_accessed_at = r.created_at;
    r.source = Source::ManualInput;
    r.embedding = adapters_.embedder->embed(fact.content);
    r.importance_raw = fact.importance ? *fact.importance
                                       : gateway_->score_importance({fact.content, importance_context(store_)});
    store_.insert_memory(std::move(r));
  }
}

void Runtime::load_snapshot(const std::filesystem::path& path) {
  store_.snapshot_load(path);
  ingestor_.rebuild_from_store();
}

void Runtime::save_snapshot(const std::filesystem::path& path) const { store_.snapshot_save(path); }

VitalsReport Runtime::process_vitals(Timestamp now) {
  VitalsReport report;
  const auto staged = store_.vitals_between(Timestamp{}, now);
  if (staged.empty()) {
    return report;
  }
  const auto from = floor_to_hour(staged.front().timestamp);
  const auto to = floor_to_hour(now);
  for (const auto metric : {VitalMetric::HeartRate, VitalMetric::Stress, VitalMetric::Sleep, VitalMetric::Activity}) {
    auto events = vitals_.scan(metric, from, to);
    report.events.insert(report.events.end(), events.begin(), events.end());
  }
  const auto day_from = floor_to_day(staged.front().timestamp);
  const auto day_to = floor_to_day(now);
  if (day_from < day_to) {
    report.summaries = vitals_.rollup(VitalPeriod::Daily, day_from, day_to, now);
  }
  return report;
}

Reply Runtime::respond(const ContactId& contact, const std::string& message, Timestamp now,
                       const RespondOptions& options) {
  return orchestrator_.respond(persona_id(), contact, message, now, options);
}

}  // namespace twin
