#include "fixtures.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "twin/error.hpp"

namespace fixtures {

twin::Timestamp at(const char* rfc3339) { return twin::parse_rfc3339(rfc3339); }

std::filesystem::path data_dir() { return TWIN_DATA_DIR; }
std::filesystem::path martin_dir() { return data_dir() / "scenarios" / "martin"; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("twin-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

twin::PersonaProfile martin() {
  twin::PersonaProfile p;
  p.persona_id = twin::PersonaId{"martin"};
  p.name = "Martin";
  p.core_identity = {{"age", "24"}, {"occupation", "student"}};
  p.created_at = at("2025-01-01T00:00:00Z");
  return p;
}

void add_contact(twin::MemoryStore& store, const std::string& id, const std::string& name, const std::string& address) {
  twin::SocialContact c;
  c.contact_id = twin::ContactId{id};
  c.name = name;
  c.relationship = "friend";
  c.preferred_address = address.empty() ? name : address;
  store.upsert_contact(c);
}

RecordingBackend::RecordingBackend(std::map<std::string, std::string> playbook) : scripted_(std::move(playbook)) {}

std::string RecordingBackend::complete(std::span<const twin::ChatMessage> messages) {
  std::string prefix;
  {
    std::lock_guard lock(mutex_);
    calls_.emplace_back(messages.begin(), messages.end());
    prefix = fail_prefix_;
  }
  const auto tag = twin::prompt_tag(messages).value_or("");
  if (!prefix.empty() && tag.rfind(prefix, 0) == 0) {
    throw twin::Error(twin::ErrorCode::BackendUnavailable, "backend down for " + tag);
  }
  return scripted_.complete(messages);
}

void RecordingBackend::fail_prefix(std::string prefix) {
  std::lock_guard lock(mutex_);
  fail_prefix_ = std::move(prefix);
}

std::vector<std::vector<twin::ChatMessage>> RecordingBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::vector<std::string> RecordingBackend::tags() const {
  std::vector<std::string> out;
  for (const auto& call : calls()) {
    out.push_back(twin::prompt_tag(call).value_or(""));
  }
  return out;
}

Scripted scripted(std::map<std::string, std::string> playbook) {
  Scripted s;
  s.backend = std::make_shared<RecordingBackend>(std::move(playbook));
  s.gateway = std::make_shared<twin::LlmGateway>(s.backend);
  return s;
}

void chat_with(twin::DialogueIngestor& ingestor, const std::string& persona, const std::string& contact,
               std::size_t turns, twin::Timestamp start) {
  if (turns == 0) {
    return;
  }
  const auto sid = ingestor.open_session(twin::ContactId{contact}, start);
  for (std::size_t i = 0; i < turns; ++i) {
    twin::ConversationTurn t;
    const bool from_contact = i % 2 == 0;
    t.sender = from_contact ? contact : persona;
    t.recipient = from_contact ? persona : contact;
    t.timestamp = start + std::chrono::minutes(i);
    t.text = (from_contact ? "message " : "reply ") + std::to_string(i) + " about the gym";
    ingestor.log_turn(sid, std::move(t));
  }
  ingestor.finalize_session(sid);
}

SyntheticVitals synthetic_vitals(twin::Timestamp day0, int days, twin::Timestamp spike) {
  using namespace std::chrono;
  constexpr double kCycle[] = {66, 70, 68, 67, 69, 68};
  constexpr double kSpike[] = {138, 140, 142, 144, 146, 142};
  SyntheticVitals out;
  out.spike = spike;
  for (int h = 0; h < days * 24; ++h) {
    const auto hour = day0 + hours(h);
    for (int i = 0; i < 6; ++i) {
      const double v = hour == spike ? kSpike[i] : kCycle[i];
      out.rows.push_back({hour + minutes(10 * i), twin::VitalMetric::HeartRate, v});
    }
    out.rows.push_back({hour + minutes(30), twin::VitalMetric::Stress, 30.0 + h % 2});
    out.rows.push_back({hour + minutes(30), twin::VitalMetric::Activity, 1000.0 + 100.0 * (h % 3)});
    if (h % 24 == 7) {
      out.rows.push_back({hour, twin::VitalMetric::Sleep, 7.0 + 0.5 * ((h / 24) % 2)});
    }
  }
  out.csv = "timestamp,metric,value\n";
  for (const auto& r : out.rows) {
    char value[32];
    std::snprintf(value, sizeof(value), "%.1f", r.value);
    out.csv += twin::format_rfc3339(r.timestamp) + "," + std::string(twin::to_string(r.metric)) + "," + value + "\n";
  }
  return out;
}

}  // namespace fixtures
