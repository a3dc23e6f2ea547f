#include "twin/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "twin/error.hpp"
#include "twin/text.hpp"

namespace twin {

namespace {

using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;

struct Entry {
  Value value;
  std::size_t line = 0;
};

[[noreturn]] void fail(const std::string& message, std::size_t line) {
  throw Error(ErrorCode::ConfigError, message, line);
}

// Parses a quoted string starting at text[pos] == '"'; advances pos past the
// closing quote.
std::string parse_string(const std::string& text, std::size_t& pos, std::size_t line) {
  std::string out;
  ++pos;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (c == '"') {
      return out;
    }
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (pos >= text.size()) {
      break;
    }
    switch (const char e = text[pos++]; e) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case '"': out.push_back('"'); break;
      case '\\': out.push_back('\\'); break;
      default: fail(std::string("unknown escape \\") + e, line);
    }
  }
  fail("unterminated string", line);
}

void expect_end(const std::string& text, std::size_t pos, std::size_t line) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
    ++pos;
  }
  if (pos < text.size() && text[pos] != '#') {
    fail("unexpected trailing text", line);
  }
}

Value parse_value(const std::string& text, std::size_t line) {
  std::size_t pos = 0;
  if (text.empty()) {
    fail("missing value", line);
  }
  if (text[0] == '"') {
    auto s = parse_string(text, pos, line);
    expect_end(text, pos, line);
    return s;
  }
  if (text[0] == '[') {
    std::vector<std::string> items;
    ++pos;
    for (;;) {
      while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ',')) {
        ++pos;
      }
      if (pos >= text.size()) {
        fail("unterminated array", line);
      }
      if (text[pos] == ']') {
        ++pos;
        break;
      }
      if (text[pos] != '"') {
        fail("arrays may only hold strings", line);
      }
      items.push_back(parse_string(text, pos, line));
    }
    expect_end(text, pos, line);
    return items;
  }
  auto token = text.substr(0, text.find('#'));
  token = trim(token);
  if (token == "true") {
    return true;
  }
  if (token == "false") {
    return false;
  }
  std::string digits;
  for (const char c : token) {
    if (c != '_') {
      digits.push_back(c);
    }
  }
  const auto* end = digits.data() + digits.size();
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(digits.data(), end, i); ec == std::errc{} && p == end) {
    return i;
  }
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(digits.data(), end, d); ec == std::errc{} && p == end && std::isfinite(d)) {
    return d;
  }
  fail("cannot parse value '" + token + "'", line);
}

std::map<std::string, Entry> parse_table(const std::string& text) {
  std::map<std::string, Entry> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(raw);
    if (s.empty() || s[0] == '#') {
      continue;
    }
    if (s[0] == '[') {
      const auto close = s.find(']');
      if (close == std::string::npos) {
        fail("unterminated section header", line);
      }
      section = trim(s.substr(1, close - 1));
      if (section.empty()) {
        fail("empty section name", line);
      }
      expect_end(s, close + 1, line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      fail("expected key = value", line);
    }
    const auto key = trim(s.substr(0, eq));
    if (key.empty()) {
      fail("empty key", line);
    }
    const auto full = section.empty() ? key : section + "." + key;
    if (out.contains(full)) {
      fail("duplicate key '" + full + "'", line);
    }
    out[full] = Entry{parse_value(trim(s.substr(eq + 1)), line), line};
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> table) : table_(std::move(table)) {}

  template <typename T>
  bool get(const std::string& key, T& out) {
    const auto it = table_.find(key);
    if (it == table_.end()) {
      return false;
    }
    const auto line = it->second.line;
    const auto& v = it->second.value;
    if constexpr (std::is_same_v<T, double>) {
      if (const auto* i = std::get_if<std::int64_t>(&v)) {
        out = static_cast<double>(*i);
      } else if (const auto* d = std::get_if<double>(&v)) {
        out = *d;
      } else {
        fail("'" + key + "' must be a number", line);
      }
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      const auto* i = std::get_if<std::int64_t>(&v);
      if (!i || *i < 0) {
        fail("'" + key + "' must be a non-negative integer", line);
      }
      out = static_cast<T>(*i);
    } else {
      const auto* x = std::get_if<T>(&v);
      if (!x) {
        fail("'" + key + "' has the wrong type", line);
      }
      out = *x;
    }
    table_.erase(it);
    return true;
  }

  bool path(const std::string& key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    if (!get(key, s)) {
      return false;
    }
    out = s.empty() || base.empty() ? std::filesystem::path(s) : base / s;
    return true;
  }

  void millis(const std::string& key, std::chrono::milliseconds& out) {
    std::int64_t ms = 0;
    if (get(key, ms)) {
      out = std::chrono::milliseconds(ms);
    }
  }

  void finish() const {
    if (!table_.empty()) {
      const auto& [key, entry] = *table_.begin();
      if (key == "backend.api_key") {
        fail("API keys are read from the environment; set backend.api_key_env instead", entry.line);
      }
      fail("unknown key '" + key + "'", entry.line);
    }
  }

 private:
  std::map<std::string, Entry> table_;
};

}  // namespace

void ServiceConfig::validate() const {
  if (port < 1 || port > 65535) {
    throw Error(ErrorCode::ConfigError, "service.port must be in [1, 65535]");
  }
  if (host.empty()) {
    throw Error(ErrorCode::ConfigError, "service.host must not be empty");
  }
}

void AppConfig::validate() const {
  service.validate();
  vitals.validate();
  try {
    orchestrator.weights.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (nlp.embedding_dim == 0) {
    throw Error(ErrorCode::ConfigError, "nlp.embedding_dim must be positive");
  }
  if (nlp.mode == NlpMode::Service && nlp.service.url.empty()) {
    throw Error(ErrorCode::ConfigError, "nlp.url is required in service mode");
  }
  if (orchestrator.word_cap == 0 || orchestrator.k_profile == 0 || orchestrator.k_stream == 0) {
    throw Error(ErrorCode::ConfigError, "retrieval caps must be positive");
  }
}

AppConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  Reader r(parse_table(text));
  AppConfig c;

  r.get("service.host", c.service.host);
  std::int64_t port = c.service.port;
  r.get("service.port", port);
  c.service.port = static_cast<int>(std::min<std::int64_t>(port, 1 << 20));
  r.path("service.snapshot", c.service.snapshot, base_dir);
  r.get("service.cors_origins", c.service.cors_origins);
  r.get("service.auth_token", c.service.auth_token);

  std::string mode;
  if (r.get("backend.mode", mode)) {
    if (mode == "live") {
      c.backend.mode = BackendMode::Live;
    } else if (mode == "scripted") {
      c.backend.mode = BackendMode::Scripted;
    } else {
      throw Error(ErrorCode::ConfigError, "backend.mode must be \"live\" or \"scripted\"");
    }
  }
  r.get("backend.endpoint", c.backend.endpoint);
  r.get("backend.model", c.backend.model);
  r.get("backend.api_key_env", c.backend.api_key_env);
  r.millis("backend.timeout_ms", c.backend.timeout);
  r.get("backend.max_retries", c.backend.max_retries);
  r.path("backend.playbook", c.backend.playbook_path, base_dir);
  r.get("backend.temperature", c.backend.temperature);
  r.get("backend.rate_capacity", c.backend.rate_capacity);
  r.get("backend.rate_refill_per_second", c.backend.rate_refill_per_second);

  if (r.get("nlp.mode", mode)) {
    if (mode == "service") {
      c.nlp.mode = NlpMode::Service;
    } else if (mode == "stub") {
      c.nlp.mode = NlpMode::Stub;
    } else {
      throw Error(ErrorCode::ConfigError, "nlp.mode must be \"stub\" or \"service\"");
    }
  }
  r.get("nlp.url", c.nlp.service.url);
  r.millis("nlp.timeout_ms", c.nlp.service.timeout);
  r.get("nlp.fallback_to_stub", c.nlp.service.fallback_to_stub);
  r.get("nlp.embedding_dim", c.nlp.embedding_dim);
  r.get("nlp.seed", c.nlp.seed);

  r.get("retrieval.w_recency", c.orchestrator.weights.recency);
  r.get("retrieval.w_importance", c.orchestrator.weights.importance);
  r.get("retrieval.w_relevance", c.orchestrator.weights.relevance);
  r.get("retrieval.k_profile", c.orchestrator.k_profile);
  r.get("retrieval.k_stream", c.orchestrator.k_stream);
  r.get("retrieval.word_cap", c.orchestrator.word_cap);
  r.get("retrieval.style_cap", c.orchestrator.style_cap);

  std::int64_t minutes = 0;
  if (r.get("dialogue.session_gap_minutes", minutes)) {
    c.ingestion.session_gap = std::chrono::minutes(minutes);
  }

  r.get("vitals.z_threshold", c.vitals.z_threshold);
  r.get("vitals.min_samples", c.vitals.min_samples);
  std::int64_t hours = 0;
  if (r.get("vitals.baseline_hours", hours)) {
    c.vitals.baseline_window = std::chrono::hours(hours);
  }
  if (r.get("vitals.retention_days", hours)) {
    c.vitals.retention = std::chrono::hours(24 * hours);
  }
  double floor = 0.0;
  if (r.get("vitals.heart_rate_floor", floor)) {
    c.vitals.floors[VitalMetric::HeartRate] = floor;
  }

  r.finish();
  c.validate();
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot read config '" + path.string() + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace twin
