#include "twin/llm_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include "http_url.hpp"
#include "httplib.h"
#include "json_codec.hpp"
#include "twin/error.hpp"
#include "twin/prompts.hpp"
#include "twin/text.hpp"

namespace twin {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

void BackendConfig::validate() const {
  if (mode == BackendMode::Live) {
    if (endpoint.empty()) {
      throw Error(ErrorCode::ConfigError, "live backend requires an endpoint");
    }
    if (api_key_env.empty()) {
      throw Error(ErrorCode::ConfigError, "live backend requires the name of the API key variable");
    }
  } else if (playbook_path.empty()) {
    throw Error(ErrorCode::ConfigError, "scripted backend requires a playbook path");
  }
  if (max_retries < 0 || timeout.count() <= 0) {
    throw Error(ErrorCode::ConfigError, "retries must be >= 0 and timeout positive");
  }
  if (rate_capacity < 0.0 || rate_refill_per_second < 0.0) {
    throw Error(ErrorCode::ConfigError, "rate limit parameters must be non-negative");
  }
}

std::optional<std::string> prompt_tag(std::span<const ChatMessage> messages) {
  for (const auto& m : messages) {
    std::size_t pos = 0;
    while (pos <= m.content.size()) {
      const auto end = m.content.find('\n', pos);
      const std::string_view line =
          std::string_view(m.content).substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      if (line.starts_with(prompts::kTagPrefix)) {
        return trim(line.substr(prompts::kTagPrefix.size()));
      }
      if (end == std::string::npos) {
        break;
      }
      pos = end + 1;
    }
  }
  return std::nullopt;
}

// --- scripted -------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::map<std::string, std::string> playbook) : playbook_(std::move(playbook)) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open playbook '" + path.string() + "'");
  }
  try {
    const auto j = json::parse(in);
    return std::make_shared<ScriptedBackend>(j.get<std::map<std::string, std::string>>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "playbook '" + path.string() + "': " + e.what());
  }
}

std::string ScriptedBackend::complete(std::span<const ChatMessage> messages) {
  const auto tag = prompt_tag(messages);
  if (!tag) {
    throw Error(ErrorCode::PlaybookMiss, "prompt carries no tag line");
  }
  std::string key = *tag;
  while (true) {
    if (const auto it = playbook_.find(key); it != playbook_.end()) {
      return it->second;
    }
    const auto colon = key.rfind(':');
    if (colon == std::string::npos) {
      break;
    }
    key.resize(colon);
  }
  throw Error(ErrorCode::PlaybookMiss, "no playbook entry for tag '" + *tag + "'");
}

// --- live -----------------------------------------------------------------

LiveBackend::LiveBackend(BackendConfig config, EnvLookup env) : config_(std::move(config)), env_(std::move(env)) {
  if (!env_) {
    env_ = [](const std::string& name) -> std::optional<std::string> {
      if (const char* v = std::getenv(name.c_str())) {
        return std::string(v);
      }
      return std::nullopt;
    };
  }
}

std::string LiveBackend::request_body(std::span<const ChatMessage> messages) const {
  json msgs = json::array();
  for (const auto& m : messages) {
    msgs.push_back(json{{"role", to_string(m.role)}, {"content", m.content}});
  }
  return json{{"model", config_.model}, {"messages", msgs}, {"temperature", config_.temperature}}.dump();
}

std::string LiveBackend::attempt(const std::string& body, const std::string& api_key) {
  const auto url = split_url(config_.endpoint);
  httplib::Client client(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const httplib::Headers headers{{"Authorization", "Bearer " + api_key}};
  const auto res = client.Post(url.path, headers, body, "application/json");
  if (!res) {
    if (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::Timeout, "chat backend timed out");
    }
    throw Error(ErrorCode::BackendUnavailable, "chat backend unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw Error(ErrorCode::BackendUnavailable, "chat backend returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    // Client errors are not retried.
    throw Error(ErrorCode::PreconditionViolation,
                "chat backend rejected the request with HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    const auto j = json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("malformed chat backend reply: ") + e.what());
  }
}

std::string LiveBackend::complete(std::span<const ChatMessage> messages) {
  const auto key = env_(config_.api_key_env);
  if (!key || key->empty()) {
    throw Error(ErrorCode::BackendUnavailable, "environment variable " + config_.api_key_env + " is not set");
  }
  const auto body = request_body(messages);
  std::chrono::milliseconds backoff{100};
  for (int attempt_no = 0;; ++attempt_no) {
    try {
      return attempt(body, *key);
    } catch (const Error& e) {
      const bool retryable = e.code() == ErrorCode::BackendUnavailable || e.code() == ErrorCode::Timeout;
      if (!retryable || attempt_no >= config_.max_retries) {
        throw;
      }
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::min(backoff * 2, std::chrono::milliseconds{2000});
  }
}

// --- rate limiting --------------------------------------------------------

TokenBucket::TokenBucket(double capacity, double refill_per_second, TimeSource now)
    : capacity_(capacity), refill_per_second_(refill_per_second), tokens_(capacity), now_(std::move(now)) {
  if (!now_) {
    now_ = [] { return std::chrono::steady_clock::now(); };
  }
  last_ = now_();
}

void TokenBucket::refill() {
  const auto now = now_();
  const std::chrono::duration<double> dt = now - last_;
  last_ = now;
  tokens_ = std::min(capacity_, tokens_ + dt.count() * refill_per_second_);
}

bool TokenBucket::try_acquire() {
  std::lock_guard lock(mutex_);
  refill();
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

void TokenBucket::acquire() {
  while (!try_acquire()) {
    if (refill_per_second_ <= 0.0) {
      throw Error(ErrorCode::BackendUnavailable, "rate limit exhausted and no refill configured");
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(1.0 / refill_per_second_));
  }
}

double TokenBucket::available() {
  std::lock_guard lock(mutex_);
  refill();
  return tokens_;
}

// --- gateway --------------------------------------------------------------

std::string render_log(std::span<const ConversationTurn> turns, const PartyNames& names) {
  std::string out;
  for (const auto& t : turns) {
    const auto it = names.find(t.sender);
    const auto& who = it == names.end() ? t.sender : it->second;
    out += "[" + format_minute(t.timestamp) + "] " + who + ": " + t.text + "\n";
  }
  if (!out.empty()) {
    out.pop_back();
  }
  return out;
}

std::optional<int> parse_importance(std::string_view reply) {
  static const std::regex number(R"((^|[^0-9A-Za-z.])(-?[0-9]+)(\.[0-9]+)?)");
  const std::string text(reply);
  std::smatch m;
  if (!std::regex_search(text, m, number)) {
    return std::nullopt;
  }
  if (m[3].matched) {
    return std::nullopt;
  }
  const auto& digits = m[2].str();
  if (digits.size() > 3) {
    return std::nullopt;
  }
  const int value = std::stoi(digits);
  if (value < 0 || value > 10) {
    return std::nullopt;
  }
  return value;
}

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> backend, std::shared_ptr<TokenBucket> limiter)
    : backend_(std::move(backend)), limiter_(std::move(limiter)) {
  if (!backend_) {
    throw Error(ErrorCode::ConfigError, "gateway needs a backend");
  }
}

std::shared_ptr<LlmGateway> LlmGateway::from_config(const BackendConfig& config) {
  config.validate();
  std::shared_ptr<ChatBackend> backend;
  if (config.mode == BackendMode::Live) {
    backend = std::make_shared<LiveBackend>(config);
  } else {
    backend = ScriptedBackend::from_file(config.playbook_path);
  }
  std::shared_ptr<TokenBucket> limiter;
  if (config.rate_capacity > 0.0) {
    limiter = std::make_shared<TokenBucket>(config.rate_capacity, config.rate_refill_per_second);
  }
  return std::make_shared<LlmGateway>(std::move(backend), std::move(limiter));
}

std::string LlmGateway::complete(std::span<const ChatMessage> messages) const {
  if (messages.empty() || messages.front().role != Role::System) {
    throw Error(ErrorCode::PreconditionViolation, "prompt must start with a system message");
  }
  for (const auto& m : messages) {
    if (m.content.empty()) {
      throw Error(ErrorCode::PreconditionViolation, "chat messages must not be empty");
    }
  }
  if (limiter_) {
    limiter_->acquire();
  }
  return backend_->complete(messages);
}

std::vector<ChatMessage> LlmGateway::importance_prompt(const ImportanceRequest& request) const {
  auto key = slug(request.memory_content, default_stopwords());
  const std::string tag = key.empty() ? "importance" : "importance:" + key;
  const auto context = request.context_prompt.empty() ? std::string("(no profile facts stored)") : request.context_prompt;
  return {
      {Role::System, prompts::render(prompts::kImportanceSystem, {{"tag", tag}, {"context", context}})},
      {Role::User, prompts::render(prompts::kImportanceUser, {{"memory", request.memory_content}})},
  };
}

int LlmGateway::score_importance(const ImportanceRequest& request) const {
  if (trim(request.memory_content).empty()) {
    throw Error(ErrorCode::PreconditionViolation, "memory content must not be empty");
  }
  auto messages = importance_prompt(request);
  std::string reply = complete(messages);
  if (const auto score = parse_importance(reply)) {
    return *score;
  }
  messages.push_back({Role::Assistant, reply.empty() ? std::string("(empty)") : reply});
  messages.push_back({Role::User, std::string(prompts::kImportanceRetry)});
  reply = complete(messages);
  if (const auto score = parse_importance(reply)) {
    return *score;
  }
  throw Error(ErrorCode::MalformedScore, "backend did not return an integer in [0,10]: '" + reply + "'");
}

std::vector<ChatMessage> LlmGateway::reflection_prompt(std::span<const ConversationTurn> log,
                                                       const std::string& persona_name,
                                                       const PartyNames& names) const {
  if (log.empty()) {
    throw Error(ErrorCode::PreconditionViolation, "cannot reflect on an empty conversation");
  }
  const std::string tag = "reflection:" + format_date(log.front().timestamp);
  return {
      {Role::System, prompts::render(prompts::kReflectionSystem, {{"tag", tag}, {"persona", persona_name}})},
      {Role::User, prompts::render(prompts::kReflectionUser, {{"log", render_log(log, names)}})},
  };
}

std::string LlmGateway::reflect_dialogue(std::span<const ConversationTurn> log, const std::string& persona_name,
                                         const PartyNames& names) const {
  return complete(reflection_prompt(log, persona_name, names));
}

namespace {

std::string bucket_label(Timestamp ts, VitalPeriod period) {
  if (period == VitalPeriod::Daily) {
    return format_date(ts);
  }
  return format_rfc3339(floor_to_hour(ts)).substr(0, 13);
}

Timestamp bucket_start(Timestamp ts, VitalPeriod period) {
  return period == VitalPeriod::Daily ? floor_to_day(ts) : floor_to_hour(ts);
}

}  // namespace

std::vector<ChatMessage> LlmGateway::vitals_prompt(std::span<const VitalSample> window, VitalPeriod period) const {
  if (window.empty()) {
    throw Error(ErrorCode::EmptyWindow, "no vital samples to summarize");
  }
  const auto start = bucket_start(window.front().timestamp, period);
  for (const auto& s : window) {
    if (bucket_start(s.timestamp, period) != start) {
      throw Error(ErrorCode::PreconditionViolation,
                  std::string("samples span more than one ") + (period == VitalPeriod::Daily ? "day" : "hour"));
    }
  }

  std::string stats;
  for (const auto metric : {VitalMetric::HeartRate, VitalMetric::Stress, VitalMetric::Sleep, VitalMetric::Activity}) {
    std::size_t n = 0;
    double sum = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& s : window) {
      if (s.metric != metric) {
        continue;
      }
      lo = n == 0 ? s.value : std::min(lo, s.value);
      hi = n == 0 ? s.value : std::max(hi, s.value);
      sum += s.value;
      ++n;
    }
    if (n == 0) {
      continue;
    }
    char line[160];
    std::snprintf(line, sizeof(line), "%s: n=%zu mean=%.1f min=%.1f max=%.1f\n", std::string(to_string(metric)).c_str(),
                  n, sum / static_cast<double>(n), lo, hi);
    stats += line;
  }
  stats.pop_back();

  const std::string period_name(to_string(period));
  const std::string tag = "vitals:" + period_name + ":" + bucket_label(start, period);
  return {
      {Role::System, prompts::render(prompts::kVitalsSystem, {{"tag", tag}, {"period", period_name}})},
      {Role::User, prompts::render(prompts::kVitalsUser,
                                   {{"start", format_rfc3339(start)}, {"period", period_name}, {"stats", stats}})},
  };
}

std::string LlmGateway::summarize_vitals(std::span<const VitalSample> window, VitalPeriod period) const {
  return complete(vitals_prompt(window, period));
}

}  // namespace twin
