#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twin/types.hpp"

namespace twin {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role) noexcept;

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

enum class BackendMode { Live, Scripted };

struct BackendConfig {
  BackendMode mode = BackendMode::Scripted;
  std::string endpoint;  // full chat-completions URL in live mode
  std::string model = "gpt-4o";
  std::string api_key_env = "OPENAI_API_KEY";  // name of the variable, never the key
  std::chrono::milliseconds timeout{30'000};
  int max_retries = 2;
  std::filesystem::path playbook_path;
  double temperature = 0.0;
  // Token bucket; capacity 0 disables rate limiting.
  double rate_capacity = 0.0;
  double rate_refill_per_second = 0.0;

  // Throws ConfigError.
  void validate() const;
};

// Extracts the routing tag from the first "#tag: " line of any message.
std::optional<std::string> prompt_tag(std::span<const ChatMessage> messages);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(std::span<const ChatMessage> messages) = 0;
};

// Deterministic backend: replies are looked up by prompt tag. A tag
// "a:b:c" falls back to "a:b" and then "a" before reporting PlaybookMiss.
class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(std::map<std::string, std::string> playbook);
  // Playbook file: JSON object mapping tag -> reply text.
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  std::string complete(std::span<const ChatMessage> messages) override;
  const std::map<std::string, std::string>& playbook() const noexcept { return playbook_; }

 private:
  std::map<std::string, std::string> playbook_;
};

// OpenAI-compatible chat-completions client.
class LiveBackend final : public ChatBackend {
 public:
  using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

  explicit LiveBackend(BackendConfig config, EnvLookup env = {});
  std::string complete(std::span<const ChatMessage> messages) override;

  // Request body sent for `messages`.
  std::string request_body(std::span<const ChatMessage> messages) const;

 private:
  std::string attempt(const std::string& body, const std::string& api_key);

  BackendConfig config_;
  EnvLookup env_;
};

class TokenBucket {
 public:
  using TimeSource = std::function<std::chrono::steady_clock::time_point()>;

  TokenBucket(double capacity, double refill_per_second, TimeSource now = {});

  bool try_acquire();
  // Blocks until a token is available.
  void acquire();
  double available();

 private:
  void refill();

  std::mutex mutex_;
  double capacity_;
  double refill_per_second_;
  double tokens_;
  TimeSource now_;
  std::chrono::steady_clock::time_point last_;
};

struct ImportanceRequest {
  std::string memory_content;
  std::string context_prompt;  // built from stored profile facts only
};

// Display names for party ids used when rendering conversation logs.
using PartyNames = std::map<std::string, std::string>;

// Renders "[YYYY-MM-DD HH:MM] Sender: text" lines.
std::string render_log(std::span<const ConversationTurn> turns, const PartyNames& names);

// First integer token of a reply, if it is an integer in [0,10].
std::optional<int> parse_importance(std::string_view reply);

// Prompt construction and transport for every language-model call.
class LlmGateway {
 public:
  explicit LlmGateway(std::shared_ptr<ChatBackend> backend, std::shared_ptr<TokenBucket> limiter = nullptr);
  static std::shared_ptr<LlmGateway> from_config(const BackendConfig& config);

  // Requires a non-empty list whose first message has the system role.
  std::string complete(std::span<const ChatMessage> messages) const;

  std::vector<ChatMessage> importance_prompt(const ImportanceRequest& request) const;
  // Integer in [0,10]; one retry with a stricter instruction, then
  // MalformedScore.
  int score_importance(const ImportanceRequest& request) const;

  std::vector<ChatMessage> reflection_prompt(std::span<const ConversationTurn> log, const std::string& persona_name,
                                             const PartyNames& names) const;
  std::string reflect_dialogue(std::span<const ConversationTurn> log, const std::string& persona_name = "the persona",
                               const PartyNames& names = {}) const;

  std::vector<ChatMessage> vitals_prompt(std::span<const VitalSample> window, VitalPeriod period) const;
  // All samples must fall into one hour (hourly) or one UTC day (daily).
  std::string summarize_vitals(std::span<const VitalSample> window, VitalPeriod period) const;

 private:
  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<TokenBucket> limiter_;
};

}  // namespace twin
