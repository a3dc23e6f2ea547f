#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "twin/dialogue.hpp"
#include "twin/llm_gateway.hpp"
#include "twin/memory_store.hpp"
#include "twin/time.hpp"

namespace fixtures {

twin::Timestamp at(const char* rfc3339);

std::filesystem::path data_dir();
std::filesystem::path martin_dir();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& body);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Persona "martin" named Martin, created 2025-01-01.
twin::PersonaProfile martin();
void add_contact(twin::MemoryStore& store, const std::string& id, const std::string& name,
                 const std::string& address = {});

// Scripted backend that records every prompt and can be told to fail.
class RecordingBackend final : public twin::ChatBackend {
 public:
  explicit RecordingBackend(std::map<std::string, std::string> playbook);

  std::string complete(std::span<const twin::ChatMessage> messages) override;

  // Tags starting with this prefix raise BackendUnavailable.
  void fail_prefix(std::string prefix);
  std::vector<std::vector<twin::ChatMessage>> calls() const;
  std::vector<std::string> tags() const;

 private:
  twin::ScriptedBackend scripted_;
  mutable std::mutex mutex_;
  std::string fail_prefix_;
  std::vector<std::vector<twin::ChatMessage>> calls_;
};

struct Scripted {
  std::shared_ptr<RecordingBackend> backend;
  std::shared_ptr<twin::LlmGateway> gateway;
};

Scripted scripted(std::map<std::string, std::string> playbook);

// Logs `turns` alternating messages (contact first) into one session with
// the contact, one minute apart, and finalizes it. No-op for zero turns.
void chat_with(twin::DialogueIngestor& ingestor, const std::string& persona, const std::string& contact,
               std::size_t turns, twin::Timestamp start);

// Wearable trace: heart rate every 10 minutes on a cycle
// whose hourly mean is always 68, stress and activity hourly, sleep daily.
// The hour starting at `spike` averages 142 bpm.
struct SyntheticVitals {
  std::string csv;
  std::vector<twin::VitalSample> rows;
  twin::Timestamp spike{};
};

SyntheticVitals synthetic_vitals(twin::Timestamp day0, int days, twin::Timestamp spike);

}  // namespace fixtures
