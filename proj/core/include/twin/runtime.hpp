#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "twin/config.hpp"
#include "twin/dialogue.hpp"
#include "twin/llm_gateway.hpp"
#include "twin/memory_store.hpp"
#include "twin/nlp.hpp"
#include "twin/orchestrator.hpp"
#include "twin/retrieval.hpp"
#include "twin/vitals.hpp"

namespace twin {

struct ProfileFact {
  Category category = Category::UserProfile;
  std::string content;
  std::optional<int> importance;  // scored by the backend when absent
  std::optional<Timestamp> created_at;
};

// persona.json:
//   {"persona_id":..., "name":..., "created_at":..., "core_identity":{...},
//    "profile":[{"category":"Interests","content":..., "importance":7}],
//    "contacts":[{"contact_id":..., "name":..., ...}]}
struct PersonaSeed {
  PersonaProfile profile;
  std::vector<ProfileFact> facts;
  std::vector<SocialContact> contacts;
};

// Throws ParseError, IoFailure.
PersonaSeed parse_persona(const std::string& text);
PersonaSeed load_persona_file(const std::filesystem::path& path);

struct VitalsReport {
  std::vector<DeviationEvent> events;
  std::vector<MemoryId> summaries;
};

// Every component of one twin, wired to a single store.
class Runtime {
 public:
  // `gateway` replaces the backend described by config.backend.
  explicit Runtime(AppConfig config, std::shared_ptr<LlmGateway> gateway = nullptr);

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const AppConfig& config() const noexcept { return config_; }
  MemoryStore& store() noexcept { return store_; }
  const MemoryStore& store() const noexcept { return store_; }
  const NlpAdapters& adapters() const noexcept { return adapters_; }
  const LlmGateway& gateway() const noexcept { return *gateway_; }
  DialogueIngestor& ingestor() noexcept { return ingestor_; }
  VitalsPipeline& vitals() noexcept { return vitals_; }
  const RetrievalEngine& engine() const noexcept { return engine_; }
  Orchestrator& orchestrator() noexcept { return orchestrator_; }

  // Throws UnknownPersona when no persona has been created.
  PersonaId persona_id() const;

  // Creates the persona, its contacts and its profile facts.
  void init_persona(const PersonaSeed& seed);

  void load_snapshot(const std::filesystem::path& path);
  void save_snapshot(const std::filesystem::path& path) const;

  // Deviation scan of every metric over the staged samples up to `now`,
  // then a daily rollup of each completed day.
  VitalsReport process_vitals(Timestamp now);

  Reply respond(const ContactId& contact, const std::string& message, Timestamp now,
                const RespondOptions& options = {});

 private:
  AppConfig config_;
  MemoryStore store_;
  NlpAdapters adapters_;
  std::shared_ptr<LlmGateway> gateway_;
  RetrievalEngine engine_;
  DialogueIngestor ingestor_;
  VitalsPipeline vitals_;
  Orchestrator orchestrator_;
};

}  // namespace twin
