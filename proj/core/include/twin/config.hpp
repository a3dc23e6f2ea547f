#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "twin/dialogue.hpp"
#include "twin/llm_gateway.hpp"
#include "twin/nlp_service.hpp"
#include "twin/orchestrator.hpp"
#include "twin/vitals.hpp"

namespace twin {

enum class NlpMode { Stub, Service };

struct NlpSettings {
  NlpMode mode = NlpMode::Stub;
  NlpServiceConfig service;
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  std::uint64_t seed = kDefaultStubSeed;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path snapshot;
  std::vector<std::string> cors_origins;
  std::string auth_token;  // empty: no auth

  void validate() const;
};

struct AppConfig {
  ServiceConfig service;
  BackendConfig backend;
  NlpSettings nlp;
  IngestionConfig ingestion;
  VitalsConfig vitals;
  OrchestratorConfig orchestrator;

  // Backend settings are checked when the gateway is built, so a CLI flag
  // can still supply the playbook.
  void validate() const;
};

// TOML-style file: [section] headers and key = value lines with strings,
// integers, floats, booleans and arrays of strings. Relative paths resolve
// against `base_dir`. Unknown keys are errors. Throws ConfigError.
AppConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
AppConfig load_config(const std::filesystem::path& path);

}  // namespace twin
