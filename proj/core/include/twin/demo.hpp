#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "twin/config.hpp"
#include "twin/runtime.hpp"

namespace twin {

struct Probe {
  std::string area;   // printed in the transcript
  std::string topic;  // routing topic for the stage prompts
  ContactId contact;
  std::string text;
  Timestamp at{};
};

// scenario.json inside a scenario directory:
//   {"persona":"persona.json", "chat":"chat.jsonl", "vitals":"vitals.csv",
//    "playbook":"playbook.json", "vitals_processed_at":"...",
//    "probes":[{"area":..., "topic":..., "contact":..., "text":..., "at":...}]}
// File names resolve against the directory.
struct Scenario {
  std::filesystem::path dir;
  std::filesystem::path persona;
  std::filesystem::path chat;
  std::filesystem::path vitals;
  std::filesystem::path playbook;
  Timestamp vitals_processed_at{};
  std::vector<Probe> probes;
};

// Throws ScenarioParseError.
Scenario load_scenario(const std::filesystem::path& dir);

// Stub adapters and the scenario's scripted playbook.
AppConfig scenario_config(const Scenario& scenario);

struct DemoResult {
  ImportSummary chat;
  std::size_t vitals_added = 0;
  VitalsReport vitals;
  std::string transcript;
  std::vector<ResponseTrace> traces;
};

// Creates the persona and imports chat history and vitals.
DemoResult prepare_scenario(Runtime& runtime, const Scenario& scenario);

// Replays the probes in order and renders the transcript.
void run_probes(Runtime& runtime, const Scenario& scenario, DemoResult& result);

DemoResult run_demo(const Scenario& scenario);

// transcript.txt plus traces/NN-<topic>.json.
void write_demo_output(const DemoResult& result, const std::filesystem::path& out_dir);

}  // namespace twin
