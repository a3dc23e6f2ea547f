#include "twin/demo.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "twin/error.hpp"

namespace twin {

namespace {

std::filesystem::path scenario_file(const std::filesystem::path& dir, const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::ScenarioParseError, std::string("scenario is missing '") + key + "'");
  }
  auto path = dir / j.at(key).get<std::string>();
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::ScenarioParseError, std::string("scenario ") + key + " file '" + path.string() +
                                                   "' does not exist");
  }
  return path;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
  if (!out) {
    throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
  }
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& dir) {
  const auto file = dir / "scenario.json";
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::ScenarioParseError, "cannot read '" + file.string() + "'");
  }
  Scenario s;
  s.dir = dir;
  try {
    const auto j = json::parse(in);
    if (!j.is_object()) {
      throw Error(ErrorCode::ScenarioParseError, "scenario.json must hold a JSON object");
    }
    s.persona = scenario_file(dir, j, "persona");
    s.chat = scenario_file(dir, j, "chat");
    s.vitals = scenario_file(dir, j, "vitals");
    s.playbook = scenario_file(dir, j, "playbook");
    s.vitals_processed_at = parse_rfc3339(require_string(j, "vitals_processed_at"));
    for (const auto& p : j.at("probes")) {
      Probe probe;
      probe.area = require_string(p, "area");
      probe.topic = require_string(p, "topic");
      probe.contact = ContactId{require_string(p, "contact")};
      probe.text = require_string(p, "text");
      probe.at = parse_rfc3339(require_string(p, "at"));
      s.probes.push_back(std::move(probe));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ScenarioParseError, std::string("scenario.json: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ScenarioParseError) {
      throw;
    }
    throw Error(ErrorCode::ScenarioParseError, std::string("scenario.json: ") + e.what());
  }
  if (s.probes.empty()) {
    throw Error(ErrorCode::ScenarioParseError, "scenario has no probes");
  }
  return s;
}

AppConfig scenario_config(const Scenario& scenario) {
  AppConfig config;
  config.backend.mode = BackendMode::Scripted;
  config.backend.playbook_path = scenario.playbook;
  config.nlp.mode = NlpMode::Stub;
  return config;
}

DemoResult prepare_scenario(Runtime& runtime, const Scenario& scenario) {
  DemoResult result;
  runtime.init_persona(load_persona_file(scenario.persona));
  result.chat = runtime.ingestor().import_history(scenario.chat);
  result.vitals_added = runtime.vitals().ingest_samples(scenario.vitals);
  result.vitals = runtime.process_vitals(scenario.vitals_processed_at);
  return result;
}

void run_probes(Runtime& runtime, const Scenario& scenario, DemoResult& result) {
  const auto persona = runtime.store().persona();
  const auto names = runtime.ingestor().party_names();
  std::ostringstream out;
  out << "# " << (persona ? persona->name : std::string("twin")) << "\n";
  for (const auto& probe : scenario.probes) {
    auto reply = runtime.respond(probe.contact, probe.text, probe.at, RespondOptions{probe.topic});
    const auto it = names.find(probe.contact.str());
    const auto& who = it == names.end() ? probe.contact.str() : it->second;
    out << "\n== " << probe.area << " (" << format_minute(probe.at) << ") ==\n";
    out << who << ": " << probe.text << "\n";
    out << (persona ? persona->name : std::string("twin")) << ": " << reply.text << "\n";
    result.traces.push_back(std::move(reply.trace));
  }
  result.transcript = out.str();
}

DemoResult run_demo(const Scenario& scenario) {
  Runtime runtime(scenario_config(scenario));
  auto result = prepare_scenario(runtime, scenario);
  run_probes(runtime, scenario, result);
  return result;
}

void write_demo_output(const DemoResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "traces", ec);
  if (ec) {
    throw Error(ErrorCode::IoFailure, "cannot create '" + out_dir.string() + "': " + ec.message());
  }
  write_file(out_dir / "transcript.txt", result.transcript);
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    char name[96];
    std::snprintf(name, sizeof(name), "%02zu-%s.json", i + 1, result.traces[i].topic.c_str());
    write_file(out_dir / "traces" / name, trace_json(result.traces[i], 2) + "\n");
  }
}

}  // namespace twin
