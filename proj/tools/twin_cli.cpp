// twin: command-line front end for a single persona store.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "twin/demo.hpp"
#include "twin/error.hpp"
#include "twin/runtime.hpp"
#include "twin/service.hpp"
#include "twin/text.hpp"

namespace fs = std::filesystem;
using namespace twin;

namespace {

struct Globals {
  std::string store = "twin-store.jsonl";
  bool store_set = false;
  std::string config;
  std::string playbook;
  std::string now;
};

AppConfig app_config(const Globals& g) {
  AppConfig config = g.config.empty() ? AppConfig{} : load_config(g.config);
  if (!g.playbook.empty()) {
    config.backend.mode = BackendMode::Scripted;
    config.backend.playbook_path = g.playbook;
  }
  return config;
}

fs::path store_path(const Globals& g, const AppConfig& config) {
  if (!g.store_set && !config.service.snapshot.empty()) {
    return config.service.snapshot;
  }
  return g.store;
}

Clock make_clock(const Globals& g) {
  if (g.now.empty()) {
    return system_clock();
  }
  const auto fixed = parse_rfc3339(g.now);
  return [fixed] { return fixed; };
}

std::unique_ptr<Runtime> open_store(const Globals& g, fs::path& path) {
  auto config = app_config(g);
  path = store_path(g, config);
  auto runtime = std::make_unique<Runtime>(std::move(config));
  runtime->load_snapshot(path);
  return runtime;
}

int cmd_init(const Globals& g, const std::string& persona_file, bool force) {
  auto config = app_config(g);
  const auto path = store_path(g, config);
  if (fs::exists(path) && !force) {
    throw Error(ErrorCode::PreconditionViolation, "store '" + path.string() + "' already exists (use --force)");
  }
  Runtime runtime(std::move(config));
  runtime.init_persona(load_persona_file(persona_file));
  runtime.save_snapshot(path);
  const auto persona = runtime.store().persona();
  std::cout << "initialized " << persona->persona_id.str() << " (" << runtime.store().memory_count()
            << " profile facts, " << runtime.store().contacts().size() << " contacts) in " << path.string() << "\n";
  return 0;
}

int cmd_import_chat(const Globals& g, const std::string& file) {
  fs::path path;
  auto runtime = open_store(g, path);
  const auto summary = runtime->ingestor().import_history(fs::path(file));
  runtime->save_snapshot(path);
  std::cout << "imported " << summary.turns << " turns in " << summary.sessions << " sessions\n";
  return 0;
}

int cmd_import_vitals(const Globals& g, const std::string& file) {
  fs::path path;
  auto runtime = open_store(g, path);
  const auto added = runtime->vitals().ingest_samples(fs::path(file));
  const auto report = runtime->process_vitals(make_clock(g)());
  runtime->save_snapshot(path);
  std::cout << "staged " << added << " samples; " << report.events.size() << " deviation events, "
            << report.summaries.size() << " daily summaries\n";
  return 0;
}

int cmd_chat(const Globals& g, const std::string& contact, bool trace) {
  fs::path path;
  auto runtime = open_store(g, path);
  const auto clock = make_clock(g);
  const auto persona = runtime->store().persona();
  std::string line;
  std::cerr << "chatting with " << persona->name << " as " << contact << " (empty line or /quit to leave)\n";
  while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
    line = trim(line);
    if (line.empty() || line == "/quit") {
      break;
    }
    try {
      auto reply = runtime->respond(ContactId{contact}, line, clock());
      std::cout << persona->name << ": " << reply.text << "\n";
      if (trace) {
        std::cout << trace_json(reply.trace, 2) << "\n";
      }
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
    }
    runtime->save_snapshot(path);
  }
  runtime->save_snapshot(path);
  return 0;
}

int cmd_explain(const Globals& g, const std::string& query, bool as_json) {
  fs::path path;
  auto runtime = open_store(g, path);
  RetrievalOptions opts;
  opts.touch = false;
  const auto result =
      runtime->engine().retrieve(query, runtime->persona_id(), make_clock(g)(), runtime->config().orchestrator.weights, opts);
  if (as_json) {
    std::cout << explain_json(result.all) << "\n";
    return 0;
  }
  std::printf("%-10s %-14s %8s %8s %8s %8s %8s  %s\n", "id", "category", "recency", "import.", "relev.", "extra",
              "total", "content");
  for (const auto& s : result.all) {
    const auto& b = s.breakdown;
    auto content = s.record.content;
    if (content.size() > 60) {
      content = content.substr(0, 57) + "...";
    }
    std::printf("%-10s %-14s %8.4f %8.4f %8.4f %8.4f %8.4f  %s\n", b.memory_id.str().c_str(),
                std::string(to_string(s.record.category)).c_str(), b.recency, b.importance_norm, b.relevance_norm,
                b.extra, b.total, content.c_str());
  }
  return 0;
}

int cmd_demo(const std::string& dir, const std::string& out, bool quiet) {
  const auto scenario = load_scenario(dir);
  const auto result = run_demo(scenario);
  write_demo_output(result, out);
  if (!quiet) {
    std::cout << result.transcript;
  }
  std::cerr << "wrote " << (fs::path(out) / "transcript.txt").string() << " and " << result.traces.size()
            << " traces\n";
  return 0;
}

int cmd_playbook_tags(const std::string& chat_file) {
  std::ifstream in(chat_file, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open '" + chat_file + "'");
  }
  const auto stop = default_stopwords();
  for (const auto& line : parse_chat_jsonl(in)) {
    std::cout << "importance:" << slug(line.text, stop) << "\t" << line.text << "\n";
  }
  return 0;
}

int cmd_serve(const Globals& g) {
  if (g.config.empty()) {
    throw Error(ErrorCode::ConfigError, "serve requires --config");
  }
  auto config = app_config(g);
  const auto service_config = config.service;
  service_config.validate();
  Runtime runtime(std::move(config));
  if (service_config.snapshot.empty()) {
    throw Error(ErrorCode::SnapshotLoadFailure, "service.snapshot is not set");
  }
  try {
    runtime.load_snapshot(service_config.snapshot);
  } catch (const Error& e) {
    throw Error(ErrorCode::SnapshotLoadFailure, e.what());
  }

  // Block the shutdown signals in every thread; a dedicated thread waits for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(runtime, service_config, make_clock(g));
  const int port = service.bind();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  std::cerr << "listening on " << service_config.host << ":" << port << "\n";
  service.run();
  waiter.join();
  std::cerr << "snapshot saved to " << service_config.snapshot.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twin: conversational digital twin"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--store", g.store, "Snapshot file of the persona store")->each([&](const std::string&) {
    g.store_set = true;
  });
  app.add_option("--config", g.config, "TOML-style configuration file");
  app.add_option("--playbook", g.playbook, "Scripted backend playbook (JSON)");
  app.add_option("--now", g.now, "Fixed RFC 3339 time instead of the system clock");

  std::string persona_file;
  bool force = false;
  auto* init = app.add_subcommand("init", "Create a store from a persona description");
  init->add_option("persona", persona_file, "persona.json")->required()->check(CLI::ExistingFile);
  init->add_flag("--force", force, "Overwrite an existing store");

  std::string import_file;
  auto* import = app.add_subcommand("import", "Import chat history or vitals");
  import->require_subcommand(1);
  auto* import_chat = import->add_subcommand("chat", "Import chat history (JSON lines)");
  import_chat->add_option("file", import_file)->required()->check(CLI::ExistingFile);
  auto* import_vitals = import->add_subcommand("vitals", "Import wearable samples (CSV)");
  import_vitals->add_option("file", import_file)->required()->check(CLI::ExistingFile);

  std::string contact;
  bool trace = false;
  auto* chat = app.add_subcommand("chat", "Chat with the twin as a contact");
  chat->add_option("contact", contact, "Contact id")->required();
  chat->add_flag("--trace", trace, "Print the response trace after each reply");

  std::string query;
  bool as_json = false;
  auto* explain = app.add_subcommand("explain", "Show the retrieval breakdown for a query");
  explain->add_option("query", query)->required();
  explain->add_flag("--json", as_json, "Print JSON instead of a table");

  std::string scenario_dir;
  std::string out_dir = "demo-out";
  bool quiet = false;
  auto* demo = app.add_subcommand("demo", "Replay a bundled scenario");
  demo->add_option("scenario", scenario_dir, "Scenario directory")->required()->check(CLI::ExistingDirectory);
  demo->add_option("--out", out_dir, "Output directory for transcript and traces");
  demo->add_flag("--quiet", quiet, "Do not print the transcript");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", g.config, "Configuration file")->required();

  std::string tags_file;
  auto* tags = app.add_subcommand("playbook-tags", "Print the importance tags of a chat file");
  tags->add_option("file", tags_file)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*init) return cmd_init(g, persona_file, force);
    if (*import_chat) return cmd_import_chat(g, import_file);
    if (*import_vitals) return cmd_import_vitals(g, import_file);
    if (*chat) return cmd_chat(g, contact, trace);
    if (*explain) return cmd_explain(g, query, as_json);
    if (*demo) return cmd_demo(scenario_dir, out_dir, quiet);
    if (*serve) return cmd_serve(g);
    if (*tags) return cmd_playbook_tags(tags_file);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
