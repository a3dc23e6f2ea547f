#include "twin/service.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "httplib.h"
#include "json_codec.hpp"
#include "twin/error.hpp"
#include "twin/text.hpp"

namespace twin {

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::PreconditionViolation:
    case ErrorCode::InvariantViolation:
    case ErrorCode::EmptyText:
    case ErrorCode::EmptyLabelSet:
    case ErrorCode::OutOfRange:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::NonMonotonicTimestamp:
    case ErrorCode::ClockRegression:
    case ErrorCode::SessionClosed:
      return 400;
    case ErrorCode::UnknownPersona:
    case ErrorCode::UnknownMemoryId:
    case ErrorCode::UnknownSession:
      return 404;
    case ErrorCode::MalformedScore:
    case ErrorCode::PlaybookMiss:
      return 502;
    case ErrorCode::BackendUnavailable:
      return 503;
    case ErrorCode::Timeout:
      return 504;
    default:
      return 500;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, json{{"error", {{"code", code}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded()) {
    throw Error(ErrorCode::ParseError, "request body is not valid JSON");
  }
  if (!body.is_object()) {
    throw Error(ErrorCode::ParseError, "request body must be a JSON object");
  }
  return body;
}

std::string required_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name) || trim(req.get_param_value(name)).empty()) {
    throw Error(ErrorCode::PreconditionViolation, std::string("query parameter '") + name + "' is required");
  }
  return req.get_param_value(name);
}

std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_param(name)) {
    return fallback;
  }
  const auto v = req.get_param_value(name);
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || out == 0 || out > 1000) {
    throw Error(ErrorCode::PreconditionViolation, std::string("'") + name + "' must be an integer in [1, 1000]");
  }
  return out;
}

bool flag_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) {
    return false;
  }
  const auto v = to_lower(req.get_param_value(name));
  return v == "1" || v == "true" || v == "yes";
}

}  // namespace

struct Service::Impl {
  Runtime& runtime;
  ServiceConfig config;
  Clock clock;
  httplib::Server server;
  bool stopped = false;

  Impl(Runtime& r, ServiceConfig c, Clock k) : runtime(r), config(std::move(c)), clock(std::move(k)) {}

  bool origin_allowed(const std::string& origin) const {
    return std::any_of(config.cors_origins.begin(), config.cors_origins.end(),
                       [&](const std::string& o) { return o == "*" || o == origin; });
  }

  // Wraps a handler so every failure becomes a JSON error response.
  httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "parse_error", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal_error", e.what());
      }
    };
  }

  void routes() {
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      const auto origin = req.get_header_value("Origin");
      if (!origin.empty() && origin_allowed(origin)) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      }
      if (req.method == "OPTIONS") {
        res.status = 204;
        return httplib::Server::HandlerResponse::Handled;
      }
      if (!config.auth_token.empty() && req.path != "/health" &&
          req.get_header_value("Authorization") != "Bearer " + config.auth_token) {
        send_error(res, 401, "unauthorized", "missing or invalid bearer token");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      send_error(res, 500, "internal_error", "unhandled exception");
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        send_error(res, res.status, res.status == 404 ? "not_found" : "http_error", httplib::status_message(res.status));
      }
    });

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, json{{"status", "ok"}});
    });

    server.Post("/chat", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      const auto contact = require_string(body, "contact_id");
      const auto text = require_string(body, "text");
      if (trim(contact).empty() || trim(text).empty()) {
        throw Error(ErrorCode::PreconditionViolation, "contact_id and text must not be empty");
      }
      auto reply = runtime.respond(ContactId{contact}, text, clock());
      json out{{"reply", reply.text}};
      if (flag_param(req, "trace")) {
        out["trace"] = json::parse(trace_json(reply.trace));
      }
      send_json(res, 200, out);
    }));

    server.Post("/ingest/dialogue", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::istringstream in(req.body);
      const auto summary = runtime.ingestor().import_history(in);
      send_json(res, 200, json{{"sessions", summary.sessions}, {"turns", summary.turns}});
    }));

    server.Post("/ingest/vitals", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::istringstream in(req.body);
      const auto added = runtime.vitals().ingest_samples(in);
      const auto report = runtime.process_vitals(clock());
      send_json(res, 200,
                json{{"added", added}, {"events", report.events.size()}, {"summaries", report.summaries.size()}});
    }));

    server.Get("/memories", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto query = required_param(req, "query");
      RetrievalOptions opts;
      opts.k_profile = size_param(req, "k_profile", runtime.config().orchestrator.k_profile);
      opts.k_stream = size_param(req, "k_stream", runtime.config().orchestrator.k_stream);
      opts.touch = false;
      const auto result =
          runtime.engine().retrieve(query, runtime.persona_id(), clock(), runtime.config().orchestrator.weights, opts);
      send_json(res, 200, json{{"query", query}, {"profile", explain_rows(result.profile)}, {"stream", explain_rows(result.stream)}});
    }));

    server.Get("/explain", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto query = required_param(req, "query");
      RetrievalOptions opts;
      opts.touch = false;
      const auto result =
          runtime.engine().retrieve(query, runtime.persona_id(), clock(), runtime.config().orchestrator.weights, opts);
      send_json(res, 200, explain_rows(result.all));
    }));

    server.Get("/contacts", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, json(runtime.store().contacts()));
    }));

    server.Post("/contacts", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto contact = parse_body(req).get<SocialContact>();
      if (trim(contact.contact_id.str()).empty() || trim(contact.name).empty()) {
        throw Error(ErrorCode::PreconditionViolation, "contact_id and name must not be empty");
      }
      if (contact.preferred_address.empty()) {
        contact.preferred_address = contact.name;
      }
      if (contact.relationship.empty()) {
        contact.relationship = "unknown";
      }
      runtime.store().upsert_contact(contact);
      send_json(res, 201, json(contact));
    }));
  }
};

Service::Service(Runtime& runtime, ServiceConfig config, Clock clock)
    : impl_(std::make_unique<Impl>(runtime, std::move(config), std::move(clock))) {
  if (!impl_->clock) {
    throw Error(ErrorCode::ConfigError, "service needs a clock");
  }
  impl_->routes();
}

Service::~Service() {
  try {
    stop();
  } catch (...) {
  }
}

int Service::bind() {
  auto& s = impl_->server;
  const auto& host = impl_->config.host;
  const int requested = impl_->config.port;
  const int bound = requested == 0 ? s.bind_to_any_port(host) : (s.bind_to_port(host, requested) ? requested : -1);
  if (bound <= 0) {
    throw Error(ErrorCode::BindFailure, "cannot bind " + host + ":" + std::to_string(requested));
  }
  port_ = bound;
  return bound;
}

void Service::run() { impl_->server.listen_after_bind(); }

int Service::start() {
  const int p = bind();
  thread_ = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
  return p;
}

void Service::stop() {
  if (impl_->stopped) {
    return;
  }
  impl_->stopped = true;
  impl_->server.stop();
  if (thread_.joinable()) {
    thread_.join();
  }
  if (!impl_->config.snapshot.empty() && impl_->runtime.store().persona()) {
    impl_->runtime.save_snapshot(impl_->config.snapshot);
  }
}

}  // namespace twin
