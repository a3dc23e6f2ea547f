#pragma once

#include <memory>
#include <thread>

#include "twin/config.hpp"
#include "twin/runtime.hpp"

namespace twin {

// HTTP status for an error code raised while handling a request.
int http_status(ErrorCode code) noexcept;

// JSON HTTP front end over one runtime.
//
//   GET  /health                 {"status":"ok"}
//   POST /chat[?trace=1]         {"contact_id","text"} -> {"reply","trace"?}
//   POST /ingest/dialogue        chat JSON lines -> {"sessions","turns"}
//   POST /ingest/vitals          vitals CSV -> {"added","events","summaries"}
//   GET  /memories?query=&k_profile=&k_stream=
//   GET  /explain?query=
//   GET  /contacts, POST /contacts
//
// Errors are {"error":{"code":<snake_case code>,"message":...}}.
class Service {
 public:
  Service(Runtime& runtime, ServiceConfig config, Clock clock);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the configured address; port 0 picks a free port. Returns the
  // bound port. Throws BindFailure.
  int bind();
  // Serves until stop(). Requires bind().
  void run();
  // bind() and run() on a background thread.
  int start();
  // Stops serving and, when a snapshot path is configured, persists the store.
  void stop();

  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace twin
