#pragma once

// Local HTTP server on an ephemeral port for exercising the network clients.

#include <string>
#include <thread>

#include "httplib.h"

namespace fixtures {

class MockServer {
 public:
  MockServer() = default;
  ~MockServer() { stop(); }
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  httplib::Server& http() { return server_; }

  // Binds and starts serving; returns the base URL.
  std::string start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace fixtures
