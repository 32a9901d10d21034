#pragma once

#include <memory>
#include <string>

#include "abkit/error.hpp"
#include "abkit/service/store.hpp"

namespace httplib {
class Server;
}

namespace abkit::service {

// HTTP front for AnnotationService:
//   GET  /hit/{id}/page/{n}         task payload
//   POST /hit/{id}/events           {"events": [...]} -> {"accepted", "hwm"}
//   POST /hit/{id}/page/{n}/submit  {"t", "worker_id"} -> {"records": [...]}
//   GET  /hit/{id}/code             {"code"}
// Errors come back as {"error": <code>, "message": ...} with a 4xx status.
class HttpServer {
 public:
  explicit HttpServer(AnnotationService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port, or -1 on failure. port 0 picks a free port.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen_after_bind();
  void stop();
  bool is_running() const;
  void wait_until_ready() const;

 private:
  AnnotationService& service_;
  std::unique_ptr<httplib::Server> server_;
};

int http_status(ErrorCode code);

}  // namespace abkit::service
