#pragma once
// HTTP endpoints over ModerationService:
//   POST /v1/classify             {text, id?, channel?}
//   GET  /v1/review/next
//   POST /v1/review/{id}          {label, moderator?}
//   GET  /v1/stats
//   GET  /v1/active-learning?n=   (default 10)
//   POST /admin/rules/reload
// plus GET /healthz and, when a static directory is configured, the console
// files at /.

#include <memory>
#include <string>

#include "toxcascade/service/moderation_service.hpp"

namespace toxcascade::service {

class HttpServer {
 public:
  explicit HttpServer(ModerationService& service, std::string static_dir = {});
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Blocks until stop(). Returns false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it (or -1); serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool running() const;
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace toxcascade::service
