#include "toxcascade/service/http_api.hpp"

#include <charconv>

#include <httplib.h>

namespace toxcascade::service {

namespace {

void reply(httplib::Response& res, const ServiceResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

void bad_json(httplib::Response& res, const std::string& what) {
  reply(res, {400, {{"error", "malformed JSON body: " + what}}});
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(ModerationService& s) : service(s) {}
  ModerationService& service;
  httplib::Server server;
};

HttpServer::HttpServer(ModerationService& service, std::string static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;

  srv.Post("/v1/classify", [&svc](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      return bad_json(res, e.what());
    }
    reply(res, svc.classify(body));
  });

  srv.Get("/v1/review/next", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.next_review()); });

  srv.Post(R"(/v1/review/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      return bad_json(res, e.what());
    }
    reply(res, svc.submit_review(httplib::detail::decode_url(req.matches[1].str(), false), body));
  });

  srv.Get("/v1/stats", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.stats()); });

  srv.Get("/v1/active-learning", [&svc](const httplib::Request& req, httplib::Response& res) {
    std::size_t n = 10;
    if (req.has_param("n")) {
      const auto v = req.get_param_value("n");
      long long parsed = 0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
      if (ec != std::errc{} || ptr != v.data() + v.size() || parsed < 1) {
        return reply(res, {400, {{"error", "n must be a positive integer"}}});
      }
      n = static_cast<std::size_t>(parsed);
    }
    reply(res, svc.active_learning(n));
  });

  srv.Post("/admin/rules/reload", [&svc](const httplib::Request&, httplib::Response& res) {
    reply(res, svc.reload_rules());
  });

  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"ok":true})", "application/json");
  });

  if (!static_dir.empty()) srv.set_mount_point("/", static_dir);

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    reply(res, {500, {{"error", what}}});
  });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace toxcascade::service
