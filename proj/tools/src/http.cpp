#include "avp/errors.hpp"
#include "avp_cli/cli.hpp"
#include "httplib.h"

namespace avp::cli {

struct HttpFrontend::Impl {
  const PredictionService& service;
  httplib::Server server;

  explicit Impl(const PredictionService& s) : service(s) {
    server.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      const ServiceResponse r = service.handle_predict(req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      const ServiceResponse r = service.handle_health();
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
  }
};

HttpFrontend::HttpFrontend(const PredictionService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpFrontend::~HttpFrontend() = default;

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("serve", "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("serve", "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpFrontend::listen() { impl_->server.listen_after_bind(); }

void HttpFrontend::stop() { impl_->server.stop(); }

bool HttpFrontend::running() const { return impl_->server.is_running(); }

}  // namespace avp::cli
