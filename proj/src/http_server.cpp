#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "mflar/service.hpp"

namespace mflar {

struct HttpServer::Impl {
  Service& service;
  std::string host;
  int port;
  httplib::Server server;
  std::thread thread;

  Impl(Service& s, std::string h, int p) : service(s), host(std::move(h)), port(p) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      Request r{req.method, req.path, req.body, req.get_header_value("Accept")};
      Response out = service.handle(r);
      res.status = out.status;
      res.set_content(out.body, out.content_type);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);
    // Oversized bodies must reach the engine, which answers 400 itself.
    server.set_payload_max_length(service.config().max_body_bytes * 4 + 4096);
    if (!service.config().static_dir.empty())
      server.set_mount_point("/ui", service.config().static_dir.string());
  }

  void bind() {
    if (port == 0) {
      port = server.bind_to_any_port(host);
    } else if (!server.bind_to_port(host, port)) {
      port = -1;
    }
    if (port <= 0) throw std::runtime_error("cannot bind " + host);
  }
};

HttpServer::HttpServer(Service& service, std::string host, int port)
    : impl_(std::make_unique<Impl>(service, std::move(host), port)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
  impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void HttpServer::run() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpServer::port() const { return impl_->port; }

}  // namespace mflar
