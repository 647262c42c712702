#include "amiroar/app/service.hpp"

#include <mutex>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace amiroar::app {

struct SdnHttpService::Impl {
  sdn::SdnSwitch& sw;
  httplib::Server server;
  mutable std::mutex mu;
  std::vector<ndr::Alert> alerts;

  explicit Impl(sdn::SdnSwitch& s) : sw(s) {}
};

namespace {

HttpRequest to_request(const httplib::Request& r) {
  HttpRequest out;
  out.method = r.method;
  out.url = r.path;
  for (const auto& [k, v] : r.headers) out.headers[k] = v;
  out.body = r.body;
  return out;
}

void answer(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

SdnHttpService::SdnHttpService(sdn::SdnSwitch& sw) : impl_(std::make_unique<Impl>(sw)) {
  auto& s = impl_->server;
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    answer(res, impl_->sw.handle(to_request(req)));
  };
  s.Get("/topology", forward);
  for (const char* p : {"/stats/flowentry/add", "/stats/ratelimit/add", "/vlan/create", "/host/isolate",
                        "/host/verify", "/host/restore"})
    s.Post(p, forward);
  s.Post("/alerts", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json ids = nlohmann::json::array();
    std::istringstream in(req.body);
    std::string line;
    try {
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto a = ndr::parse_cef(line);
        ids.push_back(a.alert_id);
        std::lock_guard lock(impl_->mu);
        impl_->alerts.push_back(std::move(a));
      }
    } catch (const std::invalid_argument& e) {
      answer(res, error_response(400, e.what()));
      return;
    }
    answer(res, json_response(202, nlohmann::json{{"accepted", ids}}.dump()));
  });
}

SdnHttpService::~SdnHttpService() { stop(); }

int SdnHttpService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void SdnHttpService::start() {
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void SdnHttpService::listen() { impl_->server.listen_after_bind(); }

void SdnHttpService::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::vector<ndr::Alert> SdnHttpService::received_alerts() const {
  std::lock_guard lock(impl_->mu);
  return impl_->alerts;
}

}  // namespace amiroar::app
