#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "amiroar/common/http.hpp"
#include "amiroar/sim/virtual_clock.hpp"

namespace amiroar::engine {

/// A service the playbook talks to. Calls may overlap in virtual time; a
/// connector answers by invoking `done` exactly once, either right away or
/// from a clock event.
class Connector {
 public:
  using Done = std::function<void(HttpResponse)>;

  virtual ~Connector() = default;
  virtual std::string name() const = 0;
  virtual void call(const HttpRequest& request, sim::VirtualClock& clock, Done done) = 0;
  /// Whether the engine should add its simulated per-command processing
  /// latency. Connectors that model their own durations return false.
  virtual bool simulated_latency() const { return true; }
};

/// Wraps a synchronous handler.
class FunctionConnector : public Connector {
 public:
  using Handler = std::function<HttpResponse(const HttpRequest&)>;

  FunctionConnector(std::string name, Handler handler)
      : name_(std::move(name)), handler_(std::move(handler)) {}

  std::string name() const override { return name_; }
  void call(const HttpRequest& request, sim::VirtualClock&, Done done) override {
    done(handler_(request));
  }

 private:
  std::string name_;
  Handler handler_;
};

class ConnectorRegistry {
 public:
  void add(std::string prefix, std::shared_ptr<Connector> connector);
  /// Connector owning the longest registered prefix of `url`, or null.
  Connector* resolve(std::string_view url) const;
  std::vector<std::string> prefixes() const;

 private:
  std::vector<std::pair<std::string, std::shared_ptr<Connector>>> entries_;
};

}  // namespace amiroar::engine
