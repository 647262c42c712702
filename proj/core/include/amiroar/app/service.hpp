#pragma once

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "amiroar/ndr/alert.hpp"
#include "amiroar/sdn/switch.hpp"

namespace amiroar::app {

/// Standalone HTTP front end: the switch REST API, plus `POST /alerts`
/// accepting CEF lines from an external detector.
class SdnHttpService {
 public:
  explicit SdnHttpService(sdn::SdnSwitch& sw);
  ~SdnHttpService();
  SdnHttpService(const SdnHttpService&) = delete;
  SdnHttpService& operator=(const SdnHttpService&) = delete;

  /// Binds; port 0 picks a free one. Returns the bound port, -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves on a background thread until stop().
  void start();
  /// Serves on the calling thread until stop().
  void listen();
  void stop();

  std::vector<ndr::Alert> received_alerts() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace amiroar::app
