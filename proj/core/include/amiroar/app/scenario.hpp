#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "amiroar/engine/engine.hpp"
#include "amiroar/metrics/mttr.hpp"
#include "amiroar/ndr/detector.hpp"
#include "amiroar/response/services.hpp"
#include "amiroar/sdn/switch.hpp"
#include "amiroar/sim/inventory.hpp"

namespace amiroar::app {

/// Url prefixes the playbooks address; each maps to one mock service.
struct ConnectorEndpoints {
  std::string sdn = "https://sdn-switch.com:10443";
  std::string cases = "https://thehive.local/api";
  std::string chat = "https://chat.local/hooks";
  std::string headend = "https://headend.local/api";
  std::string firmware = "https://fwrepo.local/api";
  std::string reports = "https://reports.local/api";
  std::string ndr = "https://ndr.local/api";
  /// Chat channel -> recipient.
  std::map<std::string, std::string> channels{{"ir-team", "ir-oncall"}};
};

struct ScenarioConfig {
  std::string name;
  sim::SimConfig sim;
  double clock_scale = 0.0;
  /// Clean traffic simulated before `sim.start` to train the detectors.
  Duration training{std::chrono::hours{24}};
  ndr::DetectorConfig detector;
  /// Signature id -> playbook file.
  std::map<std::string, std::filesystem::path> playbooks;
  ConnectorEndpoints connectors;
  sdn::SdnConfig sdn;
  response::FirmwareDurations firmware;
  engine::LatencyModel latency;
  metrics::BaselineModel baseline;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relative playbook paths resolve against `base_dir`. Throws ConfigError
/// when the seed is missing, a playbook file does not exist, or a value is
/// out of range.
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace amiroar::app
