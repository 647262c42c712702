#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "amiroar/app/scenario.hpp"
#include "amiroar/engine/trace.hpp"
#include "amiroar/metrics/mttr.hpp"
#include "amiroar/ndr/alert.hpp"
#include "amiroar/response/cases.hpp"
#include "amiroar/response/reports.hpp"
#include "amiroar/response/services.hpp"
#include "amiroar/sim/simulator.hpp"

namespace amiroar::app {

/// Artifact layout of one run, relative to the output directory.
namespace artifacts {
inline constexpr const char* kCapture = "capture.jsonl";
inline constexpr const char* kProtocolLog = "protocol_log.jsonl";
inline constexpr const char* kAlerts = "alerts.cef";
inline constexpr const char* kModel = "ndr_model.json";
inline constexpr const char* kTraces = "traces";
inline constexpr const char* kCases = "cases";
inline constexpr const char* kNotifications = "notifications.log";
inline constexpr const char* kReports = "reports";
inline constexpr const char* kTopology = "topology.json";
inline constexpr const char* kMetrics = "metrics.json";
inline constexpr const char* kSummary = "summary.json";
}  // namespace artifacts

struct RunResult {
  std::vector<ndr::Alert> alerts;
  std::vector<engine::ExecutionTrace> traces;
  std::vector<response::IncidentCase> cases;
  std::map<std::string, std::vector<response::IncidentReport>> reports;  ///< by case id
  std::vector<std::string> consolidated;  ///< case ids with a consolidated report
  std::vector<response::Notification> notifications;
  std::vector<response::FirmwareJob> firmware_jobs;
  std::vector<sdn::FlowEntry> flows;
  std::vector<sdn::RateLimitEntry> rate_limits;
  std::vector<sdn::IsolationEvent> isolations;
  sim::SimulationSummary sim;
  std::vector<metrics::MttrRecord> mttr;
  metrics::Summary metrics;
  std::vector<metrics::Reduction> reductions;
  std::vector<std::string> errors;
  double wall_seconds = 0.0;

  /// Every triggered playbook succeeded and nothing else went wrong.
  bool ok() const;
};

/// Trains the detectors, runs simulation, detection and response on one
/// virtual clock and writes every artifact under `out` (when non-empty).
/// Artifacts from a previous run in `out` are replaced.
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out);

/// MTTR records and summary recomputed from the traces in an artifact
/// directory. An empty or missing traces directory yields empty results.
struct MetricsReport {
  std::vector<metrics::MttrRecord> records;
  metrics::Summary summary;
  std::vector<metrics::Reduction> reductions;
  std::vector<std::string> errors;
};
MetricsReport metrics_from_dir(const std::filesystem::path& dir, const metrics::BaselineModel& baseline,
                               const engine::LatencyModel& band = {});
nlohmann::json to_json(const MetricsReport& m, const metrics::BaselineModel& baseline);

}  // namespace amiroar::app
