#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amiroar/engine/trace.hpp"
#include "amiroar/response/cases.hpp"

namespace amiroar::response {

enum class ReportPhase { early_warning, notification, final_report };
std::string_view to_string(ReportPhase p);
std::optional<ReportPhase> report_phase_from_string(std::string_view s);

/// 24 h, 72 h, or one calendar month after detection.
TimePoint report_deadline(ReportPhase p, TimePoint detection_time);

struct IncidentReport {
  ReportPhase phase = ReportPhase::early_warning;
  std::string case_id;
  TimePoint detection_time;
  TimePoint generated_at;
  TimePoint deadline;
  nlohmann::json summary;
  int severity = 0;
  std::string impact;
  std::vector<std::string> iocs;
  /// Case tasks before the trace exists, the full step timeline after.
  nlohmann::json mitigation_actions = nlohmann::json::array();

  Duration deadline_margin() const { return deadline - generated_at; }
};

/// Throws std::invalid_argument when the case has no detection time, or for
/// the final phase when `trace` is missing or still running.
IncidentReport generate_report(ReportPhase phase, const IncidentCase& c, const engine::ExecutionTrace* trace,
                               TimePoint now);

nlohmann::json to_json(const IncidentReport& r);
std::string render_text(const IncidentReport& r);

/// One document carrying all phases, for a single timely dissemination. The
/// phase reports are still written on their own.
nlohmann::json consolidated_report(const IncidentCase& c, const std::vector<IncidentReport>& phases,
                                   TimePoint now);
std::string render_consolidated_text(const nlohmann::json& consolidated);

/// Writes `<dir>/<case_id>/<phase>.json` and `.txt`.
class ReportWriter {
 public:
  explicit ReportWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const IncidentReport& r) const;
  void write_consolidated(const std::string& case_id, const nlohmann::json& doc) const;

 private:
  void put(const std::string& case_id, const std::string& stem, const std::string& json_text,
           const std::string& text) const;

  std::filesystem::path dir_;
};

}  // namespace amiroar::response
