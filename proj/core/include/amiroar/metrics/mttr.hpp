#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amiroar/engine/engine.hpp"
#include "amiroar/engine/trace.hpp"

namespace amiroar::metrics {

struct MttrRecord {
  std::string scenario;
  std::string attack_kind;  ///< fdi | ddos
  std::string alert_id;
  TimePoint detection_time;
  TimePoint containment_time;
  TimePoint eradication_time;
  TimePoint recovery_time;

  double mttr_s() const { return to_seconds(recovery_time - detection_time); }
};

/// Attack kind from a signature id: fdi, ddos, or the lower-cased id.
std::string attack_kind_of(std::string_view signature_id);

/// Phase times are the latest end among executed steps tagged with that
/// incident-response phase. Throws std::invalid_argument for an unsuccessful
/// trace, a missing phase, or phases out of order.
MttrRecord compute_mttr(const engine::ExecutionTrace& trace, const std::string& scenario = {});

struct BaselineModel {
  Duration manual_response_duration{std::chrono::hours{2}};
  std::string description = "assumed manual response duration";
};

struct Reduction {
  std::string attack_kind;
  std::size_t count = 0;
  double mean_mttr_s = 0.0;
  double baseline_s = 0.0;
  std::string baseline_description;
  /// 1 - mean / baseline.
  double reduction = 0.0;

  /// Always names the baseline the figure depends on.
  std::string describe() const;
};

/// One entry per attack kind present. Throws std::invalid_argument on empty
/// input or a non-positive baseline.
std::vector<Reduction> compare_baseline(const std::vector<MttrRecord>& records, const BaselineModel& baseline);

struct StepLatency {
  std::string alert_id;
  std::string step_id;
  std::string connector;
  double seconds = 0.0;
  bool banded = false;  ///< subject to the latency band check
  bool in_band = false;
};

struct KindStats {
  std::size_t count = 0;
  double mean_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
};

struct Summary {
  std::map<std::string, KindStats> per_kind;
  std::vector<StepLatency> steps;
  std::size_t banded_steps = 0;
  std::size_t banded_in_band = 0;

  bool all_in_band() const { return banded_in_band == banded_steps; }
};

/// True for steps whose duration is governed by the simulated command
/// latency: executed action steps with automated, non-firmware commands.
bool subject_to_band(const engine::StepRecord& r);

Summary summarize(const std::vector<MttrRecord>& records, const std::vector<engine::ExecutionTrace>& traces,
                  const engine::LatencyModel& band = {});

nlohmann::json to_json(const MttrRecord& r);
nlohmann::json to_json(const Reduction& r);
nlohmann::json to_json(const Summary& s);
std::string render_table(const std::vector<MttrRecord>& records, const Summary& s,
                         const std::vector<Reduction>& reductions);

}  // namespace amiroar::metrics
