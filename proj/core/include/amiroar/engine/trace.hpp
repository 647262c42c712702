#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amiroar/cacao/playbook.hpp"
#include "amiroar/common/time.hpp"

namespace amiroar::engine {

enum class StepStatus { succeeded, failed, skipped };
enum class TraceStatus { running, succeeded, failed };

std::string_view to_string(StepStatus s);
std::string_view to_string(TraceStatus s);

struct StepRecord {
  std::uint64_t seq = 0;
  std::string step_id;
  std::string name;
  cacao::StepKind kind = cacao::StepKind::action;
  TimePoint start_time;
  TimePoint end_time;
  StepStatus status = StepStatus::succeeded;
  /// Connector responses, `ir_phase` (from the step's `x-ir-phase`), errors.
  nlohmann::json outputs = nlohmann::json::object();

  Duration duration() const { return end_time - start_time; }
  std::string ir_phase() const;
  bool executed() const { return status != StepStatus::skipped; }
  bool operator==(const StepRecord&) const = default;
};

struct ExecutionTrace {
  std::string playbook_id;
  std::string alert_id;
  std::string signature_id;
  std::string device_class;
  TimePoint detection_time;
  TraceStatus status = TraceStatus::running;
  TimePoint started;
  TimePoint finished;
  std::string error;
  /// In the order steps started.
  std::vector<StepRecord> records;

  Duration total_duration() const { return finished - started; }
  const StepRecord* find(std::string_view step_id) const;
  std::vector<const StepRecord*> find_all(std::string_view step_id) const;
  bool operator==(const ExecutionTrace&) const = default;
};

nlohmann::json to_json(const ExecutionTrace& t);
/// Throws std::invalid_argument on malformed input.
ExecutionTrace trace_from_json(const nlohmann::json& j);

}  // namespace amiroar::engine
