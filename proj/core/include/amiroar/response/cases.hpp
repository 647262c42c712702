#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amiroar/common/time.hpp"

namespace amiroar::response {

enum class CaseStatus { open, in_progress, resolved };
std::string_view to_string(CaseStatus s);

/// Tasks every case starts with.
inline const std::vector<std::string> kCaseTasks = {"contain", "eradicate", "recover", "report"};

struct CaseTask {
  std::string name;
  bool completed = false;
  std::optional<TimePoint> completed_at;
};

struct IncidentCase {
  std::string case_id;
  std::string title;
  TimePoint created_at;
  CaseStatus status = CaseStatus::open;
  std::vector<CaseTask> tasks;
  std::string alert_id;
  std::string signature_id;
  std::string device_class;
  int severity = 0;
  std::string victim_ip;
  std::vector<std::string> offender_ips;
  std::optional<TimePoint> detection_time;
  std::string trace_ref;
  /// Manual work attached by playbook steps: step id -> description.
  std::vector<std::pair<std::string, std::string>> notes;

  bool all_tasks_completed() const;
};

nlohmann::json to_json(const IncidentCase& c);

/// Error carrying the HTTP status a service connector answers with.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& m) : std::runtime_error(m), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};
using CaseError = ServiceError;

/// Cases keyed by id. Every mutation is appended as one JSON line to
/// `<dir>/<case_id>.jsonl` when a directory is given.
class CaseStore {
 public:
  explicit CaseStore(std::filesystem::path dir = {});

  /// Opens a case for the alert, or returns the existing one for the same
  /// alert id. Throws CaseError(400) without case_id or alert_id.
  IncidentCase open_case(IncidentCase proto, TimePoint now, bool* created = nullptr);
  /// Marks tasks completed; the first completion moves the case to
  /// in_progress. Unknown case -> 404, unknown task -> 400.
  IncidentCase complete_tasks(const std::string& case_id, const std::vector<std::string>& tasks, TimePoint now);
  /// Throws CaseError(409) while a task is incomplete.
  IncidentCase resolve(const std::string& case_id, TimePoint now);
  IncidentCase add_note(const std::string& case_id, const std::string& step_id, const std::string& text,
                        TimePoint now);
  IncidentCase set_trace_ref(const std::string& case_id, const std::string& ref);

  std::optional<IncidentCase> get(const std::string& case_id) const;
  std::vector<IncidentCase> cases() const;

 private:
  IncidentCase& find(const std::string& case_id);
  void append(const IncidentCase& c, const std::string& event, TimePoint now, nlohmann::json detail = {});

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, IncidentCase> cases_;
};

}  // namespace amiroar::response
