#include "amiroar/response/cases.hpp"

#include <algorithm>
#include <fstream>

namespace amiroar::response {

using nlohmann::json;

std::string_view to_string(CaseStatus s) {
  switch (s) {
    case CaseStatus::open: return "open";
    case CaseStatus::in_progress: return "in_progress";
    case CaseStatus::resolved: return "resolved";
  }
  return "?";
}

bool IncidentCase::all_tasks_completed() const {
  return std::all_of(tasks.begin(), tasks.end(), [](const CaseTask& t) { return t.completed; });
}

json to_json(const IncidentCase& c) {
  json tasks = json::array();
  for (const auto& t : c.tasks) {
    json jt{{"name", t.name}, {"status", t.completed ? "completed" : "pending"}};
    if (t.completed_at) jt["completed_at"] = format_iso8601(*t.completed_at);
    tasks.push_back(std::move(jt));
  }
  json notes = json::array();
  for (const auto& [step, text] : c.notes) notes.push_back({{"step_id", step}, {"text", text}});
  json j{{"case_id", c.case_id},
         {"title", c.title},
         {"created_at", format_iso8601(c.created_at)},
         {"status", to_string(c.status)},
         {"tasks", tasks},
         {"alert_id", c.alert_id},
         {"signature_id", c.signature_id},
         {"device_class", c.device_class},
         {"severity", c.severity},
         {"victim_ip", c.victim_ip},
         {"offender_ips", c.offender_ips},
         {"trace_ref", c.trace_ref},
         {"notes", notes}};
  if (c.detection_time) j["detection_time"] = format_iso8601(*c.detection_time);
  return j;
}

CaseStore::CaseStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

IncidentCase& CaseStore::find(const std::string& case_id) {
  auto it = cases_.find(case_id);
  if (it == cases_.end()) throw CaseError(404, "unknown case " + case_id);
  return it->second;
}

void CaseStore::append(const IncidentCase& c, const std::string& event, TimePoint now, json detail) {
  if (dir_.empty()) return;
  json line{{"ts", format_iso8601(now)}, {"event", event}, {"status", to_string(c.status)}};
  if (!detail.is_null()) line["detail"] = std::move(detail);
  std::ofstream out(dir_ / (c.case_id + ".jsonl"), std::ios::app);
  if (!out) throw CaseError(500, "cannot write case file for " + c.case_id);
  out << line.dump() << '\n';
}

IncidentCase CaseStore::open_case(IncidentCase proto, TimePoint now, bool* created) {
  if (proto.case_id.empty()) throw CaseError(400, "case_id is required");
  if (proto.alert_id.empty()) throw CaseError(400, "alert_id is required");
  std::lock_guard lock(mu_);
  for (const auto& [_, c] : cases_) {
    if (c.alert_id == proto.alert_id) {
      if (created) *created = false;
      return c;
    }
  }
  if (cases_.count(proto.case_id)) throw CaseError(409, "case " + proto.case_id + " exists for another alert");
  proto.created_at = now;
  proto.status = CaseStatus::open;
  proto.tasks.clear();
  for (const auto& t : kCaseTasks) proto.tasks.push_back({t, false, std::nullopt});
  auto& c = cases_[proto.case_id] = std::move(proto);
  append(c, "opened", now, to_json(c));
  if (created) *created = true;
  return c;
}

IncidentCase CaseStore::complete_tasks(const std::string& case_id, const std::vector<std::string>& tasks,
                                       TimePoint now) {
  std::lock_guard lock(mu_);
  auto& c = find(case_id);
  for (const auto& name : tasks) {
    auto it = std::find_if(c.tasks.begin(), c.tasks.end(), [&](const CaseTask& t) { return t.name == name; });
    if (it == c.tasks.end()) throw CaseError(400, "case " + case_id + " has no task " + name);
  }
  for (const auto& name : tasks) {
    auto it = std::find_if(c.tasks.begin(), c.tasks.end(), [&](const CaseTask& t) { return t.name == name; });
    if (it->completed) continue;
    it->completed = true;
    it->completed_at = now;
    if (c.status == CaseStatus::open) c.status = CaseStatus::in_progress;
    append(c, "task_completed", now, {{"task", name}});
  }
  return c;
}

IncidentCase CaseStore::resolve(const std::string& case_id, TimePoint now) {
  std::lock_guard lock(mu_);
  auto& c = find(case_id);
  if (c.status == CaseStatus::resolved) return c;
  for (const auto& t : c.tasks)
    if (!t.completed) throw CaseError(409, "case " + case_id + " has incomplete task " + t.name);
  c.status = CaseStatus::resolved;
  append(c, "resolved", now);
  return c;
}

IncidentCase CaseStore::add_note(const std::string& case_id, const std::string& step_id, const std::string& text,
                                 TimePoint now) {
  std::lock_guard lock(mu_);
  auto& c = find(case_id);
  c.notes.emplace_back(step_id, text);
  if (c.status == CaseStatus::open) c.status = CaseStatus::in_progress;
  append(c, "note", now, {{"step_id", step_id}, {"text", text}});
  return c;
}

IncidentCase CaseStore::set_trace_ref(const std::string& case_id, const std::string& ref) {
  std::lock_guard lock(mu_);
  auto& c = find(case_id);
  c.trace_ref = ref;
  return c;
}

std::optional<IncidentCase> CaseStore::get(const std::string& case_id) const {
  std::lock_guard lock(mu_);
  auto it = cases_.find(case_id);
  if (it == cases_.end()) return std::nullopt;
  return it->second;
}

std::vector<IncidentCase> CaseStore::cases() const {
  std::lock_guard lock(mu_);
  std::vector<IncidentCase> out;
  for (const auto& [_, c] : cases_) out.push_back(c);
  return out;
}

}  // namespace amiroar::response
