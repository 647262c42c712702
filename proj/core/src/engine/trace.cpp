#include "amiroar/engine/trace.hpp"

#include <stdexcept>

namespace amiroar::engine {

std::string_view to_string(StepStatus s) {
  switch (s) {
    case StepStatus::succeeded: return "succeeded";
    case StepStatus::failed: return "failed";
    case StepStatus::skipped: return "skipped";
  }
  return "?";
}

std::string_view to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::running: return "running";
    case TraceStatus::succeeded: return "succeeded";
    case TraceStatus::failed: return "failed";
  }
  return "?";
}

std::string StepRecord::ir_phase() const {
  auto it = outputs.find("ir_phase");
  return it != outputs.end() && it->is_string() ? it->get<std::string>() : std::string();
}

const StepRecord* ExecutionTrace::find(std::string_view step_id) const {
  for (const auto& r : records)
    if (r.step_id == step_id) return &r;
  return nullptr;
}

std::vector<const StepRecord*> ExecutionTrace::find_all(std::string_view step_id) const {
  std::vector<const StepRecord*> out;
  for (const auto& r : records)
    if (r.step_id == step_id) out.push_back(&r);
  return out;
}

nlohmann::json to_json(const ExecutionTrace& t) {
  nlohmann::json j;
  j["playbook_id"] = t.playbook_id;
  j["alert_id"] = t.alert_id;
  j["signature_id"] = t.signature_id;
  j["device_class"] = t.device_class;
  j["detection_time"] = format_iso8601(t.detection_time);
  j["status"] = to_string(t.status);
  j["started"] = format_iso8601(t.started);
  j["finished"] = format_iso8601(t.finished);
  j["total_duration_s"] = to_seconds(t.total_duration());
  if (!t.error.empty()) j["error"] = t.error;
  j["records"] = nlohmann::json::array();
  for (const auto& r : t.records) {
    nlohmann::json rj;
    rj["seq"] = r.seq;
    rj["step_id"] = r.step_id;
    if (!r.name.empty()) rj["name"] = r.name;
    rj["kind"] = cacao::to_string(r.kind);
    rj["status"] = to_string(r.status);
    rj["start_time"] = format_iso8601(r.start_time);
    rj["end_time"] = format_iso8601(r.end_time);
    rj["duration_s"] = to_seconds(r.duration());
    rj["outputs"] = r.outputs;
    j["records"].push_back(std::move(rj));
  }
  return j;
}

ExecutionTrace trace_from_json(const nlohmann::json& j) {
  try {
    ExecutionTrace t;
    t.playbook_id = j.at("playbook_id").get<std::string>();
    t.alert_id = j.at("alert_id").get<std::string>();
    t.signature_id = j.value("signature_id", "");
    t.device_class = j.value("device_class", "");
    t.detection_time = parse_iso8601(j.at("detection_time").get<std::string>());
    auto status = j.at("status").get<std::string>();
    if (status == "succeeded")
      t.status = TraceStatus::succeeded;
    else if (status == "failed")
      t.status = TraceStatus::failed;
    else if (status == "running")
      t.status = TraceStatus::running;
    else
      throw std::invalid_argument("unknown trace status " + status);
    t.started = parse_iso8601(j.at("started").get<std::string>());
    t.finished = parse_iso8601(j.at("finished").get<std::string>());
    t.error = j.value("error", "");
    for (const auto& rj : j.at("records")) {
      StepRecord r;
      r.seq = rj.at("seq").get<std::uint64_t>();
      r.step_id = rj.at("step_id").get<std::string>();
      r.name = rj.value("name", "");
      auto kind = cacao::step_kind_from_string(rj.at("kind").get<std::string>());
      if (!kind) throw std::invalid_argument("unknown step kind in trace");
      r.kind = *kind;
      auto st = rj.at("status").get<std::string>();
      r.status = st == "succeeded" ? StepStatus::succeeded
                 : st == "failed"  ? StepStatus::failed
                 : st == "skipped" ? StepStatus::skipped
                                   : throw std::invalid_argument("unknown step status " + st);
      r.start_time = parse_iso8601(rj.at("start_time").get<std::string>());
      r.end_time = parse_iso8601(rj.at("end_time").get<std::string>());
      r.outputs = rj.value("outputs", nlohmann::json::object());
      t.records.push_back(std::move(r));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed trace: ") + e.what());
  }
}

}  // namespace amiroar::engine
