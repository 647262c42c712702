#include "amiroar/response/reports.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amiroar::response {

using nlohmann::json;

std::string_view to_string(ReportPhase p) {
  switch (p) {
    case ReportPhase::early_warning: return "early_warning";
    case ReportPhase::notification: return "notification";
    case ReportPhase::final_report: return "final";
  }
  return "?";
}

std::optional<ReportPhase> report_phase_from_string(std::string_view s) {
  if (s == "early_warning") return ReportPhase::early_warning;
  if (s == "notification") return ReportPhase::notification;
  if (s == "final") return ReportPhase::final_report;
  return std::nullopt;
}

TimePoint report_deadline(ReportPhase p, TimePoint detection_time) {
  switch (p) {
    case ReportPhase::early_warning: return detection_time + std::chrono::hours{24};
    case ReportPhase::notification: return detection_time + std::chrono::hours{72};
    case ReportPhase::final_report: return add_calendar_months(detection_time, 1);
  }
  return detection_time;
}

namespace {

std::string impact_of(const IncidentCase& c) {
  if (c.device_class == "headend")
    return "Headend " + c.victim_ip + " produced falsified measurements; polling moved to the standby Headend";
  if (c.device_class == "both")
    return "Headend " + c.victim_ip + " and meter(s) " + (c.offender_ips.empty() ? "" : c.offender_ips.front()) +
           " manipulated measurements";
  if (c.signature_id.find("DDOS") != std::string::npos)
    return std::to_string(c.offender_ips.size()) + " meter(s) flooded " + c.victim_ip +
           " with DLMS/COSEM traffic; sources rate limited";
  return "meter " + c.victim_ip + " reported falsified measurements and was isolated for reinstallation";
}

}  // namespace

IncidentReport generate_report(ReportPhase phase, const IncidentCase& c, const engine::ExecutionTrace* trace,
                               TimePoint now) {
  if (!c.detection_time) throw std::invalid_argument("case " + c.case_id + " has no detection time");
  if (phase == ReportPhase::final_report && (!trace || trace->status == engine::TraceStatus::running))
    throw std::invalid_argument("final report for " + c.case_id + " needs a completed trace");
  IncidentReport r;
  r.phase = phase;
  r.case_id = c.case_id;
  r.detection_time = *c.detection_time;
  r.generated_at = now;
  r.deadline = report_deadline(phase, r.detection_time);
  r.severity = c.severity;
  r.impact = impact_of(c);
  r.summary = {{"title", c.title},
               {"alert_id", c.alert_id},
               {"signature_id", c.signature_id},
               {"device_class", c.device_class},
               {"victim_ip", c.victim_ip},
               {"case_status", to_string(c.status)}};
  r.iocs = c.offender_ips;
  if (r.iocs.empty() && !c.victim_ip.empty()) r.iocs.push_back(c.victim_ip);
  if (trace) {
    for (const auto& rec : trace->records) {
      json a{{"step_id", rec.step_id},
             {"name", rec.name},
             {"status", engine::to_string(rec.status)},
             {"start", format_iso8601(rec.start_time)},
             {"end", format_iso8601(rec.end_time)}};
      if (auto ph = rec.ir_phase(); !ph.empty()) a["ir_phase"] = ph;
      r.mitigation_actions.push_back(std::move(a));
    }
  } else {
    for (const auto& t : c.tasks)
      r.mitigation_actions.push_back({{"task", t.name}, {"status", t.completed ? "completed" : "pending"}});
  }
  return r;
}

json to_json(const IncidentReport& r) {
  return {{"phase", to_string(r.phase)},
          {"case_id", r.case_id},
          {"detection_time", format_iso8601(r.detection_time)},
          {"generated_at", format_iso8601(r.generated_at)},
          {"deadline", format_iso8601(r.deadline)},
          {"deadline_margin_s", to_seconds(r.deadline_margin())},
          {"summary", r.summary},
          {"severity", r.severity},
          {"impact", r.impact},
          {"indicators_of_compromise", r.iocs},
          {"mitigation_actions", r.mitigation_actions}};
}

std::string render_text(const IncidentReport& r) {
  std::ostringstream o;
  o << "Incident report (" << to_string(r.phase) << ")\n"
    << "case:          " << r.case_id << "\n"
    << "alert:         " << r.summary.value("alert_id", "") << " (" << r.summary.value("signature_id", "") << ")\n"
    << "detected:      " << format_iso8601(r.detection_time) << "\n"
    << "generated:     " << format_iso8601(r.generated_at) << "\n"
    << "deadline:      " << format_iso8601(r.deadline) << " (margin " << format_duration(r.deadline_margin())
    << ")\n"
    << "severity:      " << r.severity << "\n"
    << "impact:        " << r.impact << "\n"
    << "indicators:\n";
  for (const auto& ioc : r.iocs) o << "  - " << ioc << "\n";
  o << "actions:\n";
  for (const auto& a : r.mitigation_actions) {
    if (a.contains("task")) {
      o << "  - " << a["task"].get<std::string>() << ": " << a["status"].get<std::string>() << "\n";
    } else {
      o << "  - " << a["start"].get<std::string>() << " .. " << a["end"].get<std::string>() << "  "
        << a["step_id"].get<std::string>() << " [" << a["status"].get<std::string>() << "]";
      if (a.contains("ir_phase")) o << " " << a["ir_phase"].get<std::string>();
      o << "\n";
    }
  }
  return o.str();
}

json consolidated_report(const IncidentCase& c, const std::vector<IncidentReport>& phases, TimePoint now) {
  json doc{{"case_id", c.case_id},
           {"generated_at", format_iso8601(now)},
           {"case", to_json(c)},
           {"note", "carries every phase report; the phase files are also kept on their own"},
           {"phases", json::array()}};
  for (const auto& r : phases) doc["phases"].push_back(to_json(r));
  return doc;
}

std::string render_consolidated_text(const json& doc) {
  std::ostringstream o;
  o << "Consolidated incident report\ncase: " << doc.value("case_id", "") << "\ngenerated: "
    << doc.value("generated_at", "") << "\n";
  for (const auto& p : doc.at("phases")) {
    o << "\n[" << p.value("phase", "") << "] generated " << p.value("generated_at", "") << ", deadline "
      << p.value("deadline", "") << "\n";
    o << "  impact: " << p.value("impact", "") << "\n  indicators:";
    for (const auto& i : p.at("indicators_of_compromise")) o << " " << i.get<std::string>();
    o << "\n  actions: " << p.at("mitigation_actions").size() << "\n";
  }
  return o.str();
}

void ReportWriter::put(const std::string& case_id, const std::string& stem, const std::string& json_text,
                       const std::string& text) const {
  auto dir = dir_ / case_id;
  std::filesystem::create_directories(dir);
  std::ofstream(dir / (stem + ".json")) << json_text << '\n';
  std::ofstream(dir / (stem + ".txt")) << text;
}

void ReportWriter::write(const IncidentReport& r) const {
  put(r.case_id, std::string(to_string(r.phase)), to_json(r).dump(2), render_text(r));
}

void ReportWriter::write_consolidated(const std::string& case_id, const json& doc) const {
  put(case_id, "consolidated", doc.dump(2), render_consolidated_text(doc));
}

}  // namespace amiroar::response
