#include "amiroar/metrics/mttr.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace amiroar::metrics {

using nlohmann::json;

std::string attack_kind_of(std::string_view signature_id) {
  if (signature_id == ndr::kFdiSignature) return "fdi";
  if (signature_id == ndr::kDdosSignature) return "ddos";
  std::string s(signature_id);
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

MttrRecord compute_mttr(const engine::ExecutionTrace& trace, const std::string& scenario) {
  if (trace.status != engine::TraceStatus::succeeded)
    throw std::invalid_argument("trace for " + trace.alert_id + " did not succeed");
  auto phase_end = [&](std::string_view phase) {
    std::optional<TimePoint> end;
    for (const auto& r : trace.records)
      if (r.executed() && r.ir_phase() == phase && (!end || r.end_time > *end)) end = r.end_time;
    if (!end) throw std::invalid_argument("trace for " + trace.alert_id + " has no " + std::string(phase) + " step");
    return *end;
  };
  MttrRecord m;
  m.scenario = scenario;
  m.attack_kind = attack_kind_of(trace.signature_id);
  m.alert_id = trace.alert_id;
  m.detection_time = trace.detection_time;
  m.containment_time = phase_end("containment");
  m.eradication_time = phase_end("eradication");
  m.recovery_time = phase_end("recovery");
  if (!(m.detection_time <= m.containment_time && m.containment_time <= m.eradication_time &&
        m.eradication_time <= m.recovery_time))
    throw std::invalid_argument("trace for " + trace.alert_id + " has phases out of order");
  return m;
}

namespace {

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
  return buf;
}

std::string fixed(double v, int digits = 1) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string Reduction::describe() const {
  return attack_kind + ": mean MTTR " + fixed(mean_mttr_s) + " s over " + std::to_string(count) +
         " incident(s), reduction " + percent(reduction) + " against a baseline of " + fixed(baseline_s, 0) + " s (" +
         format_duration(seconds_to_duration(baseline_s)) + ", " + baseline_description + ")";
}

std::vector<Reduction> compare_baseline(const std::vector<MttrRecord>& records, const BaselineModel& baseline) {
  if (records.empty()) throw std::invalid_argument("no MTTR records to compare");
  if (baseline.manual_response_duration <= Duration::zero()) throw std::invalid_argument("baseline must be positive");
  const double base = to_seconds(baseline.manual_response_duration);
  std::map<std::string, std::vector<double>> by_kind;
  for (const auto& r : records) by_kind[r.attack_kind].push_back(r.mttr_s());
  std::vector<Reduction> out;
  for (const auto& [kind, values] : by_kind) {
    Reduction red;
    red.attack_kind = kind;
    red.count = values.size();
    for (double v : values) red.mean_mttr_s += v;
    red.mean_mttr_s /= static_cast<double>(values.size());
    red.baseline_s = base;
    red.baseline_description = baseline.description;
    red.reduction = 1.0 - red.mean_mttr_s / base;
    out.push_back(red);
  }
  return out;
}

bool subject_to_band(const engine::StepRecord& r) {
  if (r.kind != cacao::StepKind::action || !r.executed()) return false;
  const auto cmds = r.outputs.find("commands");
  if (cmds == r.outputs.end() || cmds->empty()) return false;
  for (const auto& c : *cmds) {
    if (c.value("manual", false)) return false;
    if (c.value("connector", "") == "firmware") return false;
  }
  return true;
}

Summary summarize(const std::vector<MttrRecord>& records, const std::vector<engine::ExecutionTrace>& traces,
                  const engine::LatencyModel& band) {
  Summary s;
  for (const auto& r : records) {
    auto& k = s.per_kind[r.attack_kind];
    const double v = r.mttr_s();
    k.min_s = k.count == 0 ? v : std::min(k.min_s, v);
    k.max_s = k.count == 0 ? v : std::max(k.max_s, v);
    k.mean_s += (v - k.mean_s) / static_cast<double>(++k.count);
  }
  for (const auto& t : traces) {
    for (const auto& r : t.records) {
      if (r.kind != cacao::StepKind::action || !r.executed()) continue;
      StepLatency l;
      l.alert_id = t.alert_id;
      l.step_id = r.step_id;
      l.connector = r.outputs.value("connector", "");
      l.seconds = to_seconds(r.duration());
      l.banded = subject_to_band(r);
      l.in_band = r.duration() >= band.min && r.duration() <= band.max;
      if (l.banded) {
        ++s.banded_steps;
        if (l.in_band) ++s.banded_in_band;
      }
      s.steps.push_back(std::move(l));
    }
  }
  return s;
}

json to_json(const MttrRecord& r) {
  return {{"scenario", r.scenario},
          {"attack_kind", r.attack_kind},
          {"alert_id", r.alert_id},
          {"detection_time", format_iso8601(r.detection_time)},
          {"containment_time", format_iso8601(r.containment_time)},
          {"eradication_time", format_iso8601(r.eradication_time)},
          {"recovery_time", format_iso8601(r.recovery_time)},
          {"mttr_s", r.mttr_s()}};
}

json to_json(const Reduction& r) {
  return {{"attack_kind", r.attack_kind},
          {"count", r.count},
          {"mean_mttr_s", r.mean_mttr_s},
          {"baseline_s", r.baseline_s},
          {"baseline_description", r.baseline_description},
          {"reduction", r.reduction},
          {"statement", r.describe()}};
}

json to_json(const Summary& s) {
  json kinds = json::object();
  for (const auto& [k, v] : s.per_kind)
    kinds[k] = {{"count", v.count}, {"mean_s", v.mean_s}, {"min_s", v.min_s}, {"max_s", v.max_s}};
  json steps = json::array();
  for (const auto& l : s.steps)
    steps.push_back({{"alert_id", l.alert_id},
                     {"step_id", l.step_id},
                     {"connector", l.connector},
                     {"seconds", l.seconds},
                     {"band_checked", l.banded},
                     {"in_band", l.in_band}});
  return {{"per_kind", kinds},
          {"steps", steps},
          {"band_checked_steps", s.banded_steps},
          {"band_checked_in_band", s.banded_in_band},
          {"all_in_band", s.all_in_band()}};
}

std::string render_table(const std::vector<MttrRecord>& records, const Summary& s,
                         const std::vector<Reduction>& reductions) {
  std::ostringstream o;
  if (records.empty()) {
    o << "no incidents\n";
    return o.str();
  }
  o << "incident                                   kind   mttr_s   contain_s  eradicate_s  recover_s\n";
  for (const auto& r : records) {
    char line[256];
    std::snprintf(line, sizeof line, "%-42s %-6s %8.1f %10.1f %12.1f %10.1f\n", r.alert_id.c_str(),
                  r.attack_kind.c_str(), r.mttr_s(), to_seconds(r.containment_time - r.detection_time),
                  to_seconds(r.eradication_time - r.detection_time), to_seconds(r.recovery_time - r.detection_time));
    o << line;
  }
  o << "\nper kind:\n";
  for (const auto& [k, v] : s.per_kind)
    o << "  " << k << ": n=" << v.count << " mean=" << fixed(v.mean_s) << " s min=" << fixed(v.min_s)
      << " s max=" << fixed(v.max_s) << " s\n";
  o << "\nstep latency band: " << s.banded_in_band << "/" << s.banded_steps
    << " automated non-firmware steps within band\n";
  for (const auto& l : s.steps)
    if (l.banded && !l.in_band) o << "  out of band: " << l.alert_id << " " << l.step_id << " " << fixed(l.seconds) << " s\n";
  if (!reductions.empty()) {
    o << "\nreduction vs manual baseline:\n";
    for (const auto& r : reductions) o << "  " << r.describe() << "\n";
  }
  return o.str();
}

}  // namespace amiroar::metrics
