#include "amiroar/app/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "amiroar/app/pipeline.hpp"
#include "amiroar/app/service.hpp"
#include "amiroar/cacao/playbook.hpp"
#include "amiroar/ndr/ndr.hpp"

namespace amiroar::app {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve_out_dir(const std::optional<std::string>& flag, const fs::path& fallback) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  return fallback;
}

int cmd_validate(const fs::path& playbook, std::ostream& out, std::ostream& err) {
  if (!fs::is_regular_file(playbook)) {
    err << "error: cannot read " << playbook.string() << "\n";
    return 2;
  }
  std::ifstream in(playbook, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) {
    err << "error: cannot read " << playbook.string() << "\n";
    return 2;
  }
  auto report = cacao::validate_document(text);
  out << playbook.string() << ": " << (report.valid ? "valid" : "invalid") << "\n";
  if (!report.findings.empty()) out << report.render();
  return report.valid ? 0 : 1;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(o.scenario);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.clock_scale) {
    if (*o.clock_scale < 0) {
      err << "error: --clock-scale must not be negative\n";
      return 2;
    }
    cfg.clock_scale = *o.clock_scale;
  }
  if (o.baseline_hours) {
    if (*o.baseline_hours <= 0) {
      err << "error: --baseline-hours must be positive\n";
      return 2;
    }
    cfg.baseline.manual_response_duration = seconds_to_duration(*o.baseline_hours * 3600.0);
    cfg.baseline.description = "manual response duration set on the command line";
  }
  RunResult r;
  try {
    r = run_scenario(cfg, o.out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  out << "scenario " << cfg.name << " (seed " << cfg.sim.seed << ") -> " << o.out.string() << "\n"
      << "  messages delivered: " << r.sim.messages_delivered << ", cross-segment: " << r.sim.cross_segment_deliveries
      << "\n  alerts: " << r.alerts.size() << "\n";
  for (const auto& a : r.alerts) out << "    " << ndr::emit_cef(a) << "\n";
  for (const auto& t : r.traces)
    out << "  playbook " << t.playbook_id << " for " << t.alert_id << ": " << engine::to_string(t.status) << "\n";
  out << "\n" << metrics::render_table(r.mttr, r.metrics, r.reductions);
  for (const auto& e : r.errors) err << "error: " << e << "\n";
  out << "wall time: " << r.wall_seconds << " s\n";
  return r.ok() ? 0 : 1;
}

int cmd_replay(const fs::path& capture, const std::optional<fs::path>& model,
               const std::optional<fs::path>& out_dir, std::ostream& out, std::ostream& err) {
  std::ifstream in(capture);
  if (!in) {
    err << "error: cannot read capture " << capture.string() << "\n";
    return 2;
  }
  const fs::path model_path = model ? *model : capture.parent_path() / artifacts::kModel;
  std::ifstream mf(model_path);
  if (!mf) {
    err << "error: cannot read detector model " << model_path.string() << "\n";
    return 2;
  }
  ndr::NdrModel m;
  try {
    auto j = json::parse(mf);
    m = ndr::ndr_model_from_json(j);
  } catch (const std::exception& e) {
    err << "error: " << model_path.string() << ": " << e.what() << "\n";
    return 2;
  }
  std::vector<ndr::Alert> alerts;
  try {
    alerts = ndr::replay_capture(in, m);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  std::ofstream cef;
  if (out_dir) {
    fs::create_directories(*out_dir);
    cef.open(*out_dir / artifacts::kAlerts);
  }
  for (const auto& a : alerts) {
    const auto line = ndr::emit_cef(a);
    out << line << "\n";
    if (cef.is_open()) cef << line << "\n";
  }
  return 0;
}

int cmd_metrics(const fs::path& dir, double baseline_hours, std::ostream& out, std::ostream& err) {
  if (!(baseline_hours > 0)) {
    err << "error: baseline must be positive\n";
    return 2;
  }
  metrics::BaselineModel b;
  b.manual_response_duration = seconds_to_duration(baseline_hours * 3600.0);
  b.description = "assumed manual response duration";
  MetricsReport m;
  try {
    m = metrics_from_dir(dir, b);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  out << metrics::render_table(m.records, m.summary, m.reductions);
  if (m.records.empty()) out << "baseline: " << format_duration(b.manual_response_duration) << " (" << b.description << ")\n";
  for (const auto& e : m.errors) err << "warning: " << e << "\n";
  if (fs::is_directory(dir)) {
    std::ofstream(dir / artifacts::kMetrics) << to_json(m, b).dump(2) << "\n";
  }
  return 0;
}

int cmd_serve(const std::optional<fs::path>& scenario, const std::string& host, int port, std::ostream& out,
              std::ostream& err) {
  sdn::SdnConfig sc;
  std::vector<std::string> hosts;
  if (scenario) {
    try {
      auto cfg = load_scenario(*scenario);
      sc = cfg.sdn;
      for (const auto& m : cfg.sim.meters) hosts.push_back(m.ip.to_string());
      hosts.push_back(cfg.sim.headend.ip.to_string());
      if (cfg.sim.standby_headend) hosts.push_back(cfg.sim.standby_headend->ip.to_string());
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
  }
  sdn::SdnSwitch sw(sc, [] {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
  });
  for (const auto& h : hosts) sw.add_host(h);
  SdnHttpService service(sw);
  int bound = service.bind(host, port);
  if (bound < 0) {
    err << "error: cannot bind " << host << ":" << port << "\n";
    return 2;
  }
  out << "serving switch API on http://" << host << ":" << bound << " (" << hosts.size() << " hosts)" << std::endl;
  service.listen();
  return 0;
}

}  // namespace amiroar::app
