#include "amiroar/app/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <memory>

#include "amiroar/ndr/ndr.hpp"

namespace amiroar::app {

namespace fs = std::filesystem;
using nlohmann::json;

bool RunResult::ok() const {
  if (!errors.empty()) return false;
  for (const auto& t : traces)
    if (t.status != engine::TraceStatus::succeeded) return false;
  return true;
}

namespace {

void clear_artifacts(const fs::path& out) {
  for (const char* f : {artifacts::kCapture, artifacts::kProtocolLog, artifacts::kAlerts, artifacts::kModel,
                        artifacts::kNotifications, artifacts::kTopology, artifacts::kMetrics, artifacts::kSummary})
    fs::remove(out / f);
  for (const char* d : {artifacts::kTraces, artifacts::kCases, artifacts::kReports}) fs::remove_all(out / d);
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream o(p);
  if (!o) throw std::runtime_error("cannot write " + p.string());
  o << j.dump(2) << '\n';
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const fs::path& out) {
  const auto wall_start = std::chrono::steady_clock::now();
  RunResult res;
  const bool persist = !out.empty();
  if (persist) {
    fs::create_directories(out);
    clear_artifacts(out);
    fs::create_directories(out / artifacts::kTraces);
  }
  auto path = [&](const char* name) { return persist ? out / name : fs::path(); };

  const ndr::NdrModel model = ndr::train(cfg.sim, cfg.detector, cfg.training);
  if (persist) write_json(out / artifacts::kModel, ndr::to_json(model));

  engine::PlaybookRouter router;
  for (const auto& [sig, file] : cfg.playbooks)
    router.add(sig, std::make_shared<const cacao::Playbook>(cacao::load_playbook(file)));

  sim::VirtualClock clock(cfg.sim.start, cfg.clock_scale);
  sdn::SdnSwitch sw(cfg.sdn, [&clock] { return clock.now(); });
  sim::Simulator simulator(cfg.sim, clock, &sw);

  std::ofstream capture, protocol_log, cef;
  if (persist) {
    capture.open(out / artifacts::kCapture);
    protocol_log.open(out / artifacts::kProtocolLog);
    cef.open(out / artifacts::kAlerts);
  }
  ndr::Ndr ndr(model, &clock, persist ? &protocol_log : nullptr, persist ? &cef : nullptr);

  // Sandbox testing: a meter is clean when its firmware is untampered and a
  // harness poll matches its cluster profile; the primary Headend when its
  // configuration has been reset.
  sw.set_verifier([&](const std::string& ip) {
    if (ip == cfg.sim.headend.ip.to_string()) return !simulator.primary_compromised();
    const sim::SmartMeter* m = simulator.meter_by_ip(ip);
    if (!m || simulator.firmware_tampered(*m)) return false;
    std::vector<sim::Measurement> readings;
    try {
      readings = simulator.sandbox_poll(ip);
    } catch (const std::logic_error&) {
      return false;
    }
    const ndr::MeterInfo* info = model.inventory.by_id(m->meter_id);
    const ndr::ClusterProfile* profile = info ? ndr.fdi().profile_for(*info, clock.now()) : nullptr;
    for (const auto& r : readings)
      if (r.quantity == sim::Quantity::apparent_power && profile && ndr.fdi().deviant(*profile, r.value)) return false;
    return true;
  });

  response::CaseStore cases(path(artifacts::kCases));
  response::NotificationHub hub(cfg.connectors.channels, path(artifacts::kNotifications));
  response::ReportWriter writer(persist ? out / artifacts::kReports : fs::path());
  std::map<std::string, ndr::Alert> alerts_by_id;

  auto record_report = [&](const response::IncidentReport& r) {
    res.reports[r.case_id].push_back(r);
    if (persist) writer.write(r);
  };

  engine::ConnectorRegistry registry;
  auto case_conn = std::make_shared<response::CaseConnector>(cases, [&](const std::string& id) -> const ndr::Alert* {
    auto it = alerts_by_id.find(id);
    return it == alerts_by_id.end() ? nullptr : &it->second;
  });
  auto firmware = std::make_shared<response::FirmwareConnector>(simulator, cfg.firmware);
  registry.add(cfg.connectors.sdn, response::make_sdn_connector(sw));
  registry.add(cfg.connectors.cases, case_conn);
  registry.add("manual:", case_conn);
  registry.add(cfg.connectors.chat, std::make_shared<response::NotificationConnector>(
                                        hub, cases, [](const std::string& case_id, const std::string& alert_id) {
                                          std::vector<std::string> p{std::string(artifacts::kAlerts),
                                                                     std::string(artifacts::kProtocolLog),
                                                                     std::string(artifacts::kCases) + "/" + case_id + ".jsonl"};
                                          if (!alert_id.empty())
                                            p.push_back(std::string(artifacts::kTraces) + "/" + alert_id + ".json");
                                          return p;
                                        }));
  registry.add(cfg.connectors.headend, std::make_shared<response::HeadendConnector>(simulator));
  registry.add(cfg.connectors.firmware, firmware);
  registry.add(cfg.connectors.reports, std::make_shared<response::ReportConnector>(cases, record_report));
  registry.add(cfg.connectors.ndr, std::make_shared<response::MitigationCheckConnector>(sw));

  auto on_trace = [&](engine::ExecutionTrace trace) {
    const std::string trace_ref = std::string(artifacts::kTraces) + "/" + trace.alert_id + ".json";
    if (persist) write_json(out / trace_ref, engine::to_json(trace));
    const std::string case_id = "case-" + trace.alert_id;
    if (cases.get(case_id)) {
      auto c = cases.set_trace_ref(case_id, trace_ref);
      try {
        record_report(response::generate_report(response::ReportPhase::final_report, c, &trace, clock.now()));
        auto doc = response::consolidated_report(c, res.reports[case_id], clock.now());
        if (persist) writer.write_consolidated(case_id, doc);
        res.consolidated.push_back(case_id);
      } catch (const std::exception& e) {
        res.errors.push_back("reports for " + case_id + ": " + e.what());
      }
    }
    if (trace.status != engine::TraceStatus::succeeded)
      res.errors.push_back("playbook " + trace.playbook_id + " failed for " + trace.alert_id + ": " + trace.error);
    res.traces.push_back(std::move(trace));
  };

  ndr.on_alert([&](const ndr::Alert& a) {
    alerts_by_id[a.alert_id] = a;
    try {
      auto pb = router.select(a.signature_id);
      auto ctx = engine::context_for_alert(a, *pb, clock, registry, cfg.latency, cfg.sim.seed);
      ctx.bindings["__clean_firmware__"] = {"__clean_firmware__", cacao::VariableType::string, cfg.sim.clean_firmware,
                                            false, "", json::object()};
      engine::launch(pb, std::move(ctx), on_trace);
    } catch (const std::exception& e) {
      res.errors.push_back("alert " + a.alert_id + ": " + e.what());
    }
  });

  simulator.add_tap([&](const sim::DlmsMessage& m) {
    if (persist) capture << sim::to_line(m) << '\n';
    ndr.feed(m);
  });
  simulator.start();
  clock.run();
  ndr.flush();
  clock.run();  // playbooks triggered by the flush

  res.alerts = ndr.alerts();
  res.cases = cases.cases();
  res.notifications = hub.sent();
  res.firmware_jobs = firmware->jobs();
  res.flows = sw.flow_table();
  res.rate_limits = sw.rate_limits();
  res.isolations = sw.isolation_log();
  res.sim = simulator.summary();
  for (const auto& t : res.traces) {
    if (t.status != engine::TraceStatus::succeeded) continue;
    try {
      res.mttr.push_back(metrics::compute_mttr(t, cfg.name));
    } catch (const std::invalid_argument& e) {
      res.errors.push_back(e.what());
    }
  }
  res.metrics = metrics::summarize(res.mttr, res.traces, cfg.latency);
  if (!res.mttr.empty()) res.reductions = metrics::compare_baseline(res.mttr, cfg.baseline);
  if (res.sim.cross_segment_deliveries != 0)
    res.errors.push_back(std::to_string(res.sim.cross_segment_deliveries) + " cross-segment deliveries");

  if (persist) {
    capture.close();
    protocol_log.close();
    cef.close();
    write_json(out / artifacts::kTopology, sw.topology_json());
    MetricsReport m{res.mttr, res.metrics, res.reductions, {}};
    write_json(out / artifacts::kMetrics, to_json(m, cfg.baseline));
    json s;
    s["scenario"] = cfg.name;
    s["seed"] = cfg.sim.seed;
    s["alerts"] = json::array();
    for (const auto& a : res.alerts)
      s["alerts"].push_back({{"alert_id", a.alert_id}, {"signature_id", a.signature_id},
                             {"device_class", ndr::to_string(a.device_class)},
                             {"detection_time", format_iso8601(a.detection_time)}});
    s["traces"] = json::array();
    for (const auto& t : res.traces)
      s["traces"].push_back({{"alert_id", t.alert_id}, {"playbook_id", t.playbook_id},
                             {"status", engine::to_string(t.status)}});
    s["cases"] = json::array();
    for (const auto& c : res.cases) s["cases"].push_back(response::to_json(c));
    s["firmware_jobs"] = json::array();
    for (const auto& j : res.firmware_jobs) {
      json phases = json::array();
      for (const auto& [p, t] : j.completed) phases.push_back({{"phase", response::to_string(p)}, {"end", format_iso8601(t)}});
      s["firmware_jobs"].push_back({{"meter_id", j.meter_id}, {"target_version", j.target_version},
                                    {"started", format_iso8601(j.started)}, {"phases", phases}});
    }
    s["flow_entries"] = res.flows.size();
    s["rate_limits"] = res.rate_limits.size();
    s["simulation"] = sim::to_json(res.sim);
    s["detector"] = {{"coverage_gaps", ndr.fdi().coverage_gaps()},
                     {"deviant_readings", ndr.fdi().deviant_readings()},
                     {"records", ndr.records()},
                     {"model_warnings", model.warnings}};
    s["errors"] = res.errors;
    s["ok"] = res.ok();
    write_json(out / artifacts::kSummary, s);
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return res;
}

MetricsReport metrics_from_dir(const fs::path& dir, const metrics::BaselineModel& baseline,
                               const engine::LatencyModel& band) {
  if (baseline.manual_response_duration <= Duration::zero()) throw std::invalid_argument("baseline must be positive");
  MetricsReport m;
  std::vector<engine::ExecutionTrace> traces;
  const auto tdir = dir / artifacts::kTraces;
  std::vector<fs::path> files;
  if (fs::is_directory(tdir))
    for (const auto& e : fs::directory_iterator(tdir))
      if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string scenario = dir.filename().string();
  if (std::ifstream sf(dir / artifacts::kSummary); sf) {
    auto s = json::parse(sf, nullptr, false);
    if (s.is_object()) scenario = s.value("scenario", scenario);
  }
  for (const auto& f : files) {
    std::ifstream in(f);
    auto j = json::parse(in, nullptr, false);
    try {
      if (j.is_discarded()) throw std::invalid_argument("not JSON");
      traces.push_back(engine::trace_from_json(j));
      m.records.push_back(metrics::compute_mttr(traces.back(), scenario));
    } catch (const std::invalid_argument& e) {
      m.errors.push_back(f.filename().string() + ": " + e.what());
    }
  }
  m.summary = metrics::summarize(m.records, traces, band);
  if (!m.records.empty()) m.reductions = metrics::compare_baseline(m.records, baseline);
  return m;
}

json to_json(const MetricsReport& m, const metrics::BaselineModel& baseline) {
  json records = json::array();
  for (const auto& r : m.records) records.push_back(metrics::to_json(r));
  json reductions = json::array();
  for (const auto& r : m.reductions) reductions.push_back(metrics::to_json(r));
  return {{"baseline", {{"manual_response_s", to_seconds(baseline.manual_response_duration)},
                        {"description", baseline.description}}},
          {"records", records},
          {"summary", metrics::to_json(m.summary)},
          {"reductions", reductions},
          {"errors", m.errors}};
}

}  // namespace amiroar::app
