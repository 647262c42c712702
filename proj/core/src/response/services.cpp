#include "amiroar/response/services.hpp"

#include <nlohmann/json.hpp>

namespace amiroar::response {

using nlohmann::json;

namespace {

json body_of(const HttpRequest& req) {
  if (req.body.empty()) return json::object();
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ServiceError(400, "request body must be a JSON object");
  return j;
}

std::vector<std::string> split_list(const json& v) {
  std::vector<std::string> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(e.get<std::string>());
  } else if (v.is_string()) {
    std::string_view rest = v.get_ref<const std::string&>();
    while (!rest.empty()) {
      auto comma = rest.find(',');
      if (auto item = rest.substr(0, comma); !item.empty()) out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  return out;
}

std::string required(const json& b, const char* key) {
  auto it = b.find(key);
  if (it == b.end() || !it->is_string() || it->get_ref<const std::string&>().empty())
    throw ServiceError(400, std::string("missing field '") + key + "'");
  return it->get<std::string>();
}

/// Runs `fn`, turning service and JSON errors into HTTP answers.
template <typename Fn>
HttpResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ServiceError& e) {
    return error_response(e.status(), e.what());
  } catch (const json::exception& e) {
    return error_response(400, e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

HttpResponse CaseConnector::handle(const HttpRequest& req, TimePoint now) {
  return guarded([&]() -> HttpResponse {
    if (req.url.rfind("manual:", 0) == 0) {
      auto c = req.headers.find("X-Case-Id");
      auto s = req.headers.find("X-Step-Id");
      if (c == req.headers.end()) throw ServiceError(400, "manual task without case id");
      auto updated = store_.add_note(c->second, s == req.headers.end() ? "" : s->second, req.body, now);
      return json_response(200, json{{"case_id", updated.case_id}, {"notes", updated.notes.size()}}.dump());
    }
    const auto path = url_path(req.url);
    if (req.method != "POST") throw ServiceError(405, "use POST");
    auto b = body_of(req);
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, "/case") == 0) {
      IncidentCase proto;
      proto.case_id = required(b, "case_id");
      proto.alert_id = required(b, "alert_id");
      proto.title = b.value("title", "");
      proto.signature_id = b.value("signature_id", "");
      proto.device_class = b.value("device_class", "");
      proto.victim_ip = b.value("victim_ip", "");
      proto.severity = b.value("severity", 0);
      if (b.contains("offender_ips")) proto.offender_ips = split_list(b["offender_ips"]);
      if (auto d = b.find("detection_time"); d != b.end() && d->is_string())
        proto.detection_time = parse_iso8601(d->get<std::string>());
      if (alerts_) {
        const ndr::Alert* a = alerts_(proto.alert_id);
        if (!a) throw ServiceError(400, "unknown alert " + proto.alert_id);
        if (proto.title.empty()) proto.title = a->name;
        proto.signature_id = a->signature_id;
        proto.device_class = std::string(ndr::to_string(a->device_class));
        proto.severity = a->severity;
        proto.victim_ip = a->victim_ip;
        proto.offender_ips = a->offender_ips;
        proto.detection_time = a->detection_time;
      }
      bool created = false;
      auto c = store_.open_case(std::move(proto), now, &created);
      return json_response(created ? 201 : 200, json{{"case_id", c.case_id}, {"created", created},
                                                     {"status", to_string(c.status)}}.dump());
    }
    if (path.size() >= 12 && path.compare(path.size() - 12, 12, "/case/update") == 0) {
      const auto id = required(b, "case_id");
      if (!store_.get(id)) throw ServiceError(404, "unknown case " + id);
      std::vector<std::string> tasks;
      if (b.contains("complete")) tasks = split_list(b["complete"]);
      auto c = store_.complete_tasks(id, tasks, now);
      if (b.value("status", "") == "resolved") c = store_.resolve(id, now);
      return json_response(200, to_json(c).dump());
    }
    throw ServiceError(404, "no such endpoint " + path);
  });
}

void CaseConnector::call(const HttpRequest& req, sim::VirtualClock& clock, Done done) {
  done(handle(req, clock.now()));
}

void NotificationConnector::call(const HttpRequest& req, sim::VirtualClock& clock, Done done) {
  done(guarded([&]() -> HttpResponse {
    const auto path = url_path(req.url);
    const std::string prefix = "/hooks/";
    auto at = path.find(prefix);
    if (at == std::string::npos) throw ServiceError(404, "no such endpoint " + path);
    const auto channel = path.substr(at + prefix.size());
    auto b = body_of(req);
    auto kind_name = b.value("kind", "triggered");
    if (kind_name != "triggered" && kind_name != "resolved") throw ServiceError(400, "unknown kind " + kind_name);
    auto kind = kind_name == "resolved" ? NotificationKind::resolved : NotificationKind::triggered;
    const auto case_id = required(b, "case_id");
    std::string text = b.value("text", "");
    if (auto pb = b.value("playbook_id", ""); !pb.empty()) text = "[" + pb + "] " + text;
    std::vector<std::string> pivots;
    if (kind == NotificationKind::resolved && pivots_) pivots = pivots_(case_id, b.value("alert_id", ""));
    auto n = hub_.notify(kind, channel, case_id, text, std::move(pivots), clock.now(), &cases_);
    return json_response(200, json{{"channel", n.channel}, {"recipient", n.recipient}, {"pivots", n.pivots}}.dump());
  }));
}

void HeadendConnector::call(const HttpRequest& req, sim::VirtualClock&, Done done) {
  done(guarded([&]() -> HttpResponse {
    const auto path = url_path(req.url);
    if (req.method != "POST") throw ServiceError(405, "use POST");
    auto ends = [&](std::string_view s) {
      return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
    };
    try {
      if (ends("/standby/activate")) {
        auto ip = sim_.activate_standby();
        return json_response(200, json{{"active_headend", ip}}.dump());
      }
      if (ends("/primary/reset")) {
        sim_.reset_primary();
        return json_response(200, json{{"primary_compromised", sim_.primary_compromised()}}.dump());
      }
      if (ends("/polling/resume")) {
        return json_response(200, json{{"active_headend", sim_.active_headend_ip()}, {"polling", true}}.dump());
      }
    } catch (const std::runtime_error& e) {
      throw ServiceError(409, e.what());
    }
    throw ServiceError(404, "no such endpoint " + path);
  }));
}

std::string_view to_string(FirmwarePhase p) {
  switch (p) {
    case FirmwarePhase::fetch: return "fetch";
    case FirmwarePhase::install: return "install";
    case FirmwarePhase::reboot: return "reboot";
    case FirmwarePhase::done: return "done";
  }
  return "?";
}

void FirmwareConnector::call(const HttpRequest& req, sim::VirtualClock& clock, Done done) {
  std::size_t job = 0;
  auto resp = guarded([&]() -> HttpResponse {
    const auto path = url_path(req.url);
    if (path.size() < 10 || path.compare(path.size() - 10, 10, "/reinstall") != 0)
      throw ServiceError(404, "no such endpoint " + path);
    auto b = body_of(req);
    const auto ip = required(b, "meter_ip");
    const auto* m = sim_.meter_by_ip(ip);
    if (!m) throw ServiceError(404, "unknown meter " + ip);
    if (m->state != sim::MeterState::sandboxed)
      throw ServiceError(409, "meter " + m->meter_id + " is " + std::string(sim::to_string(m->state)) +
                                  "; contain it before reinstalling");
    auto version = b.value("target_version", sim_.config().clean_firmware);
    sim_.set_meter_state(m->meter_id, sim::MeterState::reinstalling);
    jobs_.push_back({m->meter_id, version, FirmwarePhase::fetch, clock.now(), {}});
    job = jobs_.size() - 1;
    return HttpResponse{202, ""};
  });
  if (resp.status != 202) {
    done(resp);
    return;
  }
  // fetch -> install -> reboot, one clock event per phase boundary.
  auto step = std::make_shared<std::function<void()>>();
  *step = [this, job, &clock, done, step]() {
    auto& j = jobs_[job];
    j.completed.emplace_back(j.phase, clock.now());
    if (j.phase == FirmwarePhase::reboot) {
      j.phase = FirmwarePhase::done;
      sim_.set_firmware(j.meter_id, j.target_version);
      sim_.set_meter_state(j.meter_id, sim::MeterState::operational);
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(clock.now() - j.started).count();
      done(json_response(200, json{{"meter_id", j.meter_id},
                                   {"firmware_version", j.target_version},
                                   {"duration_ms", ms}}.dump()));
      *step = nullptr;  // break the self-reference
      return;
    }
    j.phase = j.phase == FirmwarePhase::fetch ? FirmwarePhase::install : FirmwarePhase::reboot;
    clock.schedule_after(j.phase == FirmwarePhase::install ? d_.install : d_.reboot, *step);
  };
  clock.schedule_after(d_.fetch, *step);
}

void ReportConnector::call(const HttpRequest& req, sim::VirtualClock& clock, Done done) {
  done(guarded([&]() -> HttpResponse {
    const auto path = url_path(req.url);
    if (path.size() < 7 || path.compare(path.size() - 7, 7, "/export") != 0)
      throw ServiceError(404, "no such endpoint " + path);
    auto b = body_of(req);
    const auto id = required(b, "case_id");
    auto c = cases_.get(id);
    if (!c) throw ServiceError(404, "unknown case " + id);
    json phases = json::array();
    try {
      for (auto p : {ReportPhase::early_warning, ReportPhase::notification}) {
        auto r = generate_report(p, *c, nullptr, clock.now());
        if (sink_) sink_(r);
        phases.push_back(to_string(p));
      }
    } catch (const std::invalid_argument& e) {
      throw ServiceError(409, e.what());
    }
    return json_response(200, json{{"case_id", id}, {"phases", phases}}.dump());
  }));
}

void MitigationCheckConnector::call(const HttpRequest& req, sim::VirtualClock&, Done done) {
  done(guarded([&]() -> HttpResponse {
    auto b = body_of(req);
    if (!b.contains("offenders")) throw ServiceError(400, "missing field 'offenders'");
    auto offenders = split_list(b["offenders"]);
    if (offenders.empty()) throw ServiceError(400, "offenders is empty");
    json missing = json::array();
    for (const auto& o : offenders)
      if (!sw_.has_rate_limit(o)) missing.push_back(o);
    return json_response(missing.empty() ? 200 : 409,
                         json{{"checked", offenders.size()}, {"unmitigated", missing}}.dump());
  }));
}

std::shared_ptr<engine::Connector> make_sdn_connector(sdn::SdnSwitch& sw) {
  return std::make_shared<engine::FunctionConnector>("sdn", [&sw](const HttpRequest& r) { return sw.handle(r); });
}

}  // namespace amiroar::response
