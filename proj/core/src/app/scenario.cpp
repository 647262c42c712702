#include "amiroar/app/scenario.hpp"

#include <fstream>

namespace amiroar::app {

using nlohmann::json;

namespace {

TimePoint time_field(const json& j, const char* key) {
  try {
    return parse_iso8601(j.at(key).get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

Duration seconds_field(const json& j, const char* key, Duration fallback) {
  if (!j.contains(key)) return fallback;
  double s = j.at(key).get<double>();
  if (s < 0) throw ConfigError(std::string(key) + " must not be negative");
  return seconds_to_duration(s);
}

sim::LocationClass location(const json& j) {
  auto name = j.value("location_class", "household");
  auto c = sim::location_class_from_string(name);
  if (!c) throw ConfigError("unknown location_class " + name);
  return *c;
}

sim::SecurityLevel security(const json& j) {
  auto name = j.value("security_level", "low");
  auto s = sim::security_level_from_string(name);
  if (!s) throw ConfigError("unknown security_level " + name);
  return *s;
}

Ipv4Address ip_field(const json& j, const char* key) {
  auto text = j.at(key).get<std::string>();
  auto ip = Ipv4Address::parse(text);
  if (!ip) throw ConfigError(std::string(key) + ": bad ipv4 address " + text);
  return *ip;
}

sim::HostSpec host(const json& j, const std::string& default_id) {
  return {j.value("id", default_id), ip_field(j, "ip")};
}

void add_group(const json& g, const std::string& clean_fw, std::vector<sim::SmartMeter>& out) {
  const int count = g.at("count").get<int>();
  if (count <= 0) throw ConfigError("meter group count must be positive");
  const auto prefix = g.value("id_prefix", "sm-");
  auto ip = ip_field(g, "first_ip").value();
  double lo = 100.0, hi = 100.0;
  if (auto a = g.find("area_m2"); a != g.end()) {
    if (a->is_array()) {
      lo = a->at(0).get<double>();
      hi = a->at(1).get<double>();
    } else {
      lo = hi = a->get<double>();
    }
  }
  const int first = g.value("first_index", 1);
  for (int i = 0; i < count; ++i) {
    sim::SmartMeter m;
    char id[32];
    std::snprintf(id, sizeof id, "%03d", first + i);
    m.meter_id = prefix + id;
    m.ip = Ipv4Address(ip + static_cast<std::uint32_t>(i));
    m.location_class = location(g);
    m.area_m2 = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    m.firmware_version = g.value("firmware", clean_fw);
    m.security_level = security(g);
    out.push_back(std::move(m));
  }
}

sim::AttackScenario attack(const json& a) {
  sim::AttackScenario s;
  auto kind = a.at("kind").get<std::string>();
  auto k = sim::attack_kind_from_string(kind);
  if (!k) throw ConfigError("unknown attack kind " + kind);
  s.kind = *k;
  s.start = time_field(a, "start");
  s.end = time_field(a, "end");
  s.targets = a.value("targets", std::vector<std::string>{});
  s.fdi.multiplier = a.value("multiplier", s.fdi.multiplier);
  s.fdi.sign_flip = a.value("sign_flip", s.fdi.sign_flip);
  s.ddos.attacker_count = a.value("attacker_count", s.ddos.attacker_count);
  s.ddos.rate_multiplier = a.value("rate_multiplier", s.ddos.rate_multiplier);
  s.drop_probability = a.value("drop_probability", s.drop_probability);
  return s;
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  try {
    c.name = j.value("name", "scenario");
    if (!j.contains("seed") || !j["seed"].is_number_unsigned())
      throw ConfigError("seed is required (non-negative integer)");
    c.sim.seed = j["seed"].get<std::uint64_t>();
    c.clock_scale = j.value("clock_scale", 0.0);
    if (c.clock_scale < 0) throw ConfigError("clock_scale must not be negative");
    c.sim.start = time_field(j, "start");
    c.sim.end = time_field(j, "end");
    if (j.contains("training_hours")) c.training = seconds_to_duration(j["training_hours"].get<double>() * 3600.0);
    c.sim.polling_interval = seconds_field(j, "polling_interval_s", c.sim.polling_interval);
    c.sim.clean_firmware = j.value("clean_firmware", c.sim.clean_firmware);
    if (j.contains("headend")) c.sim.headend = host(j["headend"], "headend-primary");
    if (j.contains("standby_headend")) c.sim.standby_headend = host(j["standby_headend"], "headend-standby");
    if (j.contains("sandbox_harness")) c.sim.sandbox_harness = host(j["sandbox_harness"], "sandbox-harness");

    for (const auto& m : j.value("meters", json::array())) {
      sim::SmartMeter sm;
      sm.meter_id = m.at("id").get<std::string>();
      sm.ip = ip_field(m, "ip");
      sm.location_class = location(m);
      sm.area_m2 = m.value("area_m2", 100.0);
      sm.firmware_version = m.value("firmware", c.sim.clean_firmware);
      sm.security_level = security(m);
      c.sim.meters.push_back(std::move(sm));
    }
    for (const auto& g : j.value("meter_groups", json::array())) add_group(g, c.sim.clean_firmware, c.sim.meters);

    if (auto lm = j.find("load_model"); lm != j.end()) {
      auto& l = c.sim.load;
      l.noise_fraction = lm->value("noise_fraction", l.noise_fraction);
      l.area_exponent = lm->value("area_exponent", l.area_exponent);
      l.seasonal_min = lm->value("seasonal_min", l.seasonal_min);
      l.seasonal_max = lm->value("seasonal_max", l.seasonal_max);
    }
    for (const auto& a : j.value("attacks", json::array())) c.sim.attacks.push_back(attack(a));

    if (j.contains("detector")) c.detector = ndr::detector_config_from_json(j["detector"]);

    const json playbooks = j.value("playbooks", json::object());
    for (const auto& [sig, rel] : playbooks.items()) {
      std::filesystem::path p = rel.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::exists(p)) throw ConfigError("playbook for " + sig + " not found: " + p.string());
      c.playbooks[sig] = p.lexically_normal();
    }
    if (auto cj = j.find("connectors"); cj != j.end()) {
      auto& e = c.connectors;
      e.sdn = cj->value("sdn", e.sdn);
      e.cases = cj->value("cases", e.cases);
      e.chat = cj->value("chat", e.chat);
      e.headend = cj->value("headend", e.headend);
      e.firmware = cj->value("firmware", e.firmware);
      e.reports = cj->value("reports", e.reports);
      e.ndr = cj->value("ndr", e.ndr);
      if (cj->contains("channels")) e.channels = cj->at("channels").get<std::map<std::string, std::string>>();
    }
    if (auto s = j.find("sdn"); s != j.end()) c.sdn.auth_token = s->value("auth_token", c.sdn.auth_token);
    if (auto f = j.find("firmware"); f != j.end()) {
      c.firmware.fetch = seconds_field(*f, "fetch_s", c.firmware.fetch);
      c.firmware.install = seconds_field(*f, "install_s", c.firmware.install);
      c.firmware.reboot = seconds_field(*f, "reboot_s", c.firmware.reboot);
    }
    if (auto l = j.find("step_latency_s"); l != j.end()) {
      c.latency.min = seconds_to_duration(l->at(0).get<double>());
      c.latency.max = seconds_to_duration(l->at(1).get<double>());
      if (c.latency.min < Duration::zero() || c.latency.min > c.latency.max)
        throw ConfigError("step_latency_s must be [min, max] with 0 <= min <= max");
    }
    if (j.contains("baseline_hours")) {
      double h = j["baseline_hours"].get<double>();
      if (h <= 0) throw ConfigError("baseline_hours must be positive");
      c.baseline.manual_response_duration = seconds_to_duration(h * 3600.0);
      c.baseline.description = j.value("baseline_description", "configured manual response duration");
    }
    sim::validate(c.sim);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (c.training <= Duration::zero()) throw ConfigError("training_hours must be positive");
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("scenario " + path.string() + " is not valid JSON");
  return scenario_from_json(j, path.parent_path());
}

}  // namespace amiroar::app
