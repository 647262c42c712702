#include "amiroar/sim/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "amiroar/common/rng.hpp"

namespace amiroar::sim {

std::string_view to_string(LocationClass c) {
  switch (c) {
    case LocationClass::household: return "household";
    case LocationClass::distribution_transformer: return "distribution_transformer";
    case LocationClass::commercial_industrial: return "commercial_industrial";
  }
  return "?";
}

std::string_view to_string(SecurityLevel s) { return s == SecurityLevel::low ? "low" : "high"; }

std::string_view to_string(MeterState s) {
  switch (s) {
    case MeterState::operational: return "operational";
    case MeterState::compromised: return "compromised";
    case MeterState::sandboxed: return "sandboxed";
    case MeterState::reinstalling: return "reinstalling";
  }
  return "?";
}

std::optional<LocationClass> location_class_from_string(std::string_view s) {
  for (auto c : {LocationClass::household, LocationClass::distribution_transformer,
                 LocationClass::commercial_industrial})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<SecurityLevel> security_level_from_string(std::string_view s) {
  if (s == "low") return SecurityLevel::low;
  if (s == "high") return SecurityLevel::high;
  return std::nullopt;
}

bool transition_allowed(MeterState from, MeterState to) {
  using S = MeterState;
  return (from == S::operational && to == S::compromised) ||
         (from == S::compromised && to == S::sandboxed) ||
         (from == S::sandboxed && to == S::reinstalling) ||
         (from == S::reinstalling && to == S::operational) ||
         (from == S::operational && to == S::sandboxed) ||
         (from == S::sandboxed && to == S::operational);
}

std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::fdi: return "fdi";
    case AttackKind::tamper_drop: return "tamper_drop";
    case AttackKind::ddos: return "ddos";
  }
  return "?";
}

std::optional<AttackKind> attack_kind_from_string(std::string_view s) {
  for (auto k : {AttackKind::fdi, AttackKind::tamper_drop, AttackKind::ddos})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

bool AttackScenario::targets_headend() const {
  return std::find(targets.begin(), targets.end(), kHeadendTarget) != targets.end();
}

bool AttackScenario::targets_meter(std::string_view meter_id) const {
  return std::find(targets.begin(), targets.end(), meter_id) != targets.end();
}

void validate(const SimConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (c.meters.empty()) fail("scenario needs at least one meter");
  if (c.polling_interval <= Duration::zero()) fail("polling interval must be positive");
  if (c.end <= c.start) fail("scenario end must follow its start");
  if (c.meter_stagger < Duration::zero() || c.message_latency < Duration::zero())
    fail("negative stagger or latency");
  std::set<std::string> ids;
  std::set<Ipv4Address> ips{c.headend.ip, c.sandbox_harness.ip};
  if (c.standby_headend && !ips.insert(c.standby_headend->ip).second)
    fail("standby headend reuses an address");
  if (ips.size() < 2) fail("headend and sandbox harness share an address");
  for (const auto& m : c.meters) {
    if (m.meter_id.empty()) fail("meter with empty id");
    if (!ids.insert(m.meter_id).second) fail("duplicate meter id " + m.meter_id);
    if (!ips.insert(m.ip).second) fail("duplicate address " + m.ip.to_string());
    if (!(m.area_m2 > 0)) fail("meter " + m.meter_id + " has non-positive area");
    if (!c.load.base_kva.count(m.location_class) || !c.load.power_factor.count(m.location_class))
      fail("load model lacks constants for " + std::string(to_string(m.location_class)));
  }
  for (const auto& [cls, pf] : c.load.power_factor)
    if (!(pf > 0 && pf <= 1)) fail("power factor out of range for " + std::string(to_string(cls)));
  if (!(c.load.seasonal_min > 0 && c.load.seasonal_min <= c.load.seasonal_max))
    fail("seasonal range is invalid");
  for (const auto& a : c.attacks) {
    if (!(a.start < a.end)) fail("attack window must have start < end");
    if (a.kind == AttackKind::ddos && a.ddos.attacker_count < 1) fail("ddos attacker_count must be >= 1");
    if (a.kind == AttackKind::ddos && !(a.ddos.rate_multiplier >= 1))
      fail("ddos rate multiplier must be >= 1");
    if (a.drop_probability < 0 || a.drop_probability > 1) fail("drop probability out of [0,1]");
    if (a.targets.empty()) fail("attack without targets");
    for (const auto& t : a.targets)
      if (t != kHeadendTarget && !ids.count(t)) fail("attack targets unknown meter " + t);
    if (a.kind == AttackKind::ddos) {
      int available = 0;
      for (const auto& m : c.meters)
        if (!a.targets_meter(m.meter_id)) ++available;
      if (available < a.ddos.attacker_count) fail("not enough meters to act as ddos attackers");
    }
  }
}

double seasonal_factor(const LoadModel& m, TimePoint t) {
  const double mid = (m.seasonal_max + m.seasonal_min) / 2.0;
  const double amp = (m.seasonal_max - m.seasonal_min) / 2.0;
  // fractional day of year, so the factor moves smoothly within a day
  auto day_start = std::chrono::floor<std::chrono::days>(t);
  double frac = std::chrono::duration<double, std::ratio<86400>>(t - day_start).count();
  double day = static_cast<double>(day_of_year(t)) + frac;
  return mid + amp * std::cos(2.0 * std::numbers::pi * (day - m.seasonal_peak_day) / 365.25);
}

double expected_apparent_kva(const LoadModel& m, const SmartMeter& meter, TimePoint t) {
  return m.base_kva.at(meter.location_class) * std::pow(meter.area_m2 / 100.0, m.area_exponent) *
         seasonal_factor(m, t);
}

double noise_sigma_kva(const LoadModel& m, const SmartMeter& meter, TimePoint t) {
  return m.noise_fraction * expected_apparent_kva(m, meter, t);
}

double NominalSample::value(Quantity q) const {
  switch (q) {
    case Quantity::current: return current_a;
    case Quantity::voltage: return voltage_v;
    case Quantity::active_power: return active_kw;
    case Quantity::reactive_power: return reactive_kvar;
    case Quantity::apparent_power: return apparent_kva;
  }
  return 0.0;
}

namespace {

double clamped_normal(std::mt19937_64& rng, double clamp) {
  std::normal_distribution<double> n(0.0, 1.0);
  return std::clamp(n(rng), -clamp, clamp);
}

}  // namespace

NominalSample sample_load(const LoadModel& m, const SmartMeter& meter, TimePoint t,
                          std::mt19937_64& rng) {
  const double expected = expected_apparent_kva(m, meter, t);
  const double s = expected * (1.0 + m.noise_fraction * clamped_normal(rng, m.noise_clamp_sigma));
  const double pf = m.power_factor.at(meter.location_class);
  const double v =
      m.nominal_voltage * (1.0 + m.voltage_noise_fraction * clamped_normal(rng, m.noise_clamp_sigma));
  NominalSample out;
  out.apparent_kva = s;
  out.active_kw = s * pf;
  out.reactive_kvar = s * std::sqrt(1.0 - pf * pf);
  out.voltage_v = v;
  out.current_a = s * 1000.0 / v;
  return out;
}

Measurement generate_reading(const LoadModel& m, const SmartMeter& meter, Quantity q, TimePoint t,
                             std::mt19937_64& rng) {
  auto sample = sample_load(m, meter, t, rng);
  return Measurement{meter.meter_id, q, sample.value(q), std::string(unit_of(q)), t};
}

std::uint64_t reading_seed(std::uint64_t scenario_seed, std::string_view meter_id, TimePoint round) {
  return mix_seed({scenario_seed, fnv1a(meter_id), static_cast<std::uint64_t>(to_epoch_ms(round))});
}

}  // namespace amiroar::sim
