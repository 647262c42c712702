#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "amiroar/common/ipv4.hpp"
#include "amiroar/common/time.hpp"
#include "amiroar/sim/messages.hpp"

namespace amiroar::sim {

enum class LocationClass { household, distribution_transformer, commercial_industrial };
enum class SecurityLevel { low, high };
enum class MeterState { operational, compromised, sandboxed, reinstalling };

std::string_view to_string(LocationClass c);
std::string_view to_string(SecurityLevel s);
std::string_view to_string(MeterState s);
std::optional<LocationClass> location_class_from_string(std::string_view s);
std::optional<SecurityLevel> security_level_from_string(std::string_view s);

/// operational -> compromised -> sandboxed -> reinstalling -> operational,
/// plus operational -> sandboxed (isolated before it was flagged) and
/// sandboxed -> operational (restored without reinstall).
bool transition_allowed(MeterState from, MeterState to);

struct SmartMeter {
  std::string meter_id;
  Ipv4Address ip;
  LocationClass location_class = LocationClass::household;
  double area_m2 = 100.0;
  std::string firmware_version;
  SecurityLevel security_level = SecurityLevel::low;
  MeterState state = MeterState::operational;
};

struct HostSpec {
  std::string id;
  Ipv4Address ip;
};

/// Synthetic nominal load: base_kva(class) * (area/100)^exponent * seasonal(t),
/// plus Gaussian noise with sigma = noise_fraction of that expectation,
/// clamped to +-noise_clamp_sigma.
struct LoadModel {
  std::map<LocationClass, double> base_kva{{LocationClass::household, 1.2},
                                           {LocationClass::commercial_industrial, 18.0},
                                           {LocationClass::distribution_transformer, 60.0}};
  std::map<LocationClass, double> power_factor{{LocationClass::household, 0.95},
                                               {LocationClass::commercial_industrial, 0.88},
                                               {LocationClass::distribution_transformer, 0.92}};
  double area_exponent = 0.8;
  double noise_fraction = 0.05;
  double noise_clamp_sigma = 2.5;
  double seasonal_min = 0.8;
  double seasonal_max = 1.3;
  /// Day of year with the highest load (mid-January).
  double seasonal_peak_day = 15.0;
  double nominal_voltage = 230.0;
  double voltage_noise_fraction = 0.01;
};

enum class AttackKind { fdi, tamper_drop, ddos };
std::string_view to_string(AttackKind k);
std::optional<AttackKind> attack_kind_from_string(std::string_view s);

inline constexpr std::string_view kHeadendTarget = "headend";

struct FdiParams {
  double multiplier = 2.5;
  bool sign_flip = true;
};

struct DdosParams {
  int attacker_count = 1;
  /// Attackers send rate_multiplier times their nominal per-interval message count.
  double rate_multiplier = 10.0;
};

struct AttackScenario {
  AttackKind kind = AttackKind::fdi;
  TimePoint start;
  TimePoint end;
  /// Meter ids, or "headend" for the primary Headend.
  std::vector<std::string> targets;
  FdiParams fdi;
  DdosParams ddos;
  double drop_probability = 1.0;

  bool active(TimePoint t) const { return start <= t && t < end; }
  bool targets_headend() const;
  bool targets_meter(std::string_view meter_id) const;
};

struct SimConfig {
  std::uint64_t seed = 0;
  TimePoint start;
  TimePoint end;
  Duration polling_interval{std::chrono::seconds{60}};
  /// Offset between consecutive meters within one polling round.
  Duration meter_stagger{std::chrono::milliseconds{50}};
  /// Delay between the messages of one session.
  Duration message_latency{std::chrono::milliseconds{10}};
  std::vector<SmartMeter> meters;
  HostSpec headend{"headend-primary", Ipv4Address::from_string("10.0.1.1")};
  std::optional<HostSpec> standby_headend;
  HostSpec sandbox_harness{"sandbox-harness", Ipv4Address::from_string("10.0.9.1")};
  std::string clean_firmware = "fw-2.4.1";
  std::map<SecurityLevel, std::string> credentials{{SecurityLevel::low, "password"},
                                                   {SecurityLevel::high, "hls-gmac"}};
  LoadModel load;
  std::vector<AttackScenario> attacks;
};

/// Throws std::invalid_argument naming the first problem.
void validate(const SimConfig& config);

double seasonal_factor(const LoadModel& m, TimePoint t);
/// Expected apparent power (kVA) of a meter at `t`, before noise.
double expected_apparent_kva(const LoadModel& m, const SmartMeter& meter, TimePoint t);
/// Noise standard deviation (kVA) at `t`.
double noise_sigma_kva(const LoadModel& m, const SmartMeter& meter, TimePoint t);

/// One consistent set of the five quantities.
struct NominalSample {
  double apparent_kva;
  double active_kw;
  double reactive_kvar;
  double voltage_v;
  double current_a;

  double value(Quantity q) const;
};

NominalSample sample_load(const LoadModel& m, const SmartMeter& meter, TimePoint t,
                          std::mt19937_64& rng);
Measurement generate_reading(const LoadModel& m, const SmartMeter& meter, Quantity q, TimePoint t,
                             std::mt19937_64& rng);

/// Seed for the draws of one meter in the polling round starting at `round`.
std::uint64_t reading_seed(std::uint64_t scenario_seed, std::string_view meter_id, TimePoint round);

}  // namespace amiroar::sim
