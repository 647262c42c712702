#pragma once

#include <compare>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "amiroar/ndr/alert.hpp"
#include "amiroar/ndr/protocol_log.hpp"
#include "amiroar/sim/inventory.hpp"

namespace amiroar::ndr {

struct DetectorConfig {
  double k_sigma = 3.0;
  int consecutive_required = 3;
  Duration rate_window{std::chrono::seconds{60}};
  double rate_factor = 5.0;
  /// Right-open bucket edges in m2: [0,50) [50,150) [150,500) [500,inf).
  std::vector<double> area_bucket_edges{50.0, 150.0, 500.0};
  std::size_t min_samples = 30;
  double std_floor_fraction = 0.01;
  /// Candidates reported to one Headend within this window are correlated.
  Duration correlation_window{std::chrono::seconds{120}};
  std::size_t headend_min_meters = 3;
  double headend_min_fraction = 0.5;
  /// A meter deviating this much earlier than the median marks a "both" incident.
  Duration both_lead{std::chrono::seconds{30}};
  /// Offenders exceeding the rate within this hold are reported together.
  Duration ddos_hold{std::chrono::seconds{5}};
  Duration ddos_recheck{std::chrono::seconds{1}};
};

/// Throws std::invalid_argument.
void validate(const DetectorConfig& c);

int area_bucket(const std::vector<double>& edges, double area_m2);
/// Calendar quarter 1..4.
int season_of(TimePoint t);

struct ClusterKey {
  sim::LocationClass location = sim::LocationClass::household;
  int area_bucket = 0;
  int season = 1;

  auto operator<=>(const ClusterKey&) const = default;
  std::string to_string() const;
};

struct ClusterProfile {
  ClusterKey key;
  double mean = 0.0;
  double std = 0.0;
  std::size_t sample_count = 0;
};

using ProfileMap = std::map<ClusterKey, ClusterProfile>;

struct MeterInfo {
  std::string meter_id;
  std::string ip;
  sim::LocationClass location_class = sim::LocationClass::household;
  double area_m2 = 100.0;
};

struct Inventory {
  std::vector<MeterInfo> meters;
  std::vector<std::string> headend_ips;

  const MeterInfo* by_id(std::string_view id) const;
  const MeterInfo* by_ip(std::string_view ip) const;
  bool is_headend(std::string_view ip) const;
};

Inventory inventory_of(const sim::SimConfig& c);

/// Mean and sample standard deviation of apparent-power readings per
/// cluster. Throws std::invalid_argument when no usable reading exists.
ProfileMap build_profiles(const std::vector<ProtocolLogRecord>& training, const Inventory& inv,
                          const DetectorConfig& c, std::vector<std::string>* warnings = nullptr);

/// Messages per rate window for each non-Headend source over [from, to).
std::map<std::string, double> build_rate_baselines(const std::vector<ProtocolLogRecord>& training,
                                                   const Inventory& inv, const DetectorConfig& c,
                                                   TimePoint from, TimePoint to);

/// Detectors see records in non-decreasing timestamp order. Pending
/// decisions have deadlines; a deadline D is settled by the first
/// advance_to(t) with t > D, and alerts carry D as their detection time, so a
/// replay of the same records yields the same alerts as the live run.
class FdiDetector {
 public:
  FdiDetector(DetectorConfig c, Inventory inv, ProfileMap profiles);

  void observe(const ProtocolLogRecord& r, std::vector<Alert>& out);
  void advance_to(TimePoint t, std::vector<Alert>& out);
  std::optional<TimePoint> next_deadline() const;

  std::uint64_t coverage_gaps() const { return gaps_; }
  std::uint64_t deviant_readings() const { return deviant_; }
  bool deviant(const ClusterProfile& p, double value) const;
  const ClusterProfile* profile_for(const MeterInfo& m, TimePoint t) const;

 private:
  struct MeterState {
    int streak = 0;
    TimePoint streak_start;
    bool episode = false;
    std::vector<ProtocolLogRecord> evidence;
  };
  struct Candidate {
    std::string meter_id;
    TimePoint streak_start;
    std::vector<ProtocolLogRecord> evidence;
  };
  struct Window {
    TimePoint open;
    TimePoint close;
    std::vector<Candidate> candidates;
  };

  void close_window(const std::string& headend, std::vector<Alert>& out);

  DetectorConfig c_;
  Inventory inv_;
  ProfileMap profiles_;
  std::map<std::string, MeterState> meters_;
  std::map<std::string, Window> windows_;  // by headend ip
  std::map<std::string, std::map<std::string, TimePoint>> last_seen_;  // headend -> meter -> t
  std::set<std::string> headend_episode_;
  std::uint64_t gaps_ = 0;
  std::uint64_t deviant_ = 0;
};

class DdosDetector {
 public:
  DdosDetector(DetectorConfig c, Inventory inv, std::map<std::string, double> baselines);

  void observe(const ProtocolLogRecord& r, std::vector<Alert>& out);
  void advance_to(TimePoint t, std::vector<Alert>& out);
  std::optional<TimePoint> next_deadline() const;

  double threshold(const std::string& src) const;
  bool episode_active() const { return state_ != State::idle; }

 private:
  enum class State { idle, holding, active };
  struct Seen {
    TimePoint t;
    std::string dst;
  };

  std::size_t count_in(const std::string& src, TimePoint g) const;
  void emit(std::vector<Alert>& out);

  DetectorConfig c_;
  Inventory inv_;
  std::map<std::string, double> baselines_;
  double fallback_baseline_ = 0.0;
  std::map<std::string, std::deque<Seen>> recent_;
  State state_ = State::idle;
  TimePoint hold_end_;
  TimePoint next_check_;
  std::set<std::string> offenders_;
  std::map<std::string, ProtocolLogRecord> last_record_;
};

/// Everything a detector needs, persisted next to a capture for replay.
struct NdrModel {
  DetectorConfig config;
  Inventory inventory;
  ProfileMap profiles;
  std::map<std::string, double> rate_baselines;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const NdrModel& m);
NdrModel ndr_model_from_json(const nlohmann::json& j);
nlohmann::json detector_config_to_json(const DetectorConfig& c);
/// Missing keys keep their defaults.
DetectorConfig detector_config_from_json(const nlohmann::json& j);

/// Trains on a clean simulation of [start - span, start) with the
/// scenario's inventory and seed.
NdrModel train(const sim::SimConfig& scenario, const DetectorConfig& c, Duration span);

}  // namespace amiroar::ndr
