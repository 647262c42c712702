#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "amiroar/sdn/switch.hpp"
#include "amiroar/sim/inventory.hpp"
#include "amiroar/sim/messages.hpp"
#include "amiroar/sim/virtual_clock.hpp"

namespace amiroar::sim {

/// Messages a meter sends per polling round: ASSOC_RESP plus one READ_RESP
/// per quantity.
inline constexpr int kMeterMessagesPerRound = 1 + static_cast<int>(std::size(kAllQuantities));

struct MeterRoundStats {
  std::uint64_t expected = 0;  ///< rounds in which the meter was pollable
  std::uint64_t completed = 0;
  std::uint64_t skipped_isolated = 0;

  std::uint64_t missed() const { return expected - completed; }
};

struct SimulationSummary {
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t dropped_by_policy = 0;
  std::uint64_t dropped_by_tamper = 0;
  std::uint64_t flood_messages = 0;
  std::uint64_t fdi_rewrites = 0;
  /// Recounted from segment membership at delivery time; must stay 0.
  std::uint64_t cross_segment_deliveries = 0;
  std::uint64_t sessions_started = 0;
  std::map<std::string, MeterRoundStats> rounds;
  /// Polling initiator at each change, starting with the first round.
  std::vector<std::pair<TimePoint, std::string>> initiator_changes;
  std::map<std::string, TimePoint> first_completed_poll;
  std::map<std::string, TimePoint> last_completed_poll;

  std::uint64_t max_missed_rounds() const;
};

nlohmann::json to_json(const SimulationSummary& s);

/// Discrete-event AMI: the active Headend polls every pollable meter once per
/// interval, one clock event per message; attack injectors rewrite or add
/// traffic inside their windows; delivered messages go to the taps in
/// timestamp order.
class Simulator {
 public:
  using Tap = std::function<void(const DlmsMessage&)>;

  /// Registers every host with `topology` when one is given.
  Simulator(SimConfig config, VirtualClock& clock, sdn::SdnSwitch* topology = nullptr);

  void add_tap(Tap tap);
  /// Schedules polling rounds in [start, end) and the attack windows.
  void start();

  const SimConfig& config() const { return config_; }
  const SimulationSummary& summary() const { return summary_; }

  const std::vector<SmartMeter>& meters() const { return meters_; }
  const SmartMeter* meter(std::string_view meter_id) const;
  const SmartMeter* meter_by_ip(std::string_view ip) const;
  bool is_headend_ip(std::string_view ip) const;

  /// Throws std::logic_error on a disallowed transition.
  void set_meter_state(const std::string& meter_id, MeterState to);
  void set_firmware(const std::string& meter_id, std::string version);
  bool firmware_tampered(const SmartMeter& m) const;

  std::string active_headend_ip() const { return active_headend_.to_string(); }
  bool primary_compromised() const { return primary_compromised_; }
  /// Restores the primary's configuration (eradication).
  void reset_primary();
  /// Standby becomes the polling initiator from the next round on. Throws
  /// std::runtime_error without a standby or while the primary has not been
  /// isolated as suspicious.
  std::string activate_standby();

  /// Polls an isolated meter from the sandbox harness, outside the monitored
  /// network. Moves the harness into the meter's segment if needed.
  std::vector<Measurement> sandbox_poll(const std::string& meter_ip);

 private:
  struct Session {
    std::size_t meter_index;
    std::uint64_t session_id;
    Ipv4Address initiator;
    TimePoint round;
    NominalSample sample;
  };

  SmartMeter* find_meter(std::string_view id);
  void run_round(TimePoint round);
  void start_session(std::size_t meter_index, TimePoint round, Ipv4Address initiator);
  void send_session_message(std::shared_ptr<Session> s, int index);
  DlmsMessage build_session_message(const Session& s, int index) const;
  std::optional<DlmsMessage> transform(DlmsMessage msg, std::uint64_t tamper_key);
  bool deliver(DlmsMessage msg);
  void begin_attack(const AttackScenario& a);
  void schedule_flood(const AttackScenario& a, std::size_t attacker, std::size_t slot, int per_interval,
                      std::vector<std::size_t> victims, std::uint64_t k);
  bool pollable(const SmartMeter& m) const;

  SimConfig config_;
  VirtualClock& clock_;
  sdn::SdnSwitch* topology_;
  std::vector<SmartMeter> meters_;
  std::vector<Tap> taps_;
  SimulationSummary summary_;
  Ipv4Address active_headend_;
  bool primary_compromised_ = false;
  std::uint64_t next_session_ = 1;
};

struct SimRun {
  std::vector<DlmsMessage> messages;
  SimulationSummary summary;
};

/// Runs a scenario without any response in the loop.
SimRun run_scenario(const SimConfig& config);

}  // namespace amiroar::sim
