#include "amiroar/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "amiroar/common/rng.hpp"
#include "amiroar/sim/attacks.hpp"
#include "amiroar/sim/policy.hpp"

namespace amiroar::sim {

std::uint64_t SimulationSummary::max_missed_rounds() const {
  std::uint64_t worst = 0;
  for (const auto& [_, r] : rounds) worst = std::max(worst, r.missed());
  return worst;
}

nlohmann::json to_json(const SimulationSummary& s) {
  nlohmann::json j;
  j["messages_sent"] = s.messages_sent;
  j["messages_delivered"] = s.messages_delivered;
  j["dropped_by_policy"] = s.dropped_by_policy;
  j["dropped_by_tamper"] = s.dropped_by_tamper;
  j["flood_messages"] = s.flood_messages;
  j["fdi_rewrites"] = s.fdi_rewrites;
  j["cross_segment_deliveries"] = s.cross_segment_deliveries;
  j["sessions_started"] = s.sessions_started;
  j["max_missed_rounds"] = s.max_missed_rounds();
  auto& rounds = j["rounds"] = nlohmann::json::object();
  for (const auto& [id, r] : s.rounds) {
    rounds[id] = {{"expected", r.expected},
                  {"completed", r.completed},
                  {"missed", r.missed()},
                  {"skipped_isolated", r.skipped_isolated}};
  }
  j["initiator_changes"] = nlohmann::json::array();
  for (const auto& [t, ip] : s.initiator_changes)
    j["initiator_changes"].push_back({{"time", format_iso8601(t)}, {"initiator", ip}});
  for (const auto& [ip, t] : s.first_completed_poll) j["first_completed_poll"][ip] = format_iso8601(t);
  for (const auto& [ip, t] : s.last_completed_poll) j["last_completed_poll"][ip] = format_iso8601(t);
  return j;
}

Simulator::Simulator(SimConfig config, VirtualClock& clock, sdn::SdnSwitch* topology)
    : config_(std::move(config)), clock_(clock), topology_(topology) {
  validate(config_);
  meters_ = config_.meters;
  active_headend_ = config_.headend.ip;
  for (const auto& m : meters_) summary_.rounds[m.meter_id];
  if (topology_) {
    for (const auto& m : meters_) topology_->add_host(m.ip.to_string());
    topology_->add_host(config_.headend.ip.to_string());
    if (config_.standby_headend) topology_->add_host(config_.standby_headend->ip.to_string());
    topology_->add_host(config_.sandbox_harness.ip.to_string(), topology_->config().lab_vlan_id);
    topology_->add_isolation_observer([this](const sdn::IsolationEvent& ev) {
      SmartMeter* m = nullptr;
      for (auto& candidate : meters_)
        if (candidate.ip.to_string() == ev.host) m = &candidate;
      if (!m) return;
      if (ev.action == "isolate" &&
          (m->state == MeterState::operational || m->state == MeterState::compromised))
        m->state = MeterState::sandboxed;
      else if (ev.action == "restore" && m->state == MeterState::sandboxed)
        m->state = MeterState::operational;
    });
  }
}

void Simulator::add_tap(Tap tap) { taps_.push_back(std::move(tap)); }

void Simulator::start() {
  for (const auto& a : config_.attacks) {
    if (a.end <= clock_.now()) continue;
    if (a.start <= clock_.now())
      begin_attack(a);
    else
      clock_.schedule_at(a.start, [this, &a] { begin_attack(a); });
  }
  if (config_.start >= clock_.now())
    clock_.schedule_at(config_.start, [this] { run_round(config_.start); });
}

const SmartMeter* Simulator::meter(std::string_view id) const {
  for (const auto& m : meters_)
    if (m.meter_id == id) return &m;
  return nullptr;
}

SmartMeter* Simulator::find_meter(std::string_view id) {
  for (auto& m : meters_)
    if (m.meter_id == id) return &m;
  return nullptr;
}

const SmartMeter* Simulator::meter_by_ip(std::string_view ip) const {
  for (const auto& m : meters_)
    if (m.ip.to_string() == ip) return &m;
  return nullptr;
}

bool Simulator::is_headend_ip(std::string_view ip) const {
  return config_.headend.ip.to_string() == ip ||
         (config_.standby_headend && config_.standby_headend->ip.to_string() == ip);
}

void Simulator::set_meter_state(const std::string& meter_id, MeterState to) {
  SmartMeter* m = find_meter(meter_id);
  if (!m) throw std::invalid_argument("unknown meter " + meter_id);
  if (m->state == to) return;
  if (!transition_allowed(m->state, to))
    throw std::logic_error("meter " + meter_id + " cannot go from " + std::string(to_string(m->state)) +
                           " to " + std::string(to_string(to)));
  m->state = to;
}

void Simulator::set_firmware(const std::string& meter_id, std::string version) {
  SmartMeter* m = find_meter(meter_id);
  if (!m) throw std::invalid_argument("unknown meter " + meter_id);
  m->firmware_version = std::move(version);
}

bool Simulator::firmware_tampered(const SmartMeter& m) const {
  return m.firmware_version != config_.clean_firmware;
}

void Simulator::reset_primary() { primary_compromised_ = false; }

std::string Simulator::activate_standby() {
  if (!config_.standby_headend) throw std::runtime_error("no standby headend configured");
  const auto primary = config_.headend.ip.to_string();
  if (!topology_ || !topology_->is_isolated(primary))
    throw std::runtime_error("primary headend " + primary + " has not been isolated as suspicious");
  active_headend_ = config_.standby_headend->ip;
  return active_headend_.to_string();
}

bool Simulator::pollable(const SmartMeter& m) const {
  if (m.state != MeterState::operational && m.state != MeterState::compromised) return false;
  return !(topology_ && topology_->is_isolated(m.ip.to_string()));
}

void Simulator::run_round(TimePoint round) {
  const auto initiator = active_headend_;
  if (summary_.initiator_changes.empty() ||
      summary_.initiator_changes.back().second != initiator.to_string())
    summary_.initiator_changes.emplace_back(round, initiator.to_string());
  for (std::size_t i = 0; i < meters_.size(); ++i) {
    auto at = round + config_.meter_stagger * static_cast<int>(i);
    clock_.schedule_at(at, [this, i, round, initiator] { start_session(i, round, initiator); });
  }
  auto next = round + config_.polling_interval;
  if (next < config_.end) clock_.schedule_at(next, [this, next] { run_round(next); });
}

void Simulator::start_session(std::size_t meter_index, TimePoint round, Ipv4Address initiator) {
  const SmartMeter& m = meters_[meter_index];
  auto& stats = summary_.rounds[m.meter_id];
  if (!pollable(m)) {
    ++stats.skipped_isolated;
    return;
  }
  ++stats.expected;
  ++summary_.sessions_started;
  std::mt19937_64 rng(reading_seed(config_.seed, m.meter_id, round));
  auto s = std::make_shared<Session>(
      Session{meter_index, next_session_++, initiator, round, sample_load(config_.load, m, clock_.now(), rng)});
  send_session_message(std::move(s), 0);
}

DlmsMessage Simulator::build_session_message(const Session& s, int index) const {
  const SmartMeter& m = meters_[s.meter_index];
  DlmsMessage msg;
  msg.session_id = s.session_id;
  msg.timestamp = clock_.now();
  msg.meter_id = m.meter_id;
  const bool from_headend = index % 2 == 0;
  msg.src_ip = from_headend ? s.initiator : m.ip;
  msg.dst_ip = from_headend ? m.ip : s.initiator;
  if (index == 0) {
    msg.msg_type = MsgType::assoc_req;
    msg.credential = config_.credentials.at(m.security_level);
  } else if (index == 1) {
    msg.msg_type = MsgType::assoc_resp;
  } else {
    Quantity q = kAllQuantities[(index - 2) / 2];
    msg.quantity = q;
    if (from_headend) {
      msg.msg_type = MsgType::read_req;
    } else {
      msg.msg_type = MsgType::read_resp;
      msg.measurement = Measurement{m.meter_id, q, s.sample.value(q), std::string(unit_of(q)), msg.timestamp};
    }
  }
  return msg;
}

void Simulator::send_session_message(std::shared_ptr<Session> s, int index) {
  auto msg = transform(build_session_message(*s, index),
                       mix_seed({s->session_id, static_cast<std::uint64_t>(index)}));
  if (!msg || !deliver(std::move(*msg))) return;  // session aborted
  constexpr int kLast = 2 * (1 + static_cast<int>(std::size(kAllQuantities))) - 1;
  if (index == kLast) {
    const auto& m = meters_[s->meter_index];
    ++summary_.rounds[m.meter_id].completed;
    const auto ip = s->initiator.to_string();
    summary_.first_completed_poll.try_emplace(ip, s->round);
    summary_.last_completed_poll[ip] = s->round;
    return;
  }
  clock_.schedule_after(config_.message_latency,
                        [this, s = std::move(s), index] { send_session_message(s, index + 1); });
}

std::optional<DlmsMessage> Simulator::transform(DlmsMessage msg, std::uint64_t tamper_key) {
  if (msg.msg_type != MsgType::read_resp) return msg;
  const SmartMeter* m = meter(msg.meter_id);
  for (const auto& a : config_.attacks) {
    if (!a.active(msg.timestamp)) continue;
    if (a.kind == AttackKind::fdi) {
      bool meter_side = m && a.targets_meter(m->meter_id) && firmware_tampered(*m);
      bool headend_side = a.targets_headend() && primary_compromised_ && msg.dst_ip == config_.headend.ip;
      if ((meter_side || headend_side) && msg.quantity && is_power_quantity(*msg.quantity)) {
        msg = inject_fdi(std::move(msg), a.fdi);
        ++summary_.fdi_rewrites;
      }
    } else if (a.kind == AttackKind::tamper_drop && m && a.targets_meter(m->meter_id)) {
      double u = static_cast<double>(mix_seed({config_.seed, tamper_key}) >> 11) * 0x1.0p-53;
      auto kept = inject_tamper_drop(std::move(msg), a.drop_probability, u);
      if (!kept) {
        ++summary_.dropped_by_tamper;
        return std::nullopt;
      }
      msg = std::move(*kept);
    }
  }
  return msg;
}

bool Simulator::deliver(DlmsMessage msg) {
  ++summary_.messages_sent;
  auto out = apply_network_policy(msg, topology_);
  if (!out) {
    ++summary_.dropped_by_policy;
    return false;
  }
  if (topology_ && topology_->segment_of(out->src_ip.to_string()) != topology_->segment_of(out->dst_ip.to_string()))
    ++summary_.cross_segment_deliveries;
  ++summary_.messages_delivered;
  for (const auto& tap : taps_) tap(*out);
  return true;
}

void Simulator::begin_attack(const AttackScenario& a) {
  switch (a.kind) {
    case AttackKind::fdi:
      for (const auto& t : a.targets) {
        if (t == kHeadendTarget) {
          primary_compromised_ = true;
        } else if (SmartMeter* m = find_meter(t); m && !firmware_tampered(*m)) {
          m->firmware_version += "+implant";
          if (m->state == MeterState::operational) m->state = MeterState::compromised;
        }
      }
      break;
    case AttackKind::tamper_drop:
      break;
    case AttackKind::ddos: {
      std::vector<std::size_t> victims, attackers;
      for (std::size_t i = 0; i < meters_.size(); ++i) {
        if (a.targets_meter(meters_[i].meter_id))
          victims.push_back(i);
        else if (static_cast<int>(attackers.size()) < a.ddos.attacker_count)
          attackers.push_back(i);
      }
      if (victims.empty()) break;
      const int per_interval = static_cast<int>(std::lround((a.ddos.rate_multiplier - 1.0) * kMeterMessagesPerRound));
      if (per_interval <= 0) break;
      for (std::size_t slot = 0; slot < attackers.size(); ++slot)
        schedule_flood(a, attackers[slot], slot, per_interval, victims, 0);
      break;
    }
  }
}

void Simulator::schedule_flood(const AttackScenario& a, std::size_t attacker, std::size_t slot,
                               int per_interval, std::vector<std::size_t> victims, std::uint64_t k) {
  // Evenly spaced within each interval, offset by the attacker's slot in ms.
  const auto spacing = config_.polling_interval / per_interval;
  const auto offset = Duration{static_cast<std::int64_t>(slot)};
  if (a.start + spacing * static_cast<std::int64_t>(k) + offset < clock_.now()) {
    auto behind = clock_.now() - a.start - offset;
    k = static_cast<std::uint64_t>((behind + spacing - Duration{1}) / spacing);
  }
  const auto t = a.start + spacing * static_cast<std::int64_t>(k) + offset;
  if (t >= a.end || t >= config_.end) return;
  clock_.schedule_at(t, [this, &a, attacker, slot, per_interval, victims = std::move(victims), k]() mutable {
    const SmartMeter& src = meters_[attacker];
    const SmartMeter& dst = meters_[victims[(k + slot) % victims.size()]];
    DlmsMessage msg;
    msg.msg_type = MsgType::read_req;
    msg.session_id = 0;
    msg.src_ip = src.ip;
    msg.dst_ip = dst.ip;
    msg.timestamp = clock_.now();
    msg.meter_id = src.meter_id;
    msg.quantity = Quantity::apparent_power;
    ++summary_.flood_messages;
    deliver(std::move(msg));
    schedule_flood(a, attacker, slot, per_interval, std::move(victims), k + 1);
  });
}

std::vector<Measurement> Simulator::sandbox_poll(const std::string& meter_ip) {
  const SmartMeter* m = meter_by_ip(meter_ip);
  if (!m) throw std::invalid_argument("unknown meter " + meter_ip);
  if (!topology_ || !topology_->is_isolated(meter_ip))
    throw std::logic_error("meter " + meter_ip + " is not isolated");
  if (m->state == MeterState::reinstalling) throw std::logic_error("meter " + meter_ip + " is reinstalling");
  const auto harness = config_.sandbox_harness.ip.to_string();
  if (!topology_->reachable(harness, meter_ip)) topology_->isolate_host(harness, *topology_->segment_of(meter_ip));

  const auto now = clock_.now();
  std::mt19937_64 rng(mix_seed({config_.seed, fnv1a("sandbox"), fnv1a(m->meter_id),
                                static_cast<std::uint64_t>(to_epoch_ms(now))}));
  auto sample = sample_load(config_.load, *m, now, rng);
  std::vector<Measurement> out;
  for (auto q : kAllQuantities) {
    DlmsMessage msg;
    msg.msg_type = MsgType::read_resp;
    msg.src_ip = m->ip;
    msg.dst_ip = config_.sandbox_harness.ip;
    msg.timestamp = now;
    msg.meter_id = m->meter_id;
    msg.quantity = q;
    msg.measurement = Measurement{m->meter_id, q, sample.value(q), std::string(unit_of(q)), now};
    for (const auto& a : config_.attacks)
      if (a.kind == AttackKind::fdi && a.active(now) && a.targets_meter(m->meter_id) && firmware_tampered(*m))
        msg = inject_fdi(std::move(msg), a.fdi);
    out.push_back(*msg.measurement);
  }
  return out;
}

SimRun run_scenario(const SimConfig& config) {
  VirtualClock clock(config.start);
  SimRun run;
  Simulator sim(config, clock);
  sim.add_tap([&run](const DlmsMessage& m) { run.messages.push_back(m); });
  sim.start();
  clock.run();
  run.summary = sim.summary();
  return run;
}

}  // namespace amiroar::sim
