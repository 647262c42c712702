#include "amiroar/ndr/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "amiroar/common/ipv4.hpp"
#include "amiroar/sim/simulator.hpp"

namespace amiroar::ndr {

namespace {

constexpr std::size_t kEvidenceCap = 16;

bool ip_less(const std::string& a, const std::string& b) {
  auto pa = Ipv4Address::parse(a), pb = Ipv4Address::parse(b);
  if (pa && pb) return *pa < *pb;
  return a < b;
}

bool is_apparent_reading(const ProtocolLogRecord& r) {
  return r.msg_type == sim::MsgType::read_resp && r.value &&
         r.quantity == sim::Quantity::apparent_power;
}

}  // namespace

void validate(const DetectorConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("detector config: " + m); };
  if (!(c.k_sigma > 0)) fail("k_sigma must be > 0");
  if (c.consecutive_required < 1) fail("consecutive_required must be >= 1");
  if (c.rate_window <= Duration::zero()) fail("rate_window must be positive");
  if (!(c.rate_factor > 0)) fail("rate_factor must be > 0");
  if (!std::is_sorted(c.area_bucket_edges.begin(), c.area_bucket_edges.end())) fail("area bucket edges must be sorted");
  if (c.min_samples < 2) fail("min_samples must be >= 2");
  if (c.std_floor_fraction < 0) fail("std_floor_fraction must be >= 0");
  if (c.correlation_window <= Duration::zero() || c.ddos_hold <= Duration::zero() ||
      c.ddos_recheck <= Duration::zero())
    fail("windows must be positive");
}

int area_bucket(const std::vector<double>& edges, double area_m2) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), area_m2) - edges.begin());
}

int season_of(TimePoint t) { return static_cast<int>((month_of(t) - 1) / 3 + 1); }

std::string ClusterKey::to_string() const {
  return std::string(sim::to_string(location)) + "/area" + std::to_string(area_bucket) + "/Q" +
         std::to_string(season);
}

const MeterInfo* Inventory::by_id(std::string_view id) const {
  for (const auto& m : meters)
    if (m.meter_id == id) return &m;
  return nullptr;
}

const MeterInfo* Inventory::by_ip(std::string_view ip) const {
  for (const auto& m : meters)
    if (m.ip == ip) return &m;
  return nullptr;
}

bool Inventory::is_headend(std::string_view ip) const {
  return std::find(headend_ips.begin(), headend_ips.end(), ip) != headend_ips.end();
}

Inventory inventory_of(const sim::SimConfig& c) {
  Inventory inv;
  for (const auto& m : c.meters)
    inv.meters.push_back({m.meter_id, m.ip.to_string(), m.location_class, m.area_m2});
  inv.headend_ips.push_back(c.headend.ip.to_string());
  if (c.standby_headend) inv.headend_ips.push_back(c.standby_headend->ip.to_string());
  return inv;
}

ProfileMap build_profiles(const std::vector<ProtocolLogRecord>& training, const Inventory& inv,
                          const DetectorConfig& c, std::vector<std::string>* warnings) {
  struct Acc {
    std::size_t n = 0;
    double mean = 0, m2 = 0;
  };
  std::map<ClusterKey, Acc> acc;
  for (const auto& r : training) {
    if (!is_apparent_reading(r) || !inv.is_headend(r.dst_ip)) continue;
    const MeterInfo* m = inv.by_id(r.meter_id);
    if (!m) continue;
    ClusterKey key{m->location_class, area_bucket(c.area_bucket_edges, m->area_m2), season_of(r.timestamp)};
    auto& a = acc[key];
    ++a.n;
    double d = *r.value - a.mean;
    a.mean += d / static_cast<double>(a.n);
    a.m2 += d * (*r.value - a.mean);
  }
  if (acc.empty()) throw std::invalid_argument("empty training set");
  ProfileMap out;
  for (const auto& [key, a] : acc) {
    if (a.n < c.min_samples) {
      if (warnings)
        warnings->push_back("cluster " + key.to_string() + " has " + std::to_string(a.n) +
                            " samples (< " + std::to_string(c.min_samples) + "); no profile");
      continue;
    }
    double sd = std::sqrt(a.m2 / static_cast<double>(a.n - 1));
    sd = std::max(sd, c.std_floor_fraction * std::abs(a.mean));
    out[key] = ClusterProfile{key, a.mean, sd, a.n};
  }
  return out;
}

std::map<std::string, double> build_rate_baselines(const std::vector<ProtocolLogRecord>& training,
                                                   const Inventory& inv, const DetectorConfig& c,
                                                   TimePoint from, TimePoint to) {
  if (to <= from) throw std::invalid_argument("empty baseline span");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : training) {
    if (r.timestamp < from || r.timestamp >= to || inv.is_headend(r.src_ip)) continue;
    ++counts[r.src_ip];
  }
  const double windows = static_cast<double>((to - from).count()) / static_cast<double>(c.rate_window.count());
  std::map<std::string, double> out;
  for (const auto& [src, n] : counts) out[src] = static_cast<double>(n) / windows;
  return out;
}

// ---------------------------------------------------------------------------

FdiDetector::FdiDetector(DetectorConfig c, Inventory inv, ProfileMap profiles)
    : c_(std::move(c)), inv_(std::move(inv)), profiles_(std::move(profiles)) {
  validate(c_);
}

bool FdiDetector::deviant(const ClusterProfile& p, double value) const {
  return std::abs(value - p.mean) > c_.k_sigma * p.std;
}

const ClusterProfile* FdiDetector::profile_for(const MeterInfo& m, TimePoint t) const {
  ClusterKey key{m.location_class, area_bucket(c_.area_bucket_edges, m.area_m2), season_of(t)};
  auto it = profiles_.find(key);
  return it == profiles_.end() ? nullptr : &it->second;
}

void FdiDetector::observe(const ProtocolLogRecord& r, std::vector<Alert>& out) {
  advance_to(r.timestamp, out);
  if (!is_apparent_reading(r) || !inv_.is_headend(r.dst_ip)) return;
  const MeterInfo* m = inv_.by_id(r.meter_id);
  if (!m) m = inv_.by_ip(r.src_ip);
  if (!m) return;
  last_seen_[r.dst_ip][m->meter_id] = r.timestamp;
  const ClusterProfile* p = profile_for(*m, r.timestamp);
  if (!p) {
    ++gaps_;
    return;
  }
  auto& st = meters_[m->meter_id];
  if (!deviant(*p, *r.value)) {
    st.streak = 0;
    st.episode = false;
    st.evidence.clear();
    headend_episode_.erase(r.dst_ip);
    return;
  }
  ++deviant_;
  if (st.streak == 0) {
    st.streak_start = r.timestamp;
    st.evidence.clear();
  }
  ++st.streak;
  if (st.evidence.size() < kEvidenceCap) st.evidence.push_back(r);
  if (st.streak < c_.consecutive_required || st.episode) return;
  st.episode = true;
  if (headend_episode_.count(r.dst_ip)) return;  // already reported with its Headend
  auto [it, opened] = windows_.try_emplace(r.dst_ip);
  if (opened) {
    it->second.open = r.timestamp;
    it->second.close = r.timestamp + c_.correlation_window;
  }
  it->second.candidates.push_back({m->meter_id, st.streak_start, st.evidence});
}

std::optional<TimePoint> FdiDetector::next_deadline() const {
  std::optional<TimePoint> best;
  for (const auto& [_, w] : windows_)
    if (!best || w.close < *best) best = w.close;
  return best;
}

void FdiDetector::advance_to(TimePoint t, std::vector<Alert>& out) {
  for (;;) {
    const std::string* due = nullptr;
    TimePoint when{};
    for (const auto& [h, w] : windows_) {
      if (w.close < t && (!due || w.close < when)) {
        due = &h;
        when = w.close;
      }
    }
    if (!due) return;
    close_window(*due, out);
  }
}

void FdiDetector::close_window(const std::string& headend, std::vector<Alert>& out) {
  Window w = std::move(windows_.at(headend));
  windows_.erase(headend);
  auto& cands = w.candidates;
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.streak_start != b.streak_start ? a.streak_start < b.streak_start : a.meter_id < b.meter_id;
  });
  std::size_t observed = 0;
  for (const auto& [_, seen] : last_seen_[headend])
    if (seen >= w.open - c_.correlation_window) ++observed;

  auto base_alert = [&](const std::string& victim) {
    Alert a;
    a.signature_id = std::string(kFdiSignature);
    a.name = "False data injection in AMI measurements";
    a.detection_time = w.close;
    a.alert_id = make_alert_id("fdi", w.close, victim);
    a.victim_ip = victim;
    return a;
  };

  const bool implicated = cands.size() >= c_.headend_min_meters &&
                          static_cast<double>(cands.size()) >= c_.headend_min_fraction * static_cast<double>(observed);
  if (implicated) {
    const auto median = cands[cands.size() / 2].streak_start;
    const auto& leader = cands.front();
    const bool both = median - leader.streak_start >= c_.both_lead;
    Alert a = base_alert(headend);
    a.suspect_headend_ip = headend;
    if (both) {
      const auto leader_ip = inv_.by_id(leader.meter_id)->ip;
      a.device_class = DeviceClass::both;
      a.severity = 9;
      a.offender_ip = leader_ip;
      a.suspect_meter_ip = leader_ip;
      a.offender_ips = {leader_ip, headend};
      std::sort(a.offender_ips.begin(), a.offender_ips.end(), ip_less);
    } else {
      a.device_class = DeviceClass::headend;
      a.severity = 8;
      a.offender_ip = headend;
      a.offender_ips = {headend};
    }
    for (const auto& c : cands) {
      for (std::size_t i = 0; i < c.evidence.size(); ++i) {
        if (i < static_cast<std::size_t>(c_.consecutive_required)) a.evidence.push_back(c.evidence[i]);
        ++a.evidence_count;
      }
    }
    headend_episode_.insert(headend);
    out.push_back(std::move(a));
    return;
  }
  for (const auto& c : cands) {
    const auto ip = inv_.by_id(c.meter_id)->ip;
    Alert a = base_alert(ip);
    a.device_class = DeviceClass::meter;
    a.severity = 7;
    a.offender_ip = ip;
    a.suspect_meter_ip = ip;
    a.offender_ips = {ip};
    a.evidence = c.evidence;
    a.evidence_count = c.evidence.size();
    out.push_back(std::move(a));
  }
}

// ---------------------------------------------------------------------------

DdosDetector::DdosDetector(DetectorConfig c, Inventory inv, std::map<std::string, double> baselines)
    : c_(std::move(c)), inv_(std::move(inv)), baselines_(std::move(baselines)) {
  validate(c_);
  std::vector<double> values;
  for (const auto& [_, v] : baselines_) values.push_back(v);
  if (values.empty()) {
    fallback_baseline_ = sim::kMeterMessagesPerRound;
  } else {
    std::sort(values.begin(), values.end());
    fallback_baseline_ = values[values.size() / 2];
  }
}

double DdosDetector::threshold(const std::string& src) const {
  auto it = baselines_.find(src);
  return c_.rate_factor * (it == baselines_.end() ? fallback_baseline_ : it->second);
}

std::size_t DdosDetector::count_in(const std::string& src, TimePoint g) const {
  auto it = recent_.find(src);
  if (it == recent_.end()) return 0;
  std::size_t n = 0;
  for (const auto& s : it->second)
    if (s.t > g - c_.rate_window && s.t <= g) ++n;
  return n;
}

void DdosDetector::observe(const ProtocolLogRecord& r, std::vector<Alert>& out) {
  advance_to(r.timestamp, out);
  if (inv_.is_headend(r.src_ip)) return;  // Headends initiate polling; their volume scales with the fleet
  auto& q = recent_[r.src_ip];
  q.push_back({r.timestamp, r.dst_ip});
  while (!q.empty() && q.front().t <= r.timestamp - c_.rate_window) q.pop_front();
  last_record_[r.src_ip] = r;
  if (static_cast<double>(q.size()) <= threshold(r.src_ip)) return;
  if (state_ == State::idle) {
    state_ = State::holding;
    hold_end_ = r.timestamp + c_.ddos_hold;
    offenders_.clear();
  }
  offenders_.insert(r.src_ip);
}

std::optional<TimePoint> DdosDetector::next_deadline() const {
  switch (state_) {
    case State::holding: return hold_end_;
    case State::active: return next_check_;
    case State::idle: break;
  }
  return std::nullopt;
}

void DdosDetector::advance_to(TimePoint t, std::vector<Alert>& out) {
  for (;;) {
    if (state_ == State::holding && hold_end_ < t) {
      emit(out);
      state_ = State::active;
      next_check_ = std::chrono::floor<std::chrono::seconds>(hold_end_) + c_.ddos_recheck;
    } else if (state_ == State::active && next_check_ < t) {
      bool calm = std::all_of(offenders_.begin(), offenders_.end(), [&](const std::string& o) {
        return static_cast<double>(count_in(o, next_check_)) <= threshold(o);
      });
      if (calm) {
        state_ = State::idle;
        offenders_.clear();
      } else {
        next_check_ += c_.ddos_recheck;
      }
    } else {
      return;
    }
  }
}

void DdosDetector::emit(std::vector<Alert>& out) {
  std::vector<std::string> offenders(offenders_.begin(), offenders_.end());
  std::sort(offenders.begin(), offenders.end(), ip_less);
  std::map<std::string, std::size_t> per_victim;
  std::string top;
  std::size_t top_count = 0, total = 0;
  for (const auto& o : offenders) {
    std::size_t n = 0;
    for (const auto& s : recent_[o]) {
      if (s.t > hold_end_ - c_.rate_window && s.t <= hold_end_) {
        ++n;
        ++per_victim[s.dst];
      }
    }
    total += n;
    if (n > top_count) {
      top = o;
      top_count = n;
    }
  }
  std::string victim;
  std::size_t victim_count = 0;
  for (const auto& [dst, n] : per_victim) {
    if (n > victim_count || (n == victim_count && ip_less(dst, victim))) {
      victim = dst;
      victim_count = n;
    }
  }
  Alert a;
  a.signature_id = std::string(kDdosSignature);
  a.name = "DLMS/COSEM message flood";
  a.severity = 7;
  a.detection_time = hold_end_;
  a.victim_ip = victim;
  a.offender_ip = top;
  a.offender_ips = offenders;
  a.device_class = inv_.is_headend(victim) ? DeviceClass::headend : DeviceClass::meter;
  a.alert_id = make_alert_id("ddos", hold_end_, victim);
  for (const auto& o : offenders)
    if (auto it = last_record_.find(o); it != last_record_.end()) a.evidence.push_back(it->second);
  a.evidence_count = total;
  out.push_back(std::move(a));
}

// ---------------------------------------------------------------------------

nlohmann::json detector_config_to_json(const DetectorConfig& c) {
  return {{"k_sigma", c.k_sigma},
          {"consecutive_required", c.consecutive_required},
          {"rate_window_s", to_seconds(c.rate_window)},
          {"rate_factor", c.rate_factor},
          {"area_bucket_edges", c.area_bucket_edges},
          {"min_samples", c.min_samples},
          {"std_floor_fraction", c.std_floor_fraction},
          {"correlation_window_s", to_seconds(c.correlation_window)},
          {"headend_min_meters", c.headend_min_meters},
          {"headend_min_fraction", c.headend_min_fraction},
          {"both_lead_s", to_seconds(c.both_lead)},
          {"ddos_hold_s", to_seconds(c.ddos_hold)},
          {"ddos_recheck_s", to_seconds(c.ddos_recheck)}};
}

DetectorConfig detector_config_from_json(const nlohmann::json& j) {
  DetectorConfig c;
  auto secs = [&](const char* key, Duration& d) {
    if (j.contains(key)) d = seconds_to_duration(j.at(key).get<double>());
  };
  c.k_sigma = j.value("k_sigma", c.k_sigma);
  c.consecutive_required = j.value("consecutive_required", c.consecutive_required);
  secs("rate_window_s", c.rate_window);
  c.rate_factor = j.value("rate_factor", c.rate_factor);
  if (j.contains("area_bucket_edges")) c.area_bucket_edges = j.at("area_bucket_edges").get<std::vector<double>>();
  c.min_samples = j.value("min_samples", c.min_samples);
  c.std_floor_fraction = j.value("std_floor_fraction", c.std_floor_fraction);
  secs("correlation_window_s", c.correlation_window);
  c.headend_min_meters = j.value("headend_min_meters", c.headend_min_meters);
  c.headend_min_fraction = j.value("headend_min_fraction", c.headend_min_fraction);
  secs("both_lead_s", c.both_lead);
  secs("ddos_hold_s", c.ddos_hold);
  secs("ddos_recheck_s", c.ddos_recheck);
  validate(c);
  return c;
}

nlohmann::json to_json(const NdrModel& m) {
  nlohmann::json j;
  j["config"] = detector_config_to_json(m.config);
  auto& meters = j["inventory"]["meters"] = nlohmann::json::array();
  for (const auto& mi : m.inventory.meters)
    meters.push_back({{"meter_id", mi.meter_id},
                      {"ip", mi.ip},
                      {"location_class", sim::to_string(mi.location_class)},
                      {"area_m2", mi.area_m2}});
  j["inventory"]["headend_ips"] = m.inventory.headend_ips;
  j["profiles"] = nlohmann::json::array();
  for (const auto& [key, p] : m.profiles)
    j["profiles"].push_back({{"location_class", sim::to_string(key.location)},
                             {"area_bucket", key.area_bucket},
                             {"season", key.season},
                             {"mean", p.mean},
                             {"std", p.std},
                             {"sample_count", p.sample_count}});
  j["rate_baselines"] = m.rate_baselines;
  j["warnings"] = m.warnings;
  return j;
}

NdrModel ndr_model_from_json(const nlohmann::json& j) {
  try {
    NdrModel m;
    m.config = detector_config_from_json(j.at("config"));
    for (const auto& mj : j.at("inventory").at("meters")) {
      auto cls = sim::location_class_from_string(mj.at("location_class").get<std::string>());
      if (!cls) throw std::invalid_argument("unknown location class");
      m.inventory.meters.push_back(
          {mj.at("meter_id").get<std::string>(), mj.at("ip").get<std::string>(), *cls, mj.at("area_m2").get<double>()});
    }
    m.inventory.headend_ips = j.at("inventory").at("headend_ips").get<std::vector<std::string>>();
    for (const auto& pj : j.at("profiles")) {
      auto cls = sim::location_class_from_string(pj.at("location_class").get<std::string>());
      if (!cls) throw std::invalid_argument("unknown location class");
      ClusterKey key{*cls, pj.at("area_bucket").get<int>(), pj.at("season").get<int>()};
      m.profiles[key] = ClusterProfile{key, pj.at("mean").get<double>(), pj.at("std").get<double>(),
                                       pj.at("sample_count").get<std::size_t>()};
    }
    m.rate_baselines = j.at("rate_baselines").get<std::map<std::string, double>>();
    m.warnings = j.value("warnings", std::vector<std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed detector model: ") + e.what());
  }
}

NdrModel train(const sim::SimConfig& scenario, const DetectorConfig& c, Duration span) {
  validate(c);
  if (span <= Duration::zero()) throw std::invalid_argument("training span must be positive");
  sim::SimConfig clean = scenario;
  clean.attacks.clear();
  clean.end = scenario.start;
  clean.start = scenario.start - span;
  auto run = sim::run_scenario(clean);
  std::vector<ProtocolLogRecord> records;
  records.reserve(run.messages.size());
  for (const auto& msg : run.messages) records.push_back(dissect(msg));

  NdrModel m;
  m.config = c;
  m.inventory = inventory_of(scenario);
  m.profiles = build_profiles(records, m.inventory, c, &m.warnings);
  m.rate_baselines = build_rate_baselines(records, m.inventory, c, clean.start, clean.end);
  return m;
}

}  // namespace amiroar::ndr
