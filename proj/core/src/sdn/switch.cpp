#include "amiroar/sdn/switch.hpp"

#include <algorithm>

#include "amiroar/common/ipv4.hpp"

namespace amiroar::sdn {

using nlohmann::json;

std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::operational: return "operational";
    case SegmentKind::sandbox: return "sandbox";
    case SegmentKind::lab: return "lab";
  }
  return "?";
}

json parse_body(std::string_view body) {
  auto strict = json::parse(body.begin(), body.end(), nullptr, false);
  if (!strict.is_discarded()) return strict;
  std::string fixed;
  bool in_double = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (in_double) {
      fixed.push_back(c);
      if (c == '\\' && i + 1 < body.size()) fixed.push_back(body[++i]);
      else if (c == '"') in_double = false;
    } else if (c == '"') {
      in_double = true;
      fixed.push_back(c);
    } else if (c == '\'') {
      fixed.push_back('"');
      for (++i; i < body.size() && body[i] != '\''; ++i) {
        if (body[i] == '"') fixed.push_back('\\');
        fixed.push_back(body[i]);
      }
      fixed.push_back('"');
    } else {
      fixed.push_back(c);
    }
  }
  auto lenient = json::parse(fixed, nullptr, false);
  if (lenient.is_discarded()) throw SdnError(400, "request body is not valid JSON");
  return lenient;
}

SdnSwitch::SdnSwitch(SdnConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
  segments_[kOperationalVlan] = VlanSegment{kOperationalVlan, "operational", SegmentKind::operational, {}};
  segments_[config_.lab_vlan_id] = VlanSegment{config_.lab_vlan_id, config_.lab_vlan_name, SegmentKind::lab, {}};
}

void SdnSwitch::add_host(const std::string& ip, int vlan_id) {
  std::lock_guard lock(mu_);
  if (!Ipv4Address::parse(ip)) throw SdnError(400, "malformed host ip " + ip);
  auto seg = segments_.find(vlan_id);
  if (seg == segments_.end()) throw SdnError(404, "unknown vlan " + std::to_string(vlan_id));
  if (auto old = host_segment_.find(ip); old != host_segment_.end())
    segments_[old->second].members.erase(ip);
  seg->second.members.insert(ip);
  host_segment_[ip] = vlan_id;
}

void SdnSwitch::set_verifier(Verifier v) {
  std::lock_guard lock(mu_);
  verifier_ = std::move(v);
}

void SdnSwitch::add_isolation_observer(IsolationObserver o) {
  std::lock_guard lock(mu_);
  observers_.push_back(std::move(o));
}

std::uint64_t SdnSwitch::next_entry() { return ++last_entry_; }

SdnSwitch::FlowAddResult SdnSwitch::add_flow_entry(const json& body) {
  std::lock_guard lock(mu_);
  if (!body.is_object()) throw SdnError(400, "flow entry must be a JSON object");
  for (const char* key : {"dpid", "priority", "actions", "match", "table_id"})
    if (!body.contains(key)) throw SdnError(400, std::string("missing field '") + key + "'");
  FlowEntry e;
  try {
    e.dpid = body.at("dpid").get<std::uint64_t>();
    e.priority = body.at("priority").get<int>();
    e.table_id = body.at("table_id").get<int>();
    const auto& actions = body.at("actions");
    if (!actions.is_array() || actions.empty()) throw SdnError(400, "actions must be a non-empty array");
    for (const auto& a : actions)
      e.actions.push_back(FlowAction{a.at("type").get<std::string>(), a.at("port").get<int>()});
    const auto& match = body.at("match");
    auto ip = Ipv4Address::parse(match.at("ipv4_src").get<std::string>());
    if (!ip) throw SdnError(400, "malformed ipv4_src");
    e.ipv4_src = ip->to_string();
    e.eth_type = match.at("eth_type").get<int>();
  } catch (const json::exception& ex) {
    throw SdnError(400, std::string("malformed flow entry: ") + ex.what());
  }
  if (e.eth_type != 2048) throw SdnError(400, "ipv4 matches require eth_type 2048");
  for (const auto& f : flows_) {
    if (f.dpid == e.dpid && f.priority == e.priority && f.actions == e.actions &&
        f.ipv4_src == e.ipv4_src && f.eth_type == e.eth_type && f.table_id == e.table_id)
      return {f.entry_number, false};
  }
  e.entry_number = next_entry();
  e.installed_at = now();
  flows_.push_back(e);
  return {e.entry_number, true};
}

SdnSwitch::FlowAddResult SdnSwitch::add_rate_limit(const std::string& src, int rate_ppm, int priority) {
  std::lock_guard lock(mu_);
  auto ip = Ipv4Address::parse(src);
  if (!ip) throw SdnError(400, "malformed source ip " + src);
  if (rate_ppm < 0) throw SdnError(400, "rate_ppm must be >= 0");
  for (const auto& r : rate_limits_)
    if (r.ipv4_src == ip->to_string() && r.rate_ppm == rate_ppm && r.priority == priority)
      return {r.entry_number, false};
  RateLimitEntry r{next_entry(), ip->to_string(), rate_ppm, priority, now()};
  rate_limits_.push_back(r);
  return {r.entry_number, true};
}

int SdnSwitch::create_vlan(const std::string& name, SegmentKind kind) {
  std::lock_guard lock(mu_);
  if (name.empty()) throw SdnError(400, "vlan name is empty");
  for (const auto& [id, s] : segments_)
    if (s.name == name) throw SdnError(409, "vlan name '" + name + "' already in use");
  for (int id = kFirstDynamicVlan; id <= kMaxVlan; ++id) {
    if (!segments_.count(id)) {
      segments_[id] = VlanSegment{id, name, kind, {}};
      return id;
    }
  }
  throw SdnError(503, "vlan space exhausted");
}

void SdnSwitch::move_host(const std::string& ip, int to, const std::string& action) {
  int from = host_segment_.at(ip);
  segments_[from].members.erase(ip);
  segments_[to].members.insert(ip);
  host_segment_[ip] = to;
  IsolationEvent ev{now(), ip, from, to, action};
  log_.push_back(ev);
  for (const auto& o : observers_) o(ev);
}

void SdnSwitch::isolate_host(const std::string& ip, int vlan_id) {
  std::lock_guard lock(mu_);
  auto cur = host_segment_.find(ip);
  if (cur == host_segment_.end()) throw SdnError(404, "unknown host " + ip);
  if (!segments_.count(vlan_id)) throw SdnError(404, "unknown vlan " + std::to_string(vlan_id));
  if (cur->second == vlan_id) return;
  if (segments_[cur->second].kind != SegmentKind::sandbox) home_segment_[ip] = cur->second;
  verified_.erase(ip);
  move_host(ip, vlan_id, "isolate");
}

void SdnSwitch::restore_host(const std::string& ip) {
  std::lock_guard lock(mu_);
  auto cur = host_segment_.find(ip);
  if (cur == host_segment_.end()) throw SdnError(404, "unknown host " + ip);
  if (segments_[cur->second].kind != SegmentKind::sandbox || !home_segment_.count(ip))
    throw SdnError(409, "host " + ip + " is not isolated");
  if (!verified_.count(ip)) throw SdnError(409, "host " + ip + " not verified clean");
  move_host(ip, home_segment_[ip], "restore");
}

bool SdnSwitch::verify_clean(const std::string& ip) {
  std::lock_guard lock(mu_);
  if (!host_segment_.count(ip)) throw SdnError(404, "unknown host " + ip);
  if (!is_isolated(ip)) throw SdnError(409, "host " + ip + " is not isolated");
  bool clean = verifier_ ? verifier_(ip) : false;
  if (clean) verified_.insert(ip);
  return clean;
}

bool SdnSwitch::knows_host(const std::string& ip) const {
  std::lock_guard lock(mu_);
  return host_segment_.count(ip) > 0;
}

std::optional<int> SdnSwitch::segment_of(const std::string& ip) const {
  std::lock_guard lock(mu_);
  auto it = host_segment_.find(ip);
  if (it == host_segment_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> SdnSwitch::vlan_by_name(const std::string& name) const {
  std::lock_guard lock(mu_);
  for (const auto& [id, s] : segments_)
    if (s.name == name) return id;
  return std::nullopt;
}

bool SdnSwitch::reachable(const std::string& a, const std::string& b) const {
  std::lock_guard lock(mu_);
  auto sa = host_segment_.find(a), sb = host_segment_.find(b);
  return sa != host_segment_.end() && sb != host_segment_.end() && sa->second == sb->second;
}

bool SdnSwitch::is_isolated(const std::string& ip) const {
  std::lock_guard lock(mu_);
  auto it = host_segment_.find(ip);
  return it != host_segment_.end() && segments_.at(it->second).kind == SegmentKind::sandbox;
}

bool SdnSwitch::verified(const std::string& ip) const {
  std::lock_guard lock(mu_);
  return verified_.count(ip) > 0;
}

bool SdnSwitch::consume_rate_budget(const std::string& src, TimePoint t) {
  std::lock_guard lock(mu_);
  const RateLimitEntry* limit = nullptr;
  for (const auto& r : rate_limits_) {
    if (r.ipv4_src == src && r.installed_at <= t && (!limit || r.priority > limit->priority))
      limit = &r;
  }
  if (!limit) return false;
  auto minute = std::chrono::floor<std::chrono::minutes>(t).time_since_epoch().count();
  int& used = rate_usage_[{src, minute}];
  if (used >= limit->rate_ppm) return true;
  ++used;
  return false;
}

bool SdnSwitch::has_rate_limit(const std::string& src) const {
  std::lock_guard lock(mu_);
  return std::any_of(rate_limits_.begin(), rate_limits_.end(),
                     [&](const RateLimitEntry& r) { return r.ipv4_src == src; });
}

std::vector<FlowEntry> SdnSwitch::flow_table() const {
  std::lock_guard lock(mu_);
  return flows_;
}

std::vector<RateLimitEntry> SdnSwitch::rate_limits() const {
  std::lock_guard lock(mu_);
  return rate_limits_;
}

std::vector<IsolationEvent> SdnSwitch::isolation_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::map<int, VlanSegment> SdnSwitch::segments() const {
  std::lock_guard lock(mu_);
  return segments_;
}

json SdnSwitch::topology_json() const {
  std::lock_guard lock(mu_);
  json j;
  j["segments"] = json::array();
  for (const auto& [id, s] : segments_) {
    j["segments"].push_back({{"vlan_id", id},
                             {"name", s.name},
                             {"kind", to_string(s.kind)},
                             {"members", s.members}});
  }
  j["flow_table"] = json::array();
  for (const auto& f : flows_) {
    json actions = json::array();
    for (const auto& a : f.actions) actions.push_back({{"type", a.type}, {"port", a.port}});
    j["flow_table"].push_back({{"entry_number", f.entry_number},
                               {"dpid", f.dpid},
                               {"priority", f.priority},
                               {"actions", actions},
                               {"match", {{"ipv4_src", f.ipv4_src}, {"eth_type", f.eth_type}}},
                               {"table_id", f.table_id},
                               {"installed_at", format_iso8601(f.installed_at)}});
  }
  j["rate_limits"] = json::array();
  for (const auto& r : rate_limits_) {
    j["rate_limits"].push_back({{"entry_number", r.entry_number},
                                {"priority", r.priority},
                                {"actions", json::array({{{"type", "RATE_LIMIT"}, {"rate_ppm", r.rate_ppm}}})},
                                {"match", {{"ipv4_src", r.ipv4_src}, {"eth_type", 2048}}},
                                {"installed_at", format_iso8601(r.installed_at)}});
  }
  j["isolation_log"] = json::array();
  for (const auto& e : log_) {
    j["isolation_log"].push_back({{"time", format_iso8601(e.time)},
                                  {"host", e.host},
                                  {"from_vlan", e.from_vlan},
                                  {"to_vlan", e.to_vlan},
                                  {"action", e.action}});
  }
  j["verified"] = verified_;
  return j;
}

void SdnSwitch::check_auth(const HttpRequest& request) const {
  for (const auto& [name, value] : request.headers) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (lower == "authorization") {
      if (value == "Basic " + config_.auth_token) return;
      throw SdnError(401, "bad credential");
    }
  }
  throw SdnError(401, "missing credential");
}

namespace {

std::string host_of(const json& body) {
  auto h = body.find("host");
  if (h == body.end() || !h->is_string()) throw SdnError(400, "missing field 'host'");
  return h->get<std::string>();
}

}  // namespace

HttpResponse SdnSwitch::handle(const HttpRequest& request) {
  const std::string path = url_path(request.url);
  try {
    if (path == "/topology") {
      if (request.method != "GET") throw SdnError(405, "use GET");
      return json_response(200, topology_json().dump());
    }
    static const std::set<std::string> kPost = {"/stats/flowentry/add", "/stats/ratelimit/add",
                                                "/vlan/create", "/host/isolate", "/host/verify",
                                                "/host/restore"};
    if (!kPost.count(path)) throw SdnError(404, "no such endpoint " + path);
    if (request.method != "POST") throw SdnError(405, "use POST");
    check_auth(request);
    json body = parse_body(request.body);
    if (!body.is_object()) throw SdnError(400, "request body must be a JSON object");

    if (path == "/stats/flowentry/add") {
      auto r = add_flow_entry(body);
      return json_response(200, json{{"entry_number", r.entry_number}}.dump());
    }
    if (path == "/stats/ratelimit/add") {
      std::vector<std::string> sources;
      auto s = body.find("sources");
      if (s == body.end()) throw SdnError(400, "missing field 'sources'");
      if (s->is_array()) {
        for (const auto& v : *s) sources.push_back(v.get<std::string>());
      } else if (s->is_string()) {
        std::string_view rest = s->get_ref<const std::string&>();
        while (!rest.empty()) {
          auto comma = rest.find(',');
          if (auto item = rest.substr(0, comma); !item.empty()) sources.emplace_back(item);
          if (comma == std::string_view::npos) break;
          rest.remove_prefix(comma + 1);
        }
      }
      if (sources.empty()) throw SdnError(400, "sources is empty");
      auto rate = body.find("rate_ppm");
      if (rate == body.end() || !rate->is_number_integer()) throw SdnError(400, "missing field 'rate_ppm'");
      int priority = body.value("priority", 20);
      json numbers = json::array();
      for (const auto& src : sources) numbers.push_back(add_rate_limit(src, rate->get<int>(), priority).entry_number);
      return json_response(200, json{{"entry_numbers", numbers}}.dump());
    }
    if (path == "/vlan/create") {
      auto name = body.value("name", std::string());
      auto kind_name = body.value("kind", std::string("sandbox"));
      SegmentKind kind = kind_name == "operational" ? SegmentKind::operational : SegmentKind::sandbox;
      if (kind_name != "operational" && kind_name != "sandbox") throw SdnError(400, "unknown vlan kind " + kind_name);
      int id = create_vlan(name, kind);
      return json_response(200, json{{"vlan_id", id}, {"name", name}}.dump());
    }
    if (path == "/host/isolate") {
      auto host = host_of(body);
      int vlan = 0;
      if (auto v = body.find("vlan_id"); v != body.end() && v->is_number_integer()) {
        vlan = v->get<int>();
      } else if (auto n = body.find("vlan"); n != body.end() && n->is_string()) {
        auto id = vlan_by_name(n->get<std::string>());
        if (!id) throw SdnError(404, "unknown vlan " + n->get<std::string>());
        vlan = *id;
      } else {
        throw SdnError(400, "missing field 'vlan_id'");
      }
      isolate_host(host, vlan);
      return json_response(200, json{{"host", host}, {"vlan_id", vlan}}.dump());
    }
    if (path == "/host/verify") {
      auto host = host_of(body);
      bool clean = verify_clean(host);
      return json_response(clean ? 200 : 409, json{{"host", host}, {"clean", clean}}.dump());
    }
    auto host = host_of(body);  // /host/restore
    restore_host(host);
    return json_response(200, json{{"host", host}, {"vlan_id", *segment_of(host)}}.dump());
  } catch (const SdnError& e) {
    return error_response(e.status(), e.what());
  } catch (const json::exception& e) {
    return error_response(400, e.what());
  }
}

}  // namespace amiroar::sdn
