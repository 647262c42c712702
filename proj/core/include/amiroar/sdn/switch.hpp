#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amiroar/common/http.hpp"
#include "amiroar/common/time.hpp"

// Mock SDN switch: flow table, rate-limit entries and VLAN segments. Two
// hosts can exchange traffic iff they share a segment; flow entries are
// recorded but never bridge segments.

namespace amiroar::sdn {

enum class SegmentKind { operational, sandbox, lab };
std::string_view to_string(SegmentKind k);

inline constexpr int kOperationalVlan = 1;
inline constexpr int kFirstDynamicVlan = 100;
inline constexpr int kMaxVlan = 4094;

struct VlanSegment {
  int vlan_id = 0;
  std::string name;
  SegmentKind kind = SegmentKind::operational;
  std::set<std::string> members;
};

struct FlowAction {
  std::string type;
  int port = 0;
  bool operator==(const FlowAction&) const = default;
};

struct FlowEntry {
  std::uint64_t entry_number = 0;
  std::uint64_t dpid = 0;
  int priority = 0;
  std::vector<FlowAction> actions;
  std::string ipv4_src;
  int eth_type = 0;
  int table_id = 0;
  TimePoint installed_at;
};

/// Per-source message budget: at most `rate_ppm` messages from `ipv4_src`
/// per wall-minute of virtual time; the rest are dropped.
struct RateLimitEntry {
  std::uint64_t entry_number = 0;
  std::string ipv4_src;
  int rate_ppm = 0;
  int priority = 0;
  TimePoint installed_at;
};

struct IsolationEvent {
  TimePoint time;
  std::string host;
  int from_vlan = 0;
  int to_vlan = 0;
  std::string action;  ///< isolate | restore
};

struct SdnConfig {
  /// Raw value expected after `Basic ` in the Authorization header.
  std::string auth_token = "user:ORWoIJZrgrb9S4jYUy0";
  std::string lab_vlan_name = "lab";
  int lab_vlan_id = 999;
};

/// Error with the HTTP status the REST front end should answer with.
class SdnError : public std::runtime_error {
 public:
  SdnError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class SdnSwitch {
 public:
  using Clock = std::function<TimePoint()>;
  /// Decides verify_clean(); receives the host ip.
  using Verifier = std::function<bool(const std::string&)>;
  using IsolationObserver = std::function<void(const IsolationEvent&)>;

  explicit SdnSwitch(SdnConfig config = {}, Clock clock = {});

  const SdnConfig& config() const { return config_; }

  /// Registers an inventory host in the given segment (operational by default).
  void add_host(const std::string& ip, int vlan_id = kOperationalVlan);
  void set_verifier(Verifier v);
  void add_isolation_observer(IsolationObserver o);

  struct FlowAddResult {
    std::uint64_t entry_number;
    bool created;
  };
  /// Body as in the switch's flowentry API: dpid, priority, actions, match,
  /// table_id. Throws SdnError(400) on missing fields or a malformed ip.
  FlowAddResult add_flow_entry(const nlohmann::json& body);
  FlowAddResult add_rate_limit(const std::string& ipv4_src, int rate_ppm, int priority = 20);

  int create_vlan(const std::string& name, SegmentKind kind = SegmentKind::sandbox);
  void isolate_host(const std::string& ip, int vlan_id);
  void restore_host(const std::string& ip);
  bool verify_clean(const std::string& ip);

  bool knows_host(const std::string& ip) const;
  std::optional<int> segment_of(const std::string& ip) const;
  std::optional<int> vlan_by_name(const std::string& name) const;
  bool reachable(const std::string& a, const std::string& b) const;
  bool is_isolated(const std::string& ip) const;
  bool verified(const std::string& ip) const;
  /// Counts the message against the source's budget; true when it must be dropped.
  bool consume_rate_budget(const std::string& src, TimePoint t);
  bool has_rate_limit(const std::string& src) const;

  std::vector<FlowEntry> flow_table() const;
  std::vector<RateLimitEntry> rate_limits() const;
  std::vector<IsolationEvent> isolation_log() const;
  std::map<int, VlanSegment> segments() const;
  nlohmann::json topology_json() const;

  /// REST front end shared by the in-process connector and the HTTP server.
  HttpResponse handle(const HttpRequest& request);

 private:
  TimePoint now() const { return clock_ ? clock_() : TimePoint{}; }
  void move_host(const std::string& ip, int to, const std::string& action);
  std::uint64_t next_entry();
  void check_auth(const HttpRequest& request) const;

  mutable std::recursive_mutex mu_;
  SdnConfig config_;
  Clock clock_;
  Verifier verifier_;
  std::vector<IsolationObserver> observers_;
  std::map<int, VlanSegment> segments_;
  std::map<std::string, int> host_segment_;
  std::map<std::string, int> home_segment_;  // segment before first isolation
  std::set<std::string> verified_;
  std::vector<FlowEntry> flows_;
  std::vector<RateLimitEntry> rate_limits_;
  std::map<std::pair<std::string, std::int64_t>, int> rate_usage_;
  std::vector<IsolationEvent> log_;
  std::uint64_t last_entry_ = 0;
};

/// Parses a request body, also accepting single-quoted string literals as
/// found in hand-written curl examples. Throws SdnError(400).
nlohmann::json parse_body(std::string_view body);

}  // namespace amiroar::sdn
