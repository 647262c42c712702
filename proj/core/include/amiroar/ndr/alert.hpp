#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amiroar/common/time.hpp"
#include "amiroar/ndr/protocol_log.hpp"

namespace amiroar::ndr {

inline constexpr std::string_view kFdiSignature = "AMI-FDI-001";
inline constexpr std::string_view kDdosSignature = "AMI-DDOS-001";

enum class DeviceClass { meter, headend, both };
std::string_view to_string(DeviceClass c);
std::optional<DeviceClass> device_class_from_string(std::string_view s);

struct Alert {
  std::string alert_id;
  std::string signature_id;
  std::string name;
  int severity = 0;
  std::string victim_ip;
  std::string offender_ip;
  DeviceClass device_class = DeviceClass::meter;
  /// Set for FDI alerts: the implicated meter and/or Headend.
  std::string suspect_meter_ip;
  std::string suspect_headend_ip;
  /// Every offending source; for DDoS this is the full attacker set.
  std::vector<std::string> offender_ips;
  TimePoint detection_time;
  /// Offending records. Only the count travels in the CEF line.
  std::vector<ProtocolLogRecord> evidence;
  std::size_t evidence_count = 0;

  bool is_fdi() const { return signature_id == kFdiSignature; }
  bool is_ddos() const { return signature_id == kDdosSignature; }
};

/// `CEF:0|PHOENI2X|AMI-NDR|1.0|<sig>|<name>|<severity>|<extension>`. Header
/// fields escape `\` and `|`; extension values escape `\`, `=` and newlines.
/// Severity is clamped to [0, 10].
std::string emit_cef(const Alert& a);

/// Inverse of emit_cef for the fields carried in the line. Throws
/// std::invalid_argument on malformed input.
Alert parse_cef(std::string_view line);

/// Splits the raw extension into unescaped key/value pairs.
std::map<std::string, std::string> parse_cef_extension(std::string_view ext);

std::string escape_cef_header(std::string_view s);
std::string escape_cef_value(std::string_view s);

/// `fdi-20230715T113300-10-0-0-7`
std::string make_alert_id(std::string_view prefix, TimePoint t, std::string_view ip);

}  // namespace amiroar::ndr
