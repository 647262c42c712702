#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

#include "amiroar/ndr/alert.hpp"

namespace amiroar::ndr {

std::string_view to_string(DeviceClass c) {
  switch (c) {
    case DeviceClass::meter: return "meter";
    case DeviceClass::headend: return "headend";
    case DeviceClass::both: return "both";
  }
  return "?";
}

std::optional<DeviceClass> device_class_from_string(std::string_view s) {
  if (s == "meter") return DeviceClass::meter;
  if (s == "headend") return DeviceClass::headend;
  if (s == "both") return DeviceClass::both;
  return std::nullopt;
}

std::string escape_cef_header(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\' || c == '|') out.push_back('\\');
    if (c == '\n' || c == '\r') {
      out.push_back(' ');
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string escape_cef_value(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '=': out += "\\="; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string make_alert_id(std::string_view prefix, TimePoint t, std::string_view ip) {
  auto iso = format_iso8601(t);  // 2023-07-15T11:33:00.000Z
  std::string stamp;
  for (char c : iso.substr(0, 19))
    if (c != '-' && c != ':') stamp.push_back(c);
  std::string host(ip);
  std::replace(host.begin(), host.end(), '.', '-');
  return std::string(prefix) + "-" + stamp + "-" + host;
}

std::string emit_cef(const Alert& a) {
  const int severity = std::clamp(a.severity, 0, 10);
  std::ostringstream os;
  os << "CEF:0|PHOENI2X|AMI-NDR|1.0|" << escape_cef_header(a.signature_id) << '|'
     << escape_cef_header(a.name) << '|' << severity << '|';
  os << "src=" << escape_cef_value(a.offender_ip) << " dst=" << escape_cef_value(a.victim_ip)
     << " cs1Label=deviceClass cs1=" << to_string(a.device_class)
     << " cs2Label=alertId cs2=" << escape_cef_value(a.alert_id);
  if (!a.suspect_meter_ip.empty())
    os << " cs3Label=suspectMeter cs3=" << escape_cef_value(a.suspect_meter_ip);
  if (!a.suspect_headend_ip.empty())
    os << " cs4Label=suspectHeadend cs4=" << escape_cef_value(a.suspect_headend_ip);
  if (!a.offender_ips.empty()) {
    std::string joined;
    for (const auto& ip : a.offender_ips) {
      if (!joined.empty()) joined.push_back(',');
      joined += ip;
    }
    os << " cs5Label=offenders cs5=" << escape_cef_value(joined);
  }
  os << " rt=" << to_epoch_ms(a.detection_time) << " cnt=" << std::max(a.evidence_count, a.evidence.size());
  return os.str();
}

std::map<std::string, std::string> parse_cef_extension(std::string_view ext) {
  std::vector<std::size_t> eqs;
  for (std::size_t i = 0; i < ext.size(); ++i) {
    if (ext[i] == '\\') {
      ++i;
    } else if (ext[i] == '=') {
      eqs.push_back(i);
    }
  }
  auto unescape = [](std::string_view v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == '\\' && i + 1 < v.size()) {
        char n = v[++i];
        out.push_back(n == 'n' ? '\n' : n == 'r' ? '\r' : n);
      } else {
        out.push_back(v[i]);
      }
    }
    return out;
  };
  std::vector<std::size_t> key_begin(eqs.size());
  for (std::size_t k = 0; k < eqs.size(); ++k) {
    std::size_t floor = k == 0 ? 0 : eqs[k - 1] + 1;
    auto space = ext.substr(0, eqs[k]).find_last_of(' ');
    key_begin[k] = (space == std::string_view::npos || space < floor) ? floor : space + 1;
  }
  std::map<std::string, std::string> out;
  for (std::size_t k = 0; k < eqs.size(); ++k) {
    auto key = ext.substr(key_begin[k], eqs[k] - key_begin[k]);
    if (key.empty()) throw std::invalid_argument("CEF extension has an empty key");
    std::size_t vend = k + 1 < eqs.size() ? key_begin[k + 1] : ext.size();
    auto value = ext.substr(eqs[k] + 1, vend - eqs[k] - 1);
    if (k + 1 < eqs.size() && !value.empty() && value.back() == ' ') value.remove_suffix(1);
    out[std::string(key)] = unescape(value);
  }
  return out;
}

Alert parse_cef(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (!line.starts_with("CEF:")) throw std::invalid_argument("not a CEF line");
  std::vector<std::string> header;
  std::string cur;
  std::size_t i = 4;
  for (; i < line.size() && header.size() < 7; ++i) {
    char c = line[i];
    if (c == '\\' && i + 1 < line.size()) {
      cur.push_back(line[++i]);
    } else if (c == '|') {
      header.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (header.size() != 7) throw std::invalid_argument("CEF header has fewer than 7 fields");
  if (header[0] != "0") throw std::invalid_argument("unsupported CEF version " + header[0]);

  Alert a;
  a.signature_id = header[4];
  a.name = header[5];
  {
    const auto& sev = header[6];
    auto [p, ec] = std::from_chars(sev.data(), sev.data() + sev.size(), a.severity);
    if (ec != std::errc{} || p != sev.data() + sev.size())
      throw std::invalid_argument("CEF severity is not an integer");
  }
  auto ext = parse_cef_extension(line.substr(i));
  auto get = [&](const char* key) {
    auto it = ext.find(key);
    return it == ext.end() ? std::string() : it->second;
  };
  a.offender_ip = get("src");
  a.victim_ip = get("dst");
  if (auto dc = device_class_from_string(get("cs1"))) {
    a.device_class = *dc;
  } else {
    throw std::invalid_argument("CEF line lacks a valid deviceClass");
  }
  a.alert_id = get("cs2");
  if (a.alert_id.empty()) throw std::invalid_argument("CEF line lacks alertId");
  a.suspect_meter_ip = get("cs3");
  a.suspect_headend_ip = get("cs4");
  if (auto list = get("cs5"); !list.empty()) {
    std::string_view rest = list;
    while (!rest.empty()) {
      auto comma = rest.find(',');
      a.offender_ips.emplace_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  try {
    a.detection_time = from_epoch_ms(std::stoll(get("rt")));
    a.evidence_count = get("cnt").empty() ? 0 : std::stoull(get("cnt"));
  } catch (const std::exception&) {
    throw std::invalid_argument("CEF line has a malformed rt or cnt");
  }
  return a;
}

}  // namespace amiroar::ndr
