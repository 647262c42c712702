#include "amiroar/ndr/protocol_log.hpp"

#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace amiroar::ndr {

ProtocolLogRecord dissect(const sim::DlmsMessage& m) {
  ProtocolLogRecord r;
  r.timestamp = m.timestamp;
  r.session_id = m.session_id;
  r.msg_type = m.msg_type;
  r.src_ip = m.src_ip.to_string();
  r.dst_ip = m.dst_ip.to_string();
  r.meter_id = m.meter_id;
  r.quantity = m.quantity;
  if (m.measurement) {
    r.value = m.measurement->value;
    r.unit = m.measurement->unit;
  }
  r.credential = m.credential;
  return r;
}

sim::DlmsMessage reassemble(const ProtocolLogRecord& r) {
  sim::DlmsMessage m;
  m.msg_type = r.msg_type;
  m.session_id = r.session_id;
  m.src_ip = Ipv4Address::from_string(r.src_ip);
  m.dst_ip = Ipv4Address::from_string(r.dst_ip);
  m.timestamp = r.timestamp;
  m.meter_id = r.meter_id;
  m.quantity = r.quantity;
  if (r.value && r.quantity)
    m.measurement = sim::Measurement{r.meter_id, *r.quantity, *r.value, r.unit, r.timestamp};
  m.credential = r.credential;
  return m;
}

nlohmann::json to_json(const ProtocolLogRecord& r) {
  nlohmann::json j;
  j["timestamp"] = format_iso8601(r.timestamp);
  j["session_id"] = r.session_id;
  j["msg_type"] = sim::to_string(r.msg_type);
  j["src_ip"] = r.src_ip;
  j["dst_ip"] = r.dst_ip;
  j["meter_id"] = r.meter_id;
  if (r.quantity) j["quantity"] = sim::to_string(*r.quantity);
  if (r.value) {
    j["value"] = *r.value;
    j["unit"] = r.unit;
  }
  if (r.credential) j["credential"] = *r.credential;
  return j;
}

std::string to_line(const ProtocolLogRecord& r) { return to_json(r).dump(); }

Dissector::Dissector(Sink sink, std::ostream* log) : sink_(std::move(sink)), log_(log) {}

ProtocolLogRecord Dissector::emit(const sim::DlmsMessage& m) {
  auto r = dissect(m);
  ++dissected_;
  if (log_) *log_ << to_line(r) << '\n';
  if (sink_) sink_(r);
  return r;
}

std::optional<ProtocolLogRecord> Dissector::feed(const sim::DlmsMessage& m) { return emit(m); }

std::optional<ProtocolLogRecord> Dissector::feed_line(std::string_view line) {
  try {
    return emit(sim::parse_line(line));
  } catch (const std::invalid_argument&) {
    ++malformed_;
    return std::nullopt;
  }
}

}  // namespace amiroar::ndr
