#include "amiroar/sim/messages.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace amiroar::sim {

namespace {

constexpr std::pair<MsgType, std::string_view> kMsgTypes[] = {{MsgType::assoc_req, "ASSOC_REQ"},
                                                              {MsgType::assoc_resp, "ASSOC_RESP"},
                                                              {MsgType::read_req, "READ_REQ"},
                                                              {MsgType::read_resp, "READ_RESP"}};

constexpr std::pair<Quantity, std::string_view> kQuantities[] = {
    {Quantity::current, "current"},
    {Quantity::voltage, "voltage"},
    {Quantity::active_power, "active_power"},
    {Quantity::reactive_power, "reactive_power"},
    {Quantity::apparent_power, "apparent_power"}};

}  // namespace

std::string_view to_string(MsgType t) {
  for (auto& [k, v] : kMsgTypes)
    if (k == t) return v;
  return "?";
}

std::string_view to_string(Quantity q) {
  for (auto& [k, v] : kQuantities)
    if (k == q) return v;
  return "?";
}

std::optional<MsgType> msg_type_from_string(std::string_view s) {
  for (auto& [k, v] : kMsgTypes)
    if (v == s) return k;
  return std::nullopt;
}

std::optional<Quantity> quantity_from_string(std::string_view s) {
  for (auto& [k, v] : kQuantities)
    if (v == s) return k;
  return std::nullopt;
}

std::string_view unit_of(Quantity q) {
  switch (q) {
    case Quantity::current: return "A";
    case Quantity::voltage: return "V";
    case Quantity::active_power: return "kW";
    case Quantity::reactive_power: return "kvar";
    case Quantity::apparent_power: return "kVA";
  }
  return "";
}

nlohmann::json to_json(const DlmsMessage& m) {
  nlohmann::json j;
  j["msg_type"] = to_string(m.msg_type);
  j["session_id"] = m.session_id;
  j["src_ip"] = m.src_ip.to_string();
  j["dst_ip"] = m.dst_ip.to_string();
  j["ts"] = to_epoch_ms(m.timestamp);
  j["meter_id"] = m.meter_id;
  if (m.quantity) j["quantity"] = to_string(*m.quantity);
  if (m.credential) j["credential"] = *m.credential;
  if (m.measurement) {
    j["value"] = m.measurement->value;
    j["unit"] = m.measurement->unit;
  }
  return j;
}

DlmsMessage message_from_json(const nlohmann::json& j) {
  auto need = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("message lacks '") + key + "'");
    return *it;
  };
  try {
    DlmsMessage m;
    auto type = msg_type_from_string(need("msg_type").get<std::string>());
    if (!type) throw std::invalid_argument("unknown msg_type");
    m.msg_type = *type;
    m.session_id = need("session_id").get<std::uint64_t>();
    m.src_ip = Ipv4Address::from_string(need("src_ip").get<std::string>());
    m.dst_ip = Ipv4Address::from_string(need("dst_ip").get<std::string>());
    m.timestamp = from_epoch_ms(need("ts").get<std::int64_t>());
    m.meter_id = need("meter_id").get<std::string>();
    if (auto q = j.find("quantity"); q != j.end()) {
      m.quantity = quantity_from_string(q->get<std::string>());
      if (!m.quantity) throw std::invalid_argument("unknown quantity");
    }
    if (auto c = j.find("credential"); c != j.end()) m.credential = c->get<std::string>();
    if (j.contains("value")) {
      if (!m.quantity) throw std::invalid_argument("value without quantity");
      m.measurement = Measurement{m.meter_id, *m.quantity, need("value").get<double>(),
                                  need("unit").get<std::string>(), m.timestamp};
    }
    if (m.msg_type == MsgType::read_resp && !m.measurement)
      throw std::invalid_argument("READ_RESP without value");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed message: ") + e.what());
  }
}

std::string to_line(const DlmsMessage& m) { return to_json(m).dump(); }

DlmsMessage parse_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line.begin(), line.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed message line: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("message line is not an object");
  return message_from_json(j);
}

}  // namespace amiroar::sim
