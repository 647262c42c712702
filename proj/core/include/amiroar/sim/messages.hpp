#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "amiroar/common/ipv4.hpp"
#include "amiroar/common/time.hpp"

namespace amiroar::sim {

enum class MsgType { assoc_req, assoc_resp, read_req, read_resp };
enum class Quantity { current, voltage, active_power, reactive_power, apparent_power };

std::string_view to_string(MsgType t);  ///< ASSOC_REQ, ...
std::string_view to_string(Quantity q);
std::optional<MsgType> msg_type_from_string(std::string_view s);
std::optional<Quantity> quantity_from_string(std::string_view s);
/// Unit of the scaled value as carried on the wire: A, V, kW, kvar, kVA.
std::string_view unit_of(Quantity q);

constexpr Quantity kAllQuantities[] = {Quantity::current, Quantity::voltage, Quantity::active_power,
                                       Quantity::reactive_power, Quantity::apparent_power};

struct Measurement {
  std::string meter_id;
  Quantity quantity = Quantity::apparent_power;
  double value = 0.0;
  std::string unit;
  TimePoint timestamp;

  bool operator==(const Measurement&) const = default;
};

/// One DLMS/COSEM exchange unit. `quantity` is set on READ_REQ and
/// READ_RESP, `measurement` only on READ_RESP, `credential` only on ASSOC_REQ.
/// Session id 0 marks traffic outside any association (flood requests).
struct DlmsMessage {
  MsgType msg_type = MsgType::assoc_req;
  std::uint64_t session_id = 0;
  Ipv4Address src_ip;
  Ipv4Address dst_ip;
  TimePoint timestamp;
  std::string meter_id;
  std::optional<Quantity> quantity;
  std::optional<Measurement> measurement;
  std::optional<std::string> credential;

  bool operator==(const DlmsMessage&) const = default;
};

nlohmann::json to_json(const DlmsMessage& m);
/// Throws std::invalid_argument on missing or ill-typed fields.
DlmsMessage message_from_json(const nlohmann::json& j);

/// One capture line, no trailing newline.
std::string to_line(const DlmsMessage& m);
/// Throws std::invalid_argument on malformed input.
DlmsMessage parse_line(std::string_view line);

}  // namespace amiroar::sim
