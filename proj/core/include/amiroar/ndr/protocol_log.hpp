#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "amiroar/sim/messages.hpp"

namespace amiroar::ndr {

/// Dissected view of one message; carries every DlmsMessage field so the
/// message can be rebuilt from the record.
struct ProtocolLogRecord {
  TimePoint timestamp;
  std::uint64_t session_id = 0;
  sim::MsgType msg_type = sim::MsgType::assoc_req;
  std::string src_ip;
  std::string dst_ip;
  std::string meter_id;
  std::optional<sim::Quantity> quantity;
  std::optional<double> value;
  std::string unit;
  std::optional<std::string> credential;

  bool operator==(const ProtocolLogRecord&) const = default;
};

ProtocolLogRecord dissect(const sim::DlmsMessage& m);
sim::DlmsMessage reassemble(const ProtocolLogRecord& r);

nlohmann::json to_json(const ProtocolLogRecord& r);
std::string to_line(const ProtocolLogRecord& r);

/// Dissects capture lines, counting (and skipping) malformed ones.
class Dissector {
 public:
  using Sink = std::function<void(const ProtocolLogRecord&)>;

  explicit Dissector(Sink sink = {}, std::ostream* log = nullptr);

  std::optional<ProtocolLogRecord> feed(const sim::DlmsMessage& m);
  std::optional<ProtocolLogRecord> feed_line(std::string_view line);

  std::uint64_t malformed() const { return malformed_; }
  std::uint64_t dissected() const { return dissected_; }

 private:
  ProtocolLogRecord emit(const sim::DlmsMessage& m);

  Sink sink_;
  std::ostream* log_;
  std::uint64_t malformed_ = 0;
  std::uint64_t dissected_ = 0;
};

}  // namespace amiroar::ndr
