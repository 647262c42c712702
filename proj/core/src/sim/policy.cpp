#include "amiroar/sim/policy.hpp"

namespace amiroar::sim {

std::optional<DlmsMessage> apply_network_policy(const DlmsMessage& msg, sdn::SdnSwitch* topology) {
  if (!topology) return msg;
  const auto src = msg.src_ip.to_string();
  if (!topology->reachable(src, msg.dst_ip.to_string())) return std::nullopt;
  if (topology->consume_rate_budget(src, msg.timestamp)) return std::nullopt;
  return msg;
}

}  // namespace amiroar::sim
