#pragma once

#include <optional>

#include "amiroar/sdn/switch.hpp"
#include "amiroar/sim/messages.hpp"

namespace amiroar::sim {

/// Delivers iff both endpoints share a segment and the source is within any
/// rate limit installed on the switch. Without a switch everything passes.
std::optional<DlmsMessage> apply_network_policy(const DlmsMessage& msg, sdn::SdnSwitch* topology);

}  // namespace amiroar::sim
