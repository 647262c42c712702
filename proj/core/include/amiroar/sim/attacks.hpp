#pragma once

#include <optional>
#include <random>

#include "amiroar/sim/inventory.hpp"
#include "amiroar/sim/messages.hpp"

namespace amiroar::sim {

/// True for the quantities an FDI attack rewrites.
bool is_power_quantity(Quantity q);

/// Scales the value of a READ_RESP power reading by multiplier (negated with
/// sign_flip). Other messages come back unchanged; the caller decides whether
/// the message is in scope.
DlmsMessage inject_fdi(DlmsMessage msg, const FdiParams& params);

/// Drops the message with the configured probability. `u` is a uniform draw
/// in [0, 1).
std::optional<DlmsMessage> inject_tamper_drop(DlmsMessage msg, double drop_probability, double u);

}  // namespace amiroar::sim
