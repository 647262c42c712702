#include "amiroar/sim/attacks.hpp"

namespace amiroar::sim {

bool is_power_quantity(Quantity q) {
  return q == Quantity::active_power || q == Quantity::reactive_power ||
         q == Quantity::apparent_power;
}

DlmsMessage inject_fdi(DlmsMessage msg, const FdiParams& params) {
  if (msg.msg_type != MsgType::read_resp || !msg.measurement ||
      !is_power_quantity(msg.measurement->quantity))
    return msg;
  msg.measurement->value *= params.multiplier * (params.sign_flip ? -1.0 : 1.0);
  return msg;
}

std::optional<DlmsMessage> inject_tamper_drop(DlmsMessage msg, double drop_probability, double u) {
  if (u < drop_probability) return std::nullopt;
  return msg;
}

}  // namespace amiroar::sim
