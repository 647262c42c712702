#include "amiroar/common/ipv4.hpp"

#include <stdexcept>

namespace amiroar {

std::optional<Ipv4Address> Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  int octets = 0;
  std::size_t i = 0;
  while (octets < 4) {
    if (i >= text.size()) return std::nullopt;
    unsigned octet = 0;
    std::size_t digits = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      octet = octet * 10 + static_cast<unsigned>(text[i] - '0');
      if (++digits > 3 || octet > 255) return std::nullopt;
      ++i;
    }
    if (digits == 0) return std::nullopt;
    value = (value << 8) | octet;
    ++octets;
    if (octets < 4) {
      if (i >= text.size() || text[i] != '.') return std::nullopt;
      ++i;
    }
  }
  if (i != text.size()) return std::nullopt;
  return Ipv4Address{value};
}

Ipv4Address Ipv4Address::from_string(std::string_view text) {
  auto a = parse(text);
  if (!a) throw std::invalid_argument("malformed IPv4 address: '" + std::string(text) + "'");
  return *a;
}

std::string Ipv4Address::to_string() const {
  return std::to_string((value_ >> 24) & 0xff) + '.' + std::to_string((value_ >> 16) & 0xff) + '.' +
         std::to_string((value_ >> 8) & 0xff) + '.' + std::to_string(value_ & 0xff);
}

}  // namespace amiroar
