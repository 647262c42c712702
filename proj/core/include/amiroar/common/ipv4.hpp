#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace amiroar {

class Ipv4Address {
 public:
  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t value) : value_(value) {}

  /// Dotted-quad parse; octets may carry leading zeros, which are normalized away.
  static std::optional<Ipv4Address> parse(std::string_view text);
  /// Like parse() but throws std::invalid_argument naming the input.
  static Ipv4Address from_string(std::string_view text);

  constexpr std::uint32_t value() const { return value_; }
  std::string to_string() const;

  constexpr auto operator<=>(const Ipv4Address&) const = default;

 private:
  std::uint32_t value_ = 0;
};

}  // namespace amiroar

template <>
struct std::hash<amiroar::Ipv4Address> {
  std::size_t operator()(const amiroar::Ipv4Address& a) const noexcept {
    return std::hash<std::uint32_t>{}(a.value());
  }
};
