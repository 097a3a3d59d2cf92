#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "gazechain/error.hpp"

namespace gazechain {

/// Integer currency in smallest units; 10^18 units make one ETH-equivalent.
/// Signed so that net changes can be expressed with the same type.
class Amount {
 public:
  using Rep = __int128;
  static constexpr int kDecimals = 18;
  static constexpr Rep kUnitsPerEth = static_cast<Rep>(1'000'000'000'000'000'000LL);

  constexpr Amount() noexcept = default;

  static constexpr Amount units(Rep u) noexcept { return Amount(u); }
  static constexpr Amount eth(std::int64_t whole) noexcept { return Amount(whole * kUnitsPerEth); }

  /// Parses "1", "0.025", "1.000000000000000001". At most 18 fractional digits,
  /// no sign, no exponent.
  static Amount parse_eth(std::string_view text) {
    if (text.empty()) throw Error(ErrorKind::Parse, "empty amount");
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (dot != std::string_view::npos && frac.empty()) {
      throw Error(ErrorKind::Parse, "amount '" + std::string(text) + "' has a trailing dot");
    }
    if (whole.empty()) throw Error(ErrorKind::Parse, "amount '" + std::string(text) + "' has no integer part");
    if (frac.size() > kDecimals) {
      throw Error(ErrorKind::Parse, "amount '" + std::string(text) + "' has more than 18 fractional digits");
    }
    // 10^38 / 10^18 bounds the integer part well inside __int128.
    if (whole.size() > 19) throw Error(ErrorKind::Parse, "amount '" + std::string(text) + "' is too large");

    Rep value = 0;
    for (char c : whole) value = value * 10 + digit(c, text);
    for (char c : frac) value = value * 10 + digit(c, text);
    for (std::size_t i = frac.size(); i < kDecimals; ++i) value *= 10;
    return Amount(value);
  }

  /// Minimal decimal ETH text: no trailing fractional zeros, "0" for zero.
  std::string to_eth_string() const {
    Rep v = value_;
    bool negative = v < 0;
    if (negative) v = -v;
    std::string whole = digits_of(v / kUnitsPerEth);
    std::string frac = digits_of(v % kUnitsPerEth);
    frac.insert(0, kDecimals - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    std::string out = negative ? "-" : "";
    out += whole;
    if (!frac.empty()) out += "." + frac;
    return out;
  }

  /// Decimal count of smallest units.
  std::string to_units_string() const {
    if (value_ < 0) return "-" + digits_of(-value_);
    return digits_of(value_);
  }

  static Amount parse_units(std::string_view text) {
    bool negative = text.starts_with('-');
    if (negative) text.remove_prefix(1);
    if (text.empty() || text.size() > 38) throw Error(ErrorKind::Parse, "invalid unit count");
    Rep value = 0;
    for (char c : text) value = value * 10 + digit(c, text);
    return Amount(negative ? -value : value);
  }

  constexpr Rep raw() const noexcept { return value_; }

  constexpr Amount operator+(Amount o) const noexcept { return Amount(value_ + o.value_); }
  constexpr Amount operator-(Amount o) const noexcept { return Amount(value_ - o.value_); }
  constexpr Amount operator-() const noexcept { return Amount(-value_); }
  constexpr Amount operator*(std::int64_t k) const noexcept { return Amount(value_ * k); }
  constexpr Amount& operator+=(Amount o) noexcept { value_ += o.value_; return *this; }
  constexpr Amount& operator-=(Amount o) noexcept { value_ -= o.value_; return *this; }

  constexpr auto operator<=>(const Amount&) const noexcept = default;

 private:
  constexpr explicit Amount(Rep v) noexcept : value_(v) {}

  static Rep digit(char c, std::string_view context) {
    if (c < '0' || c > '9') throw Error(ErrorKind::Parse, "invalid digit in amount '" + std::string(context) + "'");
    return c - '0';
  }

  static std::string digits_of(Rep v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    return s;
  }

  Rep value_ = 0;
};

constexpr Amount operator*(std::int64_t k, Amount a) noexcept { return a * k; }

inline std::ostream& operator<<(std::ostream& os, Amount a) { return os << a.to_eth_string() << " ETH"; }

}  // namespace gazechain
