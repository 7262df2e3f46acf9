#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace citetail {

/// Shortest decimal string that round-trips to `v`.
inline std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed-point rendering with half-up rounding applied to the shortest
/// decimal representation of `v`, so 0.0125 renders as "0.013" regardless of
/// its binary expansion. Locale independent.
inline std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (digits < 0) digits = 0;

  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  std::string sci(buf, res.ptr);
  const bool negative = sci.front() == '-';
  if (negative) sci.erase(0, 1);
  const auto epos = sci.find('e');
  const int point = std::stoi(sci.substr(epos + 1)) + 1;  // integer digit count
  std::string mant;
  for (char c : sci.substr(0, epos))
    if (c != '.') mant.push_back(c);
  const int len = static_cast<int>(mant.size());

  std::string int_part, frac;
  if (point <= 0) {
    int_part = "0";
    frac = std::string(static_cast<std::size_t>(-point), '0') + mant;
  } else if (point >= len) {
    int_part = mant + std::string(static_cast<std::size_t>(point - len), '0');
  } else {
    int_part = mant.substr(0, static_cast<std::size_t>(point));
    frac = mant.substr(static_cast<std::size_t>(point));
  }
  frac.resize(static_cast<std::size_t>(digits) + 1, '0');

  std::string kept = int_part + frac.substr(0, static_cast<std::size_t>(digits));
  if (frac[static_cast<std::size_t>(digits)] >= '5') {
    int i = static_cast<int>(kept.size()) - 1;
    for (; i >= 0 && kept[i] == '9'; --i) kept[i] = '0';
    if (i < 0) kept.insert(kept.begin(), '1');
    else ++kept[i];
  }

  const std::size_t int_len = kept.size() - static_cast<std::size_t>(digits);
  std::string out = kept.substr(0, int_len);
  out.erase(0, std::min(out.find_first_not_of('0'), out.size() - 1));
  if (digits > 0) out += "." + kept.substr(int_len);
  if (negative && kept.find_first_not_of('0') != std::string::npos) out.insert(out.begin(), '-');
  return out;
}

/// Display precision per column family. Defaults are the precisions the
/// published tables print; internal values are never rounded.
struct Precision {
  int ratio = 3;
  int per_mille = 3;
  int eq1 = 3;
  int consistency = 2;
  int e_p = 3;
  int fit = 6;  // beta, r^2, stderr

  static Precision uniform(int digits) {
    return Precision{digits, digits, digits, digits, digits, digits};
  }
};

/// Locale-independent strict parsers; nullopt unless the whole string is
/// consumed.
inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Column label for a percentile or count: 10 -> "10", 0.25 -> "0.25".
inline std::string number_label(double v) { return shortest(v); }

}  // namespace citetail
