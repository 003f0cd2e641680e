// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

#include "natcomp/errors.hpp"

namespace natcomp {

// Bit fields of an IEEE 754 binary32 value: (-1)^sign * 2^(exponent-127) *
// (1 + mantissa/2^23) for normal values.
struct Binary32Fields {
  uint8_t sign = 0;        // 1 bit
  uint8_t exponent = 0;    // 8-bit biased exponent e
  uint32_t mantissa = 0;   // 23-bit fraction field

  // Mantissa as the fixed-point fraction m = sum m_j 2^-j.
  double mantissa_fraction() const {
    return static_cast<double>(mantissa) * 0x1.0p-23;
  }
};

inline Binary32Fields split_binary32(float t) {
  if (!std::isfinite(t)) {
    throw InvalidInputError("split_binary32: non-finite input");
  }
  const uint32_t bits = std::bit_cast<uint32_t>(t);
  Binary32Fields f;
  f.sign = static_cast<uint8_t>(bits >> 31);
  f.exponent = static_cast<uint8_t>((bits >> 23) & 0xff);
  f.mantissa = bits & 0x7fffff;
  return f;
}

inline float assemble_binary32(const Binary32Fields& f) {
  const uint32_t bits = (static_cast<uint32_t>(f.sign) << 31) |
                        (static_cast<uint32_t>(f.exponent) << 23) | f.mantissa;
  return std::bit_cast<float>(bits);
}

// True when |t| is zero or an exact power of two representable in binary32's
// normal range (2^k, -126 <= k <= 127).
inline bool is_power_of_two_or_zero(double t) {
  if (t == 0.0) return true;
  const double a = std::fabs(t);
  int e = 0;
  const double frac = std::frexp(a, &e);  // a = frac * 2^e, frac in [0.5, 1)
  return frac == 0.5 && (e - 1) >= -126 && (e - 1) <= 127;
}

// Exponent k of a nonzero power of two t = +-2^k.
inline int power_of_two_exponent(double t) {
  int e = 0;
  std::frexp(std::fabs(t), &e);
  return e - 1;
}

}  // namespace natcomp
