// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

#include "natcomp/compressor_spec.hpp"
#include "natcomp/dense_vector.hpp"
#include "natcomp/errors.hpp"
#include "natcomp/rng.hpp"

namespace natcomp {

// Natural compression of one scalar given a uniform draw u in [0, 1).
//
// Rounds t to the bracketing powers of two: the low endpoint with probability
// p(t) = (2^ceil(log2|t|) - |t|) / 2^floor(log2|t|), the high endpoint
// otherwise. Computed from the significand bits, not logarithms: for a
// binary value t = +-2^e (1 + m) the low endpoint clears the fraction and
// p(t) = 1 - m. Inputs subnormal in binary32 (|t| < 2^-126) flush to zero.
double c_nat_scalar_with_draw(double t, double u);

inline double c_nat_scalar(double t, RngStream& rng) {
  return c_nat_scalar_with_draw(t, rng.next_uniform());
}

namespace detail {

// Hot-path kernel: assumes t finite and |t| < 2^1023 (DenseVector holds
// binary32-representable values, which are far inside that range). Written
// branch-free: the rounding direction is a data-dependent coin flip, and a
// mispredicted branch per scalar would dominate the Monte-Carlo loops.
inline double c_nat_unchecked(double t, double u) {
  const double a = std::fabs(t);
  const uint64_t bits = std::bit_cast<uint64_t>(a);
  constexpr uint64_t kFracMask = (1ULL << 52) - 1;
  const double m = static_cast<double>(bits & kFracMask) * 0x1.0p-52;
  const double low = std::bit_cast<double>(bits & ~kFracMask);
  const double up = static_cast<double>(u >= 1.0 - m);  // 0 or 1
  const double mag = low + up * low;
  const double flush = static_cast<double>(a >= 0x1.0p-126);  // subnormals
  return std::copysign(mag * flush, t);
}

}  // namespace detail

// Unbiased randomized rounding to the nearest integers. Kept as the negative
// example: its second moment E[C(x)^2]/x^2 = 1/x on (0,1) is unbounded.
inline double c_int_scalar_with_draw(double t, double u) {
  if (!std::isfinite(t)) {
    throw InvalidInputError("c_int: non-finite input");
  }
  const double lo = std::floor(t);
  const double hi = std::ceil(t);
  if (lo == hi) return t;
  return (u < hi - t) ? lo : hi;
}

inline double c_int_scalar(double t, RngStream& rng) {
  return c_int_scalar_with_draw(t, rng.next_uniform());
}

// Random q-sparsification S^q(x) = (d/q) * mask .* x with the mask uniform
// over all q-subsets (Fisher-Yates partial shuffle).
DenseVector sparsify(const DenseVector& x, size_t q, RngStream& rng);

// Applies `spec` to x and returns the decompressed (real-valued) result.
// Element-wise operators draw uniform_at(i); compose stages use substreams
// so results do not depend on evaluation order.
DenseVector compress(const DenseVector& x, const CompressorSpec& spec,
                     const RngStream& rng);

// In-place variant reusing caller-owned storage; out.dim() must equal x.dim().
void compress_into(const DenseVector& x, const CompressorSpec& spec,
                   const RngStream& rng, DenseVector& out);

}  // namespace natcomp
