// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "natcomp/compressor_spec.hpp"
#include "natcomp/dense_vector.hpp"
#include "natcomp/rng.hpp"

namespace natcomp {

// Descending level ladder l_0 = 1 > l_1 > ... > l_{s-1} > l_s = 0.
//   linear (standard dithering):  l_u = (s - u) / s
//   geometric (natural dithering): l_u = 2^-u for u < s, l_s = 0
struct LevelLadder {
  enum class Kind : uint8_t { kLinear, kGeometric };

  Kind kind = Kind::kGeometric;
  int s = 1;

  static LevelLadder linear(int s) { return {Kind::kLinear, s}; }
  static LevelLadder geometric(int s) { return {Kind::kGeometric, s}; }

  double level(int u) const {
    if (u >= s) return 0.0;
    if (kind == Kind::kLinear) {
      return static_cast<double>(s - u) / static_cast<double>(s);
    }
    return std::exp2(static_cast<double>(-u));
  }

  // Index u of the bracket l_{u+1} <= y <= l_u containing y in [0, 1].
  // A y exactly equal to a level maps to that level deterministically via
  // the bracket probabilities (no special casing needed).
  int bracket(double y) const;
};

// Outcome of one dithering draw. reconstructed_i = norm_value * sign_i *
// l_{u_i}, where norm_value is the wire-side norm (binary32-rounded, and
// nat-compressed when requested).
struct DitherResult {
  double norm_value = 0.0;
  LevelLadder ladder;
  std::vector<int8_t> signs;          // +-1 per coordinate
  std::vector<uint16_t> level_indices;  // u in {0..s}; s encodes the zero level
  DenseVector reconstructed;
};

// General dithering: normalize by the p-norm, randomly round each normalized
// magnitude onto the ladder, rescale by the (possibly compressed) norm.
// x = 0 yields the all-zero result. Element draws use uniform_at(i); the
// norm-compression draw, when requested, uses uniform_at(d).
DitherResult dither(const DenseVector& x, const LevelLadder& ladder,
                    NormKind p, NormMode norm_mode, const RngStream& rng);

// Allocation-free variant writing only the reconstructed vector; the wire
// fields (signs, level indices) are not materialized. Identical draws and
// results to dither().
void dither_reconstruct_into(const DenseVector& x, const LevelLadder& ladder,
                             NormKind p, NormMode norm_mode,
                             const RngStream& rng, DenseVector& out);

// Analytic second-moment parameter for natural dithering with s levels in
// dimension d. With r = min{p, 2} and kappa = min{1, d^(1/r) 2^(1-s)}:
//   exact norm:          omega = d^(1/r) 2^(1-s) kappa
//   nat-compressed norm: omega = (9/8) (9/8 + d^(1/r) 2^(1-s) kappa) - 1
double omega_nat_dither(size_t d, NormKind p, int s, NormMode norm_mode);

// Analytic second-moment parameter for standard dithering with u levels:
// omega = (d^(1/r)/u) * min{1, sqrt(d)/u}.
double omega_std_dither(size_t d, NormKind p, int u);

// Empirical check of the distributional identity between natural dithering
// with s levels and C_nat applied on top of standard dithering with
// u = 2^(s-1) levels: per-coordinate marginals over the finite level set are
// compared with a two-sample frequency z-test.
struct EquivalenceReport {
  uint64_t draws = 0;
  double max_z = 0.0;
  bool ok = false;
};

EquivalenceReport std_vs_nat_equivalence_check(const DenseVector& x, int s,
                                               NormKind p, const RngStream& rng,
                                               uint64_t draws = 100000);

double lp_norm(const DenseVector& x, NormKind p);

}  // namespace natcomp
