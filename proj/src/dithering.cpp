// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "natcomp/dithering.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <map>

#include "natcomp/core_ops.hpp"

namespace natcomp {

double lp_norm(const DenseVector& x, NormKind p) {
  double acc = 0.0;
  switch (p) {
    case NormKind::kL1:
      for (double v : x.values()) acc += std::fabs(v);
      return acc;
    case NormKind::kL2:
      for (double v : x.values()) acc += v * v;
      return std::sqrt(acc);
    case NormKind::kLinf:
      for (double v : x.values()) acc = std::max(acc, std::fabs(v));
      return acc;
  }
  return 0.0;
}

int LevelLadder::bracket(double y) const {
  if (y >= 1.0) return 0;
  if (kind == Kind::kGeometric) {
    if (y <= level(s - 1)) return s - 1;
    // y in [2^e, 2^(e+1)) with e < 0; the bracket's upper level is
    // 2^(e+1) = l_{-e-1}. Exponent-field lookup, no logarithms: y is normal
    // here since it exceeds 2^(1-s) >= 2^-254.
    const uint64_t bits = std::bit_cast<uint64_t>(y);
    const int e = static_cast<int>(bits >> 52) - 1023;
    return std::clamp(-e - 1, 0, s - 1);
  }
  const double t = y * static_cast<double>(s);
  const int hi = static_cast<int>(std::ceil(t));
  return std::clamp(s - hi, 0, s - 1);
}

namespace {

// Shared dithering core. Sign/index sinks may be null (reconstruction-only
// callers); `out` always receives norm * sign * level.
double dither_core(const DenseVector& x, const LevelLadder& ladder, NormKind p,
                   NormMode norm_mode, const RngStream& rng, DenseVector& out,
                   int8_t* signs, uint16_t* indices) {
  if (ladder.s < 1 || ladder.s > 255) {
    throw ConfigError("dither: s must be in [1, 255]");
  }
  const size_t d = x.dim();
  const double norm = lp_norm(x, p);
  if (norm == 0.0) {
    // Zero input: zero norm and an all-zero wire payload (sign bits clear,
    // level indices 0); the reconstruction is zero either way.
    std::fill(out.values().begin(), out.values().end(), 0.0);
    if (signs != nullptr) std::fill(signs, signs + d, int8_t{1});
    if (indices != nullptr) std::fill(indices, indices + d, uint16_t{0});
    return 0.0;
  }

  // Norm in binary64, rounded to binary32 for the wire; nat-compression of
  // the norm consumes the draw at index d (elements use 0..d-1).
  double wire_norm = static_cast<double>(static_cast<float>(norm));
  if (norm_mode == NormMode::kNatCompressed) {
    wire_norm = c_nat_scalar_with_draw(norm, rng.uniform_at(d));
  }

  // Levels precomputed once per call: level() costs an exp2 on the
  // geometric ladder, far too much per element. s <= 255 by validation.
  std::array<double, 257> levels;
  for (int u = 0; u <= ladder.s + 1; ++u) {
    levels[static_cast<size_t>(u)] = ladder.level(u);
  }

  const double inv_norm = 1.0 / norm;
  const double* in = x.values().data();
  double* o = out.values().data();
  const int s = ladder.s;
  const bool geometric = ladder.kind == LevelLadder::Kind::kGeometric;
  const double bottom = levels[static_cast<size_t>(s) - 1];
  const double ds = static_cast<double>(s);
  for (size_t i = 0; i < d; ++i) {
    const double a = std::fabs(in[i]);
    const double y = std::min(a * inv_norm, 1.0);
    // Bracket l_{u+1} <= y <= l_u, inlined from LevelLadder::bracket.
    int u;
    if (geometric) {
      if (y >= 1.0) {
        u = 0;
      } else if (y <= bottom) {
        u = s - 1;
      } else {
        const uint64_t bits = std::bit_cast<uint64_t>(y);
        const int e = static_cast<int>(bits >> 52) - 1023;
        u = std::clamp(-e - 1, 0, s - 1);
      }
    } else {
      u = y >= 1.0 ? 0 : std::clamp(s - static_cast<int>(std::ceil(y * ds)),
                                    0, s - 1);
    }
    const double hi = levels[static_cast<size_t>(u)];
    const double lo = levels[static_cast<size_t>(u) + 1];
    const double p_hi = hi > lo ? (y - lo) / (hi - lo) : 1.0;
    // Branch-free select: the rounding direction is a random coin.
    const double take_hi = static_cast<double>(rng.uniform_at(i) < p_hi);
    const double value = lo + take_hi * (hi - lo);
    if (signs != nullptr) signs[i] = in[i] < 0.0 ? -1 : 1;
    if (indices != nullptr) {
      indices[i] = static_cast<uint16_t>(u + 1 - static_cast<int>(take_hi));
    }
    o[i] = std::copysign(wire_norm * value, in[i]);
  }
  return wire_norm;
}

}  // namespace

DitherResult dither(const DenseVector& x, const LevelLadder& ladder,
                    NormKind p, NormMode norm_mode, const RngStream& rng) {
  const size_t d = x.dim();
  DitherResult r;
  r.ladder = ladder;
  r.signs.resize(d);
  r.level_indices.resize(d);
  r.reconstructed = DenseVector::zeros(d);
  r.norm_value = dither_core(x, ladder, p, norm_mode, rng, r.reconstructed,
                             r.signs.data(), r.level_indices.data());
  return r;
}

void dither_reconstruct_into(const DenseVector& x, const LevelLadder& ladder,
                             NormKind p, NormMode norm_mode,
                             const RngStream& rng, DenseVector& out) {
  dither_core(x, ladder, p, norm_mode, rng, out, nullptr, nullptr);
}

double omega_nat_dither(size_t d, NormKind p, int s, NormMode norm_mode) {
  const double r = std::min(norm_order(p), 2.0);
  const double dr = std::pow(static_cast<double>(d), 1.0 / r);
  const double z = dr * std::exp2(1.0 - static_cast<double>(s));
  const double term = z * std::min(1.0, z);
  if (norm_mode == NormMode::kExact) return term;
  return 1.125 * (1.125 + term) - 1.0;
}

double omega_std_dither(size_t d, NormKind p, int u) {
  const double r = std::min(norm_order(p), 2.0);
  const double dr = std::pow(static_cast<double>(d), 1.0 / r);
  const double z = dr / static_cast<double>(u);
  return z * std::min(1.0, z);
}

EquivalenceReport std_vs_nat_equivalence_check(const DenseVector& x, int s,
                                               NormKind p,
                                               const RngStream& rng,
                                               uint64_t draws) {
  const size_t d = x.dim();
  const LevelLadder nat = LevelLadder::geometric(s);
  const int u_levels = 1 << (s - 1);
  const LevelLadder std_ladder = LevelLadder::linear(u_levels);
  const double norm = lp_norm(x, p);

  EquivalenceReport report;
  report.draws = draws;
  if (norm == 0.0) {
    report.ok = true;
    return report;
  }

  auto draw_level = [](const LevelLadder& lad, double y, double u01) {
    const int b = lad.bracket(y);
    const double hi = lad.level(b);
    const double lo = lad.level(b + 1);
    const double p_hi = hi > lo ? (y - lo) / (hi - lo) : 1.0;
    return u01 < p_hi ? hi : lo;
  };

  double max_z = 0.0;
  for (size_t i = 0; i < d; ++i) {
    const double y = std::min(std::fabs(x[i]) / norm, 1.0);
    RngStream sa = rng.substream(2 * i);
    RngStream sb = rng.substream(2 * i + 1);
    std::map<double, uint64_t> count_nat, count_std;
    for (uint64_t n = 0; n < draws; ++n) {
      const double va = draw_level(nat, y, sa.next_uniform());
      ++count_nat[va];
      // Standard dithering with u = 2^(s-1) levels, then natural compression
      // of the level value. Supports coincide with the geometric ladder.
      const double w = draw_level(std_ladder, y, sb.next_uniform());
      const double vb = c_nat_scalar_with_draw(w, sb.next_uniform());
      ++count_std[vb];
    }
    std::map<double, std::pair<uint64_t, uint64_t>> merged;
    for (const auto& [v, c] : count_nat) merged[v].first = c;
    for (const auto& [v, c] : count_std) merged[v].second = c;
    const double n = static_cast<double>(draws);
    for (const auto& [v, c] : merged) {
      const double pa = static_cast<double>(c.first) / n;
      const double pb = static_cast<double>(c.second) / n;
      const double pool = 0.5 * (pa + pb);
      if (pool <= 0.0 || pool >= 1.0) continue;
      const double se = std::sqrt(pool * (1.0 - pool) * 2.0 / n);
      max_z = std::max(max_z, std::fabs(pa - pb) / se);
    }
  }
  report.max_z = max_z;
  report.ok = max_z <= 4.0;
  return report;
}

}  // namespace natcomp
