// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "natcomp/core_ops.hpp"

#include <algorithm>

#include "natcomp/dithering.hpp"

namespace natcomp {

double c_nat_scalar_with_draw(double t, double u) {
  if (!std::isfinite(t)) {
    throw InvalidInputError("c_nat: non-finite input");
  }
  if (std::fabs(t) >= 0x1.0p1023) {
    throw InvalidInputError("c_nat: input outside the supported range");
  }
  return detail::c_nat_unchecked(t, u);
}

namespace {

thread_local std::vector<uint32_t> g_index_scratch;

void sparsify_into(const DenseVector& x, size_t q, RngStream& seq,
                   DenseVector& out) {
  const size_t d = x.dim();
  std::vector<uint32_t>& idx = g_index_scratch;
  idx.resize(d);
  for (size_t i = 0; i < d; ++i) idx[i] = static_cast<uint32_t>(i);
  std::fill(out.values().begin(), out.values().end(), 0.0);
  const double scale = static_cast<double>(d) / static_cast<double>(q);
  // Partial Fisher-Yates: the first q entries are a uniform q-subset.
  for (size_t i = 0; i < q; ++i) {
    const size_t j = i + seq.next_below(d - i);
    std::swap(idx[i], idx[j]);
    out[idx[i]] = x[idx[i]] * scale;
  }
}

}  // namespace

DenseVector sparsify(const DenseVector& x, size_t q, RngStream& rng) {
  if (q < 1 || q > x.dim()) {
    throw ConfigError("sparsify: q=" + std::to_string(q) +
                      " out of range for d=" + std::to_string(x.dim()));
  }
  DenseVector out = DenseVector::zeros(x.dim());
  sparsify_into(x, q, rng, out);
  return out;
}

void compress_into(const DenseVector& x, const CompressorSpec& spec,
                   const RngStream& rng, DenseVector& out) {
  const size_t d = x.dim();
  if (out.dim() != d) {
    throw ConfigError("compress_into: output dimension mismatch");
  }
  spec.validate(d);
  switch (spec.variant) {
    case Variant::kIdentity: {
      std::copy(x.values().begin(), x.values().end(), out.values().begin());
      return;
    }
    case Variant::kNat: {
      // Inputs are finite by DenseVector construction; use the lean kernel.
      const double* in = x.values().data();
      double* o = out.values().data();
      for (size_t i = 0; i < d; ++i) {
        o[i] = detail::c_nat_unchecked(in[i], rng.uniform_at(i));
      }
      return;
    }
    case Variant::kIntRound: {
      for (size_t i = 0; i < d; ++i) {
        out[i] = c_int_scalar_with_draw(x[i], rng.uniform_at(i));
      }
      return;
    }
    case Variant::kSparsify: {
      RngStream seq = rng.substream(0);
      sparsify_into(x, spec.q_coords, seq, out);
      return;
    }
    case Variant::kStdDither:
    case Variant::kNatDither: {
      const LevelLadder ladder = spec.variant == Variant::kStdDither
                                     ? LevelLadder::linear(spec.s_levels)
                                     : LevelLadder::geometric(spec.s_levels);
      dither_reconstruct_into(x, ladder, spec.p_norm, spec.norm_mode, rng,
                              out);
      return;
    }
    case Variant::kCompose: {
      // (C1 o C2)(x) = C1(C2(x)): apply the chain right to left, each stage
      // on its own substream keyed by chain position.
      DenseVector tmp = x;
      for (size_t k = spec.chain.size(); k-- > 0;) {
        RngStream stage = rng.substream(k);
        compress_into(tmp, spec.chain[k], stage, out);
        if (k != 0) std::swap(tmp, out);
      }
      return;
    }
  }
}

DenseVector compress(const DenseVector& x, const CompressorSpec& spec,
                     const RngStream& rng) {
  DenseVector out = DenseVector::zeros(x.dim());
  compress_into(x, spec, rng, out);
  return out;
}

}  // namespace natcomp
