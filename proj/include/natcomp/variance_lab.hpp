// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "natcomp/compressor_spec.hpp"
#include "natcomp/dense_vector.hpp"
#include "natcomp/rng.hpp"

namespace natcomp {

// Per-trial normalized empirical variance omega(x) = ||C(x) - x||^2 / ||x||^2
// with quartile summary. Deterministic given (seed, spec, d, trials): trial t
// draws its input and its compression randomness from stream_id = t.
struct VarianceReport {
  CompressorSpec spec;
  size_t d = 0;
  int trials = 0;
  std::vector<double> omega_samples;
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

enum class InputLaw { kGaussian, kFile };

// input_law kFile replays `file_input` in every trial (recorded gradients);
// kGaussian draws i.i.d. standard normal entries per trial.
VarianceReport empirical_omega(const CompressorSpec& spec, size_t d, int trials,
                               uint64_t seed, InputLaw law = InputLaw::kGaussian,
                               const DenseVector* file_input = nullptr);

// Monte-Carlo unbiasedness gate: passes iff every coordinate's empirical-mean
// z-score stays within 4 standard errors of x_i over `draws` draws.
struct GateResult {
  bool pass = false;
  double max_z = 0.0;
  size_t argmax_coord = 0;
};

GateResult unbiasedness_gate(const CompressorSpec& spec, const DenseVector& x,
                             uint64_t draws, uint64_t seed);

// Same gate over an arbitrary sampler (draw index -> one compressed draw).
// The sampler must be pure in the draw index; draws run in parallel chunks.
using DrawSampler = std::function<void(uint64_t draw_index, DenseVector& out)>;
GateResult unbiasedness_gate_sampler(const DrawSampler& sampler,
                                     const DenseVector& x, uint64_t draws);

DenseVector gaussian_vector(size_t d, RngStream stream);

void write_omega_csv(std::ostream& out, const VarianceReport& report);
void write_summary_csv_header(std::ostream& out);
void write_summary_csv_row(std::ostream& out, const VarianceReport& report);

}  // namespace natcomp
