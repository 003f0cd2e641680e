// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "natcomp/bounds.hpp"
#include "natcomp/compressor_spec.hpp"
#include "natcomp/dense_vector.hpp"

namespace natcomp {

// Synthetic distributed objective f(x) = (1/n) sum_i f_i(x) with exactly
// known constants. Quadratics: f_i(x) = 0.5 x^T A_i x - b_i^T x with A_i
// symmetric PSD (diagonal or dense row-major). Logistic: per-worker samples
// with l2 regularization.
struct SyntheticProblem {
  enum class Kind { kQuadratic, kLogistic };

  Kind kind = Kind::kQuadratic;
  size_t d = 0;
  int n = 1;
  double noise_sigma_add = 0.0;  // additive N(0, sigma_add^2 I) gradient noise

  // Quadratic part. diag_A non-empty => diagonal matrices; otherwise dense_A
  // holds n row-major d*d blocks. b holds n vectors.
  std::vector<std::vector<double>> diag_A;
  std::vector<std::vector<double>> dense_A;
  std::vector<std::vector<double>> b;

  // Logistic part: per worker, m_i samples of d features (row-major) with
  // labels in {-1, +1}.
  std::vector<std::vector<double>> samples;
  std::vector<std::vector<double>> labels;
  double reg = 0.0;

  double f_i(int i, std::span<const double> x) const;
  void grad_i(int i, std::span<const double> x, std::span<double> out) const;
  double f(std::span<const double> x) const;
  void grad(std::span<const double> x, std::span<double> out) const;
};

// Quadratic with shared diagonal spectrum log-spaced in [min_eig, max_eig]
// (so L = max_eig exactly) and per-worker linear terms. identical_workers
// gives every worker the same b (zeta^2 = 0).
SyntheticProblem make_quadratic_problem(size_t d, int n, double min_eig,
                                        double max_eig, double noise_sigma_add,
                                        bool identical_workers, uint64_t seed);

SyntheticProblem make_logistic_problem(size_t d, int n, size_t m_per_worker,
                                       double reg, double noise_sigma_add,
                                       bool identical_workers, uint64_t seed);

struct ProblemConstants {
  double L = 0.0;
  double sigma2 = 0.0;
  double zeta2 = 0.0;
  bool zeta2_is_estimate = false;
  double fstar = 0.0;
  double f0 = 0.0;
  double f0_minus_fstar = 0.0;
};

// L from the spectrum (power iteration), sigma^2 from the configured noise,
// zeta^2 as a sampled maximum of ||grad f_i - grad f||^2 over a point grid
// (exact for shared-curvature quadratics), f* from a conjugate-gradient
// solve (quadratic) or a deterministic gradient-descent polish (logistic).
ProblemConstants measure_problem_constants(const SyntheticProblem& problem,
                                           std::span<const double> x0);

struct SgdConfig {
  std::vector<CompressorSpec> worker_specs;  // one per worker, or one shared
  CompressorSpec master_spec;

  enum class EtaRule { kExplicit, kAutoEpsilon, kAutoHorizon };
  EtaRule eta_rule = EtaRule::kExplicit;
  double eta = 0.0;  // kExplicit
  double eps = 0.0;  // kAutoEpsilon: eta = eps / (L (alpha + eps beta))

  uint64_t T = 0;  // iterations; kAutoEpsilon with T = 0 takes the minimal horizon of the epsilon rule
  uint64_t seed = 0;

  enum class Aggregation { kExact, kInaInteger, kInaSocket };
  Aggregation aggregation = Aggregation::kExact;
  std::string ina_host = "127.0.0.1";
  uint16_t ina_port = 0;

  const CompressorSpec& worker_spec(int i) const {
    return worker_specs.size() == 1 ? worker_specs[0]
                                    : worker_specs[static_cast<size_t>(i)];
  }
};

struct RunTrace {
  struct Row {
    uint64_t k;
    double f;
    double grad_sq;
    uint64_t bits_up;    // worker -> master, summed over workers
    uint64_t bits_down;  // master -> worker multicast, counted once
  };
  std::vector<Row> rows;
  std::vector<double> final_x;
  double final_f = 0.0;
  uint64_t sampled_iteration = 0;  // uniform over {0..T-1}
  double sampled_grad_sq = 0.0;
  double eta_used = 0.0;
  uint64_t T = 0;
  AlphaBeta ab;
  ProblemConstants constants;
};

// Executes bidirectional-compression SGD: workers compress stochastic
// gradients, the master aggregates (exact, in-process integer, or through
// the socket aggregation service), compresses once, and broadcasts.
RunTrace run_sgd(const SyntheticProblem& problem, const SgdConfig& config);

void write_trace_csv(std::ostream& out, const RunTrace& trace);

// Plain key=value configuration file (one pair per line, '#' comments):
// problem generation plus run parameters. Returns the generated problem and
// config ready for run_sgd.
struct SgdSetup {
  SyntheticProblem problem;
  SgdConfig config;
};

SgdSetup parse_sgd_config(std::istream& in);

// Per-iteration wire bits for one compressed vector under this spec's codec
// size law (9 bits/coord for nat, 8 for the NAT8C integer path, norm + sign
// + level bits for dithering, 32/coord raw otherwise).
uint64_t wire_bits(const CompressorSpec& spec, size_t d, bool ina_path);

}  // namespace natcomp
