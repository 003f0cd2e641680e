// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "natcomp/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "natcomp/codec.hpp"
#include "natcomp/core_ops.hpp"
#include "natcomp/ina_core.hpp"
#include "natcomp/ina_service.hpp"
#include "natcomp/rng.hpp"

namespace natcomp {

namespace {

constexpr uint64_t kNoiseDomain = 0x6e6f6973;   // "nois"
constexpr uint64_t kWorkerDomain = 0x776f726b;  // "work"
constexpr uint64_t kMasterDomain = 0x6d737472;  // "mstr"
constexpr uint64_t kSampleDomain = 0x73616d70;  // "samp"
constexpr uint64_t kGenDomain = 0x67656e00;     // problem generation

void matvec(const SyntheticProblem& p, int i, std::span<const double> x,
            std::span<double> out) {
  const size_t d = p.d;
  if (!p.diag_A.empty()) {
    const std::vector<double>& diag = p.diag_A[static_cast<size_t>(i)];
    for (size_t j = 0; j < d; ++j) out[j] = diag[j] * x[j];
    return;
  }
  const std::vector<double>& A = p.dense_A[static_cast<size_t>(i)];
  for (size_t r = 0; r < d; ++r) {
    double acc = 0.0;
    const double* row = A.data() + r * d;
    for (size_t c = 0; c < d; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

double SyntheticProblem::f_i(int i, std::span<const double> x) const {
  if (kind == Kind::kQuadratic) {
    std::vector<double> ax(d);
    matvec(*this, i, x, ax);
    return 0.5 * dot(x, ax) - dot(b[static_cast<size_t>(i)], x);
  }
  const std::vector<double>& xs = samples[static_cast<size_t>(i)];
  const std::vector<double>& ys = labels[static_cast<size_t>(i)];
  const size_t m = ys.size();
  double acc = 0.0;
  for (size_t s = 0; s < m; ++s) {
    const double margin =
        ys[s] * dot(x, std::span<const double>(xs.data() + s * d, d));
    // log(1 + exp(-margin)) computed stably.
    acc += margin > 0 ? std::log1p(std::exp(-margin))
                      : -margin + std::log1p(std::exp(margin));
  }
  return acc / static_cast<double>(m) + 0.5 * reg * dot(x, x);
}

void SyntheticProblem::grad_i(int i, std::span<const double> x,
                              std::span<double> out) const {
  if (kind == Kind::kQuadratic) {
    matvec(*this, i, x, out);
    const std::vector<double>& bi = b[static_cast<size_t>(i)];
    for (size_t j = 0; j < d; ++j) out[j] -= bi[j];
    return;
  }
  const std::vector<double>& xs = samples[static_cast<size_t>(i)];
  const std::vector<double>& ys = labels[static_cast<size_t>(i)];
  const size_t m = ys.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (size_t s = 0; s < m; ++s) {
    const std::span<const double> row(xs.data() + s * d, d);
    const double margin = ys[s] * dot(x, row);
    const double sigma = 1.0 / (1.0 + std::exp(margin));  // d/dm log(1+e^-m)
    const double coef = -ys[s] * sigma / static_cast<double>(m);
    for (size_t j = 0; j < d; ++j) out[j] += coef * row[j];
  }
  for (size_t j = 0; j < d; ++j) out[j] += reg * x[j];
}

double SyntheticProblem::f(std::span<const double> x) const {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += f_i(i, x);
  return acc / static_cast<double>(n);
}

void SyntheticProblem::grad(std::span<const double> x,
                            std::span<double> out) const {
  std::vector<double> gi(d);
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < n; ++i) {
    grad_i(i, x, gi);
    for (size_t j = 0; j < d; ++j) out[j] += gi[j];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (size_t j = 0; j < d; ++j) out[j] *= inv_n;
}

SyntheticProblem make_quadratic_problem(size_t d, int n, double min_eig,
                                        double max_eig, double noise_sigma_add,
                                        bool identical_workers,
                                        uint64_t seed) {
  if (d == 0 || n < 1 || min_eig <= 0.0 || max_eig < min_eig) {
    throw ConfigError("quadratic problem: bad generator parameters");
  }
  SyntheticProblem p;
  p.kind = SyntheticProblem::Kind::kQuadratic;
  p.d = d;
  p.n = n;
  p.noise_sigma_add = noise_sigma_add;

  std::vector<double> diag(d);
  for (size_t j = 0; j < d; ++j) {
    const double t = d == 1 ? 0.0
                            : static_cast<double>(j) /
                                  static_cast<double>(d - 1);
    diag[j] = min_eig * std::pow(max_eig / min_eig, t);
  }
  diag.back() = max_eig;  // L is exactly max_eig

  // Shared curvature keeps the dissimilarity bound finite and exact: with a
  // common A the per-worker gradient offsets are the constant b_bar - b_i.
  p.diag_A.assign(static_cast<size_t>(n), diag);

  RngStream gen(seed, kGenDomain);
  std::vector<double> shared_b(d);
  for (size_t j = 0; j < d; ++j) shared_b[j] = gen.next_gaussian();
  for (int i = 0; i < n; ++i) {
    std::vector<double> bi = shared_b;
    if (!identical_workers) {
      for (size_t j = 0; j < d; ++j) bi[j] += 0.25 * gen.next_gaussian();
    }
    p.b.push_back(std::move(bi));
  }
  return p;
}

SyntheticProblem make_logistic_problem(size_t d, int n, size_t m_per_worker,
                                       double reg, double noise_sigma_add,
                                       bool identical_workers, uint64_t seed) {
  if (d == 0 || n < 1 || m_per_worker == 0 || reg < 0.0) {
    throw ConfigError("logistic problem: bad generator parameters");
  }
  SyntheticProblem p;
  p.kind = SyntheticProblem::Kind::kLogistic;
  p.d = d;
  p.n = n;
  p.noise_sigma_add = noise_sigma_add;
  p.reg = reg;

  RngStream gen(seed, kGenDomain);
  std::vector<double> truth(d);
  for (size_t j = 0; j < d; ++j) truth[j] = gen.next_gaussian();

  std::vector<double> shared_x, shared_y;
  for (int i = 0; i < n; ++i) {
    if (identical_workers && i > 0) {
      p.samples.push_back(shared_x);
      p.labels.push_back(shared_y);
      continue;
    }
    std::vector<double> xs(m_per_worker * d);
    std::vector<double> ys(m_per_worker);
    for (size_t s = 0; s < m_per_worker; ++s) {
      double margin = 0.0;
      for (size_t j = 0; j < d; ++j) {
        xs[s * d + j] = gen.next_gaussian();
        margin += xs[s * d + j] * truth[j];
      }
      ys[s] = margin >= 0.0 ? 1.0 : -1.0;
    }
    if (identical_workers) {
      shared_x = xs;
      shared_y = ys;
    }
    p.samples.push_back(std::move(xs));
    p.labels.push_back(std::move(ys));
  }
  return p;
}

namespace {

// Largest eigenvalue of the averaged quadratic (or sample Gram matrix) by
// power iteration with a deterministic start.
double power_iteration_lmax(const SyntheticProblem& p) {
  const size_t d = p.d;
  if (p.kind == SyntheticProblem::Kind::kQuadratic && !p.diag_A.empty()) {
    double lmax = 0.0;
    for (size_t j = 0; j < d; ++j) {
      double avg = 0.0;
      for (int i = 0; i < p.n; ++i) avg += p.diag_A[static_cast<size_t>(i)][j];
      lmax = std::max(lmax, avg / static_cast<double>(p.n));
    }
    return lmax;
  }
  RngStream gen(0x706f7765, 0);
  std::vector<double> v(d), av(d);
  for (size_t j = 0; j < d; ++j) v[j] = gen.next_gaussian();
  double lambda = 0.0;
  auto apply = [&](std::span<const double> in, std::span<double> out) {
    if (p.kind == SyntheticProblem::Kind::kQuadratic) {
      std::vector<double> tmp(d);
      std::fill(out.begin(), out.end(), 0.0);
      for (int i = 0; i < p.n; ++i) {
        matvec(p, i, in, tmp);
        for (size_t j = 0; j < d; ++j) out[j] += tmp[j];
      }
      for (size_t j = 0; j < d; ++j) out[j] /= static_cast<double>(p.n);
      return;
    }
    // Averaged (1/m_i) X_i^T X_i.
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < p.n; ++i) {
      const std::vector<double>& xs = p.samples[static_cast<size_t>(i)];
      const size_t m = p.labels[static_cast<size_t>(i)].size();
      for (size_t s = 0; s < m; ++s) {
        const std::span<const double> row(xs.data() + s * d, d);
        const double proj = dot(in, row) / static_cast<double>(m);
        for (size_t j = 0; j < d; ++j) out[j] += proj * row[j];
      }
    }
    for (size_t j = 0; j < d; ++j) out[j] /= static_cast<double>(p.n);
  };
  for (int it = 0; it < 200; ++it) {
    apply(v, av);
    const double norm = std::sqrt(dot(av, av));
    if (norm == 0.0) return 0.0;
    for (size_t j = 0; j < d; ++j) v[j] = av[j] / norm;
    lambda = norm;
  }
  return lambda;
}

// Conjugate gradient for the averaged quadratic A_bar x = b_bar.
std::vector<double> solve_quadratic_minimizer(const SyntheticProblem& p) {
  const size_t d = p.d;
  std::vector<double> x(d, 0.0), r(d), pdir(d), ap(d);
  auto apply_abar = [&](std::span<const double> in, std::span<double> out) {
    std::vector<double> tmp(d);
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < p.n; ++i) {
      matvec(p, i, in, tmp);
      for (size_t j = 0; j < d; ++j) out[j] += tmp[j];
    }
    for (size_t j = 0; j < d; ++j) out[j] /= static_cast<double>(p.n);
  };
  std::vector<double> b_bar(d, 0.0);
  for (int i = 0; i < p.n; ++i) {
    for (size_t j = 0; j < d; ++j) b_bar[j] += p.b[static_cast<size_t>(i)][j];
  }
  for (size_t j = 0; j < d; ++j) b_bar[j] /= static_cast<double>(p.n);

  r = b_bar;
  pdir = r;
  double rs = dot(r, r);
  for (size_t it = 0; it < 4 * d && rs > 1e-26; ++it) {
    apply_abar(pdir, ap);
    const double alpha = rs / dot(pdir, ap);
    for (size_t j = 0; j < d; ++j) {
      x[j] += alpha * pdir[j];
      r[j] -= alpha * ap[j];
    }
    const double rs_new = dot(r, r);
    const double beta = rs_new / rs;
    for (size_t j = 0; j < d; ++j) pdir[j] = r[j] + beta * pdir[j];
    rs = rs_new;
  }
  return x;
}

}  // namespace

ProblemConstants measure_problem_constants(const SyntheticProblem& problem,
                                           std::span<const double> x0) {
  if (problem.d > 10000) {
    throw ConfigError("measure_problem_constants: d exceeds 10^4");
  }
  ProblemConstants c;
  c.L = power_iteration_lmax(problem);
  if (problem.kind == SyntheticProblem::Kind::kLogistic) {
    c.L = 0.25 * c.L + problem.reg;  // logistic curvature bound
  }
  c.sigma2 = static_cast<double>(problem.d) * problem.noise_sigma_add *
             problem.noise_sigma_add;

  // zeta^2: max over a deterministic point grid; exact for shared-curvature
  // quadratics, flagged as an estimate otherwise.
  const size_t d = problem.d;
  std::vector<double> gi(d), g(d);
  RngStream grid(0x7a657461, 0);
  double zeta2 = 0.0;
  for (int point = 0; point < 5; ++point) {
    std::vector<double> x(d);
    if (point == 0) {
      std::copy(x0.begin(), x0.end(), x.begin());
    } else {
      for (size_t j = 0; j < d; ++j) x[j] = grid.next_gaussian();
    }
    problem.grad(x, g);
    for (int i = 0; i < problem.n; ++i) {
      problem.grad_i(i, x, gi);
      double dist = 0.0;
      for (size_t j = 0; j < d; ++j) {
        const double dv = gi[j] - g[j];
        dist += dv * dv;
      }
      zeta2 = std::max(zeta2, dist);
    }
  }
  c.zeta2 = zeta2;
  c.zeta2_is_estimate = problem.kind == SyntheticProblem::Kind::kLogistic;

  if (problem.kind == SyntheticProblem::Kind::kQuadratic) {
    const std::vector<double> xstar = solve_quadratic_minimizer(problem);
    c.fstar = problem.f(xstar);
  } else {
    // Deterministic gradient-descent polish with exact gradients.
    std::vector<double> x(d, 0.0), g2(d);
    const double step = 1.0 / c.L;
    for (int it = 0; it < 5000; ++it) {
      problem.grad(x, g2);
      for (size_t j = 0; j < d; ++j) x[j] -= step * g2[j];
    }
    c.fstar = problem.f(x);
  }
  c.f0 = problem.f(x0);
  c.f0_minus_fstar = c.f0 - c.fstar;
  return c;
}

uint64_t wire_bits(const CompressorSpec& spec, size_t d, bool ina_path) {
  if (ina_path) return 8 * d;  // NAT8C payload
  switch (spec.variant) {
    case Variant::kIdentity:
    case Variant::kIntRound:
      return 32 * d;
    case Variant::kNat:
      return 9 * d;
    case Variant::kSparsify: {
      const size_t pos_bits =
          static_cast<size_t>(std::ceil(std::log2(static_cast<double>(d)))) +
          1;
      return spec.q_coords * (32 + pos_bits);
    }
    case Variant::kStdDither:
    case Variant::kNatDither: {
      const uint64_t norm_bits =
          spec.norm_mode == NormMode::kNatCompressed ? 16 : 32;
      return norm_bits +
             d * (1 + static_cast<uint64_t>(dither_level_bits(spec.s_levels)));
    }
    case Variant::kCompose: {
      // Values after the innermost sparsifier ride the outer codec: count
      // the outermost stage's law on the surviving coordinates.
      size_t q = d;
      for (const CompressorSpec& stage : spec.chain) {
        if (stage.variant == Variant::kSparsify) {
          q = std::min(q, stage.q_coords);
        }
      }
      CompressorSpec outer = spec.chain.front();
      if (outer.variant == Variant::kSparsify) {
        outer = CompressorSpec::identity();
      }
      const size_t pos_bits =
          q == d ? 0
                 : q * (static_cast<size_t>(
                            std::ceil(std::log2(static_cast<double>(d)))) +
                        1);
      return wire_bits(outer, q, false) + pos_bits;
    }
  }
  return 32 * d;
}

RunTrace run_sgd(const SyntheticProblem& problem, const SgdConfig& config) {
  const size_t d = problem.d;
  const int n = problem.n;
  if (config.worker_specs.empty()) {
    throw ConfigError("sgd: no worker spec given");
  }
  if (config.worker_specs.size() != 1 &&
      config.worker_specs.size() != static_cast<size_t>(n)) {
    throw ConfigError("sgd: worker spec count must be 1 or n");
  }
  for (int i = 0; i < n; ++i) config.worker_spec(i).validate(d);
  config.master_spec.validate(d);

  const bool ina =
      config.aggregation != SgdConfig::Aggregation::kExact;
  if (ina && config.master_spec.variant != Variant::kNat) {
    throw ConfigError(
        "sgd: the integer aggregation path performs natural compression at "
        "the master; set master_spec=nat");
  }

  RunTrace trace;
  trace.constants = measure_problem_constants(
      problem, std::vector<double>(d, 0.0));

  // omega for the step-size rules: worst worker spec + master spec.
  // Specs without an analytic bound (integer rounding) fall back to 0; the
  // automatic step rules are then unavailable in any useful sense and an
  // explicit eta is validated against the uncompressed cap only.
  auto omega_or_zero = [&](const CompressorSpec& spec) {
    try {
      return omega_of(spec, d).value;
    } catch (const UnboundedSecondMomentError&) {
      return 0.0;
    }
  };
  double omega_w = 0.0;
  for (int i = 0; i < n; ++i) {
    omega_w = std::max(omega_w, omega_or_zero(config.worker_spec(i)));
  }
  const double omega_m = omega_or_zero(config.master_spec);
  ProblemSpec ps;
  ps.n = n;
  ps.sigma2 = trace.constants.sigma2;
  ps.zeta2 = trace.constants.zeta2;
  ps.L = trace.constants.L;
  ps.f0_minus_fstar = trace.constants.f0_minus_fstar;
  trace.ab = alpha_beta(ps, omega_w, omega_m);

  double eta = config.eta;
  uint64_t T = config.T;
  switch (config.eta_rule) {
    case SgdConfig::EtaRule::kExplicit: {
      const double cap = 2.0 / (trace.ab.beta * ps.L);
      if (!(eta > 0.0) || eta >= cap) {
        throw ConfigError("sgd: explicit eta outside (0, 2/(beta L))");
      }
      if (T == 0) throw ConfigError("sgd: explicit eta needs T > 0");
      break;
    }
    case SgdConfig::EtaRule::kAutoEpsilon: {
      const StepPlan plan = step_plan_fixed_epsilon(ps, trace.ab, config.eps);
      eta = plan.eta;
      if (T == 0) T = static_cast<uint64_t>(std::ceil(plan.T));
      break;
    }
    case SgdConfig::EtaRule::kAutoHorizon: {
      if (T == 0) throw ConfigError("sgd: horizon rule needs T > 0");
      const StepPlan plan = step_plan_fixed_horizon(
          ps, trace.ab, static_cast<double>(T));
      eta = plan.eta;
      const double cap = 2.0 / (trace.ab.beta * ps.L);
      if (eta >= cap) eta = 0.5 * cap;  // keep the guarantee's precondition
      break;
    }
  }
  trace.eta_used = eta;
  trace.T = T;

  // Socket path setup.
  std::vector<std::unique_ptr<ina::InaWorkerClient>> clients;
  if (config.aggregation == SgdConfig::Aggregation::kInaSocket) {
    const uint64_t session = detail::mix64(config.seed + 0x696e6131);
    for (int i = 0; i < n; ++i) {
      clients.push_back(std::make_unique<ina::InaWorkerClient>(
          config.ina_host, config.ina_port, session,
          static_cast<uint16_t>(i), static_cast<uint16_t>(n), d));
    }
  }

  const RngStream base(config.seed, 0);
  std::vector<double> x(d, 0.0);
  std::vector<double> g_true(d);
  DenseVector gi = DenseVector::zeros(d);
  std::vector<DenseVector> deltas(static_cast<size_t>(n),
                                  DenseVector::zeros(d));
  DenseVector aggregate = DenseVector::zeros(d);
  DenseVector broadcast = DenseVector::zeros(d);

  uint64_t bits_up_per_iter = 0;
  for (int i = 0; i < n; ++i) {
    bits_up_per_iter += wire_bits(config.worker_spec(i), d, ina);
  }
  const uint64_t bits_down_per_iter = wire_bits(config.master_spec, d, ina);

  const double f0 = problem.f(x);
  const double divergence_cap = 1e6 * std::max(std::fabs(f0), 1.0);

  trace.rows.reserve(T);
  for (uint64_t k = 0; k < T; ++k) {
    const double fk = problem.f(x);
    problem.grad(x, g_true);
    trace.rows.push_back({k, fk, dot(g_true, g_true), bits_up_per_iter,
                          bits_down_per_iter});
    if (fk > divergence_cap) {
      throw RuntimeFailure("sgd: divergence guard tripped at iteration " +
                           std::to_string(k));
    }

    const RngStream iter = base.substream(k);
    // Worker side: stochastic gradient + compression. Each worker's draws
    // are keyed by (iteration, worker), so this loop is freely
    // parallelizable; at desk scale (n <= 8, small d) sequential execution
    // is faster than spawning tasks.
    for (int i = 0; i < n; ++i) {
      RngStream noise =
          iter.substream(kNoiseDomain).substream(static_cast<uint64_t>(i));
      problem.grad_i(i, x, gi.values());
      if (problem.noise_sigma_add > 0.0) {
        for (size_t j = 0; j < d; ++j) {
          gi[j] += problem.noise_sigma_add * noise.next_gaussian();
        }
      }
      const RngStream comp =
          iter.substream(kWorkerDomain).substream(static_cast<uint64_t>(i));
      compress_into(gi, config.worker_spec(i), comp,
                    deltas[static_cast<size_t>(i)]);
    }

    // Master side: aggregate and compress once, then broadcast.
    switch (config.aggregation) {
      case SgdConfig::Aggregation::kExact: {
        std::fill(aggregate.values().begin(), aggregate.values().end(), 0.0);
        for (int i = 0; i < n; ++i) {
          for (size_t j = 0; j < d; ++j) {
            aggregate[j] += deltas[static_cast<size_t>(i)][j];
          }
        }
        const RngStream master = iter.substream(kMasterDomain);
        compress_into(aggregate, config.master_spec, master, broadcast);
        break;
      }
      case SgdConfig::Aggregation::kInaInteger: {
        // In-process integer path: NAT8C encode, 64-bit fixed-point sum,
        // integer stochastic rounding.
        std::vector<std::vector<uint8_t>> payloads(static_cast<size_t>(n));
        std::vector<const uint8_t*> ptrs(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          uint64_t clip = 0;
          std::vector<uint8_t> block =
              encode_nat8c(deltas[static_cast<size_t>(i)], &clip);
          payloads[static_cast<size_t>(i)].assign(
              block.begin() + kBlockHeaderBytes, block.end());
          ptrs[static_cast<size_t>(i)] =
              payloads[static_cast<size_t>(i)].data();
        }
        std::vector<uint8_t> agg(d);
        ina::aggregate_payloads(ptrs.data(), static_cast<size_t>(n), d,
                                config.seed, 0, k, agg.data(), nullptr,
                                nullptr);
        for (size_t j = 0; j < d; ++j) {
          broadcast[j] = static_cast<double>(ina::nat8c_byte_to_fixed(agg[j])) *
                         0x1.0p-50;
        }
        break;
      }
      case SgdConfig::Aggregation::kInaSocket: {
        for (int i = 0; i < n; ++i) {
          clients[static_cast<size_t>(i)]->send_vector(
              deltas[static_cast<size_t>(i)],
              k * clients[0]->chunks_per_vector());
        }
        DenseVector agg;
        for (int i = 0; i < n; ++i) {
          agg = clients[static_cast<size_t>(i)]->receive_vector(
              k * clients[0]->chunks_per_vector());
        }
        broadcast = std::move(agg);
        break;
      }
    }

    const double scale = eta / static_cast<double>(n);
    for (size_t j = 0; j < d; ++j) x[j] -= scale * broadcast[j];
  }

  trace.final_x = x;
  trace.final_f = problem.f(x);

  RngStream sampler(config.seed, kSampleDomain);
  trace.sampled_iteration = T == 0 ? 0 : sampler.next_below(T);
  if (!trace.rows.empty()) {
    trace.sampled_grad_sq = trace.rows[trace.sampled_iteration].grad_sq;
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "k,f,grad_norm_sq,bits_up,bits_down\n";
  out.precision(17);
  for (const RunTrace::Row& row : trace.rows) {
    out << row.k << ',' << row.f << ',' << row.grad_sq << ',' << row.bits_up
        << ',' << row.bits_down << '\n';
  }
}

SgdSetup parse_sgd_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw InvalidInputError("sgd config line " + std::to_string(line_no) +
                                ": expected key=value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const size_t a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const size_t b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto get = [&](const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  auto require = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw InvalidInputError("sgd config: missing key '" + key + "'");
    }
    return it->second;
  };

  SgdSetup setup;
  const std::string kind = get("problem", "quadratic");
  const size_t d = std::stoull(require("d"));
  const int n = std::stoi(require("n"));
  const double sigma_add = std::stod(get("sigma_add", "0"));
  const bool identical = get("identical", "1") != "0";
  const uint64_t seed = std::stoull(get("seed", "0"));

  if (kind == "quadratic") {
    const double min_eig = std::stod(get("min_eig", "0.1"));
    const double max_eig = std::stod(get("max_eig", "1.0"));
    setup.problem = make_quadratic_problem(d, n, min_eig, max_eig, sigma_add,
                                           identical, seed);
  } else if (kind == "logistic") {
    const size_t m = std::stoull(get("m", "64"));
    const double reg = std::stod(get("reg", "0.01"));
    setup.problem =
        make_logistic_problem(d, n, m, reg, sigma_add, identical, seed);
  } else {
    throw InvalidInputError("sgd config: unknown problem '" + kind + "'");
  }

  SgdConfig& config = setup.config;
  config.seed = seed;
  config.worker_specs = {CompressorSpec::parse(get("worker_spec", "nat"))};
  config.master_spec = CompressorSpec::parse(get("master_spec", "identity"));
  config.T = std::stoull(get("T", "0"));

  const std::string eta = get("eta", "auto-eps");
  if (eta == "auto-eps") {
    config.eta_rule = SgdConfig::EtaRule::kAutoEpsilon;
    config.eps = std::stod(get("eps", "0.1"));
  } else if (eta == "auto-horizon") {
    config.eta_rule = SgdConfig::EtaRule::kAutoHorizon;
  } else {
    config.eta_rule = SgdConfig::EtaRule::kExplicit;
    config.eta = std::stod(eta);
  }

  const std::string agg = get("aggregation", "exact");
  if (agg == "exact") {
    config.aggregation = SgdConfig::Aggregation::kExact;
  } else if (agg == "ina") {
    config.aggregation = SgdConfig::Aggregation::kInaInteger;
  } else if (agg.starts_with("socket:")) {
    config.aggregation = SgdConfig::Aggregation::kInaSocket;
    const std::string addr = agg.substr(7);
    const size_t colon = addr.find(':');
    if (colon == std::string::npos) {
      throw InvalidInputError("sgd config: socket aggregation needs host:port");
    }
    config.ina_host = addr.substr(0, colon);
    config.ina_port = static_cast<uint16_t>(std::stoi(addr.substr(colon + 1)));
  } else {
    throw InvalidInputError("sgd config: unknown aggregation '" + agg + "'");
  }
  return setup;
}

}  // namespace natcomp
