// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "natcomp/variance_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "natcomp/core_ops.hpp"
#include "natcomp/dithering.hpp"

namespace natcomp {

namespace {

// Type-7 (linear interpolation) quantile of an already sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double h = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

unsigned worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Fixed chunk count: partial results (and any floating-point reduction over
// them) stay identical across machines with different core counts.
constexpr unsigned kFixedChunks = 8;

// Runs fn(chunk_id, first, last) over [0, total) split into kFixedChunks
// contiguous chunks, distributed over the available threads. Chunk
// boundaries depend on `total` alone, never on scheduling or core count.
template <typename Fn>
void parallel_chunks(uint64_t total, Fn&& fn) {
  const unsigned n_chunks =
      static_cast<unsigned>(std::min<uint64_t>(kFixedChunks,
                                               total == 0 ? 1 : total));
  const uint64_t chunk = (total + n_chunks - 1) / n_chunks;
  const unsigned n_threads = std::min(worker_count(), n_chunks);
  if (n_threads <= 1) {
    for (unsigned c = 0; c < n_chunks; ++c) {
      const uint64_t first = c * chunk;
      const uint64_t last = std::min(total, first + chunk);
      if (first < last) fn(c, first, last);
    }
    return;
  }
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < n_threads; ++t) {
    threads.emplace_back([&fn, t, n_threads, n_chunks, chunk, total] {
      for (unsigned c = t; c < n_chunks; c += n_threads) {
        const uint64_t first = c * chunk;
        const uint64_t last = std::min(total, first + chunk);
        if (first < last) fn(c, first, last);
      }
    });
  }
  for (std::thread& th : threads) th.join();
}

}  // namespace

DenseVector gaussian_vector(size_t d, RngStream stream) {
  std::vector<double> v(d);
  for (size_t i = 0; i < d; ++i) v[i] = stream.next_gaussian();
  return DenseVector::unchecked(std::move(v));
}

VarianceReport empirical_omega(const CompressorSpec& spec, size_t d, int trials,
                               uint64_t seed, InputLaw law,
                               const DenseVector* file_input) {
  if (trials < 1) throw ConfigError("empirical_omega: trials must be >= 1");
  if (law == InputLaw::kFile) {
    if (file_input == nullptr) {
      throw InvalidInputError("empirical_omega: file law without input");
    }
    d = file_input->dim();
  }
  spec.validate(d);

  VarianceReport report;
  report.spec = spec;
  report.d = d;
  report.trials = trials;
  report.omega_samples.assign(static_cast<size_t>(trials), 0.0);

  parallel_chunks(static_cast<uint64_t>(trials), [&](unsigned, uint64_t first,
                                                     uint64_t last) {
    DenseVector out = DenseVector::zeros(d);
    DenseVector generated;
    for (uint64_t t = first; t < last; ++t) {
      // One stream per trial: input draws are sequential, compression draws
      // live on a separate substream, so the two never collide.
      RngStream trial_stream(seed, t);
      const DenseVector* x = file_input;
      if (law == InputLaw::kGaussian) {
        generated = gaussian_vector(d, trial_stream);
        x = &generated;
      }
      RngStream comp = trial_stream.substream(0x636f6d70);  // "comp"
      compress_into(*x, spec, comp, out);
      const double nx = squared_norm(*x);
      report.omega_samples[t] =
          nx == 0.0 ? 0.0 : squared_distance(out, *x) / nx;
    }
  });

  std::vector<double> sorted = report.omega_samples;
  std::sort(sorted.begin(), sorted.end());
  report.min = sorted.front();
  report.q25 = quantile_sorted(sorted, 0.25);
  report.median = quantile_sorted(sorted, 0.50);
  report.q75 = quantile_sorted(sorted, 0.75);
  report.max = sorted.back();
  return report;
}

namespace {

// Per-coordinate two-point plan for the stateless element-wise operators.
// Replays exactly the arithmetic of compress_into on a fixed x, with the
// x-dependent quantities hoisted out of the Monte-Carlo loop.
struct TwoPointPlan {
  bool valid = false;
  bool pick_on_less = false;  // value = base + [u < thr] * diff, else >= form
  bool natnorm = false;
  double norm = 0.0;        // exact p-norm (nat-compression input)
  double wire = 1.0;        // constant multiplier (exact-norm dithering)
  bool scale_by_wire = false;
  std::vector<double> base, diff, thr;
};

TwoPointPlan build_two_point_plan(const CompressorSpec& spec,
                                  const DenseVector& x) {
  const size_t d = x.dim();
  TwoPointPlan plan;
  plan.base.resize(d);
  plan.diff.resize(d);
  plan.thr.resize(d);
  switch (spec.variant) {
    case Variant::kNat: {
      // c_nat_unchecked: mag = low' + [u >= 1 - m] * low', low' flushed.
      for (size_t i = 0; i < d; ++i) {
        const double a = std::fabs(x[i]);
        const uint64_t bits = std::bit_cast<uint64_t>(a);
        constexpr uint64_t kFracMask = (1ULL << 52) - 1;
        const double m = static_cast<double>(bits & kFracMask) * 0x1.0p-52;
        const double low = std::bit_cast<double>(bits & ~kFracMask);
        const double flush = static_cast<double>(a >= 0x1.0p-126);
        plan.base[i] = low * flush;
        plan.diff[i] = low * flush;
        plan.thr[i] = 1.0 - m;
      }
      plan.pick_on_less = false;
      plan.valid = true;
      return plan;
    }
    case Variant::kIntRound: {
      for (size_t i = 0; i < d; ++i) {
        const double lo = std::floor(x[i]);
        const double hi = std::ceil(x[i]);
        plan.base[i] = lo;
        plan.diff[i] = hi - lo;  // 0 or exactly 1
        plan.thr[i] = hi - x[i];
      }
      plan.pick_on_less = false;
      plan.valid = true;
      return plan;
    }
    case Variant::kStdDither:
    case Variant::kNatDither: {
      const LevelLadder ladder = spec.variant == Variant::kStdDither
                                     ? LevelLadder::linear(spec.s_levels)
                                     : LevelLadder::geometric(spec.s_levels);
      const double norm = lp_norm(x, spec.p_norm);
      if (norm == 0.0) return plan;  // all-zero input: fall back
      plan.norm = norm;
      plan.natnorm = spec.norm_mode == NormMode::kNatCompressed;
      plan.wire = static_cast<double>(static_cast<float>(norm));
      plan.scale_by_wire = true;
      const double inv_norm = 1.0 / norm;
      for (size_t i = 0; i < d; ++i) {
        const double y = std::min(std::fabs(x[i]) * inv_norm, 1.0);
        const int u = ladder.bracket(y);
        const double hi = ladder.level(u);
        const double lo = ladder.level(u + 1);
        plan.base[i] = lo;
        plan.diff[i] = hi - lo;
        plan.thr[i] = hi > lo ? (y - lo) / (hi - lo) : 1.0;
      }
      plan.pick_on_less = true;  // take_hi = [u < p_hi]
      plan.valid = true;
      return plan;
    }
    default:
      return plan;
  }
}

template <bool kPickOnLess>
void run_two_point_draw(const TwoPointPlan& plan, const DenseVector& x,
                        uint64_t seed, uint64_t k, DenseVector& out) {
  RngStream stream(seed, k);
  double wire = plan.wire;
  if (plan.natnorm) {
    wire = c_nat_scalar_with_draw(plan.norm, stream.uniform_at(x.dim()));
  }
  const double* base = plan.base.data();
  const double* diff = plan.diff.data();
  const double* thr = plan.thr.data();
  const double* in = x.values().data();
  double* o = out.values().data();
  const size_t d = x.dim();
  if (plan.scale_by_wire) {
    for (size_t i = 0; i < d; ++i) {
      const double u = stream.uniform_at(i);
      const double sel = static_cast<double>(kPickOnLess ? u < thr[i]
                                                         : u >= thr[i]);
      o[i] = std::copysign(wire * (base[i] + sel * diff[i]), in[i]);
    }
  } else {
    for (size_t i = 0; i < d; ++i) {
      const double u = stream.uniform_at(i);
      const double sel = static_cast<double>(kPickOnLess ? u < thr[i]
                                                         : u >= thr[i]);
      o[i] = std::copysign(base[i] + sel * diff[i], in[i]);
    }
  }
}

}  // namespace

GateResult unbiasedness_gate(const CompressorSpec& spec, const DenseVector& x,
                             uint64_t draws, uint64_t seed) {
  spec.validate(x.dim());
  const TwoPointPlan plan = build_two_point_plan(spec, x);
  if (plan.valid) {
    const DrawSampler sampler =
        plan.pick_on_less
            ? DrawSampler([&plan, &x, seed](uint64_t k, DenseVector& out) {
                run_two_point_draw<true>(plan, x, seed, k, out);
              })
            : DrawSampler([&plan, &x, seed](uint64_t k, DenseVector& out) {
                run_two_point_draw<false>(plan, x, seed, k, out);
              });
    return unbiasedness_gate_sampler(sampler, x, draws);
  }
  return unbiasedness_gate_sampler(
      [&spec, &x, seed](uint64_t k, DenseVector& out) {
        RngStream stream(seed, k);  // one stream per draw
        compress_into(x, spec, stream, out);
      },
      x, draws);
}

GateResult unbiasedness_gate_sampler(const DrawSampler& sampler,
                                     const DenseVector& x, uint64_t draws) {
  if (draws < 10000) {
    throw ConfigError("unbiasedness_gate: needs at least 10^4 draws");
  }
  const size_t d = x.dim();

  std::vector<std::vector<double>> sums(kFixedChunks), sumsqs(kFixedChunks);

  parallel_chunks(draws, [&](unsigned chunk_id, uint64_t first, uint64_t last) {
    std::vector<double>& sum = sums[chunk_id];
    std::vector<double>& sumsq = sumsqs[chunk_id];
    sum.assign(d, 0.0);
    sumsq.assign(d, 0.0);
    DenseVector out = DenseVector::zeros(d);
    for (uint64_t k = first; k < last; ++k) {
      sampler(k, out);
      for (size_t i = 0; i < d; ++i) {
        const double v = out[i];
        sum[i] += v;
        sumsq[i] += v * v;
      }
    }
  });

  // Combine partials in chunk order so the reduction is bit-reproducible.
  std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
  for (unsigned c = 0; c < kFixedChunks; ++c) {
    if (sums[c].empty()) continue;
    for (size_t i = 0; i < d; ++i) {
      sum[i] += sums[c][i];
      sumsq[i] += sumsqs[c][i];
    }
  }

  GateResult result;
  const double n = static_cast<double>(draws);
  for (size_t i = 0; i < d; ++i) {
    const double mean = sum[i] / n;
    const double var = std::max(0.0, sumsq[i] / n - mean * mean);
    const double se = std::sqrt(var / n);
    double z;
    if (se == 0.0) {
      z = mean == x[i] ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      z = std::fabs(mean - x[i]) / se;
    }
    if (z > result.max_z) {
      result.max_z = z;
      result.argmax_coord = i;
    }
  }
  result.pass = result.max_z <= 4.0;
  return result;
}

void write_omega_csv(std::ostream& out, const VarianceReport& report) {
  out << "trial,omega\n";
  out.precision(17);
  for (size_t t = 0; t < report.omega_samples.size(); ++t) {
    out << t << ',' << report.omega_samples[t] << '\n';
  }
}

void write_summary_csv_header(std::ostream& out) {
  out << "spec,d,trials,min,q25,median,q75,max\n";
}

void write_summary_csv_row(std::ostream& out, const VarianceReport& report) {
  out.precision(17);
  // Spec strings carry commas; quote the field per RFC 4180.
  out << '"' << report.spec.to_string() << '"' << ',' << report.d << ','
      << report.trials << ',' << report.min << ',' << report.q25 << ','
      << report.median << ',' << report.q75 << ',' << report.max << '\n';
}

}  // namespace natcomp
