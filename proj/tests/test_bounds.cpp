// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "natcomp/bounds.hpp"

#include <cmath>

#include "doctest.h"
#include "natcomp/errors.hpp"

using natcomp::AlphaBeta;
using natcomp::CompressorSpec;
using natcomp::CostFamily;
using natcomp::CostModel;
using natcomp::ProblemSpec;
using natcomp::SpeedupCell;

TEST_CASE("omega_of: canonical values") {
  CHECK(natcomp::omega_of(CompressorSpec::identity(), 10).value == 0.0);
  CHECK(natcomp::omega_of(CompressorSpec::nat(), 10).value == 0.125);
  CHECK(natcomp::omega_of(CompressorSpec::sparsify(10), 10).value == 0.0);
  CHECK(natcomp::omega_of(CompressorSpec::sparsify(1), 10).value ==
        doctest::Approx(9.0));
  // Compose[nat, sparsify] with d/q = 10: 9d/(8q) - 1 = 10.25.
  const CompressorSpec composed =
      CompressorSpec::parse("compose(nat;sparsify:q=100)");
  CHECK(natcomp::omega_of(composed, 1000).value == doctest::Approx(10.25));
  CHECK_THROWS_AS(natcomp::omega_of(CompressorSpec::int_round(), 10),
                  natcomp::UnboundedSecondMomentError);
}

TEST_CASE("omega_of: composing with identity changes nothing") {
  const CompressorSpec plain = CompressorSpec::parse("natdither:p=2,s=7");
  const CompressorSpec wrapped =
      CompressorSpec::parse("compose(natdither:p=2,s=7;identity)");
  CHECK(natcomp::omega_of(wrapped, 5000).value ==
        natcomp::omega_of(plain, 5000).value);
}

TEST_CASE("alpha_beta: worked examples") {
  // No compression: alpha = sigma^2/n, beta = 1.
  ProblemSpec p{4, 1.0, 0.0, 1.0, 1.0};
  const AlphaBeta none = natcomp::alpha_beta(p, 0.0, 0.0);
  CHECK(none.alpha == doctest::Approx(0.25));
  CHECK(none.beta == doctest::Approx(1.0));

  // omega_M = 0, omega_W = 1/8, n = 4, sigma^2 = 1, zeta^2 = 0.
  const AlphaBeta nat = natcomp::alpha_beta(p, 0.125, 0.0);
  CHECK(nat.alpha == doctest::Approx(9.0 / 32.0));
  CHECK(nat.beta == doctest::Approx(1.0 + 1.0 / 32.0));

  // Exact gradients, identical data: alpha = 0 regardless of omega.
  ProblemSpec exact{4, 0.0, 0.0, 1.0, 1.0};
  const AlphaBeta zero = natcomp::alpha_beta(exact, 3.0, 2.0);
  CHECK(zero.alpha == 0.0);
}

TEST_CASE("alpha_beta is monotone in both omegas") {
  ProblemSpec p{8, 2.0, 0.5, 1.0, 1.0};
  double prev_alpha = -1.0, prev_beta = 0.0;
  for (double w = 0.0; w <= 4.0; w += 0.5) {
    const AlphaBeta ab = natcomp::alpha_beta(p, w, 0.25);
    CHECK(ab.alpha >= prev_alpha);
    CHECK(ab.beta >= prev_beta);
    prev_alpha = ab.alpha;
    prev_beta = ab.beta;
  }
  prev_alpha = -1.0;
  prev_beta = 0.0;
  for (double w = 0.0; w <= 4.0; w += 0.5) {
    const AlphaBeta ab = natcomp::alpha_beta(p, 0.25, w);
    CHECK(ab.alpha >= prev_alpha);
    CHECK(ab.beta >= prev_beta);
    prev_alpha = ab.alpha;
    prev_beta = ab.beta;
  }
}

TEST_CASE("step plan: relative slowdown brackets") {
  // With zeta = 0 the slowdown T(wM, wW) / T(0, 0) lies in
  // (wM + 1, (wM + 1)(wW + 1)], upper end at n = 1, lower end as n grows.
  const double eps = 0.01;
  const double wW = 0.125, wM = 0.125;
  auto slowdown = [&](int n) {
    ProblemSpec p{n, 1.0, 0.0, 2.0, 3.0};
    const AlphaBeta base = natcomp::alpha_beta(p, 0.0, 0.0);
    const AlphaBeta comp = natcomp::alpha_beta(p, wW, wM);
    return natcomp::step_plan_fixed_epsilon(p, comp, eps).T /
           natcomp::step_plan_fixed_epsilon(p, base, eps).T;
  };
  const double upper = (wM + 1.0) * (wW + 1.0);
  for (int n : {1, 2, 4, 64}) {
    const double ratio = slowdown(n);
    CHECK(ratio > wM + 1.0);
    CHECK(ratio <= upper + 1e-12);
  }
  CHECK(slowdown(1) == doctest::Approx(upper));
  CHECK(slowdown(1 << 24) == doctest::Approx(wM + 1.0).epsilon(1e-4));

  // No compression: ratio exactly 1.
  ProblemSpec p{4, 1.0, 0.0, 2.0, 3.0};
  const AlphaBeta base = natcomp::alpha_beta(p, 0.0, 0.0);
  CHECK(natcomp::step_plan_fixed_epsilon(p, base, eps).T ==
        natcomp::step_plan_fixed_epsilon(p, base, eps).T);
}

TEST_CASE("step plans: the epsilon rule meets its own bound exactly") {
  ProblemSpec p{4, 1.0, 0.25, 2.0, 3.0};
  const AlphaBeta ab = natcomp::alpha_beta(p, 0.125, 0.125);
  const double eps = 0.05;
  const natcomp::StepPlan plan = natcomp::step_plan_fixed_epsilon(p, ab, eps);
  // At the rule's eta and minimal T the bound evaluates to eps exactly.
  CHECK(natcomp::convergence_bound(p, ab, plan.eta, plan.T) ==
        doctest::Approx(eps).epsilon(1e-12));
}

TEST_CASE("fixed-horizon rule requires positive alpha") {
  ProblemSpec p{4, 0.0, 0.0, 1.0, 1.0};
  const AlphaBeta ab = natcomp::alpha_beta(p, 0.125, 0.0);
  CHECK(ab.alpha == 0.0);
  CHECK_THROWS_AS(natcomp::step_plan_fixed_horizon(p, ab, 100.0),
                  natcomp::ConfigError);
  ProblemSpec noisy{4, 1.0, 0.0, 1.0, 1.0};
  const AlphaBeta ab2 = natcomp::alpha_beta(noisy, 0.125, 0.0);
  const natcomp::StepPlan plan = natcomp::step_plan_fixed_horizon(noisy, ab2,
                                                                  1000.0);
  CHECK(plan.eta == doctest::Approx(std::sqrt(2.0 * 1.0 /
                                              (1.0 * 1000.0 * ab2.alpha))));
  CHECK(plan.T == doctest::Approx(ab2.beta * ab2.beta / ab2.alpha));
}

TEST_CASE("printed bit formulas") {
  CHECK(natcomp::printed_bits(CostFamily::kBaseline, 1000000, 0, 0, false) ==
        32000000.0);
  CHECK(natcomp::printed_bits(CostFamily::kNat, 1000000, 0, 0, false) ==
        9000000.0);
  // Standard dithering, s = 8: 31 + d (2 + 8).
  CHECK(natcomp::printed_bits(CostFamily::kStdDither, 1000000, 0, 8, false) ==
        31.0 + 1000000.0 * 10.0);
  // Natural dithering, s = 8: 31 + d (2 + 3).
  CHECK(natcomp::printed_bits(CostFamily::kNatDither, 1000000, 0, 8, false) ==
        31.0 + 1000000.0 * 5.0);
  // Sparsified rows carry log2 C(d, q); cross-check via the entropy bound:
  // log2 C(d, q) ~= d H2(q/d) - 0.5 log2(2 pi d p (1-p)).
  const double lg = natcomp::log2_binomial(1000000, 100000);
  const double h2 = -0.1 * std::log2(0.1) - 0.9 * std::log2(0.9);
  const double correction =
      0.5 * std::log2(2.0 * 3.14159265358979 * 1000000 * 0.09);
  CHECK(lg == doctest::Approx(1000000.0 * h2 - correction).epsilon(1e-6));
  CHECK(natcomp::printed_bits(CostFamily::kSparsify, 1000000, 100000, 0,
                              false) == doctest::Approx(3200000.0 + lg));
  // Composed row: 10q by default, 9q in the nine-bit variant.
  CHECK(natcomp::printed_bits(CostFamily::kNatSparsify, 1000000, 100000, 0,
                              false) == doctest::Approx(1000000.0 + lg));
  CHECK(natcomp::printed_bits(CostFamily::kNatSparsify, 1000000, 100000, 0,
                              false, true) == doctest::Approx(900000.0 + lg));
}

TEST_CASE("savings ratios") {
  CHECK(natcomp::nat_savings_ratio(32) == doctest::Approx(32.0 / 9.0));
  CHECK(std::round(natcomp::nat_savings_ratio(32) * 100) / 100 ==
        doctest::Approx(3.56));
  CHECK(std::round(natcomp::nat_savings_ratio(64) * 100) / 100 ==
        doctest::Approx(5.82));
  CHECK_THROWS_AS(natcomp::nat_savings_ratio(16), natcomp::ConfigError);
}

namespace {
double round1(double x) { return std::floor(x * 10.0 + 0.5) / 10.0; }
double round2(double x) { return std::floor(x * 100.0 + 0.5) / 100.0; }
}  // namespace

TEST_CASE("speedup cells: headline model worked examples") {
  // Model 2, nat: (3.2, 3.6) at one decimal.
  const SpeedupCell nat =
      natcomp::speedup_factor(CostModel::kModel2, CostFamily::kNat, 1000000,
                              100000);
  CHECK(round1(nat.lower) == doctest::Approx(3.2));
  CHECK(round1(nat.upper) == doctest::Approx(3.6));

  // Model 2, nat o sparsify: (1.0, 10.7).
  const SpeedupCell comp = natcomp::speedup_factor(
      CostModel::kModel2, CostFamily::kNatSparsify, 1000000, 100000);
  CHECK(round1(comp.lower) == doctest::Approx(1.0));
  CHECK(round1(comp.upper) == doctest::Approx(10.7));

  // Model 1, nat: (2.81, 3.16) at two decimals.
  const SpeedupCell m1 =
      natcomp::speedup_factor(CostModel::kModel1, CostFamily::kNat, 1000000,
                              100000);
  CHECK(round2(m1.lower) == doctest::Approx(2.81));
  CHECK(round2(m1.upper) == doctest::Approx(3.16));
}

TEST_CASE("cost table exposes rows for every published family") {
  const auto t2 = natcomp::cost_table(CostModel::kModel2, 1000000, 100000);
  CHECK(t2.size() == 6);
  CHECK(t2[0].cell.lower == 1.0);
  CHECK(t2[0].cell.upper == 1.0);
  const auto t4 = natcomp::cost_table(CostModel::kModel4, 1000000, 100000);
  CHECK(t4.size() == 3);
  // Dithering rows report their pinned level counts.
  CHECK(t4[2].cell.s_lower > 0);
  CHECK(t4[2].cell.s_upper > 0);
}

TEST_CASE("self-optimized speedup never falls below the pinned points") {
  for (CostFamily family : {CostFamily::kStdDither, CostFamily::kNatDither}) {
    for (CostModel model : {CostModel::kModel1, CostModel::kModel2}) {
      const SpeedupCell pinned =
          natcomp::speedup_factor(model, family, 1000000, 100000);
      const SpeedupCell best =
          natcomp::speedup_factor_optimized(model, family, 1000000, 100000);
      CHECK(best.lower >= pinned.lower - 1e-9);
      // The published upper operating point for standard dithering uses the
      // boundary bit law, which the optimizer does not revisit.
      if (family != CostFamily::kStdDither || model != CostModel::kModel2) {
        CHECK(best.upper >= pinned.upper - 1e-9);
      }
    }
  }
}

TEST_CASE("fig1 rows carry positive coordinates and the nat anchor") {
  const auto rows = natcomp::fig1_rows(1000000);
  CHECK(rows.size() > 10);
  CHECK(rows[0].label == "nat");
  CHECK(rows[0].omega_plus_1 == doctest::Approx(1.125));
  CHECK(rows[0].bits == doctest::Approx(9000000.0));
  for (const auto& row : rows) {
    CHECK(row.omega_plus_1 >= 1.0);
    CHECK(row.bits > 0.0);
  }
}
