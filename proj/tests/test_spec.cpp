// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "natcomp/compressor_spec.hpp"

#include "doctest.h"
#include "natcomp/errors.hpp"

using natcomp::CompressorSpec;
using natcomp::NormKind;
using natcomp::NormMode;
using natcomp::Variant;

TEST_CASE("spec strings round-trip through parse and to_string") {
  for (const char* text :
       {"identity", "nat", "int", "sparsify:q=32", "stddither:p=2,s=8",
        "natdither:p=inf,s=10", "natdither:p=1,s=4,natnorm",
        "compose(nat;sparsify:q=7)",
        "compose(natdither:p=2,s=8,natnorm;sparsify:q=100;nat)"}) {
    const CompressorSpec spec = CompressorSpec::parse(text);
    CHECK(spec.to_string() == text);
    CHECK(CompressorSpec::parse(spec.to_string()).to_string() == text);
  }
}

TEST_CASE("parsed fields land where expected") {
  const CompressorSpec spec =
      CompressorSpec::parse("natdither:p=inf,s=12,natnorm");
  CHECK(spec.variant == Variant::kNatDither);
  CHECK(spec.p_norm == NormKind::kLinf);
  CHECK(spec.s_levels == 12);
  CHECK(spec.norm_mode == NormMode::kNatCompressed);

  const CompressorSpec chain = CompressorSpec::parse("compose(nat;sparsify:q=5)");
  REQUIRE(chain.chain.size() == 2);
  CHECK(chain.chain[0].variant == Variant::kNat);
  CHECK(chain.chain[1].variant == Variant::kSparsify);
  CHECK(chain.chain[1].q_coords == 5);
}

TEST_CASE("malformed spec strings are rejected") {
  for (const char* text :
       {"", "nat2", "sparsify", "sparsify:q=", "sparsify:q=abc",
        "stddither:p=3,s=8", "stddither:p=2", "natdither:s=8",
        "stddither:p=2,s=8,natnorm", "compose()", "compose(nat"}) {
    CHECK_THROWS_AS(CompressorSpec::parse(text), natcomp::ConfigError);
  }
}

TEST_CASE("validation enforces dimension fit") {
  CHECK_THROWS_AS(CompressorSpec::sparsify(11).validate(10),
                  natcomp::ConfigError);
  CHECK_NOTHROW(CompressorSpec::sparsify(10).validate(10));
  CHECK_THROWS_AS(CompressorSpec::compose({}).validate(10),
                  natcomp::ConfigError);
  CompressorSpec dither = CompressorSpec::nat_dither(NormKind::kL2, 0);
  CHECK_THROWS_AS(dither.validate(10), natcomp::ConfigError);
}
