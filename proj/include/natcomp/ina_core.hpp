// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

namespace natcomp::ina {

// Integer-only aggregation core. The implementation translation unit is
// compiled with -mgeneral-regs-only where supported, so introducing any
// floating-point operation into it fails the build.
//
// Fixed-point convention: a NAT8C value +-2^k (k clipped into [-50, 10]) is
// held as the 64-bit integer +-2^(k+50), i.e. magnitudes in [2^0, 2^60].
// With saturation at +-2^62 the accumulator can absorb any worker count
// without signed overflow (acc <= 2^62, addend <= 2^60 < 2^63 - 2^62).

inline constexpr int kExponentShift = 50;
inline constexpr int64_t kSaturationMagnitude = int64_t{1} << 62;

// Decodes one NAT8C byte to the fixed-point integer. Returns 0 for the zero
// code. The byte layout is [zero flag][sign][6-bit offset].
int64_t nat8c_byte_to_fixed(uint8_t byte);

// Unbiased stochastic rounding of a fixed-point sum to a power of two,
// re-encoded as NAT8C. Uses only comparisons, shifts and masks: with
// a = floor(log2 |sum|) the high endpoint 2^(a+1) is chosen iff
// (rand mod 2^a) < |sum| - 2^a. Exponents above the NAT8C range clip to
// k = 10 and increment *clip_count.
uint8_t fixed_to_nat8c_round(int64_t sum, uint64_t rand_word,
                             uint64_t* clip_count);

// Aggregates n_workers NAT8C payloads of n_elements bytes each into `out`.
// The rounding draw for element i is keyed by (seed, session_id, chunk_index,
// i), so identical inputs produce identical bytes regardless of timing, and
// the multicast carries one shared draw per element.
void aggregate_payloads(const uint8_t* const* worker_payloads,
                        size_t n_workers, size_t n_elements, uint64_t seed,
                        uint64_t session_id, uint64_t chunk_index, uint8_t* out,
                        uint64_t* clip_count, uint64_t* saturation_count);

// True when this translation unit was built with floating-point registers
// banned (x86-64: -mgeneral-regs-only removes the SSE2 baseline macro).
bool hot_path_float_banned();

}  // namespace natcomp::ina
