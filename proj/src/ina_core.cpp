// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Integer-only hot path. Compiled with -mgeneral-regs-only where the
// compiler supports it: a floating-point operation added here becomes a
// build failure, which keeps the switch-hardware constraint honest.

#include "natcomp/ina_core.hpp"

#include <bit>

namespace natcomp::ina {

namespace {

// SplitMix64 finalizer, duplicated here so this translation unit stays
// self-contained and integer-only.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

int64_t nat8c_byte_to_fixed(uint8_t byte) {
  if (byte & 0x80) return 0;
  int offset = byte & 0x3f;  // k + 50 in [0, 60]
  if (offset > 60) offset = 60;  // crafted bytes clamp to the top exponent
  const int64_t magnitude = int64_t{1} << offset;
  return (byte & 0x40) ? -magnitude : magnitude;
}

uint8_t fixed_to_nat8c_round(int64_t sum, uint64_t rand_word,
                             uint64_t* clip_count) {
  if (sum == 0) return 0x80;
  const uint8_t sign = sum < 0 ? 0x40 : 0x00;
  const uint64_t mag = sum < 0 ? static_cast<uint64_t>(-sum)
                               : static_cast<uint64_t>(sum);
  const int a = 63 - std::countl_zero(mag);
  const uint64_t low = uint64_t{1} << a;
  const uint64_t rem = mag - low;
  int exponent = a;
  if (rem != 0 && (rand_word & (low - 1)) < rem) {
    ++exponent;
  }
  int offset = exponent;  // biased exponent = (exponent - 50) + 50
  if (offset > 60) {
    offset = 60;
    if (clip_count != nullptr) ++*clip_count;
  }
  return static_cast<uint8_t>(sign | offset);
}

bool hot_path_float_banned() {
#if defined(__x86_64__) && !defined(__SSE2__)
  return true;  // general-regs-only build: FP instructions cannot appear
#else
  return false;
#endif
}

void aggregate_payloads(const uint8_t* const* worker_payloads,
                        size_t n_workers, size_t n_elements, uint64_t seed,
                        uint64_t session_id, uint64_t chunk_index, uint8_t* out,
                        uint64_t* clip_count, uint64_t* saturation_count) {
  const uint64_t base =
      mix64(mix64(mix64(seed) + session_id) + chunk_index);
  for (size_t i = 0; i < n_elements; ++i) {
    int64_t acc = 0;
    for (size_t w = 0; w < n_workers; ++w) {
      acc += nat8c_byte_to_fixed(worker_payloads[w][i]);
      if (acc > kSaturationMagnitude) {
        acc = kSaturationMagnitude;
        if (saturation_count != nullptr) ++*saturation_count;
      } else if (acc < -kSaturationMagnitude) {
        acc = -kSaturationMagnitude;
        if (saturation_count != nullptr) ++*saturation_count;
      }
    }
    const uint64_t rand_word = mix64(base + i * 0x9e3779b97f4a7c15ULL);
    out[i] = fixed_to_nat8c_round(acc, rand_word, clip_count);
  }
}

}  // namespace natcomp::ina
