// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace natcomp {

namespace detail {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

// Counter-based uniform stream keyed by (seed, stream_id, index).
//
// Identical (seed, stream_id, call sequence) gives identical outputs on every
// platform. Indexed access (`uniform_at`) makes element-wise vector
// compression order-independent and safe to parallelize; the sequential
// interface advances an internal counter for draws whose count is data
// dependent (rejection sampling, Fisher-Yates).
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream_id = 0)
      : seed_(seed),
        stream_id_(stream_id),
        base_(detail::mix64(detail::mix64(seed) + stream_id)) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  uint64_t bits_at(uint64_t index) const {
    return detail::mix64(base_ + index * detail::kGolden);
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform_at(uint64_t index) const {
    return static_cast<double>(bits_at(index) >> 11) * 0x1.0p-53;
  }

  uint64_t next_bits() { return bits_at(counter_++); }

  double next_uniform() {
    return static_cast<double>(next_bits() >> 11) * 0x1.0p-53;
  }

  // Exactly uniform over {0, ..., n-1} via rejection.
  uint64_t next_below(uint64_t n) {
    const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const uint64_t r = next_bits();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller (two uniform draws per value).
  double next_gaussian() {
    const double u1 = 1.0 - next_uniform();  // (0, 1]
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  // Derived stream for a sub-task (compose stage, worker id, iteration).
  RngStream substream(uint64_t tag) const {
    return RngStream(seed_, detail::mix64(stream_id_ * detail::kGolden + tag + 1));
  }

 private:
  uint64_t seed_;
  uint64_t stream_id_;
  uint64_t base_;
  uint64_t counter_ = 0;
};

}  // namespace natcomp
