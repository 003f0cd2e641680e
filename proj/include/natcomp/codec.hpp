// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "natcomp/compressor_spec.hpp"
#include "natcomp/dense_vector.hpp"
#include "natcomp/dithering.hpp"

namespace natcomp {

// Self-describing block layout, all integers little-endian:
//   magic "NCMP" (4) | version 0x01 (1) | codec id (1) | d (8)
//   | codec parameters | payload, bit-packed MSB-first, zero-padded.
//
// NAT9  (0x01): 9 bits per scalar [sign][8-bit exponent E]; E = k + 127 for
//               +-2^k, E = 0 encodes zero (sign must be 0), E = 255 reserved.
// NAT8C (0x02): 8 bits per scalar [zero flag][sign][6-bit offset e' = k + 50]
//               with k clipped into [-50, 10]; clips are counted.
// DITHER(0x03): params p (1 byte: 1, 2, 255=inf) | s (1) | mode (1: bit0 =
//               nat-compressed norm, bit1 = linear ladder) | norm (binary32,
//               or {sign byte, exponent byte} when nat-compressed); payload
//               1 sign bit + ceil(log2(s+1)) level bits per coordinate.
enum class CodecId : uint8_t {
  kNat9 = 0x01,
  kNat8c = 0x02,
  kDither = 0x03,
};

inline constexpr size_t kBlockHeaderBytes = 14;

inline constexpr size_t nat9_payload_bytes(uint64_t d) {
  return static_cast<size_t>((9 * d + 7) / 8);
}
inline constexpr size_t nat8c_payload_bytes(uint64_t d) {
  return static_cast<size_t>(d);
}

// Level-index field width: s + 1 codes (index s is the zero level).
int dither_level_bits(int s);

std::vector<uint8_t> encode_nat9(const DenseVector& x);

// Returns the block; *clip_count (optional) receives the number of
// coordinates whose exponent fell outside [-50, 10].
std::vector<uint8_t> encode_nat8c(const DenseVector& x,
                                  uint64_t* clip_count = nullptr);

struct DitherWire {
  NormKind p = NormKind::kL2;
  int s = 1;
  NormMode norm_mode = NormMode::kExact;
  LevelLadder::Kind ladder_kind = LevelLadder::Kind::kGeometric;
  double norm_value = 0.0;
  std::vector<int8_t> signs;
  std::vector<uint16_t> level_indices;
};

std::vector<uint8_t> encode_dither(const DitherWire& wire);
std::vector<uint8_t> encode_dither(const DitherResult& result, NormKind p,
                                   NormMode norm_mode);

struct DecodedBlock {
  CodecId codec = CodecId::kNat9;
  uint64_t d = 0;
  DenseVector values;  // decoded scalars (DITHER: reconstructed vector)
  std::optional<DitherWire> dither;
};

DecodedBlock decode(std::span<const uint8_t> block);

struct ExponentHistogram {
  std::map<int, uint64_t> counts;  // floor(log2 |x_i|) -> count, nonzeros only
  uint64_t zeros = 0;
  int min_exp = std::numeric_limits<int>::max();
  int max_exp = std::numeric_limits<int>::min();
  bool any() const { return !counts.empty(); }
};

ExponentHistogram exponent_histogram(const DenseVector& x);

namespace detail {

class BitWriter {
 public:
  void push(uint32_t value, int bits) {
    for (int b = bits - 1; b >= 0; --b) {
      if (bit_ == 0) bytes_.push_back(0);
      bytes_.back() |= static_cast<uint8_t>(((value >> b) & 1u) << (7 - bit_));
      bit_ = (bit_ + 1) & 7;
    }
  }
  std::vector<uint8_t> take() { return std::move(bytes_); }
  size_t size_bytes() const { return bytes_.size(); }

 private:
  std::vector<uint8_t> bytes_;
  int bit_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}
  uint32_t pull(int bits) {
    uint32_t v = 0;
    for (int b = 0; b < bits; ++b) {
      const size_t byte = pos_ >> 3;
      const int off = static_cast<int>(pos_ & 7);
      v = (v << 1) | ((bytes_[byte] >> (7 - off)) & 1u);
      ++pos_;
    }
    return v;
  }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace detail

}  // namespace natcomp
