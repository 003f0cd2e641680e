// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "natcomp/codec.hpp"

#include <bit>
#include <cstring>

#include "natcomp/binary32.hpp"

namespace natcomp {

namespace {

constexpr uint8_t kMagic[4] = {'N', 'C', 'M', 'P'};
constexpr uint8_t kVersion = 0x01;

void append_header(std::vector<uint8_t>& out, CodecId codec, uint64_t d) {
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(static_cast<uint8_t>(codec));
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<uint8_t>((d >> (8 * i)) & 0xff));
  }
}

uint8_t norm_code(NormKind p) {
  switch (p) {
    case NormKind::kL1:
      return 1;
    case NormKind::kL2:
      return 2;
    case NormKind::kLinf:
      return 255;
  }
  return 2;
}

NormKind norm_from_code(uint8_t code) {
  if (code == 1) return NormKind::kL1;
  if (code == 2) return NormKind::kL2;
  if (code == 255) return NormKind::kLinf;
  throw FormatError("decode: bad norm code " + std::to_string(code));
}

// Exponent of a power-of-two-or-zero coordinate; throws on anything else.
int checked_exponent(double v, const char* codec) {
  if (!is_power_of_two_or_zero(v)) {
    if (v != 0.0 && std::fabs(v) >= 0x1.0p128) {
      throw InvalidInputError(std::string(codec) +
                              ": exponent above binary32 range (field 255 "
                              "reserved)");
    }
    throw InvalidInputError(std::string(codec) +
                            ": coordinate is not a power of two or zero");
  }
  return v == 0.0 ? 0 : power_of_two_exponent(v);
}

}  // namespace

int dither_level_bits(int s) {
  return std::bit_width(static_cast<unsigned>(s));  // ceil(log2(s + 1))
}

std::vector<uint8_t> encode_nat9(const DenseVector& x) {
  std::vector<uint8_t> out;
  out.reserve(kBlockHeaderBytes + nat9_payload_bytes(x.dim()));
  append_header(out, CodecId::kNat9, x.dim());
  detail::BitWriter bits;
  for (double v : x.values()) {
    if (v == 0.0) {
      bits.push(0, 9);
      continue;
    }
    const int k = checked_exponent(v, "nat9");
    if (k < -126 || k > 127) {
      throw InvalidInputError("nat9: exponent " + std::to_string(k) +
                              " outside [-126, 127]");
    }
    const uint32_t sign = v < 0.0 ? 1 : 0;
    const uint32_t field = static_cast<uint32_t>(k + 127);
    bits.push((sign << 8) | field, 9);
  }
  const std::vector<uint8_t> payload = bits.take();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<uint8_t> encode_nat8c(const DenseVector& x, uint64_t* clip_count) {
  std::vector<uint8_t> out;
  out.reserve(kBlockHeaderBytes + x.dim());
  append_header(out, CodecId::kNat8c, x.dim());
  uint64_t clips = 0;
  for (double v : x.values()) {
    if (v == 0.0) {
      out.push_back(0x80);
      continue;
    }
    int k = checked_exponent(v, "nat8c");
    if (k < -50) {
      k = -50;
      ++clips;
    } else if (k > 10) {
      k = 10;
      ++clips;
    }
    const uint8_t sign = v < 0.0 ? 1 : 0;
    out.push_back(static_cast<uint8_t>((sign << 6) | (k + 50)));
  }
  if (clip_count != nullptr) *clip_count = clips;
  return out;
}

std::vector<uint8_t> encode_dither(const DitherWire& wire) {
  if (wire.s < 1 || wire.s > 255) {
    throw InvalidInputError("dither: s outside [1, 255]");
  }
  if (wire.signs.size() != wire.level_indices.size()) {
    throw InvalidInputError("dither: signs/levels length mismatch");
  }
  const uint64_t d = wire.signs.size();
  std::vector<uint8_t> out;
  append_header(out, CodecId::kDither, d);
  out.push_back(norm_code(wire.p));
  out.push_back(static_cast<uint8_t>(wire.s));
  uint8_t mode = wire.norm_mode == NormMode::kNatCompressed ? 0x01 : 0x00;
  if (wire.ladder_kind == LevelLadder::Kind::kLinear) mode |= 0x02;
  out.push_back(mode);
  if (wire.norm_mode == NormMode::kNatCompressed) {
    // {sign byte, exponent byte}: nat-compressed norms are powers of two.
    const int k = checked_exponent(wire.norm_value, "dither norm");
    if (wire.norm_value != 0.0 && (k < -126 || k > 127)) {
      throw InvalidInputError("dither norm: exponent outside [-126, 127]");
    }
    out.push_back(wire.norm_value < 0.0 ? 1 : 0);
    out.push_back(
        static_cast<uint8_t>(wire.norm_value == 0.0 ? 0 : k + 127));
  } else {
    const float f = static_cast<float>(wire.norm_value);
    uint32_t bits = std::bit_cast<uint32_t>(f);
    for (int i = 0; i < 4; ++i) {
      out.push_back(static_cast<uint8_t>((bits >> (8 * i)) & 0xff));
    }
  }
  const int lbits = dither_level_bits(wire.s);
  detail::BitWriter bits;
  for (uint64_t i = 0; i < d; ++i) {
    if (wire.level_indices[i] > wire.s) {
      throw InvalidInputError("dither: level index " +
                              std::to_string(wire.level_indices[i]) +
                              " exceeds s=" + std::to_string(wire.s));
    }
    bits.push(wire.signs[i] < 0 ? 1 : 0, 1);
    bits.push(wire.level_indices[i], lbits);
  }
  const std::vector<uint8_t> payload = bits.take();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<uint8_t> encode_dither(const DitherResult& result, NormKind p,
                                   NormMode norm_mode) {
  DitherWire wire;
  wire.p = p;
  wire.s = result.ladder.s;
  wire.norm_mode = norm_mode;
  wire.ladder_kind = result.ladder.kind;
  wire.norm_value = result.norm_value;
  wire.signs = result.signs;
  wire.level_indices = result.level_indices;
  return encode_dither(wire);
}

DecodedBlock decode(std::span<const uint8_t> block) {
  if (block.size() < kBlockHeaderBytes) {
    throw FormatError("decode: block shorter than header");
  }
  if (std::memcmp(block.data(), kMagic, 4) != 0) {
    throw FormatError("decode: bad magic");
  }
  if (block[4] != kVersion) {
    throw FormatError("decode: unsupported version " + std::to_string(block[4]));
  }
  const uint8_t codec_byte = block[5];
  uint64_t d = 0;
  for (int i = 0; i < 8; ++i) {
    d |= static_cast<uint64_t>(block[6 + i]) << (8 * i);
  }

  DecodedBlock out;
  out.d = d;
  std::span<const uint8_t> rest = block.subspan(kBlockHeaderBytes);

  switch (codec_byte) {
    case static_cast<uint8_t>(CodecId::kNat9): {
      out.codec = CodecId::kNat9;
      if (rest.size() != nat9_payload_bytes(d)) {
        throw FormatError("decode: nat9 payload size mismatch");
      }
      detail::BitReader bits(rest);
      std::vector<double> values(d);
      for (uint64_t i = 0; i < d; ++i) {
        const uint32_t word = bits.pull(9);
        const uint32_t sign = word >> 8;
        const uint32_t field = word & 0xff;
        if (field == 0) {
          if (sign != 0) throw FormatError("decode: nat9 negative zero code");
          values[i] = 0.0;
          continue;
        }
        if (field == 255) throw FormatError("decode: nat9 reserved exponent");
        const double mag = std::exp2(static_cast<double>(field) - 127.0);
        values[i] = sign ? -mag : mag;
      }
      out.values = DenseVector::unchecked(std::move(values));
      return out;
    }
    case static_cast<uint8_t>(CodecId::kNat8c): {
      out.codec = CodecId::kNat8c;
      if (rest.size() != nat8c_payload_bytes(d)) {
        throw FormatError("decode: nat8c payload size mismatch");
      }
      std::vector<double> values(d);
      for (uint64_t i = 0; i < d; ++i) {
        const uint8_t byte = rest[i];
        if (byte & 0x80) {
          if (byte != 0x80) throw FormatError("decode: nat8c bad zero code");
          values[i] = 0.0;
          continue;
        }
        const int offset = byte & 0x3f;
        if (offset > 60) throw FormatError("decode: nat8c offset above 60");
        const double mag = std::exp2(static_cast<double>(offset - 50));
        values[i] = (byte & 0x40) ? -mag : mag;
      }
      out.values = DenseVector::unchecked(std::move(values));
      return out;
    }
    case static_cast<uint8_t>(CodecId::kDither): {
      out.codec = CodecId::kDither;
      if (rest.size() < 3) throw FormatError("decode: dither params truncated");
      DitherWire wire;
      wire.p = norm_from_code(rest[0]);
      wire.s = rest[1];
      if (wire.s < 1) throw FormatError("decode: dither s must be >= 1");
      const uint8_t mode = rest[2];
      wire.norm_mode =
          (mode & 0x01) ? NormMode::kNatCompressed : NormMode::kExact;
      wire.ladder_kind = (mode & 0x02) ? LevelLadder::Kind::kLinear
                                       : LevelLadder::Kind::kGeometric;
      rest = rest.subspan(3);
      if (wire.norm_mode == NormMode::kNatCompressed) {
        if (rest.size() < 2) throw FormatError("decode: dither norm truncated");
        const uint8_t sign = rest[0];
        const uint8_t field = rest[1];
        if (field == 255) throw FormatError("decode: dither norm exponent 255");
        const double mag =
            field == 0 ? 0.0 : std::exp2(static_cast<double>(field) - 127.0);
        wire.norm_value = sign ? -mag : mag;
        rest = rest.subspan(2);
      } else {
        if (rest.size() < 4) throw FormatError("decode: dither norm truncated");
        uint32_t bits = 0;
        for (int i = 0; i < 4; ++i) {
          bits |= static_cast<uint32_t>(rest[i]) << (8 * i);
        }
        const float norm = std::bit_cast<float>(bits);
        if (!std::isfinite(norm)) {
          throw FormatError("decode: dither norm is not finite");
        }
        wire.norm_value = norm;
        rest = rest.subspan(4);
      }
      const int lbits = dither_level_bits(wire.s);
      const size_t payload_bytes = (d * (1 + lbits) + 7) / 8;
      if (rest.size() != payload_bytes) {
        throw FormatError("decode: dither payload size mismatch");
      }
      detail::BitReader bits(rest);
      wire.signs.resize(d);
      wire.level_indices.resize(d);
      LevelLadder ladder{wire.ladder_kind, wire.s};
      std::vector<double> values(d);
      for (uint64_t i = 0; i < d; ++i) {
        wire.signs[i] = bits.pull(1) ? -1 : 1;
        const uint32_t idx = bits.pull(lbits);
        if (idx > static_cast<uint32_t>(wire.s)) {
          throw FormatError("decode: dither level index exceeds s");
        }
        wire.level_indices[i] = static_cast<uint16_t>(idx);
        values[i] = wire.norm_value * wire.signs[i] *
                    ladder.level(static_cast<int>(idx));
      }
      out.values = DenseVector::unchecked(std::move(values));
      out.dither = std::move(wire);
      return out;
    }
    default:
      throw FormatError("decode: unknown codec id " +
                        std::to_string(codec_byte));
  }
}

ExponentHistogram exponent_histogram(const DenseVector& x) {
  ExponentHistogram h;
  for (double v : x.values()) {
    if (v == 0.0) {
      ++h.zeros;
      continue;
    }
    const int k = std::ilogb(std::fabs(v));
    ++h.counts[k];
    h.min_exp = std::min(h.min_exp, k);
    h.max_exp = std::max(h.max_exp, k);
  }
  return h;
}

}  // namespace natcomp
