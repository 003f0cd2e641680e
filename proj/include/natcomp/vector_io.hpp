// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "natcomp/dense_vector.hpp"
#include "natcomp/errors.hpp"

namespace natcomp {

// Vector files: plain text with one decimal scalar per line, or raw
// little-endian binary32 with the `.f32` extension.

inline DenseVector read_vector_text(std::istream& in, const std::string& name) {
  std::vector<double> values;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Allow blank lines and trailing whitespace.
    size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    size_t end = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(start, end - start + 1);
    try {
      size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      if (!std::isfinite(v)) {
        throw InvalidInputError(name + ":" + std::to_string(line_no) +
                                ": non-finite value");
      }
      // Vector files carry binary32 semantics: narrow on load.
      const float narrowed = static_cast<float>(v);
      if (!std::isfinite(narrowed)) {
        throw InvalidInputError(name + ":" + std::to_string(line_no) +
                                ": value outside binary32 range");
      }
      values.push_back(narrowed);
    } catch (const std::logic_error&) {
      throw InvalidInputError(name + ":" + std::to_string(line_no) +
                              ": cannot parse '" + token + "'");
    }
  }
  return DenseVector(std::move(values));
}

inline DenseVector read_vector_f32(std::istream& in, const std::string& name) {
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (raw.size() % 4 != 0) {
    throw InvalidInputError(name + ": size is not a multiple of 4 bytes");
  }
  std::vector<double> values(raw.size() / 4);
  for (size_t i = 0; i < values.size(); ++i) {
    uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<uint32_t>(static_cast<uint8_t>(raw[4 * i + b]))
              << (8 * b);
    }
    const float f = std::bit_cast<float>(bits);
    if (!std::isfinite(f)) {
      throw InvalidInputError(name + ": non-finite value at element " +
                              std::to_string(i));
    }
    values[i] = f;
  }
  return DenseVector(std::move(values));
}

inline DenseVector load_vector_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open vector file " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".f32") {
    return read_vector_f32(in, path);
  }
  return read_vector_text(in, path);
}

inline void write_vector_text(std::ostream& out, const DenseVector& x) {
  out.precision(17);
  for (double v : x.values()) out << v << '\n';
}

inline void write_vector_f32(std::ostream& out, const DenseVector& x) {
  for (double v : x.values()) {
    const uint32_t bits = std::bit_cast<uint32_t>(static_cast<float>(v));
    char raw[4];
    for (int b = 0; b < 4; ++b) {
      raw[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    out.write(raw, 4);
  }
}

inline void save_vector_file(const std::string& path, const DenseVector& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open output file " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".f32") {
    write_vector_f32(out, x);
  } else {
    write_vector_text(out, x);
  }
}

inline std::vector<uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open file " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

inline void write_binary_file(const std::string& path,
                              const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open output file " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace natcomp
