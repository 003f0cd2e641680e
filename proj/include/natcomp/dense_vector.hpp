// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "natcomp/errors.hpp"

namespace natcomp {

// Length-d vector of finite reals in binary32 semantics. Values are stored
// as doubles so intermediate results (e.g. a rounded-up 2^128) stay finite;
// loaders and codecs narrow to binary32 where the wire demands it.
class DenseVector {
 public:
  DenseVector() = default;

  explicit DenseVector(std::vector<double> values) : v_(std::move(values)) {
    for (size_t i = 0; i < v_.size(); ++i) {
      if (!std::isfinite(v_[i])) {
        throw InvalidInputError("DenseVector: non-finite entry at index " +
                                std::to_string(i));
      }
    }
  }

  static DenseVector zeros(size_t d) {
    DenseVector x;
    x.v_.assign(d, 0.0);
    return x;
  }

  // Construction bypassing the finite check, for internal hot paths that
  // guarantee finiteness by construction.
  static DenseVector unchecked(std::vector<double> values) {
    DenseVector x;
    x.v_ = std::move(values);
    return x;
  }

  size_t dim() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double operator[](size_t i) const { return v_[i]; }
  double& operator[](size_t i) { return v_[i]; }

  std::span<const double> values() const { return v_; }
  std::span<double> values() { return v_; }

  const std::vector<double>& data() const { return v_; }

 private:
  std::vector<double> v_;
};

inline double squared_norm(const DenseVector& x) {
  double s = 0.0;
  for (double v : x.values()) s += v * v;
  return s;
}

inline double squared_distance(const DenseVector& a, const DenseVector& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.dim(); ++i) {
    const double dv = a[i] - b[i];
    s += dv * dv;
  }
  return s;
}

}  // namespace natcomp
