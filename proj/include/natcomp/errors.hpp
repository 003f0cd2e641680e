// Copyright 2026 The natcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace natcomp {

// Error taxonomy shared across the library. Each class maps onto one CLI
// exit code: usage/config -> 2, input -> 3, runtime -> 4.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite scalar, malformed vector file, value outside a codec's domain.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Spec/dimension mismatch, bad parameter combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed encoded block: bad magic, version, codec id, truncated payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

// C_int has no finite second-moment bound; requesting one is an error.
class UnboundedSecondMomentError : public Error {
 public:
  using Error::Error;
};

// SGD divergence guard and other runtime failures.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

// Session/protocol failures in the aggregation service.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace natcomp
