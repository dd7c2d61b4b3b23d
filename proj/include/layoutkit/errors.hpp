// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace layoutkit {

/// Base class for all library errors. The three subfamilies map onto the
/// CLI exit codes: ConfigError -> 2, DataError -> 3, NumericalError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// -- shared across modules ---------------------------------------------------

class ShapeMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// -- grammar / geometry ------------------------------------------------------

class DegenerateBox : public DataError {
 public:
  using DataError::DataError;
};

/// Parse failure carrying the byte offset of the offending input.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class MalformedTag : public ParseError {
 public:
  using ParseError::ParseError;
};

class OutOfRange : public ParseError {
 public:
  using ParseError::ParseError;
};

// -- guidance ----------------------------------------------------------------

class MissingBranch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// -- flow matching -----------------------------------------------------------

class UnknownClass : public DataError {
 public:
  using DataError::DataError;
};

class TrainingDiverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// -- scenes ------------------------------------------------------------------

class RejectionExhausted : public DataError {
 public:
  using DataError::DataError;
};

// -- pipeline ----------------------------------------------------------------

class WeightsOffSimplex : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NonFiniteCost : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoValidPlacement : public DataError {
 public:
  using DataError::DataError;
};

class MalformedManifest : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace layoutkit
