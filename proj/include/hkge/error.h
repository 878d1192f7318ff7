/*
 * Copyright 2026 The hkge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hkge {

// Root of every error raised by the library. The CLI maps the subclasses
// below onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of two operands disagree (block length, algebra kind, vector size).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// The literal Dihedron norm has a negative radicand at `index`.
class IndefiniteNorm : public Error {
 public:
  IndefiniteNorm(std::size_t index, double radicand);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// A vector is too close to zero to be normalized at `index`.
class DegenerateVector : public Error {
 public:
  DegenerateVector(std::size_t index, double norm);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// Invalid run configuration or a request outside supported bounds.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Problems with input data files. Subclasses give the precise cause.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnknownEntity : public DataError {
 public:
  using DataError::DataError;
};

class DuplicateKey : public DataError {
 public:
  using DataError::DataError;
};

class WrongSource : public DataError {
 public:
  using DataError::DataError;
};

// Negative sampling is impossible (fewer than two entities).
class CannotSample : public Error {
 public:
  using Error::Error;
};

// Loss became NaN or infinite during training.
class Diverged : public Error {
 public:
  using Error::Error;
};

// Exact Shapley enumeration was asked for more players than supported.
class TooManyPlayers : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A checkpoint does not belong to the dataset it is being used with.
class CheckpointMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace hkge
