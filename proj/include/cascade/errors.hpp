// Copyright 2026 The Cascade Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cascade {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad dimensions, out-of-range parameters,
/// unknown config keys. When the error is attributable to a config key,
/// `key()` names it.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// NaN/inf inputs, invalid probability vectors.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or brute-force computation would exceed its cap.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, double required)
      : Error(what), required_(required) {}
  double required() const noexcept { return required_; }

 private:
  double required_;
};

/// Observed data contradicts a structural assumption of the posterior.
class DataCorruptionError : public Error {
 public:
  using Error::Error;
};

/// An object reached a state its invariants forbid.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Reward information was requested where the protocol hides it.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A combination of options that the library deliberately does not handle.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// An evaluation could not be performed on the supplied data.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade
