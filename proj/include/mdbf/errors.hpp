/* Copyright 2026 The MDBF Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MDBF_ERRORS_HPP_
#define MDBF_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdbf {

/// Base class for all mdbf errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed an argument outside the documented range (bad rank,
/// mismatched dimensions, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a value-level contract (non-finite entries,
/// zero-norm reference matrix, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine failed to produce a usable result.
class NumericalFailureError : public Error {
 public:
  using Error::Error;
};

/// A serialized byte stream does not conform to the container format.
/// Carries the byte offset at which the violation was detected.
class FormatError : public Error {
 public:
  FormatError(const std::string& msg, std::size_t byte_offset)
      : Error(msg + " (at byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_ = 0;
};

/// A value cannot be represented at the requested storage width.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// No inner rank satisfies the requested bit budget. Carries the minimum
/// achievable bits-per-weight for the spec that failed.
class BudgetInfeasibleError : public Error {
 public:
  BudgetInfeasibleError(const std::string& msg, double min_achievable_bpw)
      : Error(msg), min_achievable_bpw_(min_achievable_bpw) {}

  double min_achievable_bpw() const { return min_achievable_bpw_; }

 private:
  double min_achievable_bpw_ = 0.0;
};

}  // namespace mdbf

#endif  // MDBF_ERRORS_HPP_
