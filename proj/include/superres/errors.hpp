// Copyright 2026 The superres Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace superres {

/// Numeric values are shared with the C API status codes (see superres.h).
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDomain = 2,
  kSingularBasis = 3,
  kShape = 4,
  kNoSolution = 5,
  kGaugeInvalid = 6,
  kNotCommuting = 7,
  kDegeneracyUnresolved = 8,
  kAlignmentOutOfRange = 9,
  kQuadrature = 10,
  kFimExceedsQfi = 11,
  kDegenerate = 12,
  kIo = 13,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

// Numerical-domain failures. SingularBasis is a DomainError so callers that
// only care about "the model is not evaluable here" can catch the base.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCode::kDomain, what) {}

 protected:
  DomainError(ErrorCode code, const std::string& what) : Error(code, what) {}
};

class SingularBasis : public DomainError {
 public:
  explicit SingularBasis(const std::string& what)
      : DomainError(ErrorCode::kSingularBasis, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what)
      : Error(ErrorCode::kShape, what) {}
};

class NoSolution : public Error {
 public:
  explicit NoSolution(const std::string& what)
      : Error(ErrorCode::kNoSolution, what) {}
};

class GaugeInvalid : public Error {
 public:
  GaugeInvalid(const std::string& what, double residual)
      : Error(ErrorCode::kGaugeInvalid, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class NotCommuting : public Error {
 public:
  explicit NotCommuting(const std::string& what)
      : Error(ErrorCode::kNotCommuting, what) {}
};

class DegeneracyUnresolved : public Error {
 public:
  explicit DegeneracyUnresolved(const std::string& what)
      : Error(ErrorCode::kDegeneracyUnresolved, what) {}
};

class AlignmentOutOfRange : public Error {
 public:
  explicit AlignmentOutOfRange(const std::string& what)
      : Error(ErrorCode::kAlignmentOutOfRange, what) {}
};

class QuadratureError : public Error {
 public:
  explicit QuadratureError(const std::string& what)
      : Error(ErrorCode::kQuadrature, what) {}
};

class FimExceedsQfi : public Error {
 public:
  explicit FimExceedsQfi(const std::string& what)
      : Error(ErrorCode::kFimExceedsQfi, what) {}
};

class Degenerate : public Error {
 public:
  explicit Degenerate(const std::string& what)
      : Error(ErrorCode::kDegenerate, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

}  // namespace superres
