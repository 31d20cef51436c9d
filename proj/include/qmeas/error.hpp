// Copyright 2026 The qmeas Authors
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
#include <string_view>

namespace qmeas {

enum class ErrorKind {
  // input validation
  ParseError,
  DimensionMismatch,
  NonFinite,
  NotSquare,
  NotHermitian,
  NotPositive,
  TraceNotOne,
  NotUnitary,
  NotOrthonormal,
  CompletenessViolation,
  DuplicateLabel,
  UnknownLabel,
  MissingLabel,
  EmptyKrausSet,
  InvalidArgument,
  // operation preconditions
  NotExpressible,
  NoJointModel,
  BiasedInstrument,
  InvalidStrength,
  ZeroProbabilityConditioning,
  NullOutcome,
  ZeroPosterior,
  MissingIngredient,
  NegativeRadicand,
  // numerical / self-check failures
  InternalNumeric,
  InternalConsistency,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::TraceNotOne: return "TraceNotOne";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::NotOrthonormal: return "NotOrthonormal";
    case ErrorKind::CompletenessViolation: return "CompletenessViolation";
    case ErrorKind::DuplicateLabel: return "DuplicateLabel";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::MissingLabel: return "MissingLabel";
    case ErrorKind::EmptyKrausSet: return "EmptyKrausSet";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotExpressible: return "NotExpressible";
    case ErrorKind::NoJointModel: return "NoJointModel";
    case ErrorKind::BiasedInstrument: return "BiasedInstrument";
    case ErrorKind::InvalidStrength: return "InvalidStrength";
    case ErrorKind::ZeroProbabilityConditioning: return "ZeroProbabilityConditioning";
    case ErrorKind::NullOutcome: return "NullOutcome";
    case ErrorKind::ZeroPosterior: return "ZeroPosterior";
    case ErrorKind::MissingIngredient: return "MissingIngredient";
    case ErrorKind::NegativeRadicand: return "NegativeRadicand";
    case ErrorKind::InternalNumeric: return "InternalNumeric";
    case ErrorKind::InternalConsistency: return "InternalConsistency";
  }
  return "Unknown";
}

/// Internal errors signal a broken numerical invariant rather than bad input.
inline bool is_internal(ErrorKind kind) {
  return kind == ErrorKind::InternalNumeric || kind == ErrorKind::InternalConsistency;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace qmeas
