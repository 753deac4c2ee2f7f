// Copyright 2026 The mcal-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace mcal {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: dimension mismatch, unparsable rational, bad JSON.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A family or estimator precondition does not hold (e.g. eps > gamma).
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

// An enumeration would exceed the configured ceiling.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, unsigned long long bound)
      : Error(what), bound_(bound) {}
  unsigned long long bound() const noexcept { return bound_; }

 private:
  unsigned long long bound_;
};

}  // namespace mcal
