// Copyright 2026 The cfx Authors.
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
#include <utility>
#include <vector>

namespace cfx {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed schema file or a schema whose invariants do not hold.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Problems with tabular input: unreadable files, missing columns, bad values.
class DataError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch between matrices, layers or vectors.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, divergence, solver non-convergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A model bundle that cannot be loaded (version, digest, shapes).
class BundleError : public Error {
 public:
  using Error::Error;
};

struct FieldError {
  std::string field;
  std::string message;
};

// An instance that does not conform to the schema. Carries one entry per
// offending field so callers can report all problems at once.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<FieldError> errors)
      : Error(Summarize(errors)), errors_(std::move(errors)) {}

  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  static std::string Summarize(const std::vector<FieldError>& errors) {
    std::string out = "instance failed validation:";
    for (const auto& e : errors) out += " [" + e.field + ": " + e.message + "]";
    return out;
  }

  std::vector<FieldError> errors_;
};

}  // namespace cfx
