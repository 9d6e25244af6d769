// Copyright 2026 The oltr Authors.
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

#ifndef OLTR_ERRORS_H_
#define OLTR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace oltr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad layer sizes, k > pool size, frozen weights
// passed to a trainable update, and so on.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mismatched vector or matrix dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A ranked list that is not valid for its pool (duplicates, foreign items).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A non-finite gradient, loss or reward. Updates that raise it leave all
// state untouched.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition that construction code is
// supposed to make impossible (e.g. a pool without relevant items).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Synthetic dataset constraints could not be met.
class DatasetError : public Error {
 public:
  using Error::Error;
};

}  // namespace oltr

#endif  // OLTR_ERRORS_H_
