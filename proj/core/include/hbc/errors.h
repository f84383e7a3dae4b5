//
// Copyright 2026 The HBC Lab Authors
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
//

#ifndef HBC_ERRORS_H_
#define HBC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace hbc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes are not conformable.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf appeared in a value or a loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A precondition on an argument (range, simplex, beta constraint) failed.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed file content (CSV, JSON checkpoint, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite or exploding loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace hbc

#endif  // HBC_ERRORS_H_
