// Copyright 2026 The mfra Authors
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

#ifndef MFRA_ERRORS_HPP_
#define MFRA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mfra {

/// Base class of every exception thrown by the library. The C API maps each
/// subclass onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Array dimensions do not agree with the instance.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value is outside the domain of the operation (non-finite input, empty
/// feasible set, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A tuning parameter violates its precondition (rho <= 0, r <= rho*N, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A scenario spec could not be compiled into a problem instance.
class BuildError : public Error {
 public:
  using Error::Error;
};

/// Requested operation is outside the supported envelope (instance too large
/// for the reference reformulation, callback kinds in JSON, ...).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Malformed JSON document or missing field.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfra

#endif  // MFRA_ERRORS_HPP_
