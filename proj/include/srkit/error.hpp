// Copyright 2026 The srkit Authors
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

#ifndef SRKIT_ERROR_HPP_
#define SRKIT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace srkit {

/// Base class of every error raised by the library. The CLI maps these to
/// exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed literal.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value does not fit the internal exponent range.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// |x| exceeds the largest finite value of the target format.
class OverflowRangeError : public Error {
 public:
  using Error::Error;
};

/// Value not representable, or bit pattern without a defined meaning.
class EncodingError : public Error {
 public:
  using Error::Error;
};

/// Input outside the domain of the operation (NaN into a format without
/// NaN, non-source-format value into a conversion, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A bit source could not supply the requested bits.
class EntropyError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an argument contract (r out of range, draw too wide, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Unknown vendor or format name.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed its budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace srkit

#endif  // SRKIT_ERROR_HPP_
