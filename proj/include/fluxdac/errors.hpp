// Copyright 2026 The fluxdac Authors
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

namespace fluxdac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A physical or numerical parameter is outside its admissible domain.
class InvalidParameter : public Error {
public:
    InvalidParameter(const std::string& field, const std::string& what)
        : Error("invalid parameter '" + field + "': " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Configuration documents that fail to parse or miss required fields.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Iterative numerics that did not settle within their budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A programming event would leave the admissible digit window.
class WindowOverflow : public Error {
public:
    WindowOverflow(int digit, int n_min, int n_max)
        : Error("digit " + std::to_string(digit) + " outside window [" + std::to_string(n_min) + ", " +
                std::to_string(n_max) + "]"),
          digit_(digit) {}
    int digit() const noexcept { return digit_; }

private:
    int digit_;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Fit input that cannot determine the requested parameters.
class DegenerateData : public Error {
public:
    using Error::Error;
};

}  // namespace fluxdac
