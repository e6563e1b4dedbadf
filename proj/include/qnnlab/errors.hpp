// Copyright 2026 The qnnlab Authors
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
#include <utility>

namespace qnnlab {

/// Shapes or indices that do not fit together (state vs architecture, sample dimensions, ...).
class StructuralError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation was not met by the caller.
class PreconditionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A modelling assumption required by the operation fails on this data
/// (singular kernel, non-factorizable covariance, ...).
class AssumptionFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input vector that is not a member of the model's feature space.
class UnknownInput : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

class CalibrationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration; `path` names the offending field (e.g. "architecture.m").
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

}  // namespace qnnlab
