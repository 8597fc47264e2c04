// SPDX-License-Identifier: Apache-2.0
//
// relaybc: joint source/relay precoding for MIMO relaying broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace relaybc {

// Base of every error raised by the library. Each subclass names one failure
// class so callers (and the sweep harness) can record it per realization.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A matrix expected to be Hermitian positive definite failed to factorize.
class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

// Multiplier search could not bracket the power budget.
class BracketFailure : public Error {
 public:
  using Error::Error;
};

// Closed-form relay beamformer collapsed to the zero matrix.
class DegenerateChannel : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

}  // namespace relaybc
