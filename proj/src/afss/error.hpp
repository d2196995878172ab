// Copyright 2026  The AFSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace afss {

// Base of every error thrown by the library. The C API maps each subclass
// to a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad file contents: non-WAV data, malformed manifest or checkpoint.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or out-of-range settings (config file, STFT geometry, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violates an operation's precondition (too short, silent, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// A manifest or corpus failed validation; message lists the offending lines.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An external backend (subprocess) failed.
class BackendError : public Error {
 public:
  using Error::Error;
};

// Training diverged or otherwise could not proceed.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace afss
