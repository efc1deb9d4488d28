// Copyright 2026 The Kinepipe Authors
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

#ifndef KINEPIPE_ERROR_H_
#define KINEPIPE_ERROR_H_

#include <stdexcept>
#include <string>

namespace kinepipe {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input (model descriptions, config files, CSV).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Array or vector dimensions do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid argument or configuration value.
class InputError : public Error {
 public:
  using Error::Error;
};

// Numerical failure inside the fitting solver.
class SolverError : public Error {
 public:
  using Error::Error;
};

// File system or archive failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kinepipe

#endif  // KINEPIPE_ERROR_H_
