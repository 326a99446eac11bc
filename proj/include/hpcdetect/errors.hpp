// Copyright 2026 The hpcdetect Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>

namespace hpcdetect {

/// Malformed or inconsistent input data (CSV, model files, configs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied arguments outside an operation's domain.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace hpcdetect
