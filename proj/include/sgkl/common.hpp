/*
 * Copyright (c) 2026, SGKL developers.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sgkl {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Column i holds the observation mask of signal i (true = observed).
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using MaskColumn = Eigen::Array<bool, Eigen::Dynamic, 1>;

enum class ErrorCode {
  invalid_argument = 1,
  config = 2,
  numerical = 3,
  io = 4,
};

/// Library error. The code is what the C API reports; the message is
/// human readable and stable enough for tests to match on substrings.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace sgkl
