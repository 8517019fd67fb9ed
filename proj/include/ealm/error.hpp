// Copyright 2026 The EALM Authors
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

#ifndef EALM_ERROR_HPP
#define EALM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ealm {

/// Broad failure category, used by the CLI to pick an exit status.
enum class ErrorKind {
  kInvalidArgument,  ///< Caller violated a precondition.
  kData,             ///< Malformed or unusable input data.
  kFit,              ///< Model construction or evaluation failed.
};

/// The single exception type thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) {
    fail(ErrorKind::kInvalidArgument, message);
  }
}

}  // namespace detail

}  // namespace ealm

#endif  // EALM_ERROR_HPP
