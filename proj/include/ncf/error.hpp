// Copyright 2026 The ncforensic Authors
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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ncf {

enum class ErrorKind {
  invalid_credentials,
  input_error,
  policy_violation,
  http_error,
  transport_error,
  auth_failed,
  forbidden,
  not_found,
  parse_error,
  refusing_self,
  partial_failure,
  out_dir_not_empty,
  manifest_missing,
  manifest_corrupt,
  invalid_order,
  is_directory,
  bind_failure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base exception for every failure surfaced by the toolkit. `status` carries
/// the HTTP status when one was received, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, int status = 0)
      : std::runtime_error(message), kind_(kind), status_(status) {}

  ErrorKind kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }

 private:
  ErrorKind kind_;
  int status_;
};

/// Raised when a batch operation completed for some items only.
class PartialFailure : public Error {
 public:
  PartialFailure(const std::string& message, std::vector<std::string> failed,
                 std::int64_t succeeded)
      : Error(ErrorKind::partial_failure, message),
        failed_(std::move(failed)),
        succeeded_(succeeded) {}

  const std::vector<std::string>& failed() const noexcept { return failed_; }
  std::int64_t succeeded() const noexcept { return succeeded_; }

 private:
  std::vector<std::string> failed_;
  std::int64_t succeeded_;
};

}  // namespace ncf
