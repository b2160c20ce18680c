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

#include "ncf/error.hpp"

namespace ncf {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_credentials: return "invalid-credentials";
    case ErrorKind::input_error: return "input-error";
    case ErrorKind::policy_violation: return "policy-violation";
    case ErrorKind::http_error: return "http-error";
    case ErrorKind::transport_error: return "transport-error";
    case ErrorKind::auth_failed: return "auth-failed";
    case ErrorKind::forbidden: return "forbidden";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::refusing_self: return "refusing-self";
    case ErrorKind::partial_failure: return "partial-failure";
    case ErrorKind::out_dir_not_empty: return "out-dir-not-empty";
    case ErrorKind::manifest_missing: return "manifest-missing";
    case ErrorKind::manifest_corrupt: return "manifest-corrupt";
    case ErrorKind::invalid_order: return "invalid-order";
    case ErrorKind::is_directory: return "is-directory";
    case ErrorKind::bind_failure: return "bind-failure";
  }
  return "unknown";
}

}  // namespace ncf
