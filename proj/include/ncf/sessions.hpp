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
#include <string>
#include <vector>

#include "ncf/canonical.hpp"
#include "ncf/transport.hpp"

namespace ncf {

struct DeviceSession {
  std::int64_t token_id = 0;
  std::string agent_name;
  std::string session_type;  // "browser" | "app" | "unknown"
  std::int64_t last_activity = 0;  // epoch seconds
  bool is_current = false;
  /// The server's record as received; fields beyond the typed ones are
  /// kept here untouched.
  Json raw;
};

/// Enumerates and revokes device sessions through the apptokens endpoints.
/// Requests are labelled "session-control" in the ledger; revocations are
/// serialized by the transport.
class SessionControl {
 public:
  explicit SessionControl(Transport& transport);

  /// Sorted by last_activity, most recent first.
  std::vector<DeviceSession> list_sessions(
      const MethodPolicy& policy = MethodPolicy::session_control());

  /// Revokes one session listed by a fresh list_sessions call. Revoking the
  /// caller's own session requires `force`; without it Error(refusing_self)
  /// is raised and nothing is sent.
  DeviceSession revoke_session(std::int64_t token_id, bool force = false);

  /// Revokes every session other than the caller's (and the caller's too
  /// when keep_current is false). Throws PartialFailure listing the ids that
  /// could not be revoked.
  std::int64_t revoke_all(bool keep_current = true);

 private:
  void delete_token(const DeviceSession& session);

  Transport& transport_;
};

DeviceSession parse_device_session(const Json& item);
Json to_json(const DeviceSession& session);
DeviceSession device_session_from_json(const Json& j);

}  // namespace ncf
