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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncf/canonical.hpp"
#include "ncf/timeutil.hpp"
#include "ncf/transport.hpp"

namespace ncf {

struct Quota {
  std::int64_t free = 0;
  std::int64_t used = 0;
  std::int64_t total = 0;
  double relative = 0.0;  // percent

  bool operator==(const Quota&) const = default;
};

struct UserInfo {
  std::string uid;
  std::string display_name;
  std::optional<std::string> email;
  Quota quota;
  std::vector<std::string> groups;
  std::int64_t last_login = 0;  // epoch milliseconds
  bool enabled = true;

  bool operator==(const UserInfo&) const = default;
};

struct ServerVersion {
  int major = 0;
  int minor = 0;
  int micro = 0;
  std::string string;

  bool operator==(const ServerVersion&) const = default;
};

struct ServerCapabilities {
  ServerVersion version;
  Json capability_map;
  /// Response body exactly as received.
  std::string raw_response;
};

struct ActivityEntry {
  std::int64_t activity_id = 0;
  std::string type;
  std::string subject;
  Instant timestamp{};
  std::int64_t object_id = 0;
  std::string object_name;
  std::string user;
  std::string affected_user;

  bool operator==(const ActivityEntry&) const = default;
};

inline constexpr int kShareTypeUser = 0;
inline constexpr int kShareTypeLink = 3;

struct ShareEntry {
  std::int64_t share_id = 0;
  int share_type = 0;
  std::optional<std::string> shared_with;
  std::int64_t stime = 0;  // epoch seconds
  std::string path;
  std::optional<std::string> token;
  int permissions = 0;  // opaque bitmask
  std::optional<std::string> expiration;
  bool password_protected = false;
  std::optional<std::string> note;
  std::string owner;
  std::int64_t file_id = 0;

  bool operator==(const ShareEntry&) const = default;
};

struct ShareQuery {
  bool include_reshares = false;
  bool shared_with_me = false;
  std::optional<std::string> subfiles_of;
};

/// Successful OCS payload plus the raw body it was parsed from.
struct OcsResult {
  Json data;
  int statuscode = 0;
  std::string raw;
};

/// Parses the {ocs:{meta, data}} envelope. Status codes 100 and 200 succeed;
/// 997 maps to forbidden, 998/404 to not-found, 403 to forbidden. Any other
/// code is rejected as parse-error.
OcsResult parse_ocs_envelope(std::string_view body, int http_status);

/// Typed client for the OCS user, capability, activity and sharing endpoints.
/// All requests are GETs issued under the acquisition policy.
class OcsClient {
 public:
  static constexpr std::size_t kActivityPageSize = 50;

  explicit OcsClient(Transport& transport,
                     MethodPolicy policy = MethodPolicy::acquisition());

  UserInfo get_current_user();
  std::vector<std::string> list_users();
  UserInfo get_user(const std::string& username);
  std::vector<UserInfo> search_users(const std::string& term);
  ServerCapabilities get_capabilities();
  /// Newest first; pages through the filter endpoint until exhausted or
  /// `limit` entries are collected.
  std::vector<ActivityEntry> get_file_activity(
      std::int64_t object_id, std::optional<std::int64_t> since = std::nullopt,
      std::optional<std::size_t> limit = std::nullopt);
  std::vector<ShareEntry> list_shares(const ShareQuery& query = {});

  /// base_url + "/index.php/s/" + token, for link shares.
  std::optional<std::string> share_link(const ShareEntry& share) const;

  /// Low-level GET against an OCS endpoint (relative to the base URL).
  OcsResult get(std::string_view endpoint,
                std::vector<std::pair<std::string, std::string>> query = {});

 private:
  Transport& transport_;
  MethodPolicy policy_;
};

/// Builds an OCS request target with the opt-in header and JSON format.
HttpRequest make_ocs_request(
    const Transport& transport, std::string method, std::string_view endpoint,
    std::vector<std::pair<std::string, std::string>> query = {});

UserInfo parse_user_info(const Json& data);
ActivityEntry parse_activity(const Json& item);
ShareEntry parse_share(const Json& item);

Json to_json(const UserInfo& user);
Json to_json(const ServerCapabilities& caps);
Json to_json(const ActivityEntry& entry);
Json to_json(const ShareEntry& share);
UserInfo user_info_from_json(const Json& j);
ServerCapabilities capabilities_from_json(const Json& j);
ActivityEntry activity_from_json(const Json& j);
ShareEntry share_from_json(const Json& j);

}  // namespace ncf
