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

#include "ncf/ocs_client.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "ncf/encoding.hpp"
#include "ncf/error.hpp"

namespace ncf {
namespace {

constexpr std::string_view kCurrentUser = "ocs/v2.php/cloud/user";
constexpr std::string_view kUsers = "ocs/v1.php/cloud/users";
constexpr std::string_view kUserDetails = "ocs/v2.php/cloud/users/details";
constexpr std::string_view kUserPrefix = "ocs/v2.php/cloud/users/";
constexpr std::string_view kCapabilities = "ocs/v1.php/cloud/capabilities";
constexpr std::string_view kActivityFilter =
    "ocs/v2.php/apps/activity/api/v2/activity/filter";
constexpr std::string_view kShares =
    "ocs/v2.php/apps/files_sharing/api/v1/shares";

[[noreturn]] void fail_parse(const std::string& what) {
  throw Error(ErrorKind::parse_error, "OCS: " + what);
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail_parse(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

std::int64_t as_int(const Json& v, const char* what) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) return static_cast<std::int64_t>(v.get<double>());
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc{} && p == s.data() + s.size()) return out;
  }
  fail_parse(std::string("field '") + what + "' is not an integer");
}

std::int64_t int_field(const Json& j, const char* key) {
  return as_int(require(j, key), key);
}

std::int64_t int_field_or(const Json& j, const char* key, std::int64_t dflt) {
  if (!j.contains(key) || j.at(key).is_null()) return dflt;
  return as_int(j.at(key), key);
}

std::string string_field(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) fail_parse(std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

std::string string_field_or(const Json& j, const char* key,
                            std::string dflt = {}) {
  if (!j.contains(key) || j.at(key).is_null()) return dflt;
  if (!j.at(key).is_string()) {
    fail_parse(std::string("field '") + key + "' is not a string");
  }
  return j.at(key).get<std::string>();
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const Json& v = j.at(key);
  if (v.is_string()) {
    if (v.get_ref<const std::string&>().empty()) return std::nullopt;
    return v.get<std::string>();
  }
  if (v.is_number()) return v.dump();
  fail_parse(std::string("field '") + key + "' has unexpected type");
}

std::string query_string(
    const std::vector<std::pair<std::string, std::string>>& query) {
  std::string out;
  for (const auto& [k, v] : query) {
    out += out.empty() ? "?" : "&";
    out += percent_encode_component(k) + "=" + percent_encode_component(v);
  }
  return out;
}

void validate_share(const ShareEntry& s) {
  if (s.share_type == kShareTypeLink && (!s.token || s.shared_with)) {
    fail_parse("link share " + std::to_string(s.share_id) +
               " must carry a token and no recipient");
  }
  if (s.share_type == kShareTypeUser && !s.shared_with) {
    fail_parse("user share " + std::to_string(s.share_id) +
               " has no recipient");
  }
}

Json optional_json(const std::optional<std::string>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

OcsResult parse_ocs_envelope(std::string_view body, int http_status) {
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::parse_error& e) {
    fail_parse(std::string("malformed envelope: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("ocs")) fail_parse("missing 'ocs' root");
  const Json& ocs = doc.at("ocs");
  const Json& meta = require(ocs, "meta");
  const int code = static_cast<int>(int_field(meta, "statuscode"));
  const std::string message = string_field_or(meta, "message");
  switch (code) {
    case 100:
    case 200:
      break;
    case 997:
      if (http_status == 401) {
        throw Error(ErrorKind::auth_failed, "OCS 997: " + message, http_status);
      }
      throw Error(ErrorKind::forbidden, "OCS 997: " + message, http_status);
    case 403:
      throw Error(ErrorKind::forbidden, "OCS 403: " + message, http_status);
    case 404:
    case 998:
      throw Error(ErrorKind::not_found,
                  "OCS " + std::to_string(code) + ": " + message, http_status);
    default:
      fail_parse("unrecognised statuscode " + std::to_string(code));
  }
  OcsResult out;
  out.statuscode = code;
  out.data = ocs.contains("data") ? ocs.at("data") : Json(nullptr);
  out.raw = std::string(body);
  return out;
}

HttpRequest make_ocs_request(
    const Transport& transport, std::string method, std::string_view endpoint,
    std::vector<std::pair<std::string, std::string>> query) {
  query.emplace_back("format", "json");
  HttpRequest req;
  req.method = std::move(method);
  req.target = transport.endpoint(endpoint) + query_string(query);
  req.headers["OCS-APIRequest"] = "true";
  req.headers["Accept"] = "application/json";
  return req;
}

OcsClient::OcsClient(Transport& transport, MethodPolicy policy)
    : transport_(transport), policy_(std::move(policy)) {}

OcsResult OcsClient::get(
    std::string_view endpoint,
    std::vector<std::pair<std::string, std::string>> query) {
  HttpRequest req = make_ocs_request(transport_, "GET", endpoint, std::move(query));
  const HttpResponse res = transport_.execute(req, policy_);
  if (res.status == 304) {
    OcsResult empty;
    empty.statuscode = 304;
    empty.data = Json::array();
    return empty;
  }
  return parse_ocs_envelope(res.body, res.status);
}

UserInfo parse_user_info(const Json& data) {
  UserInfo u;
  u.uid = string_field(data, "id");
  if (u.uid.empty()) fail_parse("user id is empty");
  u.display_name = string_field_or(data, "displayname",
                                   string_field_or(data, "display-name"));
  u.email = optional_string(data, "email");
  if (data.contains("quota") && data.at("quota").is_object()) {
    const Json& q = data.at("quota");
    u.quota.free = int_field_or(q, "free", 0);
    u.quota.used = int_field_or(q, "used", 0);
    u.quota.total = int_field_or(q, "total", 0);
    if (u.quota.total > 0) {
      u.quota.relative =
          std::round(static_cast<double>(u.quota.used) * 10000.0 /
                     static_cast<double>(u.quota.total)) /
          100.0;
    } else if (q.contains("relative") && q.at("relative").is_number()) {
      u.quota.relative = q.at("relative").get<double>();
    }
  }
  if (u.quota.used < 0) fail_parse("negative used quota for " + u.uid);
  if (u.quota.total > 0 && u.quota.used > u.quota.total) {
    fail_parse("used quota exceeds total for " + u.uid);
  }
  if (data.contains("groups") && data.at("groups").is_array()) {
    for (const auto& g : data.at("groups")) u.groups.push_back(g.get<std::string>());
  }
  u.last_login = int_field_or(data, "lastLogin", 0);
  if (data.contains("enabled") && data.at("enabled").is_boolean()) {
    u.enabled = data.at("enabled").get<bool>();
  }
  return u;
}

UserInfo OcsClient::get_current_user() {
  return parse_user_info(get(kCurrentUser).data);
}

std::vector<std::string> OcsClient::list_users() {
  const Json data = get(kUsers).data;
  const Json& users = require(data, "users");
  if (!users.is_array()) fail_parse("'users' is not a list");
  std::vector<std::string> out;
  for (const auto& u : users) out.push_back(u.get<std::string>());
  return out;
}

UserInfo OcsClient::get_user(const std::string& username) {
  if (username.empty()) {
    throw Error(ErrorKind::input_error, "username must not be empty");
  }
  return parse_user_info(
      get(std::string(kUserPrefix) + percent_encode_component(username)).data);
}

std::vector<UserInfo> OcsClient::search_users(const std::string& term) {
  if (term.empty()) {
    throw Error(ErrorKind::input_error, "search term must not be empty");
  }
  const Json data = get(kUserDetails, {{"search", term}}).data;
  const Json& users = require(data, "users");
  std::vector<UserInfo> out;
  if (users.is_object()) {
    for (const auto& [uid, details] : users.items()) {
      out.push_back(parse_user_info(details));
    }
  } else if (users.is_array()) {
    for (const auto& details : users) out.push_back(parse_user_info(details));
  } else {
    fail_parse("'users' has unexpected type");
  }
  return out;
}

ServerCapabilities OcsClient::get_capabilities() {
  OcsResult result = get(kCapabilities);
  const Json& version = require(result.data, "version");
  ServerCapabilities caps;
  caps.version.major = static_cast<int>(int_field(version, "major"));
  caps.version.minor = static_cast<int>(int_field_or(version, "minor", 0));
  caps.version.micro = static_cast<int>(int_field_or(version, "micro", 0));
  caps.version.string = string_field_or(version, "string");
  if (caps.version.major < 0) fail_parse("negative major version");
  caps.capability_map = result.data.contains("capabilities")
                            ? result.data.at("capabilities")
                            : Json::object();
  caps.raw_response = std::move(result.raw);
  return caps;
}

ActivityEntry parse_activity(const Json& item) {
  ActivityEntry a;
  a.activity_id = int_field(item, "activity_id");
  a.type = string_field(item, "type");
  a.subject = string_field_or(item, "subject");
  const std::string when = string_field(item, "datetime");
  auto t = parse_iso8601(when);
  if (!t) fail_parse("unparseable activity datetime '" + when + "'");
  a.timestamp = *t;
  a.object_id = int_field_or(item, "object_id", 0);
  a.object_name = string_field_or(item, "object_name");
  a.user = string_field_or(item, "user");
  a.affected_user = string_field_or(item, "affecteduser");
  return a;
}

std::vector<ActivityEntry> OcsClient::get_file_activity(
    std::int64_t object_id, std::optional<std::int64_t> since,
    std::optional<std::size_t> limit) {
  if (object_id < 0) {
    throw Error(ErrorKind::input_error, "object_id must be non-negative");
  }
  std::vector<ActivityEntry> out;
  std::set<std::int64_t> seen;
  std::optional<std::int64_t> cursor = since;
  while (!limit || out.size() < *limit) {
    std::size_t page = kActivityPageSize;
    if (limit) page = std::min(page, *limit - out.size());
    std::vector<std::pair<std::string, std::string>> query = {
        {"object_type", "files"},
        {"object_id", std::to_string(object_id)},
        {"limit", std::to_string(page)},
        {"sort", "desc"}};
    if (cursor) query.emplace_back("since", std::to_string(*cursor));
    const OcsResult result = get(kActivityFilter, std::move(query));
    if (!result.data.is_array()) fail_parse("activity data is not a list");
    if (result.data.empty()) break;
    std::int64_t smallest = 0;
    bool first = true;
    for (const auto& item : result.data) {
      ActivityEntry a = parse_activity(item);
      if (first || a.activity_id < smallest) smallest = a.activity_id;
      first = false;
      if (!seen.insert(a.activity_id).second) {
        fail_parse("duplicate activity id " + std::to_string(a.activity_id));
      }
      out.push_back(std::move(a));
    }
    if (result.data.size() < page) break;
    cursor = smallest;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
    return a.activity_id > b.activity_id;
  });
  if (limit && out.size() > *limit) out.resize(*limit);
  return out;
}

ShareEntry parse_share(const Json& item) {
  ShareEntry s;
  s.share_id = int_field(item, "id");
  s.share_type = static_cast<int>(int_field(item, "share_type"));
  s.shared_with = optional_string(item, "share_with");
  s.stime = int_field_or(item, "stime", 0);
  s.path = string_field_or(item, "path");
  s.token = optional_string(item, "token");
  s.permissions = static_cast<int>(int_field_or(item, "permissions", 0));
  s.expiration = optional_string(item, "expiration");
  s.password_protected = optional_string(item, "password").has_value();
  s.note = optional_string(item, "note");
  s.owner = string_field_or(item, "uid_owner");
  s.file_id = int_field_or(item, "file_source", 0);
  if (s.share_type == kShareTypeLink) s.shared_with.reset();
  validate_share(s);
  return s;
}

std::vector<ShareEntry> OcsClient::list_shares(const ShareQuery& q) {
  if (q.shared_with_me && q.subfiles_of) {
    throw Error(ErrorKind::input_error,
                "shared_with_me and subfiles_of are mutually exclusive");
  }
  std::vector<std::pair<std::string, std::string>> query;
  if (q.include_reshares) query.emplace_back("reshares", "true");
  if (q.shared_with_me) query.emplace_back("shared_with_me", "true");
  if (q.subfiles_of) {
    std::string path = *q.subfiles_of;
    if (path.empty() || path.front() != '/') path.insert(path.begin(), '/');
    query.emplace_back("path", path);
    query.emplace_back("subfiles", "true");
  }
  const Json data = get(kShares, std::move(query)).data;
  if (data.is_null()) return {};
  if (!data.is_array()) fail_parse("share data is not a list");
  std::vector<ShareEntry> out;
  for (const auto& item : data) out.push_back(parse_share(item));
  return out;
}

std::optional<std::string> OcsClient::share_link(const ShareEntry& share) const {
  if (share.share_type != kShareTypeLink || !share.token) return std::nullopt;
  std::string base = transport_.credentials().base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/index.php/s/" + *share.token;
}

// Canonical serialization ------------------------------------------------------

Json to_json(const UserInfo& u) {
  Json j;
  j["uid"] = u.uid;
  j["display_name"] = u.display_name;
  j["email"] = optional_json(u.email);
  j["quota"] = {{"free", u.quota.free},
                {"used", u.quota.used},
                {"total", u.quota.total},
                {"relative", u.quota.relative}};
  j["groups"] = u.groups;
  j["last_login"] = u.last_login;
  j["enabled"] = u.enabled;
  return j;
}

UserInfo user_info_from_json(const Json& j) {
  UserInfo u;
  u.uid = j.at("uid").get<std::string>();
  u.display_name = j.at("display_name").get<std::string>();
  if (!j.at("email").is_null()) u.email = j.at("email").get<std::string>();
  const Json& q = j.at("quota");
  u.quota.free = q.at("free").get<std::int64_t>();
  u.quota.used = q.at("used").get<std::int64_t>();
  u.quota.total = q.at("total").get<std::int64_t>();
  u.quota.relative = q.at("relative").get<double>();
  u.groups = j.at("groups").get<std::vector<std::string>>();
  u.last_login = j.at("last_login").get<std::int64_t>();
  u.enabled = j.at("enabled").get<bool>();
  return u;
}

Json to_json(const ServerCapabilities& caps) {
  Json j;
  j["version"] = {{"major", caps.version.major},
                  {"minor", caps.version.minor},
                  {"micro", caps.version.micro},
                  {"string", caps.version.string}};
  j["capabilities"] = caps.capability_map;
  return j;
}

ServerCapabilities capabilities_from_json(const Json& j) {
  ServerCapabilities caps;
  const Json& v = j.at("version");
  caps.version.major = v.at("major").get<int>();
  caps.version.minor = v.at("minor").get<int>();
  caps.version.micro = v.at("micro").get<int>();
  caps.version.string = v.at("string").get<std::string>();
  caps.capability_map = j.at("capabilities");
  return caps;
}

Json to_json(const ActivityEntry& a) {
  Json j;
  j["activity_id"] = a.activity_id;
  j["type"] = a.type;
  j["subject"] = a.subject;
  j["timestamp"] = format_instant(a.timestamp);
  j["object_id"] = a.object_id;
  j["object_name"] = a.object_name;
  j["user"] = a.user;
  j["affected_user"] = a.affected_user;
  return j;
}

ActivityEntry activity_from_json(const Json& j) {
  ActivityEntry a;
  a.activity_id = j.at("activity_id").get<std::int64_t>();
  a.type = j.at("type").get<std::string>();
  a.subject = j.at("subject").get<std::string>();
  auto t = parse_iso8601(j.at("timestamp").get<std::string>());
  if (!t) fail_parse("bad activity timestamp");
  a.timestamp = *t;
  a.object_id = j.at("object_id").get<std::int64_t>();
  a.object_name = j.at("object_name").get<std::string>();
  a.user = j.at("user").get<std::string>();
  a.affected_user = j.at("affected_user").get<std::string>();
  return a;
}

Json to_json(const ShareEntry& s) {
  Json j;
  j["share_id"] = s.share_id;
  j["share_type"] = s.share_type;
  j["shared_with"] = optional_json(s.shared_with);
  j["stime"] = s.stime;
  j["path"] = s.path;
  j["token"] = optional_json(s.token);
  j["permissions"] = s.permissions;
  j["expiration"] = optional_json(s.expiration);
  j["password_protected"] = s.password_protected;
  j["note"] = optional_json(s.note);
  j["owner"] = s.owner;
  j["file_id"] = s.file_id;
  return j;
}

ShareEntry share_from_json(const Json& j) {
  auto opt = [&](const char* key) -> std::optional<std::string> {
    if (j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
  };
  ShareEntry s;
  s.share_id = j.at("share_id").get<std::int64_t>();
  s.share_type = j.at("share_type").get<int>();
  s.shared_with = opt("shared_with");
  s.stime = j.at("stime").get<std::int64_t>();
  s.path = j.at("path").get<std::string>();
  s.token = opt("token");
  s.permissions = j.at("permissions").get<int>();
  s.expiration = opt("expiration");
  s.password_protected = j.at("password_protected").get<bool>();
  s.note = opt("note");
  s.owner = j.at("owner").get<std::string>();
  s.file_id = j.at("file_id").get<std::int64_t>();
  return s;
}

}  // namespace ncf
