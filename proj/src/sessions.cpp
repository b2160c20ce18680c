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

#include "ncf/sessions.hpp"

#include <algorithm>
#include <set>

#include "ncf/error.hpp"
#include "ncf/ocs_client.hpp"

namespace ncf {
namespace {

constexpr std::string_view kAppTokens = "ocs/v2.php/core/apptokens";
constexpr std::string_view kAppPassword = "ocs/v2.php/core/apppassword";

std::string session_type_name(const Json& type) {
  if (type.is_number_integer()) {
    switch (type.get<int>()) {
      case 0: return "browser";
      case 1: return "app";
      default: return "unknown";
    }
  }
  if (type.is_string()) {
    const auto& s = type.get_ref<const std::string&>();
    if (s == "browser" || s == "app") return s;
  }
  return "unknown";
}

}  // namespace

DeviceSession parse_device_session(const Json& item) {
  if (!item.is_object() || !item.contains("id")) {
    throw Error(ErrorKind::parse_error, "apptoken entry without id");
  }
  DeviceSession s;
  const Json& id = item.at("id");
  if (id.is_number_integer()) {
    s.token_id = id.get<std::int64_t>();
  } else if (id.is_string()) {
    try {
      s.token_id = std::stoll(id.get<std::string>());
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse_error, "apptoken id is not numeric");
    }
  } else {
    throw Error(ErrorKind::parse_error, "apptoken id has unexpected type");
  }
  s.agent_name = item.value("name", std::string{});
  s.session_type = session_type_name(item.value("type", Json(nullptr)));
  if (item.contains("lastActivity") && item.at("lastActivity").is_number()) {
    s.last_activity = item.at("lastActivity").get<std::int64_t>();
  }
  s.is_current = item.value("current", false);
  s.raw = item;
  return s;
}

SessionControl::SessionControl(Transport& transport) : transport_(transport) {}

std::vector<DeviceSession> SessionControl::list_sessions(
    const MethodPolicy& policy) {
  OcsClient ocs(transport_, policy);
  const OcsResult result = ocs.get(kAppTokens);
  if (!result.data.is_array()) {
    throw Error(ErrorKind::parse_error, "apptokens data is not a list");
  }
  std::vector<DeviceSession> out;
  std::set<std::int64_t> ids;
  int current = 0;
  for (const auto& item : result.data) {
    DeviceSession s = parse_device_session(item);
    if (!ids.insert(s.token_id).second) {
      throw Error(ErrorKind::parse_error,
                  "duplicate token id " + std::to_string(s.token_id));
    }
    current += s.is_current ? 1 : 0;
    out.push_back(std::move(s));
  }
  if (current > 1) {
    throw Error(ErrorKind::parse_error, "more than one session marked current");
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.last_activity != b.last_activity) return a.last_activity > b.last_activity;
    return a.token_id < b.token_id;
  });
  return out;
}

void SessionControl::delete_token(const DeviceSession& session) {
  const std::string endpoint =
      session.is_current ? std::string(kAppPassword)
                         : std::string(kAppTokens) + "/" +
                               std::to_string(session.token_id);
  HttpRequest req = make_ocs_request(transport_, "DELETE", endpoint);
  const HttpResponse res =
      transport_.execute(req, MethodPolicy::session_control());
  if (!res.body.empty()) parse_ocs_envelope(res.body, res.status);
}

DeviceSession SessionControl::revoke_session(std::int64_t token_id, bool force) {
  const auto sessions = list_sessions();
  auto it = std::find_if(sessions.begin(), sessions.end(),
                         [&](const auto& s) { return s.token_id == token_id; });
  if (it == sessions.end()) {
    throw Error(ErrorKind::not_found,
                "no session with token id " + std::to_string(token_id));
  }
  if (it->is_current && !force) {
    throw Error(ErrorKind::refusing_self,
                "token " + std::to_string(token_id) +
                    " is the session in use; pass force to revoke it");
  }
  delete_token(*it);
  return *it;
}

std::int64_t SessionControl::revoke_all(bool keep_current) {
  const auto sessions = list_sessions();
  std::int64_t revoked = 0;
  std::vector<std::string> failed;
  const DeviceSession* self = nullptr;
  for (const auto& s : sessions) {
    if (s.is_current) {
      self = &s;
      continue;
    }
    try {
      delete_token(s);
      ++revoked;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::auth_failed) throw;
      failed.push_back(std::to_string(s.token_id));
    }
  }
  if (!keep_current && self != nullptr && failed.empty()) {
    delete_token(*self);
    ++revoked;
  }
  if (!failed.empty()) {
    std::string ids;
    for (const auto& id : failed) ids += (ids.empty() ? "" : ",") + id;
    throw PartialFailure("could not revoke token(s) " + ids, failed, revoked);
  }
  return revoked;
}

Json to_json(const DeviceSession& s) {
  Json j;
  j["token_id"] = s.token_id;
  j["agent_name"] = s.agent_name;
  j["session_type"] = s.session_type;
  j["last_activity"] = s.last_activity;
  j["is_current"] = s.is_current;
  j["raw"] = s.raw;
  return j;
}

DeviceSession device_session_from_json(const Json& j) {
  DeviceSession s;
  s.token_id = j.at("token_id").get<std::int64_t>();
  s.agent_name = j.at("agent_name").get<std::string>();
  s.session_type = j.at("session_type").get<std::string>();
  s.last_activity = j.at("last_activity").get<std::int64_t>();
  s.is_current = j.at("is_current").get<bool>();
  s.raw = j.at("raw");
  return s;
}

}  // namespace ncf
