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

#include "doctest.h"
#include "ncf/error.hpp"
#include "ncf/ocs_client.hpp"
#include "ncf/sessions.hpp"
#include "test_support.hpp"

using namespace ncf;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::input_error;
}

}  // namespace

TEST_CASE("three sessions are listed newest first") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));
  const auto sessions = SessionControl(t).list_sessions();
  REQUIRE(sessions.size() == 3);
  for (std::size_t i = 1; i < sessions.size(); ++i) {
    CHECK(sessions[i - 1].last_activity >= sessions[i].last_activity);
  }
  int current = 0;
  std::set<std::int64_t> ids;
  for (const auto& s : sessions) {
    current += s.is_current;
    ids.insert(s.token_id);
    const DeviceSession back = device_session_from_json(to_json(s));
    CHECK(back.token_id == s.token_id);
    CHECK(back.agent_name == s.agent_name);
    CHECK(back.is_current == s.is_current);
  }
  CHECK(current == 1);
  CHECK(ids.size() == 3);
  CHECK(sessions[0].is_current);
  CHECK(sessions[1].agent_name == "Firefox");
  CHECK(sessions[1].session_type == "browser");
  CHECK(sessions[2].agent_name == "Android");
  CHECK(sessions[2].session_type == "app");
}

TEST_CASE("a lone token is the current session") {
  auto spec = testing::basic_fixture();
  spec.users[0].tokens.resize(1);
  mock::MockServer server(spec);
  Transport t(server.credentials("admin"));
  const auto sessions = SessionControl(t).list_sessions();
  REQUIRE(sessions.size() == 1);
  CHECK(sessions[0].is_current);
}

TEST_CASE("revoking another device cuts its access") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));
  SessionControl sc(t);
  const auto before = sc.list_sessions();
  const DeviceSession victim = before[2];
  Transport android(server.credentials("admin", "Android"));
  sc.revoke_session(victim.token_id);
  const auto after = sc.list_sessions();
  CHECK(after.size() == before.size() - 1);
  for (const auto& s : after) CHECK(s.token_id != victim.token_id);
  CHECK(kind_of([&] { OcsClient(android).get_current_user(); }) == ErrorKind::auth_failed);

  CHECK(kind_of([&] { sc.revoke_session(987654); }) == ErrorKind::not_found);
}

TEST_CASE("revoking our own session needs force and sends nothing otherwise") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));
  SessionControl sc(t);
  const auto own = sc.list_sessions()[0];
  REQUIRE(own.is_current);
  server.reset_counts();
  CHECK(kind_of([&] { sc.revoke_session(own.token_id); }) == ErrorKind::refusing_self);
  CHECK(server.method_counts().count("DELETE") == 0);
  sc.revoke_session(own.token_id, true);
  CHECK(kind_of([&] { sc.list_sessions(); }) == ErrorKind::auth_failed);
}

TEST_CASE("revoke all keeps only the current session") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));
  SessionControl sc(t);
  Transport firefox(server.credentials("admin", "Firefox"));
  server.reset_counts();
  CHECK(sc.revoke_all() == 2);
  CHECK(server.method_counts().count("DELETE") == 2);
  const auto left = sc.list_sessions();
  REQUIRE(left.size() == 1);
  CHECK(left[0].is_current);
  CHECK(server.token_ids("admin") == std::vector<std::int64_t>{left[0].token_id});
  CHECK(kind_of([&] { OcsClient(firefox).get_current_user(); }) == ErrorKind::auth_failed);
  CHECK(sc.revoke_all() == 0);

  std::set<std::string> contexts;
  for (const auto& r : t.ledger().records()) {
    if (r.method == "DELETE") contexts.insert(r.context);
  }
  CHECK(contexts == std::set<std::string>{"session-control"});
}

TEST_CASE("a failing revocation yields a partial failure naming it") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));
  SessionControl sc(t);
  const auto sessions = sc.list_sessions();
  const std::int64_t firefox = sessions[1].token_id;
  server.inject_fault({"DELETE", "apptokens/" + std::to_string(firefox), 500, 1});
  try {
    sc.revoke_all();
    FAIL("expected partial failure");
  } catch (const PartialFailure& e) {
    CHECK(e.failed() == std::vector<std::string>{std::to_string(firefox)});
    CHECK(e.succeeded() == 1);
  }
  const auto left = sc.list_sessions();
  CHECK(left.size() == 2);
  CHECK(sc.revoke_all() == 1);
}
