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

#include <random>
#include <thread>

#include "doctest.h"
#include "ncf/error.hpp"
#include "ncf/monitor.hpp"
#include "test_support.hpp"

using namespace ncf;
namespace fs = std::filesystem;

namespace {

Snapshot random_snapshot(std::mt19937_64& rng) {
  Snapshot s;
  s.started_at = from_epoch_ms(1728000000000 + static_cast<std::int64_t>(rng() % 100000));
  s.captured_at = s.started_at + std::chrono::milliseconds(rng() % 5000);
  const int n = static_cast<int>(rng() % 40);
  for (int i = 0; i < n; ++i) {
    SnapshotEntry e;
    e.file_id = static_cast<std::int64_t>(rng() % 100000);
    e.is_directory = rng() % 5 == 0;
    e.etag = std::to_string(rng());
    e.size = rng() % 4096;
    if (rng() % 2) e.last_modified = static_cast<std::int64_t>(1700000000 + rng() % 1000000);
    s.entries["p" + std::to_string(rng() % 1000)] = e;
  }
  for (int i = 0, m = static_cast<int>(rng() % 5); i < m; ++i) {
    const std::int64_t t = 1727000000 + static_cast<std::int64_t>(rng() % 100000);
    s.trash_ids.insert({"f" + std::to_string(i) + ".d" + std::to_string(t), t, ""});
  }
  for (int i = 0, m = static_cast<int>(rng() % 5); i < m; ++i) {
    s.session_ids.insert(static_cast<std::int64_t>(rng() % 50));
  }
  for (int i = 0, m = static_cast<int>(rng() % 5); i < m; ++i) {
    s.share_ids.insert(static_cast<std::int64_t>(rng() % 50));
  }
  return s;
}

Snapshot at(std::int64_t epoch_s) {
  Snapshot s;
  s.started_at = from_epoch_ms(epoch_s * 1000);
  s.captured_at = s.started_at;
  return s;
}

SnapshotEntry file(std::int64_t id, std::string etag) {
  SnapshotEntry e;
  e.file_id = id;
  e.etag = std::move(etag);
  e.size = 1;
  return e;
}

std::multiset<std::string> kinds(const std::vector<ChangeEvent>& events) {
  std::multiset<std::string> out;
  for (const auto& e : events) out.insert(std::string(to_string(e.kind)));
  return out;
}

bool same_events(std::vector<ChangeEvent> a, std::vector<ChangeEvent> b) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a) {
    auto it = std::find_if(b.begin(), b.end(), [&](const ChangeEvent& y) { return x.same_change(y); });
    if (it == b.end()) return false;
    b.erase(it);
  }
  return true;
}

}  // namespace

TEST_CASE("diff of a snapshot with itself is empty") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const Snapshot s = random_snapshot(rng);
    CHECK(diff(s, s).empty());
  }
}

TEST_CASE("diff rejects snapshots in the wrong order") {
  Snapshot a = at(2000);
  Snapshot b = at(1000);
  try {
    diff(a, b);
    FAIL("expected invalid order");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_order);
  }
}

TEST_CASE("typed events from hand-built snapshots") {
  Snapshot a = at(1000);
  a.entries["keep"] = file(1, "e1");
  a.entries["edit"] = file(2, "e2");
  a.entries["gone"] = file(3, "e3");
  a.entries["Photos/pic.jpg"] = file(4, "e4");
  SnapshotEntry dir;
  dir.is_directory = true;
  dir.etag = "d1";
  a.entries["Photos"] = dir;
  a.session_ids = {1, 2};
  a.share_ids = {10};

  Snapshot b = at(1010);
  b.entries["keep"] = file(1, "e1");
  b.entries["edit"] = file(2, "e2b");
  b.entries["new"] = file(5, "e5");
  dir.etag = "d2";
  b.entries["Photos"] = dir;
  b.trash_ids.insert({"pic.jpg.d1005", 1005, "Photos/pic.jpg"});
  b.session_ids = {2, 3};
  b.share_ids = {11};

  const auto events = diff(a, b);
  std::vector<std::pair<std::string, std::string>> got;
  for (const auto& e : events) got.emplace_back(to_string(e.kind), e.subject);
  const std::vector<std::pair<std::string, std::string>> expect = {
      {"created", "new"},        {"modified", "edit"},    {"deleted", "gone"},
      {"trashed", "Photos/pic.jpg"}, {"new_session", "3"}, {"session_gone", "1"},
      {"share_added", "11"},     {"share_removed", "10"}};
  CHECK(got == expect);
  for (const auto& e : events) {
    if (e.kind == ChangeKind::modified) {
      REQUIRE(e.before.has_value());
      REQUIRE(e.after.has_value());
      CHECK(e.before->etag != e.after->etag);
    }
    if (e.kind == ChangeKind::trashed) CHECK(e.trash_name == "pic.jpg.d1005");
    const ChangeEvent back = change_event_from_json(to_json(e));
    CHECK(back.same_change(e));
    CHECK(back.observed_at == e.observed_at);
  }
}

TEST_CASE("trash items outside the window do not explain a removal") {
  Snapshot a = at(1000);
  a.entries["x.txt"] = file(1, "e");
  Snapshot b = at(1010);
  b.trash_ids.insert({"x.txt.d500", 500, "x.txt"});
  const auto events = diff(a, b);
  // The removal stays a deletion; the stray trash item is reported on its own.
  CHECK(kinds(events) == std::multiset<std::string>{"deleted", "trashed"});
  for (const auto& e : events) {
    if (e.kind == ChangeKind::deleted) CHECK_FALSE(e.trash_name.has_value());
  }
}

TEST_CASE("emptied trash is reported") {
  Snapshot a = at(1000);
  a.trash_ids.insert({"x.txt.d900", 900, "x.txt"});
  const Snapshot b = at(1010);
  CHECK(kinds(diff(a, b)) == std::multiset<std::string>{"trash_emptied"});
}

TEST_CASE("partial domains suppress spurious removals") {
  Snapshot a = at(1000);
  a.entries["x.txt"] = file(1, "e");
  a.session_ids = {1, 2};
  Snapshot b = at(1010);
  b.partial_domains = {SnapshotDomain::files, SnapshotDomain::sessions};
  CHECK(diff(a, b).empty());
  // A partial older side must not fabricate creations either.
  Snapshot c = at(1020);
  c.entries["x.txt"] = file(1, "e");
  c.session_ids = {1, 2};
  CHECK(diff(b, c).empty());
}

TEST_CASE("snapshots of a live instance") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));
  Monitor monitor(t);
  const Snapshot s = monitor.take_snapshot();
  CHECK_FALSE(s.partial());
  std::size_t files = 0;
  for (const auto& [path, e] : s.entries) files += !e.is_directory;
  CHECK(files == 3);
  CHECK(s.trash_ids.size() == 1);
  CHECK(s.session_ids.size() == 3);
  CHECK(s.share_ids.size() == 2);
  const Snapshot s2 = monitor.take_snapshot();
  CHECK(s2.captured_at > s.captured_at);
  CHECK(diff(s, s2).empty());

  server.inject_fault({"GET", "apptokens", 401, 1});
  const Snapshot s3 = monitor.take_snapshot();
  CHECK(s3.partial_domains == std::set<SnapshotDomain>{SnapshotDomain::sessions});
  CHECK(diff(s2, s3).empty());

  std::set<std::string> methods;
  for (const auto& r : t.ledger().records()) methods.insert(r.method);
  CHECK(methods == std::set<std::string>{"GET", "PROPFIND"});
}

TEST_CASE("empty instance gives an empty snapshot") {
  mock::FixtureSpec spec;
  mock::FixtureUser u;
  u.uid = "solo";
  spec.users = {u};
  mock::MockServer server(spec);
  Transport t(server.credentials());
  const Snapshot s = Monitor(t).take_snapshot();
  CHECK_FALSE(s.partial());
  CHECK(s.entries.empty());
  CHECK(s.trash_ids.empty());
  CHECK(s.share_ids.empty());
  CHECK(s.session_ids.size() == 1);
}

TEST_CASE("scripted mutations on the mock are seen as the right kinds") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));
  Monitor monitor(t);
  const Snapshot s0 = monitor.take_snapshot();
  mock::MutationStep m;
  m.kind = mock::MutationStep::Kind::modify;
  m.user = "admin";
  m.path = "readme.md";
  m.content = "changed";
  server.apply(m);
  const Snapshot s1 = monitor.take_snapshot();
  CHECK(kinds(diff(s0, s1)) == std::multiset<std::string>{"modified"});
  m.kind = mock::MutationStep::Kind::delete_to_trash;
  server.apply(m);
  const Snapshot s2 = monitor.take_snapshot();
  CHECK(kinds(diff(s1, s2)) == std::multiset<std::string>{"trashed"});
  m.kind = mock::MutationStep::Kind::add_token;
  m.token.name = "iPhone";
  m.token.password = "pw-iphone";
  server.apply(m);
  const Snapshot s3 = monitor.take_snapshot();
  CHECK(kinds(diff(s2, s3)) == std::multiset<std::string>{"new_session"});
}

TEST_CASE("disjoint changes compose") {
  using K = mock::MutationStep::Kind;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    mock::FixtureSpec spec;
    mock::FixtureUser u;
    u.uid = "u";
    u.files = testing::random_tree(trial, 3, 25);
    u.tokens = {{std::nullopt, "main", 1, "pw-main", 0}};
    spec.users = {u};
    mock::MockServer server(spec);
    Transport t(server.credentials("u"));
    Monitor monitor(t);

    std::vector<std::string> files;
    for (const auto& p : server.file_paths("u")) files.push_back(p);
    std::shuffle(files.begin(), files.end(), rng);
    std::set<std::string> touched;
    int serial = 0;
    auto random_step = [&]() -> std::optional<mock::MutationStep> {
      mock::MutationStep s;
      s.user = "u";
      const int pick = static_cast<int>(rng() % 5);
      if ((pick == 1 || pick == 2) && !files.empty()) {
        s.path = files.back();
        files.pop_back();
        touched.insert(s.path);
        s.kind = pick == 1 ? K::modify : K::delete_to_trash;
        s.content = "new bytes " + std::to_string(serial++);
        return s;
      }
      if (pick == 3) {
        s.kind = K::add_token;
        s.token.name = "device-" + std::to_string(serial++);
        s.token.password = "pw-" + s.token.name;
        return s;
      }
      if (pick == 4 && !files.empty()) {
        s.kind = K::add_share;
        s.share.share_type = 3;
        s.share.path = files.back();
        s.share.token = "tok" + std::to_string(serial++);
        return s;
      }
      s.kind = K::create;
      s.path = "fresh-" + std::to_string(serial++) + ".txt";
      s.content = "hi";
      touched.insert(s.path);
      return s;
    };

    const Snapshot s1 = monitor.take_snapshot();
    for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i) server.apply(*random_step());
    const Snapshot s2 = monitor.take_snapshot();
    for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i) server.apply(*random_step());
    const Snapshot s3 = monitor.take_snapshot();

    auto first = diff(s1, s2);
    const auto second = diff(s2, s3);
    first.insert(first.end(), second.begin(), second.end());
    CHECK(same_events(diff(s1, s3), first));
  }
}

TEST_CASE("monitor run detects scripted mutations and re-acquires bytes") {
  using K = mock::MutationStep::Kind;
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));

  mock::MutationScript script;
  mock::MutationStep create;
  create.kind = K::create;
  create.at_cycle = 2;
  create.user = "admin";
  create.path = "Documents/new.txt";
  create.content = "created in cycle two";
  mock::MutationStep modify = create;
  modify.kind = K::modify;
  modify.at_cycle = 3;
  modify.content = "modified in cycle three";
  mock::MutationStep trash;
  trash.kind = K::delete_to_trash;
  trash.at_cycle = 4;
  trash.user = "admin";
  trash.path = "readme.md";
  mock::MutationStep token;
  token.kind = K::add_token;
  token.at_cycle = 5;
  token.user = "admin";
  token.token.name = "Unknown laptop";
  token.token.password = "pw-laptop";
  script.steps = {create, modify, trash, token};

  testing::TempDir dir;
  MonitorOptions opts;
  opts.interval = std::chrono::seconds(1);
  opts.max_cycles = 6;
  opts.out_dir = dir.sub("mon");
  opts.before_cycle = script.hook(server);
  const MonitorLog log = Monitor(t).run(opts);

  REQUIRE(log.cycles.size() == 6);
  CHECK(kinds(log.all_events()) ==
        std::multiset<std::string>{"created", "modified", "trashed", "new_session"});
  std::map<std::string, int> cycle_of;
  for (const auto& c : log.cycles) {
    CHECK(c.errors.empty());
    for (const auto& e : c.events) cycle_of[std::string(to_string(e.kind))] = c.cycle;
  }
  CHECK(cycle_of["created"] == 2);
  CHECK(cycle_of["modified"] == 3);
  CHECK(cycle_of["trashed"] == 4);
  CHECK(cycle_of["new_session"] == 5);

  const fs::path root = dir.sub("mon");
  CHECK(testing::read_file(root / "cycles/0002/files/Documents/new.txt") == "created in cycle two");
  CHECK(testing::read_file(root / "cycles/0003/files/Documents/new.txt") ==
        "modified in cycle three");
  bool trash_bytes = false;
  for (const auto& r : log.cycles[3].records) {
    if (r.category == EvidenceCategory::trash &&
        testing::read_file(root / r.bundle_path) == "# hello\n") {
      trash_bytes = true;
    }
  }
  CHECK(trash_bytes);
  CHECK(verify_bundle(root).ok());

  const auto lines = parse_lines(testing::read_file(root / "events.jsonl"));
  int snapshots = 0;
  int events = 0;
  for (const auto& l : lines) {
    snapshots += l.at("kind") == "snapshot";
    events += l.at("kind") == "event";
  }
  CHECK(snapshots == 6);
  CHECK(events == 4);
  std::set<std::string> methods;
  for (const auto& r : t.ledger().records()) methods.insert(r.method);
  CHECK(methods == std::set<std::string>{"GET", "PROPFIND"});
}

TEST_CASE("quiet instance gives empty diffs") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin"));
  testing::TempDir dir;
  MonitorOptions opts;
  opts.interval = std::chrono::seconds(1);
  opts.max_cycles = 3;
  opts.out_dir = dir.sub("m");
  const MonitorLog log = Monitor(t).run(opts);
  CHECK(log.cycles.size() == 3);
  CHECK(log.all_events().empty());
}

TEST_CASE("monitor options are validated") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin"));
  testing::TempDir dir;
  MonitorOptions opts;
  opts.out_dir = dir.sub("m");
  opts.interval = std::chrono::seconds(0);
  CHECK_THROWS_AS(Monitor(t).run(opts), Error);
  opts.interval = std::chrono::seconds(90000);
  CHECK_THROWS_AS(Monitor(t).run(opts), Error);
  opts.interval = std::chrono::seconds(1);
  opts.max_cycles = 0;
  CHECK_THROWS_AS(Monitor(t).run(opts), Error);
}

TEST_CASE("a stop signal ends the loop") {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin"));
  testing::TempDir dir;
  std::atomic<bool> stop{false};
  MonitorOptions opts;
  opts.interval = std::chrono::seconds(3600);
  opts.out_dir = dir.sub("m");
  opts.stop = &stop;
  opts.before_cycle = [&](int cycle) {
    if (cycle == 2) stop = true;
  };
  std::thread stopper([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    stop = true;
  });
  const MonitorLog log = Monitor(t).run(opts);
  stopper.join();
  CHECK(log.cycles.size() == 1);
  CHECK(fs::exists(dir.sub("m") / "manifest.jsonl"));
}
