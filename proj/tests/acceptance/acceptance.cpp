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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <openssl/evp.h>

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "ncf/acquisition.hpp"
#include "ncf/cli.hpp"
#include "ncf/digest.hpp"
#include "ncf/monitor.hpp"
#include "ncf/ocs_client.hpp"
#include "ncf/sessions.hpp"
#include "test_support.hpp"

using namespace ncf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }
Outcome pass(std::string what) { return {true, std::move(what)}; }

mock::FixtureSpec tree_fixture(const std::vector<mock::FixtureFile>& files) {
  mock::FixtureSpec spec;
  mock::FixtureUser u;
  u.uid = "alice";
  u.files = files;
  spec.users = {u};
  return spec;
}

std::multiset<std::string> kinds(const std::vector<ChangeEvent>& events) {
  std::multiset<std::string> out;
  for (const auto& e : events) out.insert(std::string(to_string(e.kind)));
  return out;
}

std::string join(const std::multiset<std::string>& s) {
  std::string out;
  for (const auto& x : s) out += (out.empty() ? "" : ",") + x;
  return out;
}

// 1
Outcome read_only() {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin"));
  testing::TempDir dir;
  server.reset_counts();
  const auto m = Acquisition(t).dump(dir.sub("b"));
  if (m.by_category(EvidenceCategory::trash).empty() ||
      m.by_category(EvidenceCategory::versions).empty() ||
      m.by_category(EvidenceCategory::metadata).empty()) {
    return fail("dump did not cover every category");
  }
  const auto counts = server.method_counts();
  std::string seen;
  for (const auto& [method, n] : counts.total) {
    seen += method + "=" + std::to_string(n) + " ";
    if (method != "GET" && method != "HEAD" && method != "PROPFIND") {
      return fail("server saw " + method);
    }
  }
  if (counts.count("MOVE") != 0) return fail("MOVE sent");
  return pass(seen + "MOVE=0");
}

// 2
Outcome completeness() {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto files = testing::random_tree(seed * 7919, 6, 200);
    mock::MockServer server(tree_fixture(files));
    Transport t(server.credentials());
    testing::TempDir dir;
    const auto m = Acquisition(t).dump(dir.sub("b"));
    std::set<std::string> got;
    for (const auto* r : m.by_category(EvidenceCategory::files)) {
      if (!r->error) got.insert(r->annotations.at("relative_path").get<std::string>());
    }
    if (got != testing::file_set(files)) {
      return fail("seed " + std::to_string(seed) + ": path sets differ");
    }
  }
  return pass("20 random trees, exact path-set equality");
}

// 3
Outcome integrity() {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin"));
  testing::TempDir dir;
  const fs::path b = dir.sub("b");
  const auto m = Acquisition(t).dump(b);
  const auto clean = verify_bundle(b);
  std::size_t stored = 0;
  for (const auto& r : m.records) stored += !r.error;
  if (!clean.ok() || clean.matched.size() < stored) return fail("untouched bundle not clean");
  std::mt19937_64 rng(3);
  std::size_t flips = 0;
  for (const auto& r : m.records) {
    if (r.error || r.byte_length == 0) continue;
    const fs::path p = b / r.bundle_path;
    const std::string original = testing::read_file(p);
    std::string bytes = original;
    bytes[rng() % bytes.size()] ^= 0x20;
    testing::write_file(p, bytes);
    const auto report = verify_bundle(b);
    testing::write_file(p, original);
    if (report.mismatched != std::vector<std::string>{r.bundle_path} || !report.missing.empty()) {
      return fail("flip in " + r.bundle_path + " not reported exactly once");
    }
    ++flips;
  }
  return pass(std::to_string(clean.matched.size()) + " matches; " + std::to_string(flips) +
              " single-byte flips each gave one mismatch");
}

// 4
Outcome trash_fidelity() {
  mock::MockServer server(testing::basic_fixture());
  const Credentials c = server.credentials("admin");
  Transport t(c);
  const auto trash = WebDavClient(t).list_trash();
  if (trash.size() != 1 || trash[0].trash_name != "screenshot.jpg.d1728237675") {
    return fail("trash listing differs from fixture");
  }
  if (trash[0].deletion_time != 1728237675) {
    return fail("deletion_time " + std::to_string(trash[0].deletion_time));
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run({"fls", "-r", "-d"}, out, err, [&](const std::string& k)
                                -> std::optional<std::string> {
    if (k == cli::kEnvUrl) return c.base_url;
    if (k == cli::kEnvUser) return c.username;
    if (k == cli::kEnvPassword) return c.app_password;
    return std::nullopt;
  });
  if (code != 0) return fail("fls exited " + std::to_string(code));
  std::istringstream lines(out.str());
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find("screenshot.jpg") != std::string::npos) {
      if (line.rfind("*", 0) == 0) return pass("deletion_time 1728237675; fls -d: " + line);
      return fail("fls line lacks '*': " + line);
    }
  }
  return fail("fls -d did not list the trashed file");
}

// 5
Outcome version_round_trip() {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin"));
  WebDavClient dav(t);
  const auto seeded = server.versions("admin");
  std::size_t checked = 0;
  for (const auto& fv : seeded) {
    const auto listed = dav.list_versions("admin", fv.file_id);
    const std::string expected_href = "/remote.php/dav/versions/admin/versions/" +
                                      std::to_string(fv.file_id) + "/" +
                                      std::to_string(fv.timestamp);
    bool found = false;
    for (const auto& v : listed) {
      if (v.version_timestamp != fv.timestamp) continue;
      found = true;
      if (v.href.find(expected_href) == std::string::npos) return fail("href " + v.href);
      if (sha256_hex(dav.get_content(v.href)) != sha256_hex(fv.content)) {
        return fail("digest mismatch for version " + std::to_string(fv.timestamp));
      }
      ++checked;
    }
    if (!found) return fail("version " + std::to_string(fv.timestamp) + " not listed");
  }
  if (checked == 0) return fail("no versions seeded");
  return pass(std::to_string(checked) + " versions, digests equal");
}

// 6
Outcome activity_persistence() {
  mock::MockServer server(testing::basic_fixture());
  const auto id = *server.file_id("Documents/report.txt", "admin");
  mock::MutationStep step;
  step.user = "admin";
  step.path = "Documents/report.txt";
  step.kind = mock::MutationStep::Kind::delete_to_trash;
  server.apply(step);
  step.kind = mock::MutationStep::Kind::empty_trash;
  server.apply(step);
  Transport t(server.credentials("admin"));
  const auto history = OcsClient(t).get_file_activity(id);
  for (const auto& a : history) {
    if (a.type == "file_deleted") {
      return pass(std::to_string(history.size()) + " entries after purge, file_deleted present");
    }
  }
  return fail("no file_deleted entry among " + std::to_string(history.size()));
}

// 7
Outcome monitoring() {
  using K = mock::MutationStep::Kind;
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));
  mock::MutationStep create;
  create.kind = K::create;
  create.at_cycle = 2;
  create.user = "admin";
  create.path = "Documents/new.txt";
  create.content = "new file";
  mock::MutationStep modify = create;
  modify.kind = K::modify;
  modify.at_cycle = 3;
  modify.content = "new file, edited";
  mock::MutationStep trash;
  trash.kind = K::delete_to_trash;
  trash.at_cycle = 4;
  trash.user = "admin";
  trash.path = "readme.md";
  mock::MutationStep token;
  token.kind = K::add_token;
  token.at_cycle = 5;
  token.user = "admin";
  token.token.name = "Unknown device";
  token.token.password = "pw-unknown";
  mock::MutationScript script;
  script.steps = {create, modify, trash, token};

  testing::TempDir dir;
  MonitorOptions opts;
  opts.interval = std::chrono::seconds(1);
  opts.max_cycles = 6;
  opts.out_dir = dir.sub("m");
  opts.before_cycle = script.hook(server);
  const MonitorLog log = Monitor(t).run(opts);

  const std::multiset<std::string> expected{"created", "modified", "trashed", "new_session"};
  const auto got = kinds(log.all_events());
  if (got != expected) return fail("events {" + join(got) + "}");
  const std::map<std::string, int> due{
      {"created", 2}, {"modified", 3}, {"trashed", 4}, {"new_session", 5}};
  for (const auto& c : log.cycles) {
    for (const auto& e : c.events) {
      const int lag = c.cycle - due.at(std::string(to_string(e.kind)));
      if (lag < 0 || lag > 1) return fail(std::string(to_string(e.kind)) + " late");
    }
  }
  const fs::path root = dir.sub("m");
  bool created_bytes = false;
  bool modified_bytes = false;
  for (const auto& r : log.manifest.records) {
    if (r.error || r.category != EvidenceCategory::files) continue;
    const std::string bytes = testing::read_file(root / r.bundle_path);
    created_bytes |= bytes == "new file";
    modified_bytes |= bytes == "new file, edited";
  }
  if (!created_bytes || !modified_bytes) return fail("re-acquired bytes missing");
  return pass("{" + join(got) + "} each in its mutation cycle; bytes re-acquired");
}

// 8
Snapshot random_snapshot(std::mt19937_64& rng) {
  Snapshot s;
  s.started_at = from_epoch_ms(1728000000000 + static_cast<std::int64_t>(rng() % 100000));
  s.captured_at = s.started_at + std::chrono::milliseconds(rng() % 3000);
  for (int i = 0, n = static_cast<int>(rng() % 50); i < n; ++i) {
    SnapshotEntry e;
    e.file_id = static_cast<std::int64_t>(rng() % 10000);
    e.is_directory = rng() % 6 == 0;
    e.etag = std::to_string(rng() % 1000000);
    e.size = rng() % 1000;
    s.entries["d" + std::to_string(rng() % 5) + "/f" + std::to_string(rng() % 500)] = e;
  }
  for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) {
    const std::int64_t when = 1728000000 + static_cast<std::int64_t>(rng() % 1000);
    s.trash_ids.insert({"t" + std::to_string(i) + ".d" + std::to_string(when), when, ""});
    s.session_ids.insert(static_cast<std::int64_t>(rng() % 30));
    s.share_ids.insert(static_cast<std::int64_t>(rng() % 30));
  }
  return s;
}

Outcome diff_algebra() {
  using K = mock::MutationStep::Kind;
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    const Snapshot s = random_snapshot(rng);
    if (!diff(s, s).empty()) return fail("diff(s,s) non-empty at sample " + std::to_string(i));
  }
  for (int trial = 0; trial < 100; ++trial) {
    mock::FixtureSpec spec;
    mock::FixtureUser u;
    u.uid = "u";
    u.files = testing::random_tree(5000 + trial, 3, 30);
    spec.users = {u};
    mock::MockServer server(spec);
    Transport t(server.credentials());
    Monitor monitor(t);
    auto files = server.file_paths();
    std::shuffle(files.begin(), files.end(), rng);
    int serial = 0;
    auto step = [&] {
      mock::MutationStep s;
      const int pick = static_cast<int>(rng() % 4);
      if (pick < 2 && !files.empty()) {
        s.kind = pick == 0 ? K::modify : K::delete_to_trash;
        s.path = files.back();
        s.content = "v" + std::to_string(serial++);
        files.pop_back();
      } else if (pick == 2) {
        s.kind = K::add_token;
        s.token.name = "dev" + std::to_string(serial++);
        s.token.password = "pw-" + s.token.name;
      } else {
        s.kind = K::create;
        s.path = "n" + std::to_string(serial++) + ".txt";
        s.content = "x";
      }
      server.apply(s);
    };
    const Snapshot a = monitor.take_snapshot();
    for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i) step();
    const Snapshot b = monitor.take_snapshot();
    for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i) step();
    const Snapshot c = monitor.take_snapshot();
    auto split = diff(a, b);
    const auto second = diff(b, c);
    split.insert(split.end(), second.begin(), second.end());
    auto whole = diff(a, c);
    if (whole.size() != split.size()) return fail("trial " + std::to_string(trial));
    for (const auto& e : whole) {
      auto it = std::find_if(split.begin(), split.end(),
                             [&](const ChangeEvent& x) { return x.same_change(e); });
      if (it == split.end()) return fail("trial " + std::to_string(trial) + ": " + e.subject);
      split.erase(it);
    }
  }
  return pass("50 fixed points, 100 composed scripts");
}

// 9
Outcome auth_encoding() {
  if (build_auth_header({"https://h", "a", "b"}) != "Basic YTpi") return fail("a:b case");
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    std::string user = testing::random_bytes(rng, 32);
    std::replace(user.begin(), user.end(), ':', '-');
    if (user.empty()) user = "u";
    const std::string pw = testing::random_bytes(rng, 64);
    const std::string raw = user + ":" + pw;
    std::string enc(4 * ((raw.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(enc.data()),
                                  reinterpret_cast<const unsigned char*>(raw.data()),
                                  static_cast<int>(raw.size()));
    enc.resize(static_cast<std::size_t>(n));
    if (build_auth_header({"https://h", user, pw}) != "Basic " + enc) {
      return fail("pair " + std::to_string(i));
    }
  }
  return pass("a:b -> Basic YTpi; 100 random pairs bit-exact");
}

// 10
Outcome session_control() {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin", "ncforensic"));
  Transport other(server.credentials("admin", "Android"));
  SessionControl sc(t);
  if (sc.list_sessions().size() != 3) return fail("fixture does not list 3 sessions");
  const auto revoked = sc.revoke_all(true);
  if (revoked != 2) return fail("revoke_all returned " + std::to_string(revoked));
  const auto left = sc.list_sessions().size();
  if (left != 1) return fail(std::to_string(left) + " sessions left");
  try {
    OcsClient(other).get_current_user();
    return fail("revoked token still accepted");
  } catch (const Error& e) {
    if (e.status() != 401) return fail("revoked token got " + std::to_string(e.status()));
  }
  return pass("revoked 2, 1 left, revoked token -> 401");
}

// 11
Outcome share_parsing() {
  mock::MockServer server(testing::basic_fixture());
  Transport t(server.credentials("admin"));
  OcsClient ocs(t);
  bool link_ok = false;
  bool user_ok = false;
  for (const auto& s : ocs.list_shares()) {
    if (s.token == "3kXXKCtn7WyyNS3") {
      const auto url = ocs.share_link(s);
      const std::string suffix = "/index.php/s/3kXXKCtn7WyyNS3";
      link_ok = s.share_type == 3 && url && url->size() >= suffix.size() &&
                url->compare(url->size() - suffix.size(), suffix.size(), suffix) == 0;
    } else if (s.share_type == 0) {
      user_ok = s.shared_with.has_value() && !s.shared_with->empty();
    }
  }
  if (!link_ok) return fail("link share not parsed as type 3 with the expected URL");
  if (!user_ok) return fail("user share lacks shared_with");
  return pass("type 3 .../index.php/s/3kXXKCtn7WyyNS3; type 0 with shared_with");
}

// 12
struct CliRun {
  int code;
  std::vector<Json> lines;
};

Outcome cli_contract() {
  mock::MockServer server(testing::basic_fixture());
  const Credentials creds = server.credentials("admin", "ncforensic");
  auto env_for = [](Credentials c) {
    return [c](const std::string& k) -> std::optional<std::string> {
      if (k == cli::kEnvUrl) return c.base_url;
      if (k == cli::kEnvUser) return c.username;
      if (k == cli::kEnvPassword) return c.app_password;
      return std::nullopt;
    };
  };
  std::string leak;
  auto run = [&](std::vector<std::string> args, const Credentials& c) {
    args.insert(args.end(), {"--format", "machine"});
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err, env_for(c));
    if ((out.str() + err.str()).find(c.app_password) != std::string::npos) leak = args[0];
    CliRun r{code, {}};
    try {
      r.lines = parse_lines(out.str());
    } catch (const std::exception&) {
      r.code = -1;
    }
    return r;
  };
  testing::TempDir dir;

  // Each subcommand's machine lines parsed back into their types and re-serialized.
  using Check = std::function<bool(const Json&)>;
  auto same = [](auto parsed, const Json& j) { return to_json(parsed) == j; };
  const std::vector<std::pair<std::vector<std::string>, Check>> cases = {
      {{"fsstat"}, [&](const Json& j) { return same(capabilities_from_json(j.at("capabilities")), j.at("capabilities")); }},
      {{"fls", "-r", "-d"}, [&](const Json& j) {
         return j.at("deleted").get<bool>() ? same(trash_from_json(j.at("trash")), j.at("trash"))
                                            : same(resource_from_json(j.at("entry")), j.at("entry"));
       }},
      {{"istat", "501"}, [&](const Json& j) {
         bool ok = same(resource_from_json(j.at("entry")), j.at("entry"));
         for (const auto& a : j.at("activity")) ok &= same(activity_from_json(a), a);
         for (const auto& v : j.at("versions")) ok &= same(version_from_json(v), v);
         return ok;
       }},
      {{"user-info"}, [&](const Json& j) { return same(user_info_from_json(j), j); }},
      {{"list-users"}, [&](const Json& j) { return j.is_string(); }},
      {{"search-user", "bo"}, [&](const Json& j) { return same(user_info_from_json(j), j); }},
      {{"list-files", "-r"}, [&](const Json& j) { return same(resource_from_json(j), j); }},
      {{"file-id-to-path", "501"}, [&](const Json& j) { return j.at("path") == "Documents/report.txt"; }},
      {{"download-file", "readme.md", "-o", dir.sub("dl").string()},
       [&](const Json& j) { return same(resource_from_json(j.at("entry")), j.at("entry")); }},
      {{"trash-bin"}, [&](const Json& j) { return same(trash_from_json(j), j); }},
      {{"file-versions", "501"}, [&](const Json& j) { return same(version_from_json(j), j); }},
      {{"file-activity", "501"}, [&](const Json& j) { return same(activity_from_json(j), j); }},
      {{"list-shares"}, [&](const Json& j) { return same(share_from_json(j), j); }},
      {{"list-devices"}, [&](const Json& j) { return same(device_session_from_json(j), j); }},
      {{"dump", "-o", dir.sub("dump").string()}, [&](const Json& j) {
         return j.at("manifest_digest") ==
                EvidenceManifest::parse(testing::read_file(dir.sub("dump") / "manifest.jsonl")).digest();
       }},
      {{"verify", dir.sub("dump").string()}, [&](const Json& j) { return j == to_json(verify_bundle(dir.sub("dump"))); }},
      {{"acquire-trash", "-o", dir.sub("t").string()}, [&](const Json& j) { return j.contains("manifest_digest"); }},
      {{"acquire-versions", "501", "-o", dir.sub("v").string()}, [&](const Json& j) { return j.at("records").get<int>() >= 2; }},
      {{"monitor", "-o", dir.sub("mon").string(), "--interval", "1", "--max-cycles", "1"},
       [&](const Json& j) { return change_event_from_json(to_json(change_event_from_json(j))).same_change(change_event_from_json(j)); }},
  };
  std::size_t lines = 0;
  for (const auto& [args, check] : cases) {
    const CliRun r = run(args, creds);
    if (r.code != 0) return fail(args[0] + " exited " + std::to_string(r.code));
    for (const auto& j : r.lines) {
      bool ok = false;
      try {
        ok = check(j);
      } catch (const std::exception&) {
      }
      if (!ok) return fail(args[0] + " output does not round-trip");
      ++lines;
    }
  }

  Credentials wrong = creds;
  wrong.app_password = "definitely-wrong";
  const Credentials bob = server.credentials("bob");
  const auto firefox_id = server.token_ids("admin")[1];
  server.inject_fault({"DELETE", "apptokens/" + std::to_string(firefox_id), 500, 1});
  const std::vector<std::tuple<std::string, std::vector<std::string>, Credentials, int>> matrix = {
      {"auth", {"fsstat"}, wrong, 2},
      {"forbidden", {"list-users"}, bob, 2},
      {"not-found", {"file-id-to-path", "987654"}, creds, 3},
      {"wrong-kind", {"download-file", "Documents"}, creds, 4},
      {"partial", {"revoke-all", "--yes"}, creds, 5},
      {"usage", {"fls", "--password", creds.app_password}, creds, 1},
  };
  for (const auto& [name, args, c, expected] : matrix) {
    const CliRun r = run(args, c);
    if (r.code != expected) {
      return fail(name + " exited " + std::to_string(r.code) + ", want " + std::to_string(expected));
    }
  }
  if (!leak.empty()) return fail("password appeared in output of " + leak);
  return pass(std::to_string(cases.size()) + " subcommands, " + std::to_string(lines) +
              " lines round-tripped; exit matrix auth/forbidden/not-found/wrong-kind/partial/usage");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"read-only soundness", read_only},
      {"completeness", completeness},
      {"integrity", integrity},
      {"trash fidelity", trash_fidelity},
      {"version round trip", version_round_trip},
      {"activity persistence", activity_persistence},
      {"monitoring detection", monitoring},
      {"diff algebra", diff_algebra},
      {"auth encoding", auth_encoding},
      {"session control", session_control},
      {"share parsing", share_parsing},
      {"cli contract", cli_contract},
  };
  int failures = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed in "
            << secs << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
