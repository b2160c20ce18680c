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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ncf/canonical.hpp"
#include "ncf/transport.hpp"

namespace ncf::mock {

/// A seeded file or directory. Directories are written with a trailing '/'
/// or is_directory set; parents are created implicitly.
struct FixtureFile {
  std::string path;
  std::string content;
  bool is_directory = false;
  std::optional<std::int64_t> file_id;
  std::optional<std::string> etag;
  std::optional<std::int64_t> mtime;
};

struct FixtureTrash {
  std::string trash_name;  // "<name>.d<deletion_time>"
  std::string original_location;
  /// Taken from the trash_name suffix when absent; must agree when given.
  std::optional<std::int64_t> deletion_time;
  std::string content;
  std::optional<std::int64_t> file_id;
};

/// A prior version of a file, addressed by path or by file id.
struct FixtureVersion {
  std::string path;
  std::optional<std::int64_t> file_id;
  std::int64_t timestamp = 0;
  std::string content;
};

struct FixtureToken {
  std::optional<std::int64_t> id;
  std::string name;
  int type = 1;  // 0 browser, 1 app
  std::string password;
  std::int64_t last_activity = 0;
};

struct FixtureShare {
  std::optional<std::int64_t> id;
  int share_type = 0;
  std::optional<std::string> share_with;
  std::string path;
  std::optional<std::string> token;
  int permissions = 1;
  std::int64_t stime = 0;
  std::optional<std::string> expiration;
  std::optional<std::string> note;
  std::optional<std::string> password;
};

struct FixtureActivity {
  std::optional<std::int64_t> activity_id;
  std::string type;
  std::string subject;
  std::string path;  // object name; resolved to object_id when that is absent
  std::optional<std::int64_t> object_id;
  std::int64_t timestamp = 0;
};

struct FixtureUser {
  std::string uid;
  std::string display_name;
  std::optional<std::string> email;
  bool admin = false;
  bool enabled = true;
  std::vector<std::string> groups;
  std::int64_t quota_total = std::int64_t{10} * 1024 * 1024 * 1024;
  std::int64_t last_login = 0;
  std::vector<FixtureToken> tokens;
  std::vector<FixtureFile> files;
  std::vector<FixtureTrash> trash;
  std::vector<FixtureVersion> versions;
  std::vector<FixtureShare> shares;
  std::vector<FixtureActivity> activities;
};

struct FixtureSpec {
  std::string server_version = "28.0.4";
  std::vector<FixtureUser> users;

  /// Throws Error(input_error) on duplicate file ids, trash names whose
  /// suffix disagrees with deletion_time, or duplicate version timestamps.
  void validate() const;
};

FixtureSpec fixture_from_json(const Json& j);
FixtureSpec load_fixture(const std::filesystem::path& path);
Json to_json(const FixtureSpec& spec);

struct MutationStep {
  enum class Kind {
    create,
    modify,
    delete_to_trash,
    empty_trash,
    add_token,
    remove_token,
    add_share,
  };
  Kind kind = Kind::create;
  std::optional<int> at_cycle;
  /// Clock value (epoch seconds) used for the step's timestamps.
  std::optional<std::int64_t> at_time;
  std::string user;  // empty selects the first user
  std::string path;
  std::string content;
  FixtureToken token;  // add_token; remove_token uses token.id or token.name
  FixtureShare share;
};

std::string_view to_string(MutationStep::Kind kind) noexcept;
MutationStep mutation_step_from_json(const Json& j);

class MockServer;

struct MutationScript {
  std::vector<MutationStep> steps;

  std::vector<MutationStep> due_at_cycle(int cycle) const;
  /// A callback suitable for MonitorOptions::before_cycle.
  std::function<void(int)> hook(MockServer& server) const;
};

/// Responds with `status` to matching requests, `remaining` times (-1 for
/// always). Matching happens after authentication.
struct FaultRule {
  std::string method;  // empty matches any
  std::string path_contains;
  int status = 500;
  int remaining = -1;
};

struct MethodCounts {
  std::map<std::string, std::int64_t> total;
  /// Keyed by "<uid>/<token name>", or "unauthenticated".
  std::map<std::string, std::map<std::string, std::int64_t>> by_token;

  std::int64_t count(const std::string& method) const;
  std::int64_t sum() const;
};

struct MockOptions {
  std::uint64_t seed = 1;
  /// Served below this path, e.g. "/nextcloud".
  std::string url_prefix;
  /// Fixed clock in epoch seconds; the system clock when unset.
  std::optional<std::int64_t> clock;
};

struct TrashView {
  std::string trash_name;
  std::string original_location;
  std::int64_t deletion_time = 0;
  std::int64_t file_id = 0;
  bool is_directory = false;
  std::string content;
};

struct VersionView {
  std::string path;
  std::int64_t file_id = 0;
  std::int64_t timestamp = 0;
  std::string content;
};

/// An in-process instance speaking the OCS and WebDAV subset used by the
/// clients. Binds 127.0.0.1 on an ephemeral port.
class MockServer {
 public:
  explicit MockServer(const FixtureSpec& spec, MockOptions options = {});
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  std::uint16_t port() const noexcept;
  /// "http://127.0.0.1:<port>" plus the URL prefix.
  std::string base_url() const;
  /// Credentials for a user's token (the first token when name is empty).
  Credentials credentials(const std::string& uid = {},
                          const std::string& token_name = {}) const;
  void stop();

  void apply(const MutationStep& step);
  void set_clock(std::optional<std::int64_t> epoch_seconds);
  void inject_fault(FaultRule rule);
  void clear_faults();

  MethodCounts method_counts() const;
  void reset_counts();

  std::vector<std::string> file_paths(const std::string& uid = {}) const;
  std::vector<std::string> directory_paths(const std::string& uid = {}) const;
  std::optional<std::string> file_content(const std::string& path,
                                          const std::string& uid = {}) const;
  std::optional<std::string> etag(const std::string& path,
                                  const std::string& uid = {}) const;
  std::optional<std::int64_t> file_id(const std::string& path,
                                      const std::string& uid = {}) const;
  std::vector<TrashView> trash(const std::string& uid = {}) const;
  std::vector<VersionView> versions(const std::string& uid = {}) const;
  std::vector<std::int64_t> token_ids(const std::string& uid = {}) const;
  std::vector<std::int64_t> share_ids(const std::string& uid = {}) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ncf::mock
