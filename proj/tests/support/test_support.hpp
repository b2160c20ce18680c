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
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ncf/mock_server.hpp"
#include "ncf/transport.hpp"

namespace ncf::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("ncf-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  /// A not-yet-existing child path.
  std::filesystem::path sub(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

inline std::string random_bytes(std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::string s(len(rng), '\0');
  for (auto& c : s) c = static_cast<char>(rng() & 0xff);
  return s;
}

/// Random file tree with at most `max_nodes` nodes and depth at most
/// `max_depth`. Names include spaces and non-ASCII to exercise encoding.
inline std::vector<mock::FixtureFile> random_tree(std::uint64_t seed, int max_depth,
                                                  int max_nodes) {
  std::mt19937_64 rng(seed);
  static const std::vector<std::string> stems = {
      "report", "photo", "notes", "Übersicht", "draft 2", "a&b", "data", "x"};
  static const std::vector<std::string> exts = {".txt", ".jpg", ".pdf", ".bin", ""};
  std::vector<mock::FixtureFile> out;
  std::vector<std::pair<std::string, int>> dirs = {{"", 0}};
  std::set<std::string> used;
  std::uniform_int_distribution<int> nodes_dist(1, max_nodes);
  const int target = nodes_dist(rng);
  for (int i = 0; i < target; ++i) {
    const auto& [parent, depth] = dirs[rng() % dirs.size()];
    const bool make_dir = depth + 1 < max_depth && rng() % 4 == 0;
    std::string name = stems[rng() % stems.size()] + "-" + std::to_string(i);
    if (!make_dir) name += exts[rng() % exts.size()];
    const std::string path = parent.empty() ? name : parent + "/" + name;
    if (!used.insert(path).second) continue;
    mock::FixtureFile f;
    f.path = path;
    f.is_directory = make_dir;
    if (!make_dir) f.content = random_bytes(rng, 2048);
    out.push_back(f);
    if (make_dir) dirs.push_back({path, depth + 1});
  }
  return out;
}

/// Paths of the non-directory entries of a tree.
inline std::set<std::string> file_set(const std::vector<mock::FixtureFile>& files) {
  std::set<std::string> out;
  for (const auto& f : files) {
    if (!f.is_directory) out.insert(f.path);
  }
  return out;
}

/// admin with three app tokens, a couple of files, one trash item, one
/// version, a link share and a user share.
inline mock::FixtureSpec basic_fixture() {
  mock::FixtureSpec spec;
  mock::FixtureUser admin;
  admin.uid = "admin";
  admin.display_name = "Admin Istrator";
  admin.email = "admin@example.org";
  admin.admin = true;
  admin.groups = {"admin"};
  admin.last_login = 1728230000000;
  admin.tokens = {{std::nullopt, "ncforensic", 1, "pw-forensic", 1728237000},
                  {std::nullopt, "Firefox", 0, "pw-firefox", 1728236000},
                  {std::nullopt, "Android", 1, "pw-android", 1728235000}};
  admin.files = {{"Documents/", "", true, std::nullopt, std::nullopt, 1728000000},
                 {"Documents/report.txt", "quarterly numbers\n", false, 501,
                  std::nullopt, 1728000100},
                 {"Photos/holiday.jpg", std::string("\xff\xd8\xff\xe0 jpeg", 9), false,
                  std::nullopt, std::nullopt, 1728000200},
                 {"readme.md", "# hello\n", false, std::nullopt, std::nullopt,
                  1728000300}};
  admin.trash = {{"screenshot.jpg.d1728237675", "Photos/screenshot.jpg", std::nullopt,
                  "png-ish bytes", 900}};
  admin.versions = {{"Documents/report.txt", std::nullopt, 1727000000, "first draft\n"},
                    {"Documents/report.txt", std::nullopt, 1727500000, "second draft\n"}};
  mock::FixtureShare link;
  link.share_type = 3;
  link.path = "Photos/holiday.jpg";
  link.token = "3kXXKCtn7WyyNS3";
  link.stime = 1728100000;
  mock::FixtureShare user_share;
  user_share.share_type = 0;
  user_share.share_with = "bob";
  user_share.path = "Documents/report.txt";
  user_share.permissions = 19;
  user_share.stime = 1728100500;
  admin.shares = {link, user_share};
  admin.activities = {{std::nullopt, "file_created", "You created report.txt",
                       "Documents/report.txt", std::nullopt, 1726000000}};
  mock::FixtureUser bob;
  bob.uid = "bob";
  bob.display_name = "Bob Builder";
  bob.tokens = {{std::nullopt, "laptop", 1, "pw-bob", 1728000000}};
  bob.files = {{"bob.txt", "bob's file", false, std::nullopt, std::nullopt, 1728000000}};
  spec.users = {admin, bob};
  return spec;
}

}  // namespace ncf::testing
