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

#include "ncf/mock_server.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "ncf/encoding.hpp"
#include "ncf/error.hpp"
#include "ncf/multistatus.hpp"
#include "ncf/timeutil.hpp"

namespace ncf::mock {
namespace beast = boost::beast;
namespace http = beast::http;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

constexpr std::int64_t kDefaultMtime = 1700000000;

struct Node {
  bool dir = false;
  std::string content;
  std::int64_t file_id = 0;
  std::string etag;
  std::int64_t mtime = 0;
  std::map<std::string, Node> children;

  std::uint64_t size() const {
    if (!dir) return content.size();
    std::uint64_t total = 0;
    for (const auto& [_, c] : children) total += c.size();
    return total;
  }
};

struct TrashItem {
  std::string name;
  std::string original_location;
  std::int64_t deletion_time = 0;
  Node node;
};

struct VersionBlob {
  std::string content;
  std::string etag;
};

struct Token {
  std::int64_t id = 0;
  std::string name;
  int type = 1;
  std::string password;
  std::int64_t last_activity = 0;
};

struct Activity {
  std::int64_t id = 0;
  std::string type;
  std::string subject;
  std::string object_name;
  std::int64_t object_id = 0;
  std::int64_t timestamp = 0;
};

struct UserState {
  FixtureUser profile;
  Node root;
  std::vector<TrashItem> trash;
  std::map<std::int64_t, std::map<std::int64_t, VersionBlob>> versions;
  std::vector<Token> tokens;
  std::vector<FixtureShare> shares;
  std::vector<Activity> activities;
};

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::string part;
  for (char c : path) {
    if (c == '/') {
      if (!part.empty()) out.push_back(std::move(part));
      part.clear();
    } else {
      part += c;
    }
  }
  if (!part.empty()) out.push_back(std::move(part));
  for (const auto& p : out) {
    if (p == "." || p == "..") {
      throw Error(ErrorKind::input_error, "path segment '" + p + "' not allowed");
    }
  }
  return out;
}

std::string join_path(const std::vector<std::string>& parts, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count && i < parts.size(); ++i) {
    if (!out.empty()) out += '/';
    out += parts[i];
  }
  return out;
}

std::string join_path(const std::vector<std::string>& parts) {
  return join_path(parts, parts.size());
}

std::string basename_of(const std::string& path) {
  auto parts = split_path(path);
  return parts.empty() ? std::string{} : parts.back();
}

std::string content_type_for(const std::string& name) {
  static const std::map<std::string, std::string> types = {
      {"txt", "text/plain"},       {"md", "text/markdown"},
      {"jpg", "image/jpeg"},       {"jpeg", "image/jpeg"},
      {"png", "image/png"},        {"pdf", "application/pdf"},
      {"json", "application/json"}, {"html", "text/html"}};
  const auto dot = name.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = name.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    auto it = types.find(ext);
    if (it != types.end()) return it->second;
  }
  return "application/octet-stream";
}

/// Suffix ".d<digits>" of a trash name, if present.
std::optional<std::int64_t> trash_suffix_time(const std::string& name) {
  const auto pos = name.rfind(".d");
  if (pos == std::string::npos || pos + 2 >= name.size()) return std::nullopt;
  const std::string digits = name.substr(pos + 2);
  if (!std::all_of(digits.begin(), digits.end(), ::isdigit) || digits.size() > 18) {
    return std::nullopt;
  }
  return std::stoll(digits);
}

std::string strip_trash_suffix(const std::string& name) {
  const auto pos = name.rfind(".d");
  return pos == std::string::npos ? name : name.substr(0, pos);
}

std::string content_field(const Json& j) {
  if (j.contains("content_base64")) {
    auto bytes = base64_decode(j.at("content_base64").get<std::string>());
    if (!bytes) throw Error(ErrorKind::input_error, "invalid content_base64");
    return *bytes;
  }
  return j.value("content", std::string{});
}

void put_content(Json& j, const std::string& content) {
  const bool printable = std::all_of(content.begin(), content.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u == '\n' || u == '\t' || (u >= 0x20 && u < 0x7f);
  });
  if (printable) {
    j["content"] = content;
  } else {
    j["content_base64"] = base64_encode(content);
  }
}

template <typename T>
std::optional<T> opt(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

template <typename T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

FixtureShare share_from_json(const Json& s) {
  FixtureShare sh;
  sh.id = opt<std::int64_t>(s, "id");
  sh.share_type = s.value("share_type", 0);
  sh.share_with = opt<std::string>(s, "share_with");
  sh.path = s.value("path", std::string{});
  sh.token = opt<std::string>(s, "token");
  sh.permissions = s.value("permissions", 1);
  sh.stime = s.value("stime", std::int64_t{0});
  sh.expiration = opt<std::string>(s, "expiration");
  sh.note = opt<std::string>(s, "note");
  sh.password = opt<std::string>(s, "password");
  return sh;
}

Json share_to_json(const FixtureShare& sh) {
  Json s;
  put_opt(s, "id", sh.id);
  s["share_type"] = sh.share_type;
  put_opt(s, "share_with", sh.share_with);
  s["path"] = sh.path;
  put_opt(s, "token", sh.token);
  s["permissions"] = sh.permissions;
  s["stime"] = sh.stime;
  put_opt(s, "expiration", sh.expiration);
  put_opt(s, "note", sh.note);
  put_opt(s, "password", sh.password);
  return s;
}

FixtureToken token_from_json(const Json& t) {
  FixtureToken tok;
  tok.id = opt<std::int64_t>(t, "id");
  tok.name = t.value("name", std::string{});
  tok.type = t.value("type", 1);
  tok.password = t.value("password", std::string{});
  tok.last_activity = t.value("last_activity", std::int64_t{0});
  return tok;
}

Json token_to_json(const FixtureToken& tok) {
  Json t;
  put_opt(t, "id", tok.id);
  t["name"] = tok.name;
  t["type"] = tok.type;
  t["password"] = tok.password;
  t["last_activity"] = tok.last_activity;
  return t;
}

std::map<std::string, std::string> parse_query(std::string_view query) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos <= query.size()) {
    auto amp = query.find('&', pos);
    if (amp == std::string_view::npos) amp = query.size();
    std::string pair(query.substr(pos, amp - pos));
    std::replace(pair.begin(), pair.end(), '+', ' ');
    if (!pair.empty()) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos) {
        out[percent_decode(pair)] = "";
      } else {
        out[percent_decode(pair.substr(0, eq))] = percent_decode(pair.substr(eq + 1));
      }
    }
    pos = amp + 1;
  }
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fixture files

void FixtureSpec::validate() const {
  std::set<std::string> uids;
  for (const auto& u : users) {
    if (u.uid.empty()) throw Error(ErrorKind::input_error, "user without uid");
    if (!uids.insert(u.uid).second) {
      throw Error(ErrorKind::input_error, "duplicate user " + u.uid);
    }
    std::set<std::int64_t> ids;
    auto claim = [&](const std::optional<std::int64_t>& id) {
      if (id && !ids.insert(*id).second) {
        throw Error(ErrorKind::input_error,
                    "duplicate file id " + std::to_string(*id) + " for " + u.uid);
      }
    };
    for (const auto& f : u.files) claim(f.file_id);
    for (const auto& t : u.trash) {
      claim(t.file_id);
      const auto suffix = trash_suffix_time(t.trash_name);
      if (!suffix) {
        throw Error(ErrorKind::input_error,
                    "trash name lacks a .d<timestamp> suffix: " + t.trash_name);
      }
      if (t.deletion_time && *t.deletion_time != *suffix) {
        throw Error(ErrorKind::input_error,
                    "deletion time disagrees with trash name " + t.trash_name);
      }
    }
    std::set<std::pair<std::string, std::int64_t>> stamps;
    for (const auto& v : u.versions) {
      const std::string key = v.file_id ? "#" + std::to_string(*v.file_id) : v.path;
      if (!stamps.insert({key, v.timestamp}).second) {
        throw Error(ErrorKind::input_error, "duplicate version timestamp " +
                                                std::to_string(v.timestamp) +
                                                " for " + key);
      }
    }
  }
}

FixtureSpec fixture_from_json(const Json& j) {
  FixtureSpec spec;
  spec.server_version = j.value("server_version", spec.server_version);
  for (const auto& ju : j.at("users")) {
    FixtureUser u;
    u.uid = ju.at("uid").get<std::string>();
    u.display_name = ju.value("display_name", u.uid);
    u.email = opt<std::string>(ju, "email");
    u.admin = ju.value("admin", false);
    u.enabled = ju.value("enabled", true);
    u.groups = ju.value("groups", std::vector<std::string>{});
    u.quota_total = ju.value("quota_total", u.quota_total);
    u.last_login = ju.value("last_login", std::int64_t{0});
    for (const auto& t : ju.value("tokens", Json::array())) {
      u.tokens.push_back(token_from_json(t));
    }
    for (const auto& f : ju.value("files", Json::array())) {
      FixtureFile file;
      file.path = f.at("path").get<std::string>();
      file.is_directory = f.value("is_directory", false) ||
                          (!file.path.empty() && file.path.back() == '/');
      file.content = content_field(f);
      file.file_id = opt<std::int64_t>(f, "file_id");
      file.etag = opt<std::string>(f, "etag");
      file.mtime = opt<std::int64_t>(f, "mtime");
      u.files.push_back(std::move(file));
    }
    for (const auto& t : ju.value("trash", Json::array())) {
      FixtureTrash tr;
      tr.trash_name = t.at("trash_name").get<std::string>();
      tr.original_location = t.value("original_location", strip_trash_suffix(tr.trash_name));
      tr.deletion_time = opt<std::int64_t>(t, "deletion_time");
      tr.content = content_field(t);
      tr.file_id = opt<std::int64_t>(t, "file_id");
      u.trash.push_back(std::move(tr));
    }
    for (const auto& v : ju.value("versions", Json::array())) {
      FixtureVersion ver;
      ver.path = v.value("path", std::string{});
      ver.file_id = opt<std::int64_t>(v, "file_id");
      ver.timestamp = v.at("timestamp").get<std::int64_t>();
      ver.content = content_field(v);
      u.versions.push_back(std::move(ver));
    }
    for (const auto& s : ju.value("shares", Json::array())) {
      u.shares.push_back(share_from_json(s));
    }
    for (const auto& a : ju.value("activities", Json::array())) {
      FixtureActivity act;
      act.activity_id = opt<std::int64_t>(a, "activity_id");
      act.type = a.at("type").get<std::string>();
      act.subject = a.value("subject", std::string{});
      act.path = a.value("path", std::string{});
      act.object_id = opt<std::int64_t>(a, "object_id");
      act.timestamp = a.value("timestamp", std::int64_t{0});
      u.activities.push_back(std::move(act));
    }
    spec.users.push_back(std::move(u));
  }
  spec.validate();
  return spec;
}

FixtureSpec load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::input_error, "cannot read fixture " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::input_error, "fixture " + path.string() + ": " + e.what());
  }
  return fixture_from_json(j);
}

Json to_json(const FixtureSpec& spec) {
  Json j;
  j["server_version"] = spec.server_version;
  Json users = Json::array();
  for (const auto& u : spec.users) {
    Json ju;
    ju["uid"] = u.uid;
    ju["display_name"] = u.display_name;
    put_opt(ju, "email", u.email);
    ju["admin"] = u.admin;
    ju["enabled"] = u.enabled;
    ju["groups"] = u.groups;
    ju["quota_total"] = u.quota_total;
    ju["last_login"] = u.last_login;
    ju["tokens"] = Json::array();
    for (const auto& t : u.tokens) ju["tokens"].push_back(token_to_json(t));
    ju["files"] = Json::array();
    for (const auto& f : u.files) {
      Json jf;
      jf["path"] = f.path;
      if (f.is_directory) {
        jf["is_directory"] = true;
      } else {
        put_content(jf, f.content);
      }
      put_opt(jf, "file_id", f.file_id);
      put_opt(jf, "etag", f.etag);
      put_opt(jf, "mtime", f.mtime);
      ju["files"].push_back(std::move(jf));
    }
    ju["trash"] = Json::array();
    for (const auto& t : u.trash) {
      Json jt;
      jt["trash_name"] = t.trash_name;
      jt["original_location"] = t.original_location;
      put_opt(jt, "deletion_time", t.deletion_time);
      put_content(jt, t.content);
      put_opt(jt, "file_id", t.file_id);
      ju["trash"].push_back(std::move(jt));
    }
    ju["versions"] = Json::array();
    for (const auto& v : u.versions) {
      Json jv;
      if (!v.path.empty()) jv["path"] = v.path;
      put_opt(jv, "file_id", v.file_id);
      jv["timestamp"] = v.timestamp;
      put_content(jv, v.content);
      ju["versions"].push_back(std::move(jv));
    }
    ju["shares"] = Json::array();
    for (const auto& s : u.shares) ju["shares"].push_back(share_to_json(s));
    ju["activities"] = Json::array();
    for (const auto& a : u.activities) {
      Json ja;
      put_opt(ja, "activity_id", a.activity_id);
      ja["type"] = a.type;
      ja["subject"] = a.subject;
      if (!a.path.empty()) ja["path"] = a.path;
      put_opt(ja, "object_id", a.object_id);
      ja["timestamp"] = a.timestamp;
      ju["activities"].push_back(std::move(ja));
    }
    users.push_back(std::move(ju));
  }
  j["users"] = std::move(users);
  return j;
}

// ---------------------------------------------------------------------------
// Mutation scripts

std::string_view to_string(MutationStep::Kind kind) noexcept {
  using K = MutationStep::Kind;
  switch (kind) {
    case K::create: return "create";
    case K::modify: return "modify";
    case K::delete_to_trash: return "delete_to_trash";
    case K::empty_trash: return "empty_trash";
    case K::add_token: return "add_token";
    case K::remove_token: return "remove_token";
    case K::add_share: return "add_share";
  }
  return "unknown";
}

MutationStep mutation_step_from_json(const Json& j) {
  using K = MutationStep::Kind;
  MutationStep step;
  const std::string kind = j.at("kind").get<std::string>();
  bool known = false;
  for (K k : {K::create, K::modify, K::delete_to_trash, K::empty_trash,
              K::add_token, K::remove_token, K::add_share}) {
    if (to_string(k) == kind) {
      step.kind = k;
      known = true;
    }
  }
  if (!known) throw Error(ErrorKind::input_error, "unknown mutation kind " + kind);
  step.at_cycle = opt<int>(j, "at_cycle");
  step.at_time = opt<std::int64_t>(j, "at_time");
  step.user = j.value("user", std::string{});
  step.path = j.value("path", std::string{});
  step.content = content_field(j);
  if (j.contains("token")) step.token = token_from_json(j.at("token"));
  if (j.contains("share")) step.share = share_from_json(j.at("share"));
  return step;
}

std::vector<MutationStep> MutationScript::due_at_cycle(int cycle) const {
  std::vector<MutationStep> out;
  for (const auto& s : steps) {
    if (s.at_cycle && *s.at_cycle == cycle) out.push_back(s);
  }
  return out;
}

std::function<void(int)> MutationScript::hook(MockServer& server) const {
  return [steps = steps, &server](int cycle) {
    for (const auto& s : steps) {
      if (s.at_cycle && *s.at_cycle == cycle) server.apply(s);
    }
  };
}

std::int64_t MethodCounts::count(const std::string& method) const {
  auto it = total.find(method);
  return it == total.end() ? 0 : it->second;
}

std::int64_t MethodCounts::sum() const {
  std::int64_t n = 0;
  for (const auto& [_, c] : total) n += c;
  return n;
}

// ---------------------------------------------------------------------------
// Server

struct MockServer::Impl {
  MockOptions options;
  std::string server_version;

  mutable std::mutex mu;
  std::vector<UserState> users;
  std::mt19937_64 rng;
  std::int64_t next_file_id = 1;
  std::int64_t next_token_id = 1;
  std::int64_t next_share_id = 1;
  std::int64_t next_activity_id = 1;
  std::vector<FaultRule> faults;
  MethodCounts counts;

  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::uint16_t port = 0;
  std::thread accept_thread;
  std::atomic<bool> stopping{false};
  std::mutex conn_mu;
  std::condition_variable conn_cv;
  int active = 0;
  std::set<int> open_fds;

  // -- state helpers (mu held) ----------------------------------------------

  std::int64_t now() const {
    return options.clock ? *options.clock : to_epoch_seconds(now_utc());
  }

  std::string new_etag() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(13, '0');
    for (auto& c : out) c = kHex[rng() % 16];
    return out;
  }

  UserState* find_user(const std::string& uid) {
    if (uid.empty()) return users.empty() ? nullptr : &users.front();
    for (auto& u : users) {
      if (u.profile.uid == uid) return &u;
    }
    return nullptr;
  }

  const UserState* find_user(const std::string& uid) const {
    return const_cast<Impl*>(this)->find_user(uid);
  }

  UserState& user(const std::string& uid) {
    UserState* u = find_user(uid);
    if (u == nullptr) throw Error(ErrorKind::input_error, "unknown user " + uid);
    return *u;
  }

  const UserState& user(const std::string& uid) const {
    return const_cast<Impl*>(this)->user(uid);
  }

  static Node* find_node(Node& root, const std::vector<std::string>& parts) {
    Node* cur = &root;
    for (const auto& p : parts) {
      if (!cur->dir) return nullptr;
      auto it = cur->children.find(p);
      if (it == cur->children.end()) return nullptr;
      cur = &it->second;
    }
    return cur;
  }

  Node make_dir(std::int64_t mtime) {
    Node n;
    n.dir = true;
    n.file_id = next_file_id++;
    n.etag = new_etag();
    n.mtime = mtime;
    return n;
  }

  /// Walks to the parent of `parts`, creating missing directories.
  Node& ensure_parent(Node& root, const std::vector<std::string>& parts,
                      std::int64_t mtime) {
    Node* cur = &root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      auto it = cur->children.find(parts[i]);
      if (it == cur->children.end()) {
        it = cur->children.emplace(parts[i], make_dir(mtime)).first;
      } else if (!it->second.dir) {
        throw Error(ErrorKind::input_error, join_path(parts, i + 1) + " is a file");
      }
      cur = &it->second;
    }
    return *cur;
  }

  /// New ETag and mtime for every ancestor of `parts`, root included.
  void touch_ancestors(Node& root, const std::vector<std::string>& parts,
                       std::int64_t when) {
    Node* cur = &root;
    cur->etag = new_etag();
    cur->mtime = when;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      auto it = cur->children.find(parts[i]);
      if (it == cur->children.end()) return;
      cur = &it->second;
      cur->etag = new_etag();
      cur->mtime = when;
    }
  }

  std::optional<std::int64_t> id_for_path(UserState& u, const std::string& path) {
    Node* n = find_node(u.root, split_path(path));
    if (n != nullptr) return n->file_id;
    for (const auto& t : u.trash) {
      if (t.original_location == path) return t.node.file_id;
    }
    return std::nullopt;
  }

  bool file_id_known(const UserState& u, std::int64_t id) const {
    std::function<bool(const Node&)> search = [&](const Node& n) {
      if (n.file_id == id) return true;
      for (const auto& [_, c] : n.children) {
        if (search(c)) return true;
      }
      return false;
    };
    if (search(u.root)) return true;
    for (const auto& t : u.trash) {
      if (search(t.node)) return true;
    }
    return u.versions.count(id) > 0;
  }

  void add_activity(UserState& u, const std::string& type, const std::string& verb,
                    const std::string& path, std::int64_t object_id,
                    std::int64_t when) {
    Activity a;
    a.id = next_activity_id++;
    a.type = type;
    a.subject = "You " + verb + " " + basename_of(path);
    a.object_name = "/" + path;
    a.object_id = object_id;
    a.timestamp = when;
    u.activities.push_back(std::move(a));
  }

  void seed(const FixtureSpec& spec) {
    spec.validate();
    server_version = spec.server_version;
    std::int64_t max_id = 0;
    for (const auto& u : spec.users) {
      for (const auto& f : u.files) max_id = std::max(max_id, f.file_id.value_or(0));
      for (const auto& t : u.trash) max_id = std::max(max_id, t.file_id.value_or(0));
    }
    next_file_id = max_id + 1;
    const std::int64_t base_time = options.clock.value_or(kDefaultMtime);

    for (const auto& fu : spec.users) {
      UserState u;
      u.profile = fu;
      u.profile.tokens.clear();
      u.profile.files.clear();
      u.profile.trash.clear();
      u.profile.versions.clear();
      u.profile.shares.clear();
      u.profile.activities.clear();
      u.root = make_dir(base_time);

      for (const auto& f : fu.files) {
        const auto parts = split_path(f.path);
        if (parts.empty()) continue;
        const std::int64_t mtime = f.mtime.value_or(base_time);
        Node& parent = ensure_parent(u.root, parts, mtime);
        auto it = parent.children.find(parts.back());
        if (it != parent.children.end()) {
          if (f.is_directory && it->second.dir) {
            if (f.file_id) it->second.file_id = *f.file_id;
            if (f.etag) it->second.etag = *f.etag;
            continue;
          }
          throw Error(ErrorKind::input_error, "duplicate fixture path " + f.path);
        }
        Node n;
        n.dir = f.is_directory;
        n.content = f.is_directory ? std::string{} : f.content;
        n.file_id = f.file_id ? *f.file_id : next_file_id++;
        n.etag = f.etag ? *f.etag : new_etag();
        n.mtime = mtime;
        parent.children.emplace(parts.back(), std::move(n));
      }
      for (const auto& t : fu.trash) {
        TrashItem item;
        item.name = t.trash_name;
        item.original_location = t.original_location;
        item.deletion_time = t.deletion_time.value_or(*trash_suffix_time(t.trash_name));
        item.node.content = t.content;
        item.node.file_id = t.file_id ? *t.file_id : next_file_id++;
        item.node.etag = new_etag();
        item.node.mtime = item.deletion_time;
        u.trash.push_back(std::move(item));
      }
      for (const auto& v : fu.versions) {
        std::optional<std::int64_t> id = v.file_id;
        if (!id) id = id_for_path(u, v.path);
        if (!id) throw Error(ErrorKind::input_error, "version for unknown file " + v.path);
        u.versions[*id][v.timestamp] = {v.content, new_etag()};
      }
      for (const auto& t : fu.tokens) {
        Token tok;
        tok.id = t.id ? *t.id : next_token_id;
        next_token_id = std::max(next_token_id, tok.id) + 1;
        tok.name = t.name;
        tok.type = t.type;
        tok.password = t.password.empty()
                           ? fu.uid + "-token-" + std::to_string(tok.id)
                           : t.password;
        tok.last_activity = t.last_activity;
        u.tokens.push_back(std::move(tok));
      }
      if (u.tokens.empty()) {
        Token tok;
        tok.id = next_token_id++;
        tok.name = "default";
        tok.password = fu.uid + "-token-" + std::to_string(tok.id);
        u.tokens.push_back(std::move(tok));
      }
      for (auto s : fu.shares) {
        s.id = s.id ? *s.id : next_share_id;
        next_share_id = std::max(next_share_id, *s.id) + 1;
        u.shares.push_back(std::move(s));
      }
      for (const auto& a : fu.activities) {
        Activity act;
        act.id = a.activity_id ? *a.activity_id : next_activity_id;
        next_activity_id = std::max(next_activity_id, act.id) + 1;
        act.type = a.type;
        act.subject = a.subject;
        act.object_name = a.path.empty() ? std::string{} : "/" + a.path;
        act.object_id = a.object_id ? *a.object_id : id_for_path(u, a.path).value_or(0);
        act.timestamp = a.timestamp;
        u.activities.push_back(std::move(act));
      }
      users.push_back(std::move(u));
    }
  }

  void apply(const MutationStep& step) {
    using K = MutationStep::Kind;
    std::lock_guard lock(mu);
    UserState& u = user(step.user);
    const std::int64_t when = step.at_time ? *step.at_time : now();
    switch (step.kind) {
      case K::create: {
        const auto parts = split_path(step.path);
        if (parts.empty()) throw Error(ErrorKind::input_error, "create needs a path");
        Node& parent = ensure_parent(u.root, parts, when);
        if (parent.children.count(parts.back()) > 0) {
          throw Error(ErrorKind::input_error, step.path + " already exists");
        }
        Node n;
        n.dir = !step.path.empty() && step.path.back() == '/';
        n.content = n.dir ? std::string{} : step.content;
        n.file_id = next_file_id++;
        n.etag = new_etag();
        n.mtime = when;
        const std::int64_t id = n.file_id;
        parent.children.emplace(parts.back(), std::move(n));
        touch_ancestors(u.root, parts, when);
        add_activity(u, "file_created", "created", join_path(parts), id, when);
        break;
      }
      case K::modify: {
        const auto parts = split_path(step.path);
        Node* n = find_node(u.root, parts);
        if (n == nullptr || n->dir || parts.empty()) {
          throw Error(ErrorKind::input_error, "no file at " + step.path);
        }
        auto& versions = u.versions[n->file_id];
        std::int64_t ts = n->mtime;
        while (versions.count(ts) > 0) ++ts;
        versions[ts] = {n->content, n->etag};
        n->content = step.content;
        std::string etag = new_etag();
        while (etag == n->etag) etag = new_etag();
        n->etag = etag;
        n->mtime = when;
        touch_ancestors(u.root, parts, when);
        add_activity(u, "file_changed", "changed", join_path(parts), n->file_id, when);
        break;
      }
      case K::delete_to_trash: {
        const auto parts = split_path(step.path);
        Node* n = find_node(u.root, parts);
        if (n == nullptr || parts.empty()) {
          throw Error(ErrorKind::input_error, "nothing at " + step.path);
        }
        std::int64_t stamp = when;
        auto taken = [&](std::int64_t s) {
          const std::string name = parts.back() + ".d" + std::to_string(s);
          return std::any_of(u.trash.begin(), u.trash.end(),
                             [&](const TrashItem& t) { return t.name == name; });
        };
        while (taken(stamp)) ++stamp;
        TrashItem item;
        item.name = parts.back() + ".d" + std::to_string(stamp);
        item.original_location = join_path(parts);
        item.deletion_time = stamp;
        item.node = std::move(*n);
        const std::int64_t id = item.node.file_id;
        Node* parent = find_node(u.root, {parts.begin(), parts.end() - 1});
        parent->children.erase(parts.back());
        u.trash.push_back(std::move(item));
        touch_ancestors(u.root, parts, when);
        add_activity(u, "file_deleted", "deleted", join_path(parts), id, when);
        break;
      }
      case K::empty_trash: {
        for (const auto& t : u.trash) u.versions.erase(t.node.file_id);
        u.trash.clear();
        break;
      }
      case K::add_token: {
        Token tok;
        tok.id = step.token.id ? *step.token.id : next_token_id;
        next_token_id = std::max(next_token_id, tok.id) + 1;
        tok.name = step.token.name.empty() ? "token-" + std::to_string(tok.id)
                                           : step.token.name;
        tok.type = step.token.type;
        tok.password = step.token.password.empty()
                           ? u.profile.uid + "-token-" + std::to_string(tok.id)
                           : step.token.password;
        tok.last_activity = step.token.last_activity ? step.token.last_activity : when;
        u.tokens.push_back(std::move(tok));
        break;
      }
      case K::remove_token: {
        auto it = std::find_if(u.tokens.begin(), u.tokens.end(), [&](const Token& t) {
          return step.token.id ? t.id == *step.token.id : t.name == step.token.name;
        });
        if (it == u.tokens.end()) throw Error(ErrorKind::input_error, "no such token");
        u.tokens.erase(it);
        break;
      }
      case K::add_share: {
        FixtureShare s = step.share;
        s.id = s.id ? *s.id : next_share_id;
        next_share_id = std::max(next_share_id, *s.id) + 1;
        if (s.stime == 0) s.stime = when;
        u.shares.push_back(std::move(s));
        break;
      }
    }
  }

  // -- responses -------------------------------------------------------------

  static Response make(int status, std::string body, std::string content_type) {
    Response res;
    res.result(static_cast<unsigned>(status));
    res.set(http::field::server, "ncf-mock");
    if (!content_type.empty()) res.set(http::field::content_type, content_type);
    res.body() = std::move(body);
    return res;
  }

  static Response ocs_reply(bool v1, int http_status, int code,
                            const std::string& message, Json data) {
    Json doc;
    doc["ocs"]["meta"] = {{"status", code == 100 || code == 200 ? "ok" : "failure"},
                          {"statuscode", code},
                          {"message", message}};
    doc["ocs"]["data"] = std::move(data);
    (void)v1;
    return make(http_status, doc.dump(), "application/json; charset=utf-8");
  }

  static Response ocs_ok(bool v1, Json data) {
    return ocs_reply(v1, 200, v1 ? 100 : 200, "OK", std::move(data));
  }

  /// v1 reports failures in the envelope only; v2 mirrors them in HTTP.
  static Response ocs_fail(bool v1, int code, const std::string& message) {
    int http_status = 200;
    if (!v1) http_status = code == 997 ? 401 : (code == 998 ? 404 : code);
    return ocs_reply(v1, http_status, code, message, Json::array());
  }

  Json user_json(const UserState& u) const {
    std::uint64_t used = u.root.size();
    Json q;
    q["free"] = u.profile.quota_total - static_cast<std::int64_t>(used);
    q["used"] = used;
    q["total"] = u.profile.quota_total;
    q["relative"] = u.profile.quota_total > 0
                        ? std::round(static_cast<double>(used) * 10000.0 /
                                     static_cast<double>(u.profile.quota_total)) /
                              100.0
                        : 0.0;
    q["quota"] = u.profile.quota_total;
    Json j;
    j["enabled"] = u.profile.enabled;
    j["id"] = u.profile.uid;
    j["lastLogin"] = u.profile.last_login;
    j["quota"] = q;
    j["email"] = u.profile.email ? Json(*u.profile.email) : Json(nullptr);
    j["displayname"] = u.profile.display_name;
    j["display-name"] = u.profile.display_name;
    j["groups"] = u.profile.groups;
    j["backend"] = "Database";
    return j;
  }

  Json share_json(const UserState& owner, const FixtureShare& s) {
    Json j;
    j["id"] = std::to_string(*s.id);
    j["share_type"] = s.share_type;
    j["uid_owner"] = owner.profile.uid;
    j["displayname_owner"] = owner.profile.display_name;
    j["permissions"] = s.permissions;
    j["stime"] = s.stime;
    j["expiration"] = s.expiration ? Json(*s.expiration) : Json(nullptr);
    j["token"] = s.token ? Json(*s.token) : Json(nullptr);
    j["path"] = "/" + join_path(split_path(s.path));
    Node* n = find_node(const_cast<Node&>(owner.root), split_path(s.path));
    j["item_type"] = n != nullptr && n->dir ? "folder" : "file";
    j["file_source"] = n != nullptr ? n->file_id : 0;
    j["file_target"] = "/" + basename_of(s.path);
    j["share_with"] = s.share_with ? Json(*s.share_with) : Json(nullptr);
    j["share_with_displayname"] = s.share_with ? Json(*s.share_with) : Json(nullptr);
    j["note"] = s.note.value_or("");
    if (s.password) j["password"] = *s.password;
    if (s.share_type == 3 && s.token) {
      j["url"] = base_url() + "/index.php/s/" + *s.token;
    }
    return j;
  }

  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port) + options.url_prefix;
  }

  Response handle_ocs(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query,
                      const Request& req, UserState& self, const Token& token) {
    const bool v1 = starts_with(path, "/ocs/v1.php/");
    if (!v1 && !starts_with(path, "/ocs/v2.php/")) {
      return make(404, "not found", "text/plain");
    }
    if (req["OCS-APIRequest"] != "true") {
      return make(412, R"({"message":"CSRF check failed"})", "application/json");
    }
    auto fmt = query.find("format");
    if (fmt == query.end() || fmt->second != "json") {
      return make(406, "only format=json is served", "text/plain");
    }
    const std::string rest = path.substr(std::string("/ocs/v1.php").size());
    auto param = [&](const char* key) -> std::optional<std::string> {
      auto it = query.find(key);
      if (it == query.end()) return std::nullopt;
      return it->second;
    };

    if (method == "DELETE") {
      if (rest == "/core/apppassword") {
        std::erase_if(self.tokens, [&](const Token& t) { return t.id == token.id; });
        return ocs_ok(v1, Json::array());
      }
      if (starts_with(rest, "/core/apptokens/")) {
        const std::string id = rest.substr(std::string("/core/apptokens/").size());
        auto it = std::find_if(self.tokens.begin(), self.tokens.end(),
                               [&](const Token& t) { return std::to_string(t.id) == id; });
        if (it == self.tokens.end()) return ocs_fail(v1, 404, "token not found");
        self.tokens.erase(it);
        return ocs_ok(v1, Json::array());
      }
      return make(405, "method not allowed", "text/plain");
    }
    if (method != "GET") return make(405, "method not allowed", "text/plain");

    if (rest == "/cloud/user") return ocs_ok(v1, user_json(self));
    if (rest == "/cloud/users") {
      if (!self.profile.admin) return ocs_fail(v1, 997, "Logged in user must be an admin");
      const std::string search = param("search").value_or("");
      Json list = Json::array();
      for (const auto& u : users) {
        if (u.profile.uid.find(search) != std::string::npos) list.push_back(u.profile.uid);
      }
      return ocs_ok(v1, {{"users", list}});
    }
    if (rest == "/cloud/users/details") {
      if (!self.profile.admin) return ocs_fail(v1, 403, "Logged in user must be an admin");
      std::string search = param("search").value_or("");
      auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), ::tolower);
        return s;
      };
      search = lower(search);
      Json map = Json::object();
      for (const auto& u : users) {
        if (lower(u.profile.uid).find(search) != std::string::npos ||
            lower(u.profile.display_name).find(search) != std::string::npos) {
          map[u.profile.uid] = user_json(u);
        }
      }
      return ocs_ok(v1, {{"users", map}});
    }
    if (starts_with(rest, "/cloud/users/")) {
      const std::string uid = rest.substr(std::string("/cloud/users/").size());
      const UserState* target = find_user(uid);
      if (uid.empty() || target == nullptr) {
        return ocs_fail(v1, v1 ? 998 : 404, "User does not exist");
      }
      if (!self.profile.admin && target != &self) {
        return ocs_fail(v1, 403, "Logged in user must be an admin");
      }
      return ocs_ok(v1, user_json(*target));
    }
    if (rest == "/cloud/capabilities") {
      int major = 0, minor = 0, micro = 0;
      std::sscanf(server_version.c_str(), "%d.%d.%d", &major, &minor, &micro);
      Json data;
      data["version"] = {{"major", major},
                         {"minor", minor},
                         {"micro", micro},
                         {"string", server_version},
                         {"edition", ""},
                         {"extendedSupport", false}};
      data["capabilities"] = {
          {"core", {{"pollinterval", 60}, {"webdav-root", "remote.php/webdav"}}},
          {"files", {{"bigfilechunking", true}, {"undelete", true}, {"versioning", true}}},
          {"activity", {{"apiv2", {"filters", "filters-api", "previews", "rich-strings"}}}},
          {"files_sharing", {{"api_enabled", true}, {"public", {{"enabled", true}}}}}};
      return ocs_ok(v1, data);
    }
    if (rest == "/apps/activity/api/v2/activity/filter") {
      if (param("object_type").value_or("") != "files") {
        return ocs_fail(v1, 404, "Filter not found");
      }
      std::int64_t object_id = 0;
      std::size_t limit = 50;
      std::optional<std::int64_t> since;
      try {
        object_id = std::stoll(param("object_id").value_or("0"));
        limit = std::stoul(param("limit").value_or("50"));
        if (auto s = param("since")) since = std::stoll(*s);
      } catch (const std::exception&) {
        return ocs_fail(v1, 400, "invalid parameter");
      }
      std::vector<const Activity*> matching;
      for (const auto& a : self.activities) {
        if (a.object_id == object_id && (!since || a.id < *since)) matching.push_back(&a);
      }
      std::sort(matching.begin(), matching.end(),
                [](const Activity* a, const Activity* b) { return a->id > b->id; });
      if (matching.size() > limit) matching.resize(limit);
      if (matching.empty()) return make(304, "", "");
      Json list = Json::array();
      for (const Activity* a : matching) {
        list.push_back({{"activity_id", a->id},
                        {"app", "files"},
                        {"type", a->type},
                        {"user", self.profile.uid},
                        {"affecteduser", self.profile.uid},
                        {"subject", a->subject},
                        {"message", ""},
                        {"object_type", "files"},
                        {"object_id", a->object_id},
                        {"object_name", a->object_name},
                        {"objects", {{std::to_string(a->object_id), a->object_name}}},
                        {"datetime", format_epoch_seconds(a->timestamp)},
                        {"link", ""},
                        {"icon", ""}});
      }
      Response res = ocs_ok(v1, list);
      res.set("X-Activity-Last-Given", std::to_string(matching.back()->id));
      return res;
    }
    if (rest == "/apps/files_sharing/api/v1/shares") {
      Json list = Json::array();
      if (param("shared_with_me").value_or("") == "true") {
        for (auto& owner : users) {
          for (const auto& s : owner.shares) {
            if (s.share_with && *s.share_with == self.profile.uid) {
              list.push_back(share_json(owner, s));
            }
          }
        }
        return ocs_ok(v1, list);
      }
      if (auto p = param("path")) {
        const auto parts = split_path(*p);
        Node* n = find_node(self.root, parts);
        if (n == nullptr) {
          return ocs_fail(v1, 404, "Wrong path, file/folder does not exist");
        }
        const bool subfiles = param("subfiles").value_or("") == "true";
        if (subfiles && !n->dir) return ocs_fail(v1, 400, "Not a directory");
        const std::string want = join_path(parts);
        for (const auto& s : self.shares) {
          auto sp = split_path(s.path);
          const bool hit = subfiles ? (sp.size() == parts.size() + 1 &&
                                       join_path(sp, parts.size()) == want)
                                    : join_path(sp) == want;
          if (hit) list.push_back(share_json(self, s));
        }
        return ocs_ok(v1, list);
      }
      for (const auto& s : self.shares) list.push_back(share_json(self, s));
      return ocs_ok(v1, list);
    }
    if (rest == "/core/apptokens") {
      Json list = Json::array();
      for (const auto& t : self.tokens) {
        list.push_back({{"id", t.id},
                        {"name", t.name},
                        {"lastActivity", t.last_activity},
                        {"type", t.type},
                        {"scope", {{"filesystem", true}}},
                        {"current", t.id == token.id},
                        {"canDelete", t.id != token.id},
                        {"canRename", true}});
      }
      return ocs_ok(v1, list);
    }
    return ocs_fail(v1, v1 ? 998 : 404, "Invalid query");
  }

  // WebDAV -------------------------------------------------------------------

  static std::map<PropertyName, std::string> node_props(const Node& n,
                                                        const std::string& name,
                                                        const std::string& owner) {
    std::map<PropertyName, std::string> p;
    p[dav_prop("getlastmodified")] = format_http_date(n.mtime);
    p[dav_prop("getetag")] = "\"" + n.etag + "\"";
    p[dav_prop("resourcetype")] = "";
    p[oc_prop("fileid")] = std::to_string(n.file_id);
    p[oc_prop("id")] = std::to_string(n.file_id) + "ocmock";
    p[oc_prop("size")] = std::to_string(n.size());
    p[oc_prop("owner-id")] = owner;
    if (n.dir) {
      p[oc_prop("permissions")] = "RGDNVCK";
    } else {
      p[oc_prop("permissions")] = "RGDNVW";
      p[dav_prop("getcontentlength")] = std::to_string(n.content.size());
      p[dav_prop("getcontenttype")] = content_type_for(name);
    }
    return p;
  }

  static DavResponse select(const std::string& href,
                            std::map<PropertyName, std::string> available,
                            bool collection,
                            const std::vector<PropertyName>& requested) {
    DavResponse r;
    r.href = href;
    r.is_collection = collection;
    if (requested.empty()) {
      r.properties = std::move(available);
      return r;
    }
    for (const auto& name : requested) {
      auto it = available.find(name);
      if (it != available.end()) {
        r.properties[name] = it->second;
      } else if (std::find(r.missing.begin(), r.missing.end(), name) == r.missing.end()) {
        r.missing.push_back(name);
      }
    }
    return r;
  }

  static std::optional<int> depth_of(const Request& req) {
    const auto value = std::string(req["Depth"]);
    if (value == "0") return 0;
    if (value == "1") return 1;
    return std::nullopt;
  }

  Response multistatus(const std::vector<DavResponse>& responses) {
    return make(207, serialize_multistatus(responses), "application/xml; charset=utf-8");
  }

  Response file_body(const std::string& method, const std::string& content,
                     const std::string& etag, std::int64_t mtime,
                     const std::string& name) {
    Response res = make(200, method == "HEAD" ? std::string{} : content,
                        content_type_for(name));
    res.set(http::field::etag, "\"" + etag + "\"");
    res.set(http::field::last_modified, format_http_date(mtime));
    if (method == "HEAD") res.content_length(content.size());
    return res;
  }

  Response dav_error(int status, const std::string& message) {
    return make(status,
                "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<d:error xmlns:d=\"DAV:\" "
                "xmlns:s=\"http://sabredav.org/ns\"><s:message>" +
                    xml_escape(message) + "</s:message></d:error>\n",
                "application/xml; charset=utf-8");
  }

  Response handle_dav(const std::string& method, const std::string& path,
                      const Request& req, UserState& self) {
    const auto parts = split_path(path.substr(std::string("/remote.php/dav/").size()));
    if (parts.size() < 2) return dav_error(404, "unknown collection");
    if (parts[1] != self.profile.uid) return dav_error(403, "not your tree");
    const bool propfind = method == "PROPFIND";
    const bool read = method == "GET" || method == "HEAD";
    if (!propfind && !read) return dav_error(405, "method not allowed");

    std::vector<PropertyName> requested;
    std::optional<int> depth;
    if (propfind) {
      depth = depth_of(req);
      if (!depth) return dav_error(403, "depth must be 0 or 1");
      try {
        requested = parse_propfind_body(req.body());
      } catch (const Error&) {
        return dav_error(400, "malformed propfind body");
      }
    }
    const std::string dav_base = options.url_prefix + "/remote.php/dav/";
    const std::string& uid = self.profile.uid;

    if (parts[0] == "files") {
      const std::vector<std::string> rel(parts.begin() + 2, parts.end());
      Node* n = find_node(self.root, rel);
      if (n == nullptr) return dav_error(404, "file not found");
      const std::string name = rel.empty() ? uid : rel.back();
      if (read) {
        if (n->dir) return dav_error(405, "cannot GET a collection");
        return file_body(method, n->content, n->etag, n->mtime, name);
      }
      auto href_for = [&](const std::string& rel_path, bool dir) {
        std::string h = percent_encode_path(dav_base + "files/" + uid + "/" + rel_path);
        if (dir && h.back() != '/') h += '/';
        return h;
      };
      const std::string self_rel = join_path(rel);
      std::vector<DavResponse> out;
      out.push_back(select(href_for(self_rel, n->dir), node_props(*n, name, uid),
                           n->dir, requested));
      if (*depth == 1 && n->dir) {
        for (const auto& [child_name, child] : n->children) {
          const std::string child_rel =
              self_rel.empty() ? child_name : self_rel + "/" + child_name;
          out.push_back(select(href_for(child_rel, child.dir),
                               node_props(child, child_name, uid), child.dir, requested));
        }
      }
      return multistatus(out);
    }

    if (parts[0] == "trashbin") {
      if (parts.size() < 3 || parts[2] != "trash") return dav_error(404, "not found");
      const std::string trash_href = percent_encode_path(dav_base + "trashbin/" + uid + "/trash/");
      if (parts.size() == 3) {
        if (read) return dav_error(405, "cannot GET a collection");
        std::vector<DavResponse> out;
        std::map<PropertyName, std::string> self_props;
        self_props[dav_prop("resourcetype")] = "";
        out.push_back(select(trash_href, self_props, true, requested));
        if (*depth == 1) {
          for (const auto& t : self.trash) {
            auto props = node_props(t.node, strip_trash_suffix(t.name), uid);
            props[nc_prop("trashbin-filename")] = strip_trash_suffix(t.name);
            props[nc_prop("trashbin-original-location")] = t.original_location;
            props[nc_prop("trashbin-deletion-time")] = std::to_string(t.deletion_time);
            std::string h = trash_href + percent_encode_path(t.name);
            if (t.node.dir) h += '/';
            out.push_back(select(h, props, t.node.dir, requested));
          }
        }
        return multistatus(out);
      }
      auto it = std::find_if(self.trash.begin(), self.trash.end(),
                             [&](const TrashItem& t) { return t.name == parts[3]; });
      if (it == self.trash.end()) return dav_error(404, "trash item not found");
      const std::vector<std::string> rel(parts.begin() + 4, parts.end());
      Node* n = find_node(it->node, rel);
      if (n == nullptr) return dav_error(404, "trash item not found");
      const std::string name = rel.empty() ? strip_trash_suffix(it->name) : rel.back();
      if (read) {
        if (n->dir) return dav_error(405, "cannot GET a collection");
        return file_body(method, n->content, n->etag, n->mtime, name);
      }
      const std::vector<std::string> base_parts(parts.begin() + 3, parts.end());
      auto href_for = [&](const std::string& sub, bool dir) {
        std::string h = trash_href + percent_encode_path(sub);
        if (dir) h += '/';
        return h;
      };
      std::vector<DavResponse> out;
      auto props = node_props(*n, name, uid);
      if (rel.empty()) {
        props[nc_prop("trashbin-filename")] = strip_trash_suffix(it->name);
        props[nc_prop("trashbin-original-location")] = it->original_location;
        props[nc_prop("trashbin-deletion-time")] = std::to_string(it->deletion_time);
      }
      out.push_back(select(href_for(join_path(base_parts), n->dir), props, n->dir, requested));
      if (*depth == 1 && n->dir) {
        for (const auto& [child_name, child] : n->children) {
          out.push_back(select(href_for(join_path(base_parts) + "/" + child_name, child.dir),
                               node_props(child, child_name, uid), child.dir, requested));
        }
      }
      return multistatus(out);
    }

    if (parts[0] == "versions") {
      if (parts.size() < 4 || parts[2] != "versions") return dav_error(404, "not found");
      std::int64_t id = 0;
      try {
        std::size_t used = 0;
        id = std::stoll(parts[3], &used);
        if (used != parts[3].size()) throw std::invalid_argument("id");
      } catch (const std::exception&) {
        return dav_error(404, "file not found");
      }
      if (!file_id_known(self, id)) return dav_error(404, "file not found");
      const std::string base = percent_encode_path(dav_base + "versions/" + uid +
                                                   "/versions/" + parts[3] + "/");
      auto vit = self.versions.find(id);
      static const std::map<std::int64_t, VersionBlob> kNone;
      const auto& versions = vit == self.versions.end() ? kNone : vit->second;
      auto version_props = [&](std::int64_t ts, const VersionBlob& v) {
        std::map<PropertyName, std::string> p;
        p[dav_prop("getlastmodified")] = format_http_date(ts);
        p[dav_prop("getetag")] = "\"" + v.etag + "\"";
        p[dav_prop("getcontentlength")] = std::to_string(v.content.size());
        p[dav_prop("getcontenttype")] = "application/octet-stream";
        p[dav_prop("resourcetype")] = "";
        return p;
      };
      if (parts.size() == 4) {
        if (read) return dav_error(405, "cannot GET a collection");
        std::vector<DavResponse> out;
        std::map<PropertyName, std::string> self_props;
        self_props[dav_prop("resourcetype")] = "";
        out.push_back(select(base, self_props, true, requested));
        if (*depth == 1) {
          for (auto it = versions.rbegin(); it != versions.rend(); ++it) {
            out.push_back(select(base + std::to_string(it->first),
                                 version_props(it->first, it->second), false, requested));
          }
        }
        return multistatus(out);
      }
      if (parts.size() != 5) return dav_error(404, "version not found");
      std::int64_t ts = 0;
      try {
        ts = std::stoll(parts[4]);
      } catch (const std::exception&) {
        return dav_error(404, "version not found");
      }
      auto it = versions.find(ts);
      if (it == versions.end()) return dav_error(404, "version not found");
      if (read) return file_body(method, it->second.content, it->second.etag, ts, parts[4]);
      return multistatus({select(base + parts[4], version_props(ts, it->second), false,
                                 requested)});
    }
    return dav_error(404, "unknown collection");
  }

  // -- dispatch ---------------------------------------------------------------

  Response handle(const Request& req) {
    std::lock_guard lock(mu);
    const std::string method(req.method_string());
    const std::string target(req.target());
    const auto qpos = target.find('?');
    std::string path = percent_decode(target.substr(0, qpos));
    const auto query = qpos == std::string::npos
                           ? std::map<std::string, std::string>{}
                           : parse_query(std::string_view(target).substr(qpos + 1));
    ++counts.total[method];

    UserState* self = nullptr;
    Token* token = nullptr;
    const std::string auth(req[http::field::authorization]);
    if (starts_with(auth, "Basic ")) {
      if (auto decoded = base64_decode(auth.substr(6))) {
        const auto colon = decoded->find(':');
        if (colon != std::string::npos) {
          UserState* u = find_user(decoded->substr(0, colon));
          if (u != nullptr && !decoded->substr(0, colon).empty()) {
            const std::string pw = decoded->substr(colon + 1);
            for (auto& t : u->tokens) {
              if (t.password == pw) {
                self = u;
                token = &t;
              }
            }
          }
        }
      }
    }
    if (token == nullptr) {
      ++counts.by_token["unauthenticated"][method];
      const bool ocs = path.find("/ocs/") != std::string::npos;
      Response res = ocs ? ocs_reply(false, 401, 997, "Current user is not logged in",
                                     Json::array())
                         : dav_error(401, "No public access to this resource.");
      res.set(http::field::www_authenticate, "Basic realm=\"Nextcloud\", charset=\"UTF-8\"");
      return res;
    }
    ++counts.by_token[self->profile.uid + "/" + token->name][method];
    token->last_activity = now();
    const Token token_copy = *token;

    if (!options.url_prefix.empty()) {
      if (!starts_with(path, options.url_prefix + "/")) return make(404, "not found", "text/plain");
      path = path.substr(options.url_prefix.size());
    }
    for (auto& rule : faults) {
      if (rule.remaining == 0) continue;
      if (!rule.method.empty() && rule.method != method) continue;
      if (path.find(rule.path_contains) == std::string::npos) continue;
      if (rule.remaining > 0) --rule.remaining;
      return make(rule.status, "injected fault", "text/plain");
    }
    try {
      if (starts_with(path, "/ocs/")) {
        return handle_ocs(method, path, query, req, *self, token_copy);
      }
      if (starts_with(path, "/remote.php/dav/")) return handle_dav(method, path, req, *self);
    } catch (const Error& e) {
      return make(400, e.what(), "text/plain");
    }
    return make(404, "not found", "text/plain");
  }

  // -- networking -------------------------------------------------------------

  void serve_connection(tcp::socket sock) {
    const int fd = sock.native_handle();
    beast::error_code ec;
    beast::flat_buffer buffer;
    Request req;
    http::read(sock, buffer, req, ec);
    if (!ec) {
      Response res = handle(req);
      res.set(http::field::connection, "close");
      res.version(req.version());
      if (req.method() != http::verb::head) res.prepare_payload();
      http::write(sock, res, ec);
    }
    sock.shutdown(tcp::socket::shutdown_both, ec);
    {
      std::lock_guard lock(conn_mu);
      open_fds.erase(fd);
    }
    sock.close(ec);
    {
      std::lock_guard lock(conn_mu);
      --active;
    }
    conn_cv.notify_all();
  }

  void accept_loop() {
    while (!stopping) {
      tcp::socket sock(ioc);
      beast::error_code ec;
      acceptor.accept(sock, ec);
      if (stopping) break;
      if (ec) continue;
      {
        std::lock_guard lock(conn_mu);
        ++active;
        open_fds.insert(sock.native_handle());
      }
      std::thread([this, s = std::move(sock)]() mutable {
        serve_connection(std::move(s));
      }).detach();
    }
  }

  void start() {
    beast::error_code ec;
    const tcp::endpoint ep(net::ip::make_address("127.0.0.1"), 0);
    acceptor.open(ep.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(ep, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error(ErrorKind::bind_failure, "mock bind failed: " + ec.message());
    port = acceptor.local_endpoint().port();
    accept_thread = std::thread([this] { accept_loop(); });
  }

  void stop() {
    if (stopping.exchange(true)) return;
    {
      beast::error_code ec;
      tcp::socket wake(ioc);
      wake.connect({net::ip::make_address("127.0.0.1"), port}, ec);
    }
    if (accept_thread.joinable()) accept_thread.join();
    beast::error_code ec;
    acceptor.close(ec);
    std::unique_lock lock(conn_mu);
    for (int fd : open_fds) ::shutdown(fd, SHUT_RDWR);
    conn_cv.wait(lock, [this] { return active == 0; });
  }
};

MockServer::MockServer(const FixtureSpec& spec, MockOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!options.url_prefix.empty()) {
    if (options.url_prefix.front() != '/') options.url_prefix.insert(0, "/");
    while (options.url_prefix.size() > 1 && options.url_prefix.back() == '/') {
      options.url_prefix.pop_back();
    }
  }
  impl_->options = options;
  impl_->rng.seed(options.seed);
  impl_->seed(spec);
  impl_->start();
}

MockServer::~MockServer() { impl_->stop(); }

std::uint16_t MockServer::port() const noexcept { return impl_->port; }

std::string MockServer::base_url() const { return impl_->base_url(); }

Credentials MockServer::credentials(const std::string& uid,
                                    const std::string& token_name) const {
  std::lock_guard lock(impl_->mu);
  const UserState& u = impl_->user(uid);
  for (const auto& t : u.tokens) {
    if (token_name.empty() || t.name == token_name) {
      return Credentials{impl_->base_url(), u.profile.uid, t.password};
    }
  }
  throw Error(ErrorKind::input_error, "no token named " + token_name);
}

void MockServer::stop() { impl_->stop(); }

void MockServer::apply(const MutationStep& step) { impl_->apply(step); }

void MockServer::set_clock(std::optional<std::int64_t> epoch_seconds) {
  std::lock_guard lock(impl_->mu);
  impl_->options.clock = epoch_seconds;
}

void MockServer::inject_fault(FaultRule rule) {
  std::lock_guard lock(impl_->mu);
  impl_->faults.push_back(std::move(rule));
}

void MockServer::clear_faults() {
  std::lock_guard lock(impl_->mu);
  impl_->faults.clear();
}

MethodCounts MockServer::method_counts() const {
  std::lock_guard lock(impl_->mu);
  return impl_->counts;
}

void MockServer::reset_counts() {
  std::lock_guard lock(impl_->mu);
  impl_->counts = {};
}

namespace {

void collect_paths(const Node& n, const std::string& prefix, bool dirs,
                   std::vector<std::string>& out) {
  for (const auto& [name, child] : n.children) {
    const std::string p = prefix.empty() ? name : prefix + "/" + name;
    if (child.dir == dirs) out.push_back(p);
    if (child.dir) collect_paths(child, p, dirs, out);
  }
}

}  // namespace

std::vector<std::string> MockServer::file_paths(const std::string& uid) const {
  std::lock_guard lock(impl_->mu);
  std::vector<std::string> out;
  collect_paths(impl_->user(uid).root, "", false, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> MockServer::directory_paths(const std::string& uid) const {
  std::lock_guard lock(impl_->mu);
  std::vector<std::string> out;
  collect_paths(impl_->user(uid).root, "", true, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::string> MockServer::file_content(const std::string& path,
                                                    const std::string& uid) const {
  std::lock_guard lock(impl_->mu);
  auto& u = const_cast<UserState&>(impl_->user(uid));
  const Node* n = Impl::find_node(u.root, split_path(path));
  if (n == nullptr || n->dir) return std::nullopt;
  return n->content;
}

std::optional<std::string> MockServer::etag(const std::string& path,
                                            const std::string& uid) const {
  std::lock_guard lock(impl_->mu);
  auto& u = const_cast<UserState&>(impl_->user(uid));
  const Node* n = Impl::find_node(u.root, split_path(path));
  if (n == nullptr) return std::nullopt;
  return n->etag;
}

std::optional<std::int64_t> MockServer::file_id(const std::string& path,
                                                const std::string& uid) const {
  std::lock_guard lock(impl_->mu);
  auto& u = const_cast<UserState&>(impl_->user(uid));
  const Node* n = Impl::find_node(u.root, split_path(path));
  if (n == nullptr) return std::nullopt;
  return n->file_id;
}

std::vector<TrashView> MockServer::trash(const std::string& uid) const {
  std::lock_guard lock(impl_->mu);
  std::vector<TrashView> out;
  for (const auto& t : impl_->user(uid).trash) {
    out.push_back({t.name, t.original_location, t.deletion_time, t.node.file_id,
                   t.node.dir, t.node.content});
  }
  return out;
}

std::vector<VersionView> MockServer::versions(const std::string& uid) const {
  std::lock_guard lock(impl_->mu);
  auto& u = const_cast<UserState&>(impl_->user(uid));
  std::map<std::int64_t, std::string> paths;
  std::function<void(const Node&, const std::string&)> index =
      [&](const Node& n, const std::string& prefix) {
        for (const auto& [name, c] : n.children) {
          const std::string p = prefix.empty() ? name : prefix + "/" + name;
          paths[c.file_id] = p;
          index(c, p);
        }
      };
  index(u.root, "");
  std::vector<VersionView> out;
  for (const auto& [id, stamps] : u.versions) {
    for (const auto& [ts, blob] : stamps) {
      out.push_back({paths.count(id) ? paths[id] : std::string{}, id, ts, blob.content});
    }
  }
  return out;
}

std::vector<std::int64_t> MockServer::token_ids(const std::string& uid) const {
  std::lock_guard lock(impl_->mu);
  std::vector<std::int64_t> out;
  for (const auto& t : impl_->user(uid).tokens) out.push_back(t.id);
  return out;
}

std::vector<std::int64_t> MockServer::share_ids(const std::string& uid) const {
  std::lock_guard lock(impl_->mu);
  std::vector<std::int64_t> out;
  for (const auto& s : impl_->user(uid).shares) out.push_back(*s.id);
  return out;
}

}  // namespace ncf::mock
