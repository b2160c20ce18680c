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

#include "ncf/cli.hpp"

#include <sys/stat.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "ncf/acquisition.hpp"
#include "ncf/digest.hpp"
#include "ncf/monitor.hpp"
#include "ncf/ocs_client.hpp"
#include "ncf/sessions.hpp"
#include "ncf/timeutil.hpp"
#include "ncf/transport.hpp"
#include "ncf/webdav_client.hpp"

namespace ncf::cli {
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::auth_failed:
    case ErrorKind::forbidden:
      return kExitAuth;
    case ErrorKind::not_found:
    case ErrorKind::manifest_missing:
      return kExitNotFound;
    case ErrorKind::is_directory:
      return kExitWrongKind;
    case ErrorKind::partial_failure:
      return kExitPartial;
    default:
      return kExitUsage;
  }
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_interrupt(int) { g_stop = true; }

struct Options {
  std::string url;
  std::string user;
  std::string credential_file;
  std::string format = "text";
  int timeout = 30;
};

bool machine(const Options& o) { return o.format == "machine"; }

std::map<std::string, std::string> read_credential_file(const fs::path& path) {
  struct stat st {};
  if (::stat(path.c_str(), &st) != 0) {
    throw Error(ErrorKind::invalid_credentials,
                "credential file not found: " + path.string());
  }
  if ((st.st_mode & 077) != 0) {
    throw Error(ErrorKind::invalid_credentials,
                "credential file " + path.string() +
                    " must not be accessible by group or others (chmod 600)");
  }
  std::ifstream in(path);
  std::map<std::string, std::string> values;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    values[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return values;
}

Credentials resolve_credentials(const Options& o, const EnvLookup& env) {
  std::map<std::string, std::string> file;
  std::string cred_path = o.credential_file;
  if (cred_path.empty()) cred_path = env(kEnvCredentialFile).value_or("");
  if (!cred_path.empty()) file = read_credential_file(cred_path);
  auto pick = [&](const std::string& flag, const char* name) {
    if (!flag.empty()) return flag;
    if (auto v = env(name); v && !v->empty()) return *v;
    auto it = file.find(name);
    return it == file.end() ? std::string{} : it->second;
  };
  Credentials c;
  c.base_url = pick(o.url, kEnvUrl);
  c.username = pick(o.user, kEnvUser);
  c.app_password = pick({}, kEnvPassword);
  if (c.base_url.empty()) {
    throw Error(ErrorKind::invalid_credentials, "no server URL (--url or NC_URL)");
  }
  if (c.username.empty()) {
    throw Error(ErrorKind::invalid_credentials, "no username (--user or NC_USER)");
  }
  if (c.app_password.empty()) {
    throw Error(ErrorKind::invalid_credentials,
                "no app password (NC_APP_PASSWORD or a credential file)");
  }
  c.validate();
  return c;
}

std::string when(std::optional<std::int64_t> epoch) {
  return epoch ? format_epoch_seconds(*epoch) : std::string("-");
}

void emit(std::ostream& out, const Json& j) { out << canonical_line(j); }

std::string listing_line(bool deleted, bool dir, std::int64_t file_id,
                         std::uint64_t size, std::optional<std::int64_t> mtime,
                         const std::string& path) {
  std::ostringstream line;
  line << (deleted ? "* " : "  ") << (dir ? "d/d" : "r/r") << ' ' << std::setw(10)
       << file_id << ' ' << std::setw(12) << size << ' ' << std::left << std::setw(20)
       << when(mtime) << std::right << ' ' << path << (dir ? "/" : "");
  return line.str();
}

std::string parent_of(const std::string& path) {
  const auto pos = path.rfind('/');
  return pos == std::string::npos ? std::string{} : path.substr(0, pos);
}

bool lexically_within(const std::string& path, const std::string& dir) {
  if (dir.empty()) return true;
  return path.size() > dir.size() && path.compare(0, dir.size(), dir) == 0 &&
         path[dir.size()] == '/';
}

std::string normalize_rel(std::string p) {
  while (!p.empty() && p.front() == '/') p.erase(p.begin());
  while (!p.empty() && p.back() == '/') p.pop_back();
  return p;
}

/// Everything a subcommand handler needs.
struct Context {
  const Options& opts;
  const EnvLookup& env;
  std::ostream& out;
  std::ostream& err;
  std::unique_ptr<Transport> transport;

  Transport& t() {
    if (!transport) {
      TransportOptions to;
      to.timeout = std::chrono::seconds{opts.timeout};
      transport = std::make_unique<Transport>(resolve_credentials(opts, env), to);
    }
    return *transport;
  }
};

// -- sleuthkit-style tools ---------------------------------------------------

int cmd_fsstat(Context& c) {
  OcsClient ocs(c.t());
  const ServerCapabilities caps = ocs.get_capabilities();
  std::vector<std::string> users;
  std::optional<std::string> notice;
  try {
    users = ocs.list_users();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::forbidden) throw;
    users = {ocs.get_current_user().uid};
    notice = "user listing not permitted for this account; showing the authenticated user only";
  }
  if (machine(c.opts)) {
    Json j;
    j["capabilities"] = to_json(caps);
    j["users"] = users;
    j["notice"] = notice ? Json(*notice) : Json(nullptr);
    emit(c.out, j);
  } else {
    c.out << "Server version: " << caps.version.string << "\n";
    std::string keys;
    if (caps.capability_map.is_object()) {
      for (const auto& [k, _] : caps.capability_map.items()) {
        keys += (keys.empty() ? "" : ", ") + k;
      }
    }
    c.out << "Capabilities: " << keys << "\n";
    c.out << "Users (" << users.size() << "):\n";
    for (const auto& u : users) c.out << "  " << u << "\n";
  }
  if (notice) c.err << "notice: " << *notice << "\n";
  return kExitOk;
}

int cmd_fls(Context& c, const std::string& raw_path, bool recursive, bool deleted) {
  const std::string path = normalize_rel(raw_path);
  WebDavClient dav(c.t());
  const auto self = dav.propfind(path, 0);
  std::vector<ResourceEntry> live;
  if (!self.front().is_directory) {
    live.push_back(self.front());
  } else if (recursive) {
    WalkResult walked = dav.walk(path);
    for (auto& e : walked.entries) {
      if (e.relative_path != path) live.push_back(std::move(e));
    }
    for (const auto& f : walked.failures) {
      c.err << "warning: could not list " << f.relative_path << ": " << f.message << "\n";
    }
  } else {
    auto children = dav.propfind(path, 1);
    live.assign(children.begin() + 1, children.end());
  }
  std::vector<TrashEntry> trashed;
  if (deleted) {
    for (auto& t : dav.list_trash()) {
      const std::string loc = normalize_rel(t.original_location);
      const bool shown = recursive ? lexically_within(loc, path) : parent_of(loc) == path;
      if (shown) trashed.push_back(std::move(t));
    }
  }
  struct Row {
    std::string path;
    bool deleted;
    const ResourceEntry* live;
    const TrashEntry* trash;
  };
  std::vector<Row> rows;
  for (const auto& e : live) rows.push_back({e.relative_path, false, &e, nullptr});
  for (const auto& t : trashed) {
    rows.push_back({normalize_rel(t.original_location), true, nullptr, &t});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.path != b.path) return a.path < b.path;
    return a.deleted < b.deleted;
  });
  for (const auto& r : rows) {
    if (machine(c.opts)) {
      Json j;
      j["deleted"] = r.deleted;
      if (r.live != nullptr) {
        j["entry"] = to_json(*r.live);
      } else {
        j["trash"] = to_json(*r.trash);
      }
      emit(c.out, j);
    } else if (r.live != nullptr) {
      c.out << listing_line(false, r.live->is_directory, r.live->file_id, r.live->size,
                            r.live->last_modified, r.path)
            << "\n";
    } else {
      c.out << listing_line(true, r.trash->is_directory, r.trash->file_id, r.trash->size,
                            r.trash->deletion_time, r.path)
            << "  (" << r.trash->trash_name << ")\n";
    }
  }
  return kExitOk;
}

struct Located {
  std::optional<ResourceEntry> entry;
  std::optional<TrashEntry> trash;
};

Located locate(WebDavClient& dav, std::int64_t id) {
  Located where;
  try {
    const std::string path = dav.resolve_file_id(id);
    where.entry = dav.propfind(path, 0).front();
    return where;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::not_found) throw;
  }
  for (auto& t : dav.list_trash()) {
    if (t.file_id == id) {
      where.trash = std::move(t);
      break;
    }
  }
  return where;
}

int cmd_istat(Context& c, std::int64_t id) {
  if (id < 0) throw Error(ErrorKind::input_error, "object id must be non-negative");
  WebDavClient dav(c.t());
  OcsClient ocs(c.t());
  const Located where = locate(dav, id);
  const std::vector<ActivityEntry> activity = ocs.get_file_activity(id);
  std::vector<VersionEntry> versions;
  const bool is_file = (where.entry && !where.entry->is_directory) ||
                       (where.trash && !where.trash->is_directory);
  if (is_file) {
    try {
      versions = dav.list_versions(id);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::not_found) throw;
    }
  }
  const bool found = where.entry || where.trash;
  if (!found && activity.empty()) {
    throw Error(ErrorKind::not_found, "object " + std::to_string(id) + " not found");
  }

  if (machine(c.opts)) {
    Json j;
    j["object_id"] = id;
    j["location"] = where.entry ? Json("files") : where.trash ? Json("trash") : Json(nullptr);
    j["entry"] = where.entry ? to_json(*where.entry) : Json(nullptr);
    j["trash"] = where.trash ? to_json(*where.trash) : Json(nullptr);
    j["content_available"] = found;
    Json acts = Json::array();
    for (const auto& a : activity) acts.push_back(to_json(a));
    j["activity"] = std::move(acts);
    Json vers = Json::array();
    for (const auto& v : versions) vers.push_back(to_json(v));
    j["versions"] = std::move(vers);
    emit(c.out, j);
  } else {
    c.out << "Object ID: " << id << "\n";
    if (where.entry) {
      const ResourceEntry& e = *where.entry;
      c.out << "Location: files\n"
            << "Path: " << e.relative_path << "\n"
            << "Type: " << (e.is_directory ? "directory" : "file") << "\n"
            << "Size: " << e.size << "\n";
      if (!e.content_type.empty()) c.out << "Content-Type: " << e.content_type << "\n";
      c.out << "ETag: " << e.etag << "\n"
            << "Modified: "
            << (e.last_modified_unparsed() ? e.last_modified_raw : when(e.last_modified))
            << "\n"
            << "Owner: " << e.owner_id << "\n"
            << "Permissions: " << e.permissions << "\n";
    } else if (where.trash) {
      const TrashEntry& t = *where.trash;
      c.out << "Location: trash\n"
            << "Trash name: " << t.trash_name << "\n"
            << "Original location: " << t.original_location << "\n"
            << "Deleted: " << format_epoch_seconds(t.deletion_time) << " ("
            << t.deletion_time << ")\n"
            << "Type: " << (t.is_directory ? "directory" : "file") << "\n"
            << "Size: " << t.size << "\n";
    } else {
      c.out << "Location: none (content unavailable; not in files or trash)\n";
    }
    c.out << "\nActivity (" << activity.size() << "):\n";
    for (const auto& a : activity) {
      c.out << "  " << format_instant(a.timestamp) << "  " << std::left << std::setw(14)
            << a.type << std::right << "  " << a.subject << "\n";
    }
    c.out << "\nVersions (" << versions.size() << "):\n";
    for (const auto& v : versions) {
      c.out << "  " << v.version_timestamp << "  "
            << format_epoch_seconds(v.version_timestamp) << "  " << v.size << " bytes\n";
    }
  }
  if (!found) {
    c.err << "object " << id << " is no longer in the files tree or the trash\n";
    return kExitNotFound;
  }
  return kExitOk;
}

int cmd_icat(Context& c, std::int64_t id, std::optional<std::int64_t> version) {
  if (id < 0) throw Error(ErrorKind::input_error, "object id must be non-negative");
  WebDavClient dav(c.t());
  const Located where = locate(dav, id);
  if (!where.entry && !where.trash && !version) {
    throw Error(ErrorKind::not_found, "object " + std::to_string(id) + " not found");
  }
  if ((where.entry && where.entry->is_directory) ||
      (where.trash && where.trash->is_directory)) {
    throw Error(ErrorKind::is_directory, "object " + std::to_string(id) + " is a directory");
  }
  std::string href;
  if (version) {
    for (const auto& v : dav.list_versions(id)) {
      if (v.version_timestamp == *version) href = v.href;
    }
    if (href.empty()) {
      throw Error(ErrorKind::not_found, "object " + std::to_string(id) +
                                            " has no version " + std::to_string(*version));
    }
  } else {
    href = where.entry ? where.entry->href : where.trash->href;
  }
  const std::string bytes = dav.get_content(href);
  c.out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  c.out.flush();
  return kExitOk;
}

// -- capability subcommands ---------------------------------------------------

void print_user(Context& c, const UserInfo& u) {
  if (machine(c.opts)) {
    emit(c.out, to_json(u));
    return;
  }
  c.out << "User: " << u.uid << "\n"
        << "Display name: " << u.display_name << "\n"
        << "Email: " << u.email.value_or("-") << "\n"
        << "Enabled: " << (u.enabled ? "yes" : "no") << "\n"
        << "Groups: ";
  for (std::size_t i = 0; i < u.groups.size(); ++i) {
    c.out << (i ? ", " : "") << u.groups[i];
  }
  c.out << "\nQuota: " << u.quota.used << " of " << u.quota.total << " bytes ("
        << u.quota.relative << "%)\n"
        << "Last login: "
        << (u.last_login ? format_instant(from_epoch_ms(u.last_login)) : std::string("-"))
        << "\n";
}

int cmd_user_info(Context& c, const std::string& uid) {
  OcsClient ocs(c.t());
  print_user(c, uid.empty() ? ocs.get_current_user() : ocs.get_user(uid));
  return kExitOk;
}

int cmd_list_users(Context& c) {
  OcsClient ocs(c.t());
  for (const auto& u : ocs.list_users()) {
    if (machine(c.opts)) {
      emit(c.out, Json(u));
    } else {
      c.out << u << "\n";
    }
  }
  return kExitOk;
}

int cmd_search_user(Context& c, const std::string& term) {
  OcsClient ocs(c.t());
  for (const auto& u : ocs.search_users(term)) {
    if (machine(c.opts)) {
      emit(c.out, to_json(u));
    } else {
      c.out << std::left << std::setw(20) << u.uid << std::setw(28) << u.display_name
            << std::right << u.email.value_or("-") << "\n";
    }
  }
  return kExitOk;
}

int cmd_list_files(Context& c, const std::string& raw_path, bool recursive) {
  const std::string path = normalize_rel(raw_path);
  WebDavClient dav(c.t());
  std::vector<ResourceEntry> entries;
  int code = kExitOk;
  if (recursive) {
    WalkResult walked = dav.walk(path);
    entries = std::move(walked.entries);
    for (const auto& f : walked.failures) {
      c.err << "warning: could not list " << f.relative_path << ": " << f.message << "\n";
      code = kExitPartial;
    }
  } else {
    entries = dav.propfind(path, 1);
  }
  for (const auto& e : entries) {
    if (machine(c.opts)) {
      emit(c.out, to_json(e));
    } else {
      c.out << listing_line(false, e.is_directory, e.file_id, e.size, e.last_modified,
                            e.relative_path.empty() ? "." : e.relative_path)
            << "\n";
    }
  }
  return code;
}

int cmd_file_id_to_path(Context& c, std::int64_t id) {
  WebDavClient dav(c.t());
  const std::string path = dav.resolve_file_id(id);
  if (machine(c.opts)) {
    emit(c.out, {{"file_id", id}, {"path", path}});
  } else {
    c.out << path << "\n";
  }
  return kExitOk;
}

int cmd_download_file(Context& c, const std::string& raw_path, const std::string& dest) {
  const std::string path = normalize_rel(raw_path);
  WebDavClient dav(c.t());
  const ResourceEntry entry = dav.propfind(path, 0).front();
  if (entry.is_directory) {
    throw Error(ErrorKind::is_directory, path + " is a directory");
  }
  const std::string bytes = dav.get_content(entry.href);
  if (dest.empty()) {
    c.out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    c.out.flush();
    return kExitOk;
  }
  fs::path target = dest;
  if (fs::is_directory(target)) target /= fs::path(entry.name);
  {
    std::ofstream file(target, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorKind::input_error, "cannot write " + target.string());
    file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  const std::string digest = sha256_hex(bytes);
  if (machine(c.opts)) {
    emit(c.out, {{"entry", to_json(entry)},
                 {"saved_to", target.string()},
                 {"sha256", digest},
                 {"byte_length", bytes.size()}});
  } else {
    c.out << digest << "  " << target.string() << "\n";
  }
  return kExitOk;
}

int cmd_trash_bin(Context& c) {
  WebDavClient dav(c.t());
  const auto entries = dav.list_trash();
  if (!machine(c.opts)) {
    c.out << std::left << std::setw(12) << "DELETED" << std::setw(22) << "DELETED_AT"
          << std::right << std::setw(12) << "SIZE" << "  " << std::left << std::setw(36)
          << "TRASH_NAME" << "ORIGINAL_LOCATION" << std::right << "\n";
  }
  for (const auto& t : entries) {
    if (machine(c.opts)) {
      emit(c.out, to_json(t));
    } else {
      c.out << std::left << std::setw(12) << t.deletion_time << std::setw(22)
            << format_epoch_seconds(t.deletion_time) << std::right << std::setw(12) << t.size
            << "  " << std::left << std::setw(36) << t.trash_name << t.original_location
            << std::right << (t.is_directory ? "/" : "") << "\n";
    }
  }
  return kExitOk;
}

int cmd_file_versions(Context& c, std::int64_t id) {
  WebDavClient dav(c.t());
  for (const auto& v : dav.list_versions(id)) {
    if (machine(c.opts)) {
      emit(c.out, to_json(v));
    } else {
      c.out << v.version_timestamp << "  " << format_epoch_seconds(v.version_timestamp)
            << "  " << std::setw(10) << v.size << "  " << v.etag << "\n";
    }
  }
  return kExitOk;
}

int cmd_file_activity(Context& c, std::int64_t id, std::optional<std::int64_t> since,
                      std::optional<std::size_t> limit) {
  OcsClient ocs(c.t());
  for (const auto& a : ocs.get_file_activity(id, since, limit)) {
    if (machine(c.opts)) {
      emit(c.out, to_json(a));
    } else {
      c.out << format_instant(a.timestamp) << "  " << std::setw(8) << a.activity_id << "  "
            << std::left << std::setw(14) << a.type << std::right << "  " << a.subject
            << "\n";
    }
  }
  return kExitOk;
}

int cmd_list_shares(Context& c, const ShareQuery& q) {
  OcsClient ocs(c.t());
  for (const auto& s : ocs.list_shares(q)) {
    if (machine(c.opts)) {
      emit(c.out, to_json(s));
    } else {
      const auto link = ocs.share_link(s);
      c.out << std::setw(6) << s.share_id << "  type " << s.share_type << "  "
            << std::left << std::setw(30) << s.path << std::right << "  "
            << (link ? *link : s.shared_with.value_or("-")) << "\n";
    }
  }
  return kExitOk;
}

int cmd_list_devices(Context& c) {
  SessionControl sessions(c.t());
  for (const auto& s : sessions.list_sessions()) {
    if (machine(c.opts)) {
      emit(c.out, to_json(s));
    } else {
      c.out << (s.is_current ? "* " : "  ") << std::setw(6) << s.token_id << "  "
            << std::left << std::setw(8) << s.session_type << std::right << "  "
            << format_epoch_seconds(s.last_activity) << "  " << s.agent_name << "\n";
    }
  }
  return kExitOk;
}

int cmd_revoke_device(Context& c, std::int64_t id, bool yes, bool force) {
  if (!yes) {
    c.err << "error: revoke-device changes server state; pass --yes to confirm\n";
    return kExitUsage;
  }
  SessionControl sessions(c.t());
  const DeviceSession s = sessions.revoke_session(id, force);
  if (machine(c.opts)) {
    emit(c.out, to_json(s));
  } else {
    c.out << "revoked session " << s.token_id << " (" << s.agent_name << ")\n";
  }
  return kExitOk;
}

int cmd_revoke_all(Context& c, bool yes, bool include_current) {
  if (!yes) {
    c.err << "error: revoke-all changes server state; pass --yes to confirm\n";
    return kExitUsage;
  }
  SessionControl sessions(c.t());
  try {
    const std::int64_t n = sessions.revoke_all(!include_current);
    if (machine(c.opts)) {
      emit(c.out, {{"revoked", n}, {"failed", Json::array()}});
    } else {
      c.out << "revoked " << n << " session(s)\n";
    }
    return kExitOk;
  } catch (const PartialFailure& e) {
    if (machine(c.opts)) {
      emit(c.out, {{"revoked", e.succeeded()}, {"failed", e.failed()}});
    } else {
      c.out << "revoked " << e.succeeded() << " session(s)\n";
    }
    c.err << "error: could not revoke:";
    for (const auto& id : e.failed()) c.err << ' ' << id;
    c.err << "\n";
    return kExitPartial;
  }
}

int summarize_manifest(Context& c, const EvidenceManifest& m, const fs::path& dir) {
  if (machine(c.opts)) {
    emit(c.out, {{"bundle", dir.string()},
                 {"manifest_digest", m.digest()},
                 {"records", m.records.size()},
                 {"errors", m.error_count()}});
  } else {
    c.out << "manifest digest: " << m.digest() << "\n"
          << "records: " << m.records.size() << " (errors: " << m.error_count() << ")\n"
          << "bundle: " << dir.string() << "\n";
  }
  return m.error_count() > 0 ? kExitPartial : kExitOk;
}

int cmd_dump(Context& c, const std::string& out_dir, const DumpOptions& options) {
  Acquisition acq(c.t());
  return summarize_manifest(c, acq.dump(out_dir, options), out_dir);
}

int cmd_acquire_trash(Context& c, const std::string& out_dir) {
  Acquisition acq(c.t());
  return summarize_manifest(c, acq.acquire_trash(out_dir), out_dir);
}

int cmd_acquire_versions(Context& c, std::int64_t id, const std::string& out_dir) {
  Acquisition acq(c.t());
  return summarize_manifest(c, acq.acquire_versions(id, out_dir), out_dir);
}

int cmd_verify(Context& c, const std::string& dir) {
  const VerificationReport r = verify_bundle(dir);
  if (machine(c.opts)) {
    emit(c.out, to_json(r));
  } else {
    c.out << "matched: " << r.matched.size() << "\n"
          << "mismatched: " << r.mismatched.size() << "\n"
          << "missing: " << r.missing.size() << "\n"
          << "error records skipped: " << r.skipped_error_records << "\n";
    for (const auto& p : r.mismatched) c.out << "MISMATCH " << p << "\n";
    for (const auto& p : r.missing) c.out << "MISSING " << p << "\n";
  }
  return r.ok() ? kExitOk : kExitVerifyMismatch;
}

int cmd_monitor(Context& c, const std::string& out_dir, int interval,
                std::optional<int> max_cycles) {
  Monitor monitor(c.t());
  MonitorOptions options;
  options.interval = std::chrono::seconds{interval};
  options.max_cycles = max_cycles;
  options.out_dir = out_dir;
  g_stop = false;
  options.stop = &g_stop;
  auto previous = std::signal(SIGINT, on_interrupt);
  MonitorLog log;
  try {
    log = monitor.run(options);
  } catch (...) {
    std::signal(SIGINT, previous);
    throw;
  }
  std::signal(SIGINT, previous);
  for (const auto& e : log.all_events()) {
    if (machine(c.opts)) {
      emit(c.out, to_json(e));
    } else {
      c.out << format_instant(e.observed_at) << "  " << std::left << std::setw(14)
            << to_string(e.kind) << std::right << "  " << e.subject << "\n";
    }
  }
  if (!machine(c.opts)) {
    c.out << "cycles: " << log.cycles.size() << ", manifest digest: "
          << log.manifest.digest() << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env) {
  Options opts;
  CLI::App app{"Forensic acquisition and monitoring for Nextcloud instances", "ncforensic"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--url", opts.url, "Server base URL (else NC_URL)");
  app.add_option("--user", opts.user, "Account name (else NC_USER)");
  app.add_option("--credential-file", opts.credential_file,
                 "KEY=VALUE file with NC_URL, NC_USER, NC_APP_PASSWORD; mode 0600");
  app.add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"text", "machine"}));
  app.add_option("--timeout", opts.timeout, "Per-request timeout in seconds")
      ->check(CLI::Range(1, 3600));

  std::function<int(Context&)> action;
  std::string path, uid, term, out_dir, dest;
  bool recursive = false, deleted = false, yes = false, force = false,
       include_current = false, no_trash = false, no_versions = false, resume = false,
       subfiles = false, shared_with_me = false, reshares = false;
  std::int64_t id = 0;
  std::optional<std::int64_t> version, since;
  std::optional<std::size_t> limit;
  std::optional<int> max_cycles;
  int interval = 300;

  auto* fsstat = app.add_subcommand("fsstat", "Instance summary: version, capabilities, users");
  fsstat->callback([&] { action = [](Context& c) { return cmd_fsstat(c); }; });

  auto* fls = app.add_subcommand("fls", "List files; -d adds deleted entries marked '*'");
  fls->add_option("path", path, "Directory relative to the files root");
  fls->add_flag("-r,--recursive", recursive, "Descend into subdirectories");
  fls->add_flag("-d,--deleted", deleted, "Include trash entries at their original location");
  fls->callback([&] {
    action = [&](Context& c) { return cmd_fls(c, path, recursive, deleted); };
  });

  auto* istat = app.add_subcommand("istat", "Metadata, activity and versions of an object id");
  istat->add_option("object_id", id)->required();
  istat->callback([&] { action = [&](Context& c) { return cmd_istat(c, id); }; });

  auto* icat = app.add_subcommand("icat", "Write an object's bytes to standard output");
  icat->add_option("object_id", id)->required();
  icat->add_option("--version", version, "Version timestamp");
  icat->callback([&] { action = [&](Context& c) { return cmd_icat(c, id, version); }; });

  auto* user_info = app.add_subcommand("user-info", "Details of the current or a named user");
  user_info->add_option("uid", uid);
  user_info->callback([&] { action = [&](Context& c) { return cmd_user_info(c, uid); }; });

  auto* list_users = app.add_subcommand("list-users", "All account names (admin only)");
  list_users->callback([&] { action = [](Context& c) { return cmd_list_users(c); }; });

  auto* search_user = app.add_subcommand("search-user", "Search accounts by name");
  search_user->add_option("term", term)->required();
  search_user->callback([&] { action = [&](Context& c) { return cmd_search_user(c, term); }; });

  auto* list_files = app.add_subcommand("list-files", "PROPFIND listing of a directory");
  list_files->add_option("path", path);
  list_files->add_flag("-r,--recursive", recursive);
  list_files->callback([&] {
    action = [&](Context& c) { return cmd_list_files(c, path, recursive); };
  });

  auto* id_to_path = app.add_subcommand("file-id-to-path", "Resolve a file id to its path");
  id_to_path->add_option("file_id", id)->required();
  id_to_path->callback([&] { action = [&](Context& c) { return cmd_file_id_to_path(c, id); }; });

  auto* download = app.add_subcommand("download-file", "Download one file");
  download->add_option("path", path)->required();
  download->add_option("-o,--out", dest, "Destination file or directory (default stdout)");
  download->callback([&] {
    action = [&](Context& c) { return cmd_download_file(c, path, dest); };
  });

  auto* trash_bin = app.add_subcommand("trash-bin", "List the trash bin");
  trash_bin->callback([&] { action = [](Context& c) { return cmd_trash_bin(c); }; });

  auto* file_versions = app.add_subcommand("file-versions", "List versions of a file id");
  file_versions->add_option("file_id", id)->required();
  file_versions->callback([&] { action = [&](Context& c) { return cmd_file_versions(c, id); }; });

  auto* file_activity = app.add_subcommand("file-activity", "Activity entries of a file id");
  file_activity->add_option("file_id", id)->required();
  file_activity->add_option("--since", since, "Only entries older than this activity id");
  file_activity->add_option("--limit", limit);
  file_activity->callback([&] {
    action = [&](Context& c) { return cmd_file_activity(c, id, since, limit); };
  });

  auto* list_shares = app.add_subcommand("list-shares", "Shares created by or with the account");
  list_shares->add_option("--path", path);
  list_shares->add_flag("--subfiles", subfiles);
  list_shares->add_flag("--shared-with-me", shared_with_me);
  list_shares->add_flag("--reshares", reshares);
  list_shares->callback([&] {
    action = [&](Context& c) {
      ShareQuery q;
      q.include_reshares = reshares;
      q.shared_with_me = shared_with_me;
      if (!path.empty() || subfiles) q.subfiles_of = path;
      if (!subfiles && !path.empty()) {
        throw Error(ErrorKind::input_error, "--path needs --subfiles");
      }
      return cmd_list_shares(c, q);
    };
  });

  auto* list_devices = app.add_subcommand("list-devices", "App passwords and browser sessions");
  list_devices->callback([&] { action = [](Context& c) { return cmd_list_devices(c); }; });

  auto* revoke_device = app.add_subcommand("revoke-device", "Revoke one session");
  revoke_device->add_option("token_id", id)->required();
  revoke_device->add_flag("--yes", yes, "Confirm the state change");
  revoke_device->add_flag("--force", force, "Allow revoking the session in use");
  revoke_device->callback([&] {
    action = [&](Context& c) { return cmd_revoke_device(c, id, yes, force); };
  });

  auto* revoke_all = app.add_subcommand("revoke-all", "Revoke every other session");
  revoke_all->add_flag("--yes", yes, "Confirm the state change");
  revoke_all->add_flag("--include-current", include_current,
                       "Also revoke the session in use, last");
  revoke_all->callback([&] {
    action = [&](Context& c) { return cmd_revoke_all(c, yes, include_current); };
  });

  auto* dump = app.add_subcommand("dump", "Acquire files, trash, versions and metadata");
  dump->add_option("-o,--out", out_dir, "Bundle directory (must be empty)")->required();
  dump->add_option("--path", path, "Subtree to acquire");
  dump->add_flag("--no-trash", no_trash);
  dump->add_flag("--no-versions", no_versions);
  dump->add_flag("--resume", resume, "Continue an interrupted bundle");
  dump->callback([&] {
    action = [&](Context& c) {
      DumpOptions o;
      o.root_path = normalize_rel(path);
      o.include_trash = !no_trash;
      o.include_versions = !no_versions;
      o.resume = resume;
      return cmd_dump(c, out_dir, o);
    };
  });

  auto* acquire_trash = app.add_subcommand("acquire-trash", "Bundle of the trash bin only");
  acquire_trash->add_option("-o,--out", out_dir)->required();
  acquire_trash->callback([&] {
    action = [&](Context& c) { return cmd_acquire_trash(c, out_dir); };
  });

  auto* acquire_versions = app.add_subcommand("acquire-versions", "Bundle of one file's versions");
  acquire_versions->add_option("file_id", id)->required();
  acquire_versions->add_option("-o,--out", out_dir)->required();
  acquire_versions->callback([&] {
    action = [&](Context& c) { return cmd_acquire_versions(c, id, out_dir); };
  });

  auto* verify = app.add_subcommand("verify", "Recompute digests of a bundle");
  verify->add_option("bundle", out_dir)->required();
  verify->callback([&] { action = [&](Context& c) { return cmd_verify(c, out_dir); }; });

  auto* monitor = app.add_subcommand("monitor", "Poll for changes and re-acquire");
  monitor->add_option("-o,--out", out_dir)->required();
  monitor->add_option("--interval", interval, "Seconds between snapshots")
      ->check(CLI::Range(1, 24 * 60 * 60));
  monitor->add_option("--max-cycles", max_cycles);
  monitor->callback([&] {
    action = [&](Context& c) { return cmd_monitor(c, out_dir, interval, max_cycles); };
  });

  for (const auto& a : args) {
    const std::string flag = a.substr(0, a.find('='));
    if (flag == "-p" || flag == "--password" || flag == "--app-password" || flag == "--pass") {
      err << "usage error: the app password is not accepted on the command line; set "
          << kEnvPassword << " or use a credential file\n";
      return kExitUsage;
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ExtrasError&) {
    // Only option-like tokens are named; stray values may be secrets.
    err << "usage error: unexpected arguments";
    for (const auto& a : app.remaining()) {
      if (!a.empty() && a[0] == '-') err << ' ' << a.substr(0, a.find('='));
    }
    err << "\n";
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  Context ctx{opts, env, out, err, nullptr};
  try {
    return action(ctx);
  } catch (const PartialFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitPartial;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int main_entry(int argc, char** argv, const std::optional<std::string>& fixed_subcommand) {
  std::vector<std::string> args;
  if (fixed_subcommand) args.push_back(*fixed_subcommand);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  std::ios::sync_with_stdio(false);
  return run(args, std::cout, std::cerr);
}

}  // namespace ncf::cli
