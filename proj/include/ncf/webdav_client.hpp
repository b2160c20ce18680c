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
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncf/canonical.hpp"
#include "ncf/error.hpp"
#include "ncf/multistatus.hpp"
#include "ncf/transport.hpp"

namespace ncf {

/// A file or directory in the user's files tree.
struct ResourceEntry {
  std::string href;  // percent-encoded, exactly as the server sent it
  std::int64_t file_id = 0;
  std::string name;
  std::string relative_path;  // "" for the root
  bool is_directory = false;
  std::uint64_t size = 0;
  std::string content_type;  // empty for directories
  std::string etag;          // surrounding quotes stripped
  std::optional<std::int64_t> last_modified;  // epoch seconds, UTC
  std::string last_modified_raw;  // kept verbatim when unparseable
  std::string owner_id;
  std::string permissions;

  bool last_modified_unparsed() const {
    return !last_modified && !last_modified_raw.empty();
  }
  bool operator==(const ResourceEntry&) const = default;
};

struct TrashEntry {
  std::string trash_name;  // e.g. "screenshot.jpg.d1728237675"
  std::string original_name;
  std::string original_location;
  std::int64_t deletion_time = 0;  // epoch seconds
  std::uint64_t size = 0;
  std::int64_t file_id = 0;
  std::string href;
  bool is_directory = false;

  bool operator==(const TrashEntry&) const = default;
};

struct VersionEntry {
  std::int64_t file_id = 0;
  std::int64_t version_timestamp = 0;  // also the version's identifier
  std::string etag;
  std::uint64_t size = 0;
  std::string href;

  bool operator==(const VersionEntry&) const = default;
};

struct WalkFailure {
  std::string relative_path;
  ErrorKind kind;
  std::string message;
};

struct WalkResult {
  std::vector<ResourceEntry> entries;
  std::vector<WalkFailure> failures;
  bool complete() const { return failures.empty(); }
};

/// Return false to stop the traversal early.
using WalkVisitor = std::function<bool(const ResourceEntry&)>;

/// Client for the files, trashbin and versions WebDAV trees. Issues PROPFIND
/// and GET only.
class WebDavClient {
 public:
  static constexpr std::size_t kMaxConcurrentPropfinds = 4;

  explicit WebDavClient(Transport& transport,
                        MethodPolicy policy = MethodPolicy::acquisition());

  const std::string& username() const noexcept { return username_; }

  /// Depth 0 returns the addressed resource only; depth 1 adds its
  /// immediate children. The addressed resource is always first.
  std::vector<ResourceEntry> propfind(
      std::string_view relative_path, int depth,
      const std::vector<PropertyName>& properties = default_file_properties());

  /// Client-side recursion with depth-1 PROPFINDs. Parents are emitted before
  /// their children; failures below the root are recorded, not thrown.
  WalkResult walk(std::string_view root_path, const WalkVisitor& visitor = {},
                  const std::vector<PropertyName>& properties =
                      default_file_properties());

  std::string get_content(std::string_view href);

  std::vector<TrashEntry> list_trash(std::string_view username = {});
  /// Raw listing of any trash href (used for trashed directories).
  std::vector<DavResponse> list_collection(std::string_view href,
                                           const std::vector<PropertyName>& properties);

  std::vector<VersionEntry> list_versions(std::string_view username,
                                          std::int64_t file_id);
  std::vector<VersionEntry> list_versions(std::int64_t file_id) {
    return list_versions({}, file_id);
  }

  /// Walks the tree requesting only fileid, stopping at the first match.
  std::string resolve_file_id(std::int64_t file_id);

  /// Server path of the files root, e.g. "/remote.php/dav/files/admin".
  std::string files_root() const;
  std::string trash_root(std::string_view username = {}) const;
  std::string versions_root(std::string_view username, std::int64_t file_id) const;
  std::string files_href(std::string_view relative_path) const;

  ResourceEntry to_resource(const DavResponse& response) const;
  TrashEntry to_trash_entry(const DavResponse& response) const;

 private:
  std::vector<DavResponse> propfind_raw(const std::string& target, int depth,
                                        const std::vector<PropertyName>& properties);

  Transport& transport_;
  MethodPolicy policy_;
  std::string username_;
};

std::string strip_etag_quotes(std::string_view etag);

Json to_json(const ResourceEntry& entry);
Json to_json(const TrashEntry& entry);
Json to_json(const VersionEntry& entry);
ResourceEntry resource_from_json(const Json& j);
TrashEntry trash_from_json(const Json& j);
VersionEntry version_from_json(const Json& j);

}  // namespace ncf
