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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "ncf/acquisition.hpp"
#include "ncf/canonical.hpp"
#include "ncf/timeutil.hpp"
#include "ncf/transport.hpp"

namespace ncf {

struct SnapshotEntry {
  std::int64_t file_id = 0;
  std::string etag;
  std::optional<std::int64_t> last_modified;
  std::uint64_t size = 0;
  bool is_directory = false;

  bool operator==(const SnapshotEntry&) const = default;
};

/// Identity of a trash item is (trash_name, deletion_time); the original
/// location rides along for correlation.
struct TrashId {
  std::string trash_name;
  std::int64_t deletion_time = 0;
  std::string original_location;

  bool operator<(const TrashId& o) const {
    return std::tie(trash_name, deletion_time) <
           std::tie(o.trash_name, o.deletion_time);
  }
  bool operator==(const TrashId& o) const {
    return trash_name == o.trash_name && deletion_time == o.deletion_time;
  }
};

enum class SnapshotDomain { files, trash, sessions, shares };

std::string_view to_string(SnapshotDomain domain) noexcept;

struct Snapshot {
  Instant started_at{};
  Instant captured_at{};
  std::map<std::string, SnapshotEntry> entries;
  std::set<TrashId> trash_ids;
  std::set<std::int64_t> session_ids;
  std::set<std::int64_t> share_ids;
  /// Domains whose listing failed (or was incomplete) for this capture.
  std::set<SnapshotDomain> partial_domains;

  bool partial() const { return !partial_domains.empty(); }
};

enum class ChangeKind {
  created,
  modified,
  deleted,
  trashed,
  trash_emptied,
  new_session,
  session_gone,
  share_added,
  share_removed,
};

std::string_view to_string(ChangeKind kind) noexcept;
ChangeKind change_kind_from_string(std::string_view text);

struct FileState {
  std::string etag;
  std::uint64_t size = 0;
  std::optional<std::int64_t> mtime;

  bool operator==(const FileState&) const = default;
};

struct ChangeEvent {
  ChangeKind kind = ChangeKind::created;
  std::string subject;  // relative path, trash name, or numeric id
  Instant observed_at{};
  std::optional<FileState> before;
  std::optional<FileState> after;
  std::optional<std::int64_t> file_id;
  /// For trashed events: the matching trash item.
  std::optional<std::string> trash_name;

  /// Equality ignoring observed_at.
  bool same_change(const ChangeEvent& other) const;
};

Json to_json(const ChangeEvent& event);
ChangeEvent change_event_from_json(const Json& j);
Json to_json(const Snapshot& snapshot);

/// Typed differences between two snapshots, ordered by kind then subject.
/// Throws Error(invalid_order) when new.captured_at precedes old.captured_at;
/// equal instants are accepted so that diff(s, s) is empty.
/// Directory ETag changes are not reported: they move whenever a descendant
/// changes. Creations and removals in a domain are suppressed when that
/// domain is partial on the side that would produce them.
std::vector<ChangeEvent> diff(const Snapshot& older, const Snapshot& newer);

/// A follow-up acquisition requested by the monitoring policy.
struct MonitorAction {
  enum class Type { download_file, acquire_trash };
  Type type = Type::download_file;
  std::string path;
};

using MonitorPolicy = std::function<std::vector<MonitorAction>(const ChangeEvent&)>;

/// Downloads created and modified files; acquires the trash on trashed.
MonitorPolicy default_monitor_policy();

struct MonitorOptions {
  static constexpr std::chrono::seconds kMinInterval{1};
  static constexpr std::chrono::seconds kMaxInterval{24 * 60 * 60};

  std::chrono::seconds interval{300};
  std::optional<int> max_cycles;
  MonitorPolicy policy = default_monitor_policy();
  std::filesystem::path out_dir;
  /// Invoked before each cycle's snapshot, 1-based.
  std::function<void(int)> before_cycle;
  const std::atomic<bool>* stop = nullptr;
};

struct CycleReport {
  int cycle = 0;
  Instant captured_at{};
  std::set<SnapshotDomain> partial_domains;
  std::vector<ChangeEvent> events;
  std::vector<EvidenceRecord> records;
  std::vector<std::string> errors;
};

struct MonitorLog {
  std::vector<CycleReport> cycles;
  EvidenceManifest manifest;

  std::vector<ChangeEvent> all_events() const;
};

/// Takes snapshots on an interval, diffs consecutive ones and re-acquires
/// changed objects. Issues read methods only.
class Monitor {
 public:
  static constexpr std::string_view kEventLogFile = "events.jsonl";

  explicit Monitor(Transport& transport);

  /// One files walk plus trash, session and share listings.
  Snapshot take_snapshot();

  MonitorLog run(const MonitorOptions& options);

 private:
  Transport& transport_;
  Instant last_capture_{};
};

}  // namespace ncf
