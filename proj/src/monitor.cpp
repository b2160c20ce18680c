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

#include "ncf/monitor.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include "ncf/error.hpp"
#include "ncf/ocs_client.hpp"
#include "ncf/sessions.hpp"
#include "ncf/webdav_client.hpp"

namespace ncf {
namespace fs = std::filesystem;

namespace {

Json state_json(const std::optional<FileState>& s) {
  if (!s) return nullptr;
  Json j;
  j["etag"] = s->etag;
  j["size"] = s->size;
  j["mtime"] = s->mtime ? Json(*s->mtime) : Json(nullptr);
  return j;
}

std::optional<FileState> state_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  FileState s;
  s.etag = j.at("etag").get<std::string>();
  s.size = j.at("size").get<std::uint64_t>();
  if (!j.at("mtime").is_null()) s.mtime = j.at("mtime").get<std::int64_t>();
  return s;
}

FileState state_of(const SnapshotEntry& e) {
  return {e.etag, e.size, e.last_modified};
}

std::string basename_of(const std::string& path) {
  const auto pos = path.rfind('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

bool is_within(const std::string& path, const std::string& dir) {
  return path.size() > dir.size() && path.compare(0, dir.size(), dir) == 0 &&
         path[dir.size()] == '/';
}

std::string cycle_dir(int cycle) {
  std::string n = std::to_string(cycle);
  if (n.size() < 4) n.insert(0, 4 - n.size(), '0');
  return "cycles/" + n;
}

}  // namespace

std::string_view to_string(SnapshotDomain d) noexcept {
  switch (d) {
    case SnapshotDomain::files: return "files";
    case SnapshotDomain::trash: return "trash";
    case SnapshotDomain::sessions: return "sessions";
    case SnapshotDomain::shares: return "shares";
  }
  return "unknown";
}

std::string_view to_string(ChangeKind k) noexcept {
  switch (k) {
    case ChangeKind::created: return "created";
    case ChangeKind::modified: return "modified";
    case ChangeKind::deleted: return "deleted";
    case ChangeKind::trashed: return "trashed";
    case ChangeKind::trash_emptied: return "trash_emptied";
    case ChangeKind::new_session: return "new_session";
    case ChangeKind::session_gone: return "session_gone";
    case ChangeKind::share_added: return "share_added";
    case ChangeKind::share_removed: return "share_removed";
  }
  return "unknown";
}

ChangeKind change_kind_from_string(std::string_view text) {
  for (int k = 0; k <= static_cast<int>(ChangeKind::share_removed); ++k) {
    if (to_string(static_cast<ChangeKind>(k)) == text) return static_cast<ChangeKind>(k);
  }
  throw Error(ErrorKind::parse_error, "unknown change kind " + std::string(text));
}

bool ChangeEvent::same_change(const ChangeEvent& o) const {
  return kind == o.kind && subject == o.subject && before == o.before &&
         after == o.after && file_id == o.file_id && trash_name == o.trash_name;
}

Json to_json(const ChangeEvent& e) {
  Json j;
  j["kind"] = std::string(to_string(e.kind));
  j["subject"] = e.subject;
  j["observed_at"] = format_instant(e.observed_at);
  j["before"] = state_json(e.before);
  j["after"] = state_json(e.after);
  j["file_id"] = e.file_id ? Json(*e.file_id) : Json(nullptr);
  j["trash_name"] = e.trash_name ? Json(*e.trash_name) : Json(nullptr);
  return j;
}

ChangeEvent change_event_from_json(const Json& j) {
  ChangeEvent e;
  e.kind = change_kind_from_string(j.at("kind").get<std::string>());
  e.subject = j.at("subject").get<std::string>();
  auto t = parse_iso8601(j.at("observed_at").get<std::string>());
  if (!t) throw Error(ErrorKind::parse_error, "bad observed_at");
  e.observed_at = *t;
  e.before = state_from_json(j.at("before"));
  e.after = state_from_json(j.at("after"));
  if (!j.at("file_id").is_null()) e.file_id = j.at("file_id").get<std::int64_t>();
  if (!j.at("trash_name").is_null()) e.trash_name = j.at("trash_name").get<std::string>();
  return e;
}

Json to_json(const Snapshot& s) {
  Json j;
  j["started_at"] = format_instant(s.started_at);
  j["captured_at"] = format_instant(s.captured_at);
  Json entries = Json::object();
  for (const auto& [path, e] : s.entries) {
    entries[path] = {{"file_id", e.file_id},
                     {"etag", e.etag},
                     {"last_modified", e.last_modified ? Json(*e.last_modified) : Json(nullptr)},
                     {"size", e.size},
                     {"is_directory", e.is_directory}};
  }
  j["entries"] = std::move(entries);
  Json trash = Json::array();
  for (const auto& t : s.trash_ids) {
    trash.push_back({{"trash_name", t.trash_name},
                     {"deletion_time", t.deletion_time},
                     {"original_location", t.original_location}});
  }
  j["trash"] = std::move(trash);
  j["sessions"] = s.session_ids;
  j["shares"] = s.share_ids;
  Json partial = Json::array();
  for (auto d : s.partial_domains) partial.push_back(std::string(to_string(d)));
  j["partial"] = std::move(partial);
  return j;
}

std::vector<ChangeEvent> diff(const Snapshot& older, const Snapshot& newer) {
  if (newer.captured_at < older.captured_at) {
    throw Error(ErrorKind::invalid_order, "snapshots are not in capture order");
  }
  auto partial = [](const Snapshot& s, SnapshotDomain d) {
    return s.partial_domains.count(d) > 0;
  };
  const Instant observed = newer.captured_at;
  std::vector<ChangeEvent> events;

  const std::int64_t window_lo = to_epoch_seconds(older.started_at);
  const std::int64_t window_hi = to_epoch_seconds(newer.captured_at) + 1;
  std::set<TrashId> consumed;

  auto match_trash = [&](const std::string& path) -> const TrashId* {
    const TrashId* fallback = nullptr;
    for (const auto& t : newer.trash_ids) {
      if (t.deletion_time < window_lo || t.deletion_time > window_hi) continue;
      if (!t.original_location.empty()) {
        if (t.original_location == path) return &t;
        if (is_within(path, t.original_location) && fallback == nullptr) fallback = &t;
      } else if (consumed.count(t) == 0 &&
                 t.trash_name == basename_of(path) + ".d" + std::to_string(t.deletion_time)) {
        return &t;
      }
    }
    return fallback;
  };

  if (!partial(newer, SnapshotDomain::files)) {
    for (const auto& [path, before] : older.entries) {
      if (newer.entries.count(path) > 0) continue;
      ChangeEvent e;
      e.subject = path;
      e.observed_at = observed;
      e.before = state_of(before);
      e.file_id = before.file_id;
      if (const TrashId* t = match_trash(path)) {
        e.kind = ChangeKind::trashed;
        e.trash_name = t->trash_name;
        consumed.insert(*t);
      } else {
        e.kind = ChangeKind::deleted;
      }
      events.push_back(std::move(e));
    }
  }
  for (const auto& [path, after] : newer.entries) {
    auto it = older.entries.find(path);
    if (it == older.entries.end()) {
      if (partial(older, SnapshotDomain::files)) continue;
      ChangeEvent e;
      e.kind = ChangeKind::created;
      e.subject = path;
      e.observed_at = observed;
      e.after = state_of(after);
      e.file_id = after.file_id;
      events.push_back(std::move(e));
    } else if (!after.is_directory && !it->second.is_directory &&
               it->second.etag != after.etag) {
      ChangeEvent e;
      e.kind = ChangeKind::modified;
      e.subject = path;
      e.observed_at = observed;
      e.before = state_of(it->second);
      e.after = state_of(after);
      e.file_id = after.file_id;
      events.push_back(std::move(e));
    }
  }

  if (!partial(older, SnapshotDomain::trash)) {
    for (const auto& t : newer.trash_ids) {
      if (older.trash_ids.count(t) > 0 || consumed.count(t) > 0) continue;
      ChangeEvent e;
      e.kind = ChangeKind::trashed;
      e.subject = t.original_location.empty() ? t.trash_name : t.original_location;
      e.observed_at = observed;
      e.trash_name = t.trash_name;
      events.push_back(std::move(e));
    }
  }
  if (!partial(newer, SnapshotDomain::trash)) {
    for (const auto& t : older.trash_ids) {
      if (newer.trash_ids.count(t) > 0) continue;
      ChangeEvent e;
      e.kind = ChangeKind::trash_emptied;
      e.subject = t.trash_name;
      e.observed_at = observed;
      e.trash_name = t.trash_name;
      events.push_back(std::move(e));
    }
  }

  auto id_events = [&](const std::set<std::int64_t>& before,
                       const std::set<std::int64_t>& after, SnapshotDomain d,
                       ChangeKind added, ChangeKind removed) {
    if (!partial(older, d)) {
      for (auto id : after) {
        if (before.count(id) == 0) {
          events.push_back({added, std::to_string(id), observed, {}, {}, {}, {}});
        }
      }
    }
    if (!partial(newer, d)) {
      for (auto id : before) {
        if (after.count(id) == 0) {
          events.push_back({removed, std::to_string(id), observed, {}, {}, {}, {}});
        }
      }
    }
  };
  id_events(older.session_ids, newer.session_ids, SnapshotDomain::sessions,
            ChangeKind::new_session, ChangeKind::session_gone);
  id_events(older.share_ids, newer.share_ids, SnapshotDomain::shares,
            ChangeKind::share_added, ChangeKind::share_removed);

  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.subject < b.subject;
  });
  return events;
}

MonitorPolicy default_monitor_policy() {
  return [](const ChangeEvent& e) -> std::vector<MonitorAction> {
    switch (e.kind) {
      case ChangeKind::created:
      case ChangeKind::modified:
        if (e.after && !e.after->etag.empty()) {
          return {{MonitorAction::Type::download_file, e.subject}};
        }
        return {};
      case ChangeKind::trashed:
        return {{MonitorAction::Type::acquire_trash,
                 e.trash_name.value_or(e.subject)}};
      default:
        return {};
    }
  };
}

std::vector<ChangeEvent> MonitorLog::all_events() const {
  std::vector<ChangeEvent> out;
  for (const auto& c : cycles) out.insert(out.end(), c.events.begin(), c.events.end());
  return out;
}

Monitor::Monitor(Transport& transport) : transport_(transport) {}

Snapshot Monitor::take_snapshot() {
  Snapshot s;
  s.started_at = now_utc();
  std::optional<Error> first_error;
  auto guarded = [&](SnapshotDomain domain, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      s.partial_domains.insert(domain);
      if (!first_error) first_error = e;
    }
  };

  WebDavClient dav(transport_, MethodPolicy::acquisition());
  guarded(SnapshotDomain::files, [&] {
    const WalkResult walked = dav.walk("");
    for (const auto& e : walked.entries) {
      if (e.relative_path.empty()) continue;
      s.entries[e.relative_path] = {e.file_id, e.etag, e.last_modified, e.size,
                                    e.is_directory};
    }
    if (!walked.complete()) s.partial_domains.insert(SnapshotDomain::files);
  });
  guarded(SnapshotDomain::trash, [&] {
    for (const auto& t : dav.list_trash()) {
      s.trash_ids.insert({t.trash_name, t.deletion_time, t.original_location});
    }
  });
  guarded(SnapshotDomain::sessions, [&] {
    SessionControl sessions(transport_);
    for (const auto& d : sessions.list_sessions(MethodPolicy::acquisition())) {
      s.session_ids.insert(d.token_id);
    }
  });
  guarded(SnapshotDomain::shares, [&] {
    OcsClient ocs(transport_);
    for (const auto& share : ocs.list_shares()) s.share_ids.insert(share.share_id);
  });
  if (s.partial_domains.size() == 4 && first_error) throw *first_error;

  Instant captured = now_utc();
  if (captured <= last_capture_) captured = last_capture_ + std::chrono::milliseconds{1};
  s.captured_at = captured;
  last_capture_ = captured;
  return s;
}

MonitorLog Monitor::run(const MonitorOptions& options) {
  if (options.interval < MonitorOptions::kMinInterval ||
      options.interval > MonitorOptions::kMaxInterval) {
    throw Error(ErrorKind::input_error, "monitor interval must lie in [1 s, 24 h]");
  }
  if (options.max_cycles && *options.max_cycles < 1) {
    throw Error(ErrorKind::input_error, "max_cycles must be at least 1");
  }
  if (options.out_dir.empty()) {
    throw Error(ErrorKind::input_error, "monitor needs an output directory");
  }
  EvidenceBundle bundle(options.out_dir, transport_.credentials().fingerprint());
  std::ofstream events_out(options.out_dir / kEventLogFile,
                           std::ios::binary | std::ios::app);
  Acquisition acquisition(transport_);
  WebDavClient dav(transport_, MethodPolicy::acquisition());
  const MonitorPolicy policy = options.policy ? options.policy : default_monitor_policy();

  auto stopping = [&] {
    return options.stop != nullptr && options.stop->load();
  };

  MonitorLog log;
  std::optional<Snapshot> previous;
  for (int cycle = 1;; ++cycle) {
    if (stopping()) break;
    if (options.before_cycle) options.before_cycle(cycle);
    CycleReport report;
    report.cycle = cycle;
    auto line = [&](Json j) {
      Json out;
      out["kind"] = j.at("kind");
      out["cycle"] = cycle;
      for (auto& [k, v] : j.items()) {
        if (k != "kind") out[k] = v;
      }
      events_out << canonical_line(out);
    };
    try {
      Snapshot snap = take_snapshot();
      report.captured_at = snap.captured_at;
      report.partial_domains = snap.partial_domains;
      Json partial = Json::array();
      for (auto d : snap.partial_domains) partial.push_back(std::string(to_string(d)));
      line({{"kind", "snapshot"},
            {"captured_at", format_instant(snap.captured_at)},
            {"entries", snap.entries.size()},
            {"trash", snap.trash_ids.size()},
            {"sessions", snap.session_ids.size()},
            {"shares", snap.share_ids.size()},
            {"partial", partial}});
      if (previous) {
        report.events = diff(*previous, snap);
        std::set<std::string> trash_wanted;
        for (const auto& event : report.events) {
          Json j = to_json(event);
          j["event"] = j["kind"];
          j["kind"] = "event";
          line(j);
          for (const auto& action : policy(event)) {
            if (action.type == MonitorAction::Type::acquire_trash) {
              trash_wanted.insert(action.path);
              continue;
            }
            auto it = snap.entries.find(action.path);
            if (it == snap.entries.end() || it->second.is_directory) continue;
            ResourceEntry entry;
            entry.relative_path = action.path;
            entry.href = dav.files_href(action.path);
            entry.file_id = it->second.file_id;
            entry.etag = it->second.etag;
            entry.size = it->second.size;
            entry.last_modified = it->second.last_modified;
            auto recs = acquisition.collect_files(bundle, {entry},
                                                  cycle_dir(cycle) + "/files", 1);
            report.records.insert(report.records.end(), recs.begin(), recs.end());
          }
        }
        if (!trash_wanted.empty()) {
          auto recs = acquisition.collect_trash(bundle, cycle_dir(cycle) + "/trash",
                                                &trash_wanted);
          report.records.insert(report.records.end(), recs.begin(), recs.end());
        }
        for (const auto& r : report.records) line(to_json(r));
      }
      previous = std::move(snap);
    } catch (const Error& e) {
      report.errors.push_back(e.what());
      line({{"kind", "error"}, {"message", e.what()}});
    }
    events_out.flush();
    log.cycles.push_back(std::move(report));
    if (options.max_cycles && cycle >= *options.max_cycles) break;

    const auto deadline = std::chrono::steady_clock::now() + options.interval;
    while (!stopping() && std::chrono::steady_clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds{20});
    }
  }
  log.manifest = bundle.finalize(transport_.ledger());
  return log;
}

}  // namespace ncf
