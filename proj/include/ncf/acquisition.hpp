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
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ncf/canonical.hpp"
#include "ncf/timeutil.hpp"
#include "ncf/transport.hpp"
#include "ncf/webdav_client.hpp"

namespace ncf {

inline constexpr std::string_view kToolVersion = "ncforensic 1.0.0";

enum class EvidenceCategory { files, trash, versions, metadata };

std::string_view to_string(EvidenceCategory category) noexcept;
EvidenceCategory evidence_category_from_string(std::string_view text);

struct EvidenceRecord {
  std::string bundle_path;  // relative, '/'-separated, unique per manifest
  EvidenceCategory category = EvidenceCategory::files;
  std::string source_url;
  Instant retrieved_at{};
  std::string sha256;
  std::uint64_t byte_length = 0;
  std::optional<std::string> server_etag;
  std::optional<std::int64_t> server_mtime;
  /// Category-specific context (trash origin, version id, ...).
  Json annotations = Json::object();
  /// Set when the object could not be acquired; no bytes are stored then.
  std::optional<std::string> error;

  bool operator==(const EvidenceRecord&) const = default;
};

Json to_json(const EvidenceRecord& record);
EvidenceRecord evidence_record_from_json(const Json& j);

struct EvidenceManifest {
  std::string tool_version{kToolVersion};
  std::string credentials_fingerprint;
  Instant started_at{};
  Instant finished_at{};
  std::vector<EvidenceRecord> records;
  std::string request_ledger_digest;

  /// Canonical line-delimited form: one header line, one line per record,
  /// one summary line.
  std::string serialize() const;
  static EvidenceManifest parse(std::string_view text);
  std::string digest() const;

  std::size_t error_count() const;
  std::vector<const EvidenceRecord*> by_category(EvidenceCategory c) const;
};

/// On-disk evidence bundle rooted at a directory:
///   files/ trash/ versions/ metadata/  acquired objects
///   manifest.partial.jsonl              records flushed as they are stored
///   manifest.jsonl, ledger.jsonl        written by finalize()
class EvidenceBundle {
 public:
  static constexpr std::string_view kManifestFile = "manifest.jsonl";
  static constexpr std::string_view kPartialManifestFile = "manifest.partial.jsonl";
  static constexpr std::string_view kLedgerFile = "ledger.jsonl";

  /// Requires `root` to be absent or empty unless `resume` is set, in which
  /// case records of an interrupted run are re-verified and kept.
  EvidenceBundle(std::filesystem::path root, std::string credentials_fingerprint,
                 bool resume = false);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Writes `bytes` to bundle_path and appends the record. Thread-safe.
  EvidenceRecord store(EvidenceRecord record, std::string_view bytes);
  EvidenceRecord record_error(EvidenceRecord record, std::string message);
  void make_directory(std::string_view bundle_path);

  /// True when a resumed record for this path was re-verified on disk.
  bool already_acquired(std::string_view bundle_path) const;
  /// A bundle path not used yet, derived from `preferred`.
  std::string unique_path(std::string_view preferred);

  std::vector<EvidenceRecord> records() const;

  /// Writes the ledger and the final manifest; returns the manifest.
  EvidenceManifest finalize(const RequestLedger& ledger);

 private:
  void append_line(const EvidenceRecord& record);

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  EvidenceManifest manifest_;
  std::set<std::string> used_paths_;
  std::set<std::string> resumed_;
  std::ofstream partial_;
};

/// Makes a relative path safe for the bundle: strips leading '/', rejects
/// "." and ".." segments.
std::string sanitize_bundle_path(std::string_view path);

struct DumpOptions {
  std::string root_path;
  bool include_trash = true;
  bool include_versions = true;
  bool resume = false;
  std::size_t parallel_downloads = 4;
};

/// Preservation & collection against one account. Every request goes
/// through the acquisition method policy.
class Acquisition {
 public:
  static constexpr std::size_t kMaxParallelDownloads = 4;

  explicit Acquisition(Transport& transport);

  EvidenceManifest dump(const std::filesystem::path& out_dir,
                        const DumpOptions& options = {});
  /// Trash-only bundle.
  EvidenceManifest acquire_trash(const std::filesystem::path& out_dir);
  /// Versions of one file as a bundle.
  EvidenceManifest acquire_versions(std::int64_t file_id,
                                    const std::filesystem::path& out_dir);

  // Building blocks shared with the monitor; they write into an open bundle.
  std::vector<EvidenceRecord> collect_files(EvidenceBundle& bundle,
                                            const std::vector<ResourceEntry>& entries,
                                            std::string_view prefix,
                                            std::size_t parallel);
  /// With `only` set, just the named trash items are collected.
  std::vector<EvidenceRecord> collect_trash(
      EvidenceBundle& bundle, std::string_view prefix = "trash",
      const std::set<std::string>* only = nullptr);
  std::vector<EvidenceRecord> collect_versions(EvidenceBundle& bundle,
                                               std::int64_t file_id);

 private:
  void collect_trash_directory(EvidenceBundle& bundle, const TrashEntry& entry,
                               const std::string& href,
                               const std::string& bundle_dir,
                               std::vector<EvidenceRecord>& out);

  Transport& transport_;
  WebDavClient dav_;
};

/// Routes successful raw responses into metadata/ while alive.
class MetadataRecorder {
 public:
  MetadataRecorder(Transport& transport, EvidenceBundle& bundle);
  ~MetadataRecorder();
  MetadataRecorder(const MetadataRecorder&) = delete;
  MetadataRecorder& operator=(const MetadataRecorder&) = delete;

 private:
  Transport& transport_;
};

struct VerificationReport {
  std::vector<std::string> matched;
  std::vector<std::string> mismatched;
  std::vector<std::string> missing;
  std::size_t skipped_error_records = 0;

  bool ok() const { return mismatched.empty() && missing.empty(); }
};

/// Recomputes every stored digest (and the ledger digest). Throws
/// Error(manifest_missing) / Error(manifest_corrupt).
VerificationReport verify_bundle(const std::filesystem::path& bundle_dir);

Json to_json(const VerificationReport& report);

}  // namespace ncf
