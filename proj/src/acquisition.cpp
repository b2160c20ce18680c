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

#include "ncf/acquisition.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "ncf/digest.hpp"
#include "ncf/encoding.hpp"
#include "ncf/error.hpp"
#include "ncf/ocs_client.hpp"

namespace ncf {
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxMetadataName = 180;

bool directory_is_empty(const fs::path& p) {
  return fs::is_directory(p) && fs::directory_iterator(p) == fs::directory_iterator();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::not_found, "cannot open " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& p, std::string_view bytes) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::input_error, "cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::input_error, "short write to " + p.string());
}

std::string target_path(std::string_view target) {
  const auto q = target.find('?');
  return std::string(target.substr(0, q));
}

Json optional_json(const std::optional<std::string>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string href_to_target(std::string_view href) {
  const auto scheme = href.find("://");
  if (scheme != std::string_view::npos) {
    const auto slash = href.find('/', scheme + 3);
    return slash == std::string_view::npos ? "/" : std::string(href.substr(slash));
  }
  return std::string(href);
}

std::string last_segment(std::string_view path) {
  while (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
  const auto pos = path.rfind('/');
  return std::string(pos == std::string_view::npos ? path : path.substr(pos + 1));
}

}  // namespace

std::string_view to_string(EvidenceCategory c) noexcept {
  switch (c) {
    case EvidenceCategory::files: return "files";
    case EvidenceCategory::trash: return "trash";
    case EvidenceCategory::versions: return "versions";
    case EvidenceCategory::metadata: return "metadata";
  }
  return "unknown";
}

EvidenceCategory evidence_category_from_string(std::string_view text) {
  if (text == "files") return EvidenceCategory::files;
  if (text == "trash") return EvidenceCategory::trash;
  if (text == "versions") return EvidenceCategory::versions;
  if (text == "metadata") return EvidenceCategory::metadata;
  throw Error(ErrorKind::parse_error, "unknown category " + std::string(text));
}

Json to_json(const EvidenceRecord& r) {
  Json j;
  j["kind"] = "record";
  j["bundle_path"] = r.bundle_path;
  j["category"] = std::string(to_string(r.category));
  j["source_url"] = r.source_url;
  j["retrieved_at"] = format_instant(r.retrieved_at);
  j["sha256"] = r.sha256;
  j["byte_length"] = r.byte_length;
  j["server_etag"] = optional_json(r.server_etag);
  j["server_mtime"] = r.server_mtime ? Json(*r.server_mtime) : Json(nullptr);
  j["annotations"] = r.annotations;
  j["error"] = optional_json(r.error);
  return j;
}

EvidenceRecord evidence_record_from_json(const Json& j) {
  EvidenceRecord r;
  r.bundle_path = j.at("bundle_path").get<std::string>();
  r.category = evidence_category_from_string(j.at("category").get<std::string>());
  r.source_url = j.at("source_url").get<std::string>();
  auto t = parse_iso8601(j.at("retrieved_at").get<std::string>());
  if (!t) throw Error(ErrorKind::parse_error, "bad retrieved_at");
  r.retrieved_at = *t;
  r.sha256 = j.at("sha256").get<std::string>();
  r.byte_length = j.at("byte_length").get<std::uint64_t>();
  if (!j.at("server_etag").is_null()) r.server_etag = j.at("server_etag").get<std::string>();
  if (!j.at("server_mtime").is_null()) r.server_mtime = j.at("server_mtime").get<std::int64_t>();
  r.annotations = j.at("annotations");
  if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  return r;
}

// Manifest -------------------------------------------------------------------

std::string EvidenceManifest::serialize() const {
  Json header;
  header["kind"] = "manifest";
  header["tool_version"] = tool_version;
  header["credentials_fingerprint"] = credentials_fingerprint;
  header["started_at"] = format_instant(started_at);
  std::string out = canonical_line(header);
  for (const auto& r : records) out += canonical_line(to_json(r));
  Json summary;
  summary["kind"] = "summary";
  summary["finished_at"] = format_instant(finished_at);
  summary["record_count"] = records.size();
  summary["request_ledger_digest"] = request_ledger_digest;
  out += canonical_line(summary);
  return out;
}

EvidenceManifest EvidenceManifest::parse(std::string_view text) {
  EvidenceManifest m;
  try {
    const auto lines = parse_lines(text);
    if (lines.size() < 2 || lines.front().at("kind") != "manifest" ||
        lines.back().at("kind") != "summary") {
      throw Error(ErrorKind::manifest_corrupt, "manifest framing is incomplete");
    }
    const Json& header = lines.front();
    m.tool_version = header.at("tool_version").get<std::string>();
    m.credentials_fingerprint = header.at("credentials_fingerprint").get<std::string>();
    auto started = parse_iso8601(header.at("started_at").get<std::string>());
    const Json& summary = lines.back();
    auto finished = parse_iso8601(summary.at("finished_at").get<std::string>());
    if (!started || !finished) {
      throw Error(ErrorKind::manifest_corrupt, "manifest timestamps unparseable");
    }
    m.started_at = *started;
    m.finished_at = *finished;
    m.request_ledger_digest = summary.at("request_ledger_digest").get<std::string>();
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
      if (lines[i].at("kind") != "record") {
        throw Error(ErrorKind::manifest_corrupt, "unexpected manifest line kind");
      }
      m.records.push_back(evidence_record_from_json(lines[i]));
    }
    if (summary.at("record_count").get<std::size_t>() != m.records.size()) {
      throw Error(ErrorKind::manifest_corrupt, "record count mismatch");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::manifest_corrupt) throw;
    throw Error(ErrorKind::manifest_corrupt, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::manifest_corrupt, e.what());
  }
  return m;
}

std::string EvidenceManifest::digest() const { return sha256_hex(serialize()); }

std::size_t EvidenceManifest::error_count() const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [](const auto& r) { return r.error.has_value(); }));
}

std::vector<const EvidenceRecord*> EvidenceManifest::by_category(
    EvidenceCategory c) const {
  std::vector<const EvidenceRecord*> out;
  for (const auto& r : records) {
    if (r.category == c) out.push_back(&r);
  }
  return out;
}

// Bundle ---------------------------------------------------------------------

std::string sanitize_bundle_path(std::string_view path) {
  std::string out;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    std::string_view seg = path.substr(start, end - start);
    if (seg == "." || seg == "..") {
      throw Error(ErrorKind::input_error,
                  "refusing path segment '" + std::string(seg) + "'");
    }
    if (!seg.empty()) {
      if (!out.empty()) out.push_back('/');
      out.append(seg);
    }
    start = end + 1;
  }
  if (out.empty()) throw Error(ErrorKind::input_error, "empty bundle path");
  return out;
}

EvidenceBundle::EvidenceBundle(fs::path root, std::string fingerprint, bool resume)
    : root_(std::move(root)) {
  manifest_.credentials_fingerprint = std::move(fingerprint);
  manifest_.started_at = now_utc();
  if (fs::exists(root_) && !directory_is_empty(root_)) {
    if (!resume) {
      throw Error(ErrorKind::out_dir_not_empty,
                  "output directory is not empty: " + root_.string());
    }
    const fs::path partial = root_ / kPartialManifestFile;
    const fs::path final_manifest = root_ / kManifestFile;
    std::vector<EvidenceRecord> previous;
    if (fs::exists(partial)) {
      const auto lines = parse_lines(read_file(partial));
      for (const auto& line : lines) {
        if (line.value("kind", "") == "manifest") {
          if (auto t = parse_iso8601(line.at("started_at").get<std::string>())) {
            manifest_.started_at = *t;
          }
        } else if (line.value("kind", "") == "record") {
          previous.push_back(evidence_record_from_json(line));
        }
      }
    } else if (fs::exists(final_manifest)) {
      auto m = EvidenceManifest::parse(read_file(final_manifest));
      manifest_.started_at = m.started_at;
      previous = std::move(m.records);
    }
    fs::remove(final_manifest);
    for (auto& r : previous) {
      if (r.error) continue;
      const fs::path stored = root_ / r.bundle_path;
      if (fs::exists(stored) && sha256_file_hex(stored) == r.sha256) {
        resumed_.insert(r.bundle_path);
        used_paths_.insert(r.bundle_path);
        manifest_.records.push_back(std::move(r));
      }
    }
  }
  fs::create_directories(root_);
  partial_.open(root_ / kPartialManifestFile, std::ios::binary | std::ios::trunc);
  if (!partial_) {
    throw Error(ErrorKind::input_error, "cannot write manifest in " + root_.string());
  }
  Json header;
  header["kind"] = "manifest";
  header["tool_version"] = manifest_.tool_version;
  header["credentials_fingerprint"] = manifest_.credentials_fingerprint;
  header["started_at"] = format_instant(manifest_.started_at);
  partial_ << canonical_line(header);
  for (const auto& r : manifest_.records) partial_ << canonical_line(to_json(r));
  partial_.flush();
}

void EvidenceBundle::append_line(const EvidenceRecord& record) {
  partial_ << canonical_line(to_json(record));
  partial_.flush();
}

std::string EvidenceBundle::unique_path(std::string_view preferred) {
  std::lock_guard lock(mutex_);
  const std::string base = sanitize_bundle_path(preferred);
  std::string candidate = base;
  for (int n = 2; used_paths_.count(candidate) > 0; ++n) {
    candidate = base + "." + std::to_string(n);
  }
  used_paths_.insert(candidate);
  return candidate;
}

bool EvidenceBundle::already_acquired(std::string_view bundle_path) const {
  std::lock_guard lock(mutex_);
  return resumed_.count(std::string(bundle_path)) > 0;
}

void EvidenceBundle::make_directory(std::string_view bundle_path) {
  fs::create_directories(root_ / sanitize_bundle_path(bundle_path));
}

EvidenceRecord EvidenceBundle::store(EvidenceRecord record, std::string_view bytes) {
  record.bundle_path = sanitize_bundle_path(record.bundle_path);
  record.sha256 = sha256_hex(bytes);
  record.byte_length = bytes.size();
  record.error.reset();
  std::lock_guard lock(mutex_);
  used_paths_.insert(record.bundle_path);
  write_file(root_ / record.bundle_path, bytes);
  Instant now = now_utc();
  if (!manifest_.records.empty() && now < manifest_.records.back().retrieved_at) {
    now = manifest_.records.back().retrieved_at;
  }
  record.retrieved_at = now;
  manifest_.records.push_back(record);
  append_line(record);
  return record;
}

EvidenceRecord EvidenceBundle::record_error(EvidenceRecord record, std::string message) {
  record.sha256.clear();
  record.byte_length = 0;
  record.error = std::move(message);
  std::lock_guard lock(mutex_);
  used_paths_.insert(record.bundle_path);
  Instant now = now_utc();
  if (!manifest_.records.empty() && now < manifest_.records.back().retrieved_at) {
    now = manifest_.records.back().retrieved_at;
  }
  record.retrieved_at = now;
  manifest_.records.push_back(record);
  append_line(record);
  return record;
}

std::vector<EvidenceRecord> EvidenceBundle::records() const {
  std::lock_guard lock(mutex_);
  return manifest_.records;
}

EvidenceManifest EvidenceBundle::finalize(const RequestLedger& ledger) {
  std::lock_guard lock(mutex_);
  const std::string ledger_text = ledger.serialize();
  write_file(root_ / kLedgerFile, ledger_text);
  manifest_.request_ledger_digest = sha256_hex(ledger_text);
  manifest_.finished_at = now_utc();
  write_file(root_ / kManifestFile, manifest_.serialize());
  partial_.close();
  fs::remove(root_ / kPartialManifestFile);
  return manifest_;
}

// Metadata recorder ----------------------------------------------------------

MetadataRecorder::MetadataRecorder(Transport& transport, EvidenceBundle& bundle)
    : transport_(transport) {
  transport_.set_response_observer(
      [&transport, &bundle](const HttpRequest& req, const HttpResponse& res) {
        const std::string path = target_path(req.target);
        const bool is_ocs = path.find("/ocs/") != std::string::npos;
        if (req.method != "PROPFIND" && !is_ocs) return;
        std::string relative = percent_decode(path);
        const std::string base = transport.base().path + "/";
        if (relative.rfind(base, 0) == 0) relative = relative.substr(base.size());
        const auto q = req.target.find('?');
        if (q != std::string::npos) relative += "?" + req.target.substr(q + 1);
        std::string name = percent_encode_component(relative);
        if (name.size() > kMaxMetadataName) {
          name = name.substr(0, 120) + "~" + sha256_hex(relative).substr(0, 16);
        }
        std::string method = req.method;
        std::transform(method.begin(), method.end(), method.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        const std::string ext = req.method == "PROPFIND" ? ".xml" : ".json";
        EvidenceRecord record;
        record.category = EvidenceCategory::metadata;
        record.bundle_path = bundle.unique_path("metadata/" + method + "_" + name + ext);
        record.source_url = transport.absolute_url(req.target);
        record.annotations["method"] = req.method;
        record.annotations["status"] = res.status;
        if (auto it = req.headers.find("Depth"); it != req.headers.end()) {
          record.annotations["depth"] = it->second;
        }
        bundle.store(std::move(record), res.body);
      });
}

MetadataRecorder::~MetadataRecorder() { transport_.set_response_observer({}); }

// Acquisition ----------------------------------------------------------------

Acquisition::Acquisition(Transport& transport)
    : transport_(transport), dav_(transport, MethodPolicy::acquisition()) {}

std::vector<EvidenceRecord> Acquisition::collect_files(
    EvidenceBundle& bundle, const std::vector<ResourceEntry>& entries,
    std::string_view prefix, std::size_t parallel) {
  std::vector<const ResourceEntry*> files;
  for (const auto& e : entries) {
    if (e.relative_path.empty()) continue;
    if (e.is_directory) {
      bundle.make_directory(std::string(prefix) + "/" + e.relative_path);
    } else {
      files.push_back(&e);
    }
  }
  std::vector<EvidenceRecord> out;
  std::mutex out_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      const ResourceEntry& e = *files[i];
      EvidenceRecord record;
      record.category = EvidenceCategory::files;
      record.source_url = transport_.absolute_url(href_to_target(e.href));
      record.server_etag = e.etag;
      record.server_mtime = e.last_modified;
      record.annotations["file_id"] = e.file_id;
      record.annotations["relative_path"] = e.relative_path;
      try {
        record.bundle_path = sanitize_bundle_path(std::string(prefix) + "/" + e.relative_path);
        if (bundle.already_acquired(record.bundle_path)) continue;
        const std::string bytes = dav_.get_content(e.href);
        if (bytes.size() != e.size) {
          record.annotations["listed_size"] = e.size;
        }
        EvidenceRecord stored = bundle.store(std::move(record), bytes);
        std::lock_guard lock(out_mutex);
        out.push_back(std::move(stored));
      } catch (const Error& err) {
        if (err.kind() == ErrorKind::auth_failed) throw;
        if (record.bundle_path.empty()) {
          record.bundle_path = bundle.unique_path(std::string(prefix) + "/_unsafe_name");
        }
        EvidenceRecord failed = bundle.record_error(std::move(record), err.what());
        std::lock_guard lock(out_mutex);
        out.push_back(std::move(failed));
      }
    }
  };
  const std::size_t n =
      std::clamp<std::size_t>(parallel, 1, kMaxParallelDownloads);
  std::vector<std::thread> threads;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t t = 0; t < std::min(n, files.size()); ++t) {
    threads.emplace_back([&] {
      try {
        worker();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = files.size();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

void Acquisition::collect_trash_directory(EvidenceBundle& bundle,
                                          const TrashEntry& entry,
                                          const std::string& href,
                                          const std::string& bundle_dir,
                                          std::vector<EvidenceRecord>& out) {
  bundle.make_directory(bundle_dir);
  for (const auto& child : dav_.list_collection(href, trash_properties())) {
    const std::string name = last_segment(percent_decode(href_to_target(child.href)));
    const std::string child_path = bundle_dir + "/" + name;
    if (child.is_collection) {
      collect_trash_directory(bundle, entry, href_to_target(child.href), child_path, out);
      continue;
    }
    EvidenceRecord record;
    record.category = EvidenceCategory::trash;
    record.source_url = transport_.absolute_url(href_to_target(child.href));
    record.annotations["trash_name"] = entry.trash_name;
    record.annotations["original_location"] = entry.original_location;
    record.annotations["deletion_time"] = entry.deletion_time;
    try {
      record.bundle_path = sanitize_bundle_path(child_path);
      if (bundle.already_acquired(record.bundle_path)) continue;
      out.push_back(bundle.store(record, dav_.get_content(child.href)));
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::auth_failed) throw;
      if (record.bundle_path.empty()) record.bundle_path = bundle.unique_path(bundle_dir + "/_unsafe_name");
      out.push_back(bundle.record_error(record, err.what()));
    }
  }
}

std::vector<EvidenceRecord> Acquisition::collect_trash(
    EvidenceBundle& bundle, std::string_view prefix,
    const std::set<std::string>* only) {
  std::vector<EvidenceRecord> out;
  for (const TrashEntry& entry : dav_.list_trash()) {
    if (only != nullptr && only->count(entry.trash_name) == 0) continue;
    EvidenceRecord sidecar;
    sidecar.category = EvidenceCategory::metadata;
    sidecar.bundle_path = bundle.unique_path("metadata/trash/" + entry.trash_name + ".json");
    sidecar.source_url = transport_.absolute_url(href_to_target(entry.href));
    sidecar.annotations["trash_name"] = entry.trash_name;
    const std::string sidecar_path = sidecar.bundle_path;
    out.push_back(bundle.store(std::move(sidecar), canonical_line(to_json(entry))));

    const std::string bundle_path = std::string(prefix) + "/" + entry.trash_name;
    if (entry.is_directory) {
      collect_trash_directory(bundle, entry, href_to_target(entry.href), bundle_path, out);
      continue;
    }
    EvidenceRecord record;
    record.category = EvidenceCategory::trash;
    record.source_url = transport_.absolute_url(href_to_target(entry.href));
    record.annotations["trash_name"] = entry.trash_name;
    record.annotations["original_location"] = entry.original_location;
    record.annotations["deletion_time"] = entry.deletion_time;
    record.annotations["file_id"] = entry.file_id;
    record.annotations["sidecar"] = sidecar_path;
    try {
      record.bundle_path = sanitize_bundle_path(bundle_path);
      if (bundle.already_acquired(record.bundle_path)) continue;
      out.push_back(bundle.store(record, dav_.get_content(entry.href)));
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::auth_failed) throw;
      if (record.bundle_path.empty()) record.bundle_path = bundle.unique_path("trash/_unsafe_name");
      out.push_back(bundle.record_error(record, err.what()));
    }
  }
  return out;
}

std::vector<EvidenceRecord> Acquisition::collect_versions(EvidenceBundle& bundle,
                                                          std::int64_t file_id) {
  std::vector<VersionEntry> versions;
  try {
    versions = dav_.list_versions(file_id);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::not_found) return {};
    throw;
  }
  std::vector<EvidenceRecord> out;
  for (const auto& v : versions) {
    EvidenceRecord record;
    record.category = EvidenceCategory::versions;
    record.bundle_path = "versions/" + std::to_string(file_id) + "/" +
                         std::to_string(v.version_timestamp);
    record.source_url = transport_.absolute_url(href_to_target(v.href));
    record.server_etag = v.etag;
    record.server_mtime = v.version_timestamp;
    record.annotations["file_id"] = file_id;
    record.annotations["version_timestamp"] = v.version_timestamp;
    if (bundle.already_acquired(record.bundle_path)) continue;
    try {
      out.push_back(bundle.store(record, dav_.get_content(v.href)));
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::auth_failed) throw;
      out.push_back(bundle.record_error(record, err.what()));
    }
  }
  return out;
}

EvidenceManifest Acquisition::dump(const fs::path& out_dir, const DumpOptions& options) {
  EvidenceBundle bundle(out_dir, transport_.credentials().fingerprint(), options.resume);
  {
    MetadataRecorder recorder(transport_, bundle);
    OcsClient ocs(transport_);
    ocs.get_current_user();

    auto best_effort = [&](const std::string& what, auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::auth_failed) throw;
        EvidenceRecord r;
        r.category = EvidenceCategory::metadata;
        r.bundle_path = bundle.unique_path("metadata/errors/" + what);
        r.source_url = transport_.credentials().base_url;
        bundle.record_error(std::move(r), e.what());
      }
    };
    best_effort("capabilities", [&] { ocs.get_capabilities(); });
    best_effort("shares", [&] { ocs.list_shares(); });

    const WalkResult walked = dav_.walk(options.root_path);
    for (const auto& failure : walked.failures) {
      EvidenceRecord r;
      r.category = EvidenceCategory::files;
      r.bundle_path = bundle.unique_path("files/" + failure.relative_path);
      r.source_url = transport_.absolute_url(dav_.files_href(failure.relative_path));
      bundle.record_error(std::move(r), failure.message);
    }
    collect_files(bundle, walked.entries, "files", options.parallel_downloads);

    if (options.include_trash) {
      best_effort("trash", [&] { collect_trash(bundle); });
    }
    if (options.include_versions) {
      for (const auto& e : walked.entries) {
        if (e.is_directory) continue;
        best_effort("versions-" + std::to_string(e.file_id),
                    [&] { collect_versions(bundle, e.file_id); });
      }
    }
  }
  return bundle.finalize(transport_.ledger());
}

EvidenceManifest Acquisition::acquire_trash(const fs::path& out_dir) {
  EvidenceBundle bundle(out_dir, transport_.credentials().fingerprint());
  {
    MetadataRecorder recorder(transport_, bundle);
    collect_trash(bundle);
  }
  return bundle.finalize(transport_.ledger());
}

EvidenceManifest Acquisition::acquire_versions(std::int64_t file_id,
                                               const fs::path& out_dir) {
  EvidenceBundle bundle(out_dir, transport_.credentials().fingerprint());
  {
    MetadataRecorder recorder(transport_, bundle);
    collect_versions(bundle, file_id);
  }
  return bundle.finalize(transport_.ledger());
}

// Verification ---------------------------------------------------------------

VerificationReport verify_bundle(const fs::path& bundle_dir) {
  const fs::path manifest_path = bundle_dir / EvidenceBundle::kManifestFile;
  if (!fs::exists(manifest_path)) {
    throw Error(ErrorKind::manifest_missing,
                "no manifest in " + bundle_dir.string());
  }
  const EvidenceManifest manifest = EvidenceManifest::parse(read_file(manifest_path));
  VerificationReport report;
  auto check = [&](const std::string& bundle_path, const std::string& expected) {
    const fs::path stored = bundle_dir / bundle_path;
    if (!fs::is_regular_file(stored)) {
      report.missing.push_back(bundle_path);
    } else if (sha256_file_hex(stored) != expected) {
      report.mismatched.push_back(bundle_path);
    } else {
      report.matched.push_back(bundle_path);
    }
  };
  for (const auto& r : manifest.records) {
    if (r.error) {
      ++report.skipped_error_records;
      continue;
    }
    check(r.bundle_path, r.sha256);
  }
  if (!manifest.request_ledger_digest.empty()) {
    check(std::string(EvidenceBundle::kLedgerFile), manifest.request_ledger_digest);
  }
  return report;
}

Json to_json(const VerificationReport& report) {
  Json j;
  j["ok"] = report.ok();
  j["matched"] = report.matched.size();
  j["mismatched"] = report.mismatched;
  j["missing"] = report.missing;
  j["skipped_error_records"] = report.skipped_error_records;
  return j;
}

}  // namespace ncf
