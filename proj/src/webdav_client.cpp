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

#include "ncf/webdav_client.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <future>

#include "ncf/encoding.hpp"
#include "ncf/timeutil.hpp"

namespace ncf {
namespace {

std::string trim_slashes(std::string_view s) {
  while (!s.empty() && s.front() == '/') s.remove_prefix(1);
  while (!s.empty() && s.back() == '/') s.remove_suffix(1);
  return std::string(s);
}

std::string strip_trailing_slash(std::string_view s) {
  while (s.size() > 1 && s.back() == '/') s.remove_suffix(1);
  return std::string(s);
}

/// Reduces an href (absolute URL or absolute path) to its path.
std::string href_path(std::string_view href) {
  const auto scheme = href.find("://");
  if (scheme != std::string_view::npos) {
    const auto slash = href.find('/', scheme + 3);
    return slash == std::string_view::npos ? "/" : std::string(href.substr(slash));
  }
  return std::string(href);
}

std::string last_segment(std::string_view path) {
  std::string p = strip_trailing_slash(path);
  const auto pos = p.rfind('/');
  return pos == std::string::npos ? p : p.substr(pos + 1);
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return out;
}

std::int64_t int_prop(const DavResponse& r, const PropertyName& p,
                      std::int64_t dflt = 0) {
  const std::string* v = r.find(p);
  if (v == nullptr || v->empty()) return dflt;
  auto parsed = parse_int(*v);
  if (!parsed) {
    throw Error(ErrorKind::parse_error,
                "property " + p.to_string() + " is not an integer: " + *v);
  }
  return *parsed;
}

std::string str_prop(const DavResponse& r, const PropertyName& p) {
  const std::string* v = r.find(p);
  return v == nullptr ? std::string{} : *v;
}

std::uint64_t size_of(const DavResponse& r) {
  if (r.has(dav_prop("getcontentlength"))) {
    return static_cast<std::uint64_t>(int_prop(r, dav_prop("getcontentlength")));
  }
  return static_cast<std::uint64_t>(int_prop(r, oc_prop("size")));
}

Json optional_int(const std::optional<std::int64_t>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string strip_etag_quotes(std::string_view etag) {
  if (etag.size() >= 2 && etag.front() == '"' && etag.back() == '"') {
    etag = etag.substr(1, etag.size() - 2);
  }
  return std::string(etag);
}

WebDavClient::WebDavClient(Transport& transport, MethodPolicy policy)
    : transport_(transport),
      policy_(std::move(policy)),
      username_(transport.credentials().username) {}

std::string WebDavClient::files_root() const {
  return transport_.endpoint("remote.php/dav/files/" +
                             percent_encode_component(username_));
}

std::string WebDavClient::trash_root(std::string_view username) const {
  const std::string user = username.empty() ? username_ : std::string(username);
  return transport_.endpoint("remote.php/dav/trashbin/" +
                             percent_encode_component(user) + "/trash");
}

std::string WebDavClient::versions_root(std::string_view username,
                                        std::int64_t file_id) const {
  const std::string user = username.empty() ? username_ : std::string(username);
  return transport_.endpoint("remote.php/dav/versions/" +
                             percent_encode_component(user) + "/versions/" +
                             std::to_string(file_id));
}

std::string WebDavClient::files_href(std::string_view relative_path) const {
  const std::string rel = trim_slashes(relative_path);
  if (rel.empty()) return files_root() + "/";
  return files_root() + "/" + percent_encode_path(rel);
}

std::vector<DavResponse> WebDavClient::propfind_raw(
    const std::string& target, int depth,
    const std::vector<PropertyName>& properties) {
  if (depth != 0 && depth != 1) {
    throw Error(ErrorKind::input_error, "PROPFIND depth must be 0 or 1");
  }
  HttpRequest req;
  req.method = "PROPFIND";
  req.target = target;
  req.headers["Depth"] = std::to_string(depth);
  req.headers["Content-Type"] = "application/xml; charset=utf-8";
  req.body = build_propfind_body(properties);
  const HttpResponse res = transport_.execute(req, policy_);
  if (res.status != 207) {
    throw Error(ErrorKind::parse_error,
                "PROPFIND " + target + " returned HTTP " +
                    std::to_string(res.status) + " instead of 207",
                res.status);
  }
  return parse_multistatus(res.body);
}

ResourceEntry WebDavClient::to_resource(const DavResponse& r) const {
  ResourceEntry e;
  e.href = r.href;
  const std::string decoded = percent_decode(href_path(r.href));
  const std::string root = percent_decode(files_root());
  if (decoded.rfind(root, 0) != 0 ||
      (decoded.size() > root.size() && decoded[root.size()] != '/')) {
    throw Error(ErrorKind::parse_error,
                "href outside the files tree: " + r.href);
  }
  e.relative_path = trim_slashes(std::string_view(decoded).substr(root.size()));
  e.name = last_segment(e.relative_path);
  e.is_directory = r.is_collection;
  e.file_id = int_prop(r, oc_prop("fileid"));
  e.size = size_of(r);
  e.content_type = e.is_directory ? std::string{}
                                  : str_prop(r, dav_prop("getcontenttype"));
  e.etag = strip_etag_quotes(str_prop(r, dav_prop("getetag")));
  e.last_modified_raw = str_prop(r, dav_prop("getlastmodified"));
  if (!e.last_modified_raw.empty()) {
    e.last_modified = parse_http_date(e.last_modified_raw);
  }
  e.owner_id = str_prop(r, oc_prop("owner-id"));
  e.permissions = str_prop(r, oc_prop("permissions"));
  return e;
}

std::vector<ResourceEntry> WebDavClient::propfind(
    std::string_view relative_path, int depth,
    const std::vector<PropertyName>& properties) {
  const std::string wanted = trim_slashes(relative_path);
  auto responses = propfind_raw(files_href(wanted), depth, properties);
  std::vector<ResourceEntry> out;
  out.reserve(responses.size());
  for (const auto& r : responses) out.push_back(to_resource(r));
  auto self = std::find_if(out.begin(), out.end(), [&](const ResourceEntry& e) {
    return e.relative_path == wanted;
  });
  if (self == out.end()) {
    throw Error(ErrorKind::parse_error,
                "multistatus for '" + wanted + "' lacks the addressed resource");
  }
  std::rotate(out.begin(), self, self + 1);
  if (depth == 0 && out.size() != 1) {
    throw Error(ErrorKind::parse_error,
                "depth-0 PROPFIND returned " + std::to_string(out.size()) +
                    " responses");
  }
  return out;
}

WalkResult WebDavClient::walk(std::string_view root_path,
                              const WalkVisitor& visitor,
                              const std::vector<PropertyName>& properties) {
  WalkResult result;
  bool stopped = false;
  std::deque<ResourceEntry> pending;

  auto emit_children = [&](std::vector<ResourceEntry>& listing) {
    // listing[0] is the directory itself and has already been emitted.
    for (std::size_t i = 1; i < listing.size() && !stopped; ++i) {
      result.entries.push_back(listing[i]);
      if (visitor && !visitor(result.entries.back())) stopped = true;
      if (listing[i].is_directory) pending.push_back(listing[i]);
    }
  };

  std::vector<ResourceEntry> root;
  try {
    root = propfind(root_path, 1, properties);
  } catch (const Error& e) {
    throw Error(e.kind(),
                "walk '" + std::string(root_path) + "': " + e.what(), e.status());
  }
  result.entries.push_back(root.front());
  if (visitor && !visitor(result.entries.back())) return result;
  if (!root.front().is_directory) return result;
  emit_children(root);

  while (!pending.empty() && !stopped) {
    std::vector<ResourceEntry> batch;
    while (!pending.empty() && batch.size() < kMaxConcurrentPropfinds) {
      batch.push_back(std::move(pending.front()));
      pending.pop_front();
    }
    std::vector<std::future<std::vector<ResourceEntry>>> futures;
    for (const auto& dir : batch) {
      futures.push_back(std::async(std::launch::async, [this, &dir, &properties] {
        auto responses = propfind_raw(href_path(dir.href), 1, properties);
        std::vector<ResourceEntry> listing;
        for (const auto& r : responses) listing.push_back(to_resource(r));
        auto self = std::find_if(listing.begin(), listing.end(),
                                 [&](const ResourceEntry& e) {
                                   return e.relative_path == dir.relative_path;
                                 });
        if (self == listing.end()) {
          throw Error(ErrorKind::parse_error,
                      "multistatus lacks the addressed collection");
        }
        std::rotate(listing.begin(), self, self + 1);
        return listing;
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) {
      try {
        auto listing = futures[i].get();
        if (!stopped) emit_children(listing);
      } catch (const Error& e) {
        result.failures.push_back({batch[i].relative_path, e.kind(), e.what()});
      }
    }
  }
  return result;
}

std::string WebDavClient::get_content(std::string_view href) {
  HttpRequest req;
  req.method = "GET";
  req.target = href_path(href);
  return transport_.execute(req, policy_).body;
}

TrashEntry WebDavClient::to_trash_entry(const DavResponse& r) const {
  TrashEntry t;
  t.href = r.href;
  t.trash_name = last_segment(percent_decode(href_path(r.href)));
  t.original_name = str_prop(r, nc_prop("trashbin-filename"));
  t.original_location = str_prop(r, nc_prop("trashbin-original-location"));
  const std::string* when = r.find(nc_prop("trashbin-deletion-time"));
  if (when == nullptr) {
    throw Error(ErrorKind::parse_error,
                "trash item without deletion time: " + r.href);
  }
  auto parsed = parse_int(*when);
  if (!parsed) {
    throw Error(ErrorKind::parse_error, "bad trashbin-deletion-time: " + *when);
  }
  t.deletion_time = *parsed;
  t.size = size_of(r);
  t.file_id = int_prop(r, oc_prop("fileid"));
  t.is_directory = r.is_collection;
  return t;
}

std::vector<DavResponse> WebDavClient::list_collection(
    std::string_view href, const std::vector<PropertyName>& properties) {
  const std::string target = href_path(href);
  auto responses = propfind_raw(target, 1, properties);
  const std::string self = strip_trailing_slash(percent_decode(target));
  std::erase_if(responses, [&](const DavResponse& r) {
    return strip_trailing_slash(percent_decode(href_path(r.href))) == self;
  });
  return responses;
}

std::vector<TrashEntry> WebDavClient::list_trash(std::string_view username) {
  std::vector<TrashEntry> out;
  for (const auto& r : list_collection(trash_root(username) + "/", trash_properties())) {
    out.push_back(to_trash_entry(r));
  }
  return out;
}

std::vector<VersionEntry> WebDavClient::list_versions(std::string_view username,
                                                      std::int64_t file_id) {
  if (file_id < 0) {
    throw Error(ErrorKind::input_error, "file_id must be non-negative");
  }
  std::vector<VersionEntry> out;
  for (const auto& r :
       list_collection(versions_root(username, file_id) + "/", version_properties())) {
    VersionEntry v;
    v.file_id = file_id;
    v.href = r.href;
    const std::string segment = last_segment(percent_decode(href_path(r.href)));
    auto ts = parse_int(segment);
    if (!ts) {
      throw Error(ErrorKind::parse_error, "version href without timestamp: " + r.href);
    }
    v.version_timestamp = *ts;
    v.etag = strip_etag_quotes(str_prop(r, dav_prop("getetag")));
    v.size = size_of(r);
    out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.version_timestamp > b.version_timestamp;
  });
  return out;
}

std::string WebDavClient::resolve_file_id(std::int64_t file_id) {
  if (file_id < 0) {
    throw Error(ErrorKind::input_error, "file_id must be non-negative");
  }
  std::optional<std::string> found;
  const WalkResult walked = walk(
      "",
      [&](const ResourceEntry& e) {
        if (e.file_id == file_id) {
          found = e.relative_path;
          return false;
        }
        return true;
      },
      {oc_prop("fileid"), dav_prop("resourcetype")});
  if (found) return *found;
  std::string msg = "file id " + std::to_string(file_id) + " not found";
  if (!walked.complete()) msg += " (traversal incomplete)";
  throw Error(ErrorKind::not_found, msg);
}

// Canonical serialization ------------------------------------------------------

Json to_json(const ResourceEntry& e) {
  Json j;
  j["file_id"] = e.file_id;
  j["relative_path"] = e.relative_path;
  j["name"] = e.name;
  j["is_directory"] = e.is_directory;
  j["size"] = e.size;
  j["content_type"] = e.content_type;
  j["etag"] = e.etag;
  j["last_modified"] = optional_int(e.last_modified);
  j["last_modified_raw"] = e.last_modified_raw;
  j["owner_id"] = e.owner_id;
  j["permissions"] = e.permissions;
  j["href"] = e.href;
  return j;
}

ResourceEntry resource_from_json(const Json& j) {
  ResourceEntry e;
  e.file_id = j.at("file_id").get<std::int64_t>();
  e.relative_path = j.at("relative_path").get<std::string>();
  e.name = j.at("name").get<std::string>();
  e.is_directory = j.at("is_directory").get<bool>();
  e.size = j.at("size").get<std::uint64_t>();
  e.content_type = j.at("content_type").get<std::string>();
  e.etag = j.at("etag").get<std::string>();
  if (!j.at("last_modified").is_null()) {
    e.last_modified = j.at("last_modified").get<std::int64_t>();
  }
  e.last_modified_raw = j.at("last_modified_raw").get<std::string>();
  e.owner_id = j.at("owner_id").get<std::string>();
  e.permissions = j.at("permissions").get<std::string>();
  e.href = j.at("href").get<std::string>();
  return e;
}

Json to_json(const TrashEntry& t) {
  Json j;
  j["trash_name"] = t.trash_name;
  j["original_name"] = t.original_name;
  j["original_location"] = t.original_location;
  j["deletion_time"] = t.deletion_time;
  j["size"] = t.size;
  j["file_id"] = t.file_id;
  j["is_directory"] = t.is_directory;
  j["href"] = t.href;
  return j;
}

TrashEntry trash_from_json(const Json& j) {
  TrashEntry t;
  t.trash_name = j.at("trash_name").get<std::string>();
  t.original_name = j.at("original_name").get<std::string>();
  t.original_location = j.at("original_location").get<std::string>();
  t.deletion_time = j.at("deletion_time").get<std::int64_t>();
  t.size = j.at("size").get<std::uint64_t>();
  t.file_id = j.at("file_id").get<std::int64_t>();
  t.is_directory = j.at("is_directory").get<bool>();
  t.href = j.at("href").get<std::string>();
  return t;
}

Json to_json(const VersionEntry& v) {
  Json j;
  j["file_id"] = v.file_id;
  j["version_timestamp"] = v.version_timestamp;
  j["etag"] = v.etag;
  j["size"] = v.size;
  j["href"] = v.href;
  return j;
}

VersionEntry version_from_json(const Json& j) {
  VersionEntry v;
  v.file_id = j.at("file_id").get<std::int64_t>();
  v.version_timestamp = j.at("version_timestamp").get<std::int64_t>();
  v.etag = j.at("etag").get<std::string>();
  v.size = j.at("size").get<std::uint64_t>();
  v.href = j.at("href").get<std::string>();
  return v;
}

}  // namespace ncf
