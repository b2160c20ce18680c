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

#include <compare>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ncf {

namespace dav_ns {
inline constexpr std::string_view kDav = "DAV:";
inline constexpr std::string_view kOwnCloud = "http://owncloud.org/ns";
inline constexpr std::string_view kNextcloud = "http://nextcloud.org/ns";
}  // namespace dav_ns

struct PropertyName {
  std::string ns;
  std::string name;

  auto operator<=>(const PropertyName&) const = default;
  std::string to_string() const { return "{" + ns + "}" + name; }
};

PropertyName dav_prop(std::string_view name);
PropertyName oc_prop(std::string_view name);
PropertyName nc_prop(std::string_view name);

/// Properties requested when listing the files tree.
std::vector<PropertyName> default_file_properties();
std::vector<PropertyName> trash_properties();
std::vector<PropertyName> version_properties();

/// Serializes a PROPFIND request body. Duplicates are dropped, first
/// occurrence wins. Throws Error(input_error) on an empty list.
std::string build_propfind_body(std::span<const PropertyName> properties);

/// Inverse of build_propfind_body. An empty body or <allprop/> yields an
/// empty list (meaning "all properties").
std::vector<PropertyName> parse_propfind_body(std::string_view xml);

/// One <d:response> element of a 207 multistatus document.
struct DavResponse {
  std::string href;  // as sent by the server, still percent-encoded
  /// Properties reported with a 2xx propstat; value is the element's text.
  std::map<PropertyName, std::string> properties;
  /// Properties reported with a non-2xx propstat.
  std::vector<PropertyName> missing;
  /// True when resourcetype contains DAV:collection.
  bool is_collection = false;

  bool has(const PropertyName& p) const { return properties.count(p) > 0; }
  const std::string* find(const PropertyName& p) const;

  bool operator==(const DavResponse&) const = default;
};

/// Throws Error(parse_error) on malformed XML or a document that is not a
/// DAV:multistatus.
std::vector<DavResponse> parse_multistatus(std::string_view xml);

/// Emits explicit DAV:, oc: and nc: namespace prefixes. A resourcetype
/// property is written with a <d:collection/> child when is_collection holds.
std::string serialize_multistatus(const std::vector<DavResponse>& responses);

std::string xml_escape(std::string_view text);

}  // namespace ncf
