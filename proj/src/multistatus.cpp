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

#include "ncf/multistatus.hpp"

#include <expat.h>

#include <memory>
#include <set>

#include "ncf/error.hpp"

namespace ncf {
namespace {

constexpr char kSep = ' ';

PropertyName split_name(const XML_Char* qualified) {
  std::string_view s(qualified);
  const auto pos = s.find(kSep);
  if (pos == std::string_view::npos) return {"", std::string(s)};
  return {std::string(s.substr(0, pos)), std::string(s.substr(pos + 1))};
}

bool is_dav(const PropertyName& n, std::string_view local) {
  return n.ns == dav_ns::kDav && n.name == local;
}

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};
using ParserPtr = std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter>;

template <typename Handler>
void run_expat(std::string_view xml, Handler& handler) {
  ParserPtr parser(XML_ParserCreateNS("UTF-8", kSep));
  if (!parser) throw Error(ErrorKind::parse_error, "cannot create XML parser");
  XML_SetUserData(parser.get(), &handler);
  XML_SetElementHandler(
      parser.get(),
      [](void* ud, const XML_Char* name, const XML_Char**) {
        static_cast<Handler*>(ud)->start(split_name(name));
      },
      [](void* ud, const XML_Char* name) {
        static_cast<Handler*>(ud)->end(split_name(name));
      });
  XML_SetCharacterDataHandler(
      parser.get(), [](void* ud, const XML_Char* s, int len) {
        static_cast<Handler*>(ud)->text(std::string_view(s, static_cast<std::size_t>(len)));
      });
  if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), 1) ==
      XML_STATUS_ERROR) {
    throw Error(ErrorKind::parse_error,
                std::string("XML: ") +
                    XML_ErrorString(XML_GetErrorCode(parser.get())) +
                    " at line " +
                    std::to_string(XML_GetCurrentLineNumber(parser.get())));
  }
  handler.finish();
}

// Multistatus ----------------------------------------------------------------

class MultistatusHandler {
 public:
  std::vector<DavResponse> responses;

  void start(PropertyName n) {
    ++depth_;
    if (error_) return;
    if (depth_ == 1) {
      if (!is_dav(n, "multistatus")) fail("root element is not DAV:multistatus");
      return;
    }
    if (depth_ == 2) {
      if (is_dav(n, "response")) {
        current_ = DavResponse{};
        have_href_ = false;
        response_status_.clear();
        in_response_ = true;
      }
      return;
    }
    if (!in_response_) return;
    if (depth_ == 3) {
      if (is_dav(n, "href")) {
        capture_ = &href_text_;
        href_text_.clear();
      } else if (is_dav(n, "propstat")) {
        props_.clear();
        propstat_status_.clear();
        propstat_collection_ = false;
      } else if (is_dav(n, "status")) {
        capture_ = &response_status_;
      }
      return;
    }
    if (depth_ == 4) {
      if (is_dav(n, "status")) {
        capture_ = &propstat_status_;
      } else if (is_dav(n, "prop")) {
        in_prop_ = true;
      }
      return;
    }
    if (in_prop_ && depth_ == 5) {
      props_.emplace_back(std::move(n), std::string{});
      capture_ = &props_.back().second;
      return;
    }
    if (in_prop_ && depth_ == 6 && !props_.empty() &&
        is_dav(props_.back().first, "resourcetype") && is_dav(n, "collection")) {
      propstat_collection_ = true;
    }
  }

  void end(const PropertyName& n) {
    if (!error_) {
      if (depth_ == 5 && in_prop_) capture_ = nullptr;
      if (depth_ == 4) {
        if (is_dav(n, "prop")) in_prop_ = false;
        capture_ = nullptr;
      }
      if (depth_ == 3 && in_response_) {
        if (is_dav(n, "href")) have_href_ = true;
        if (is_dav(n, "propstat")) close_propstat();
        capture_ = nullptr;
      }
      if (depth_ == 2 && in_response_ && is_dav(n, "response")) {
        if (!have_href_) fail("response without href");
        current_.href = trim(href_text_);
        responses.push_back(std::move(current_));
        in_response_ = false;
      }
    }
    --depth_;
  }

  void text(std::string_view s) {
    if (capture_ != nullptr) capture_->append(s);
  }

  void finish() {
    if (error_) throw Error(ErrorKind::parse_error, "multistatus: " + *error_);
  }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  static int status_code(std::string_view line) {
    // "HTTP/1.1 200 OK"
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos || sp + 4 > line.size()) return 0;
    int code = 0;
    for (std::size_t i = sp + 1; i < sp + 4; ++i) {
      if (line[i] < '0' || line[i] > '9') return 0;
      code = code * 10 + (line[i] - '0');
    }
    return code;
  }

  void close_propstat() {
    const int code = status_code(trim(propstat_status_));
    if (code == 0) {
      fail("propstat without a parseable status");
      return;
    }
    const bool ok = code >= 200 && code < 300;
    for (auto& [name, value] : props_) {
      if (ok) {
        current_.properties[name] =
            is_dav(name, "resourcetype") ? std::string{} : std::move(value);
        if (is_dav(name, "resourcetype") && propstat_collection_) {
          current_.is_collection = true;
        }
      } else {
        current_.missing.push_back(name);
      }
    }
    props_.clear();
  }

  void fail(std::string msg) {
    if (!error_) error_ = std::make_unique<std::string>(std::move(msg));
  }

  int depth_ = 0;
  bool in_response_ = false;
  bool in_prop_ = false;
  bool have_href_ = false;
  bool propstat_collection_ = false;
  DavResponse current_;
  std::string href_text_;
  std::string response_status_;
  std::string propstat_status_;
  std::vector<std::pair<PropertyName, std::string>> props_;
  std::string* capture_ = nullptr;
  std::unique_ptr<std::string> error_;
};

// Propfind request body ------------------------------------------------------

class PropfindHandler {
 public:
  std::vector<PropertyName> properties;

  void start(PropertyName n) {
    ++depth_;
    if (depth_ == 1 && !is_dav(n, "propfind")) {
      bad_ = "root element is not DAV:propfind";
    }
    if (depth_ == 2 && is_dav(n, "prop")) in_prop_ = true;
    if (depth_ == 3 && in_prop_) properties.push_back(std::move(n));
  }
  void end(const PropertyName& n) {
    if (depth_ == 2 && is_dav(n, "prop")) in_prop_ = false;
    --depth_;
  }
  void text(std::string_view) {}
  void finish() {
    if (!bad_.empty()) throw Error(ErrorKind::parse_error, "propfind: " + bad_);
  }

 private:
  int depth_ = 0;
  bool in_prop_ = false;
  std::string bad_;
};

std::string prefix_for(std::string_view ns,
                       std::map<std::string, std::string>& extra) {
  if (ns == dav_ns::kDav) return "d";
  if (ns == dav_ns::kOwnCloud) return "oc";
  if (ns == dav_ns::kNextcloud) return "nc";
  auto it = extra.find(std::string(ns));
  if (it != extra.end()) return it->second;
  std::string p = "x" + std::to_string(extra.size());
  extra.emplace(std::string(ns), p);
  return p;
}

std::string namespace_decls(const std::map<std::string, std::string>& extra) {
  std::string out = " xmlns:d=\"DAV:\" xmlns:oc=\"";
  out += dav_ns::kOwnCloud;
  out += "\" xmlns:nc=\"";
  out += dav_ns::kNextcloud;
  out += "\"";
  for (const auto& [ns, p] : extra) {
    out += " xmlns:" + p + "=\"" + xml_escape(ns) + "\"";
  }
  return out;
}

}  // namespace

PropertyName dav_prop(std::string_view name) {
  return {std::string(dav_ns::kDav), std::string(name)};
}
PropertyName oc_prop(std::string_view name) {
  return {std::string(dav_ns::kOwnCloud), std::string(name)};
}
PropertyName nc_prop(std::string_view name) {
  return {std::string(dav_ns::kNextcloud), std::string(name)};
}

std::vector<PropertyName> default_file_properties() {
  return {dav_prop("getlastmodified"), dav_prop("getetag"),
          dav_prop("getcontenttype"),  dav_prop("resourcetype"),
          dav_prop("getcontentlength"), oc_prop("fileid"),
          oc_prop("permissions"),      oc_prop("size"),
          oc_prop("owner-id")};
}

std::vector<PropertyName> trash_properties() {
  return {dav_prop("getlastmodified"),
          dav_prop("getcontentlength"),
          dav_prop("resourcetype"),
          dav_prop("getcontenttype"),
          oc_prop("fileid"),
          oc_prop("size"),
          nc_prop("trashbin-filename"),
          nc_prop("trashbin-original-location"),
          nc_prop("trashbin-deletion-time")};
}

std::vector<PropertyName> version_properties() {
  return {dav_prop("getlastmodified"), dav_prop("getetag"),
          dav_prop("getcontentlength"), dav_prop("getcontenttype"),
          dav_prop("resourcetype")};
}

const std::string* DavResponse::find(const PropertyName& p) const {
  auto it = properties.find(p);
  return it == properties.end() ? nullptr : &it->second;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string build_propfind_body(std::span<const PropertyName> properties) {
  if (properties.empty()) {
    throw Error(ErrorKind::input_error, "PROPFIND needs at least one property");
  }
  std::set<PropertyName> seen;
  std::map<std::string, std::string> extra;
  std::string props;
  for (const auto& p : properties) {
    if (!seen.insert(p).second) continue;
    props += "<" + prefix_for(p.ns, extra) + ":" + p.name + "/>";
  }
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<d:propfind" +
         namespace_decls(extra) + "><d:prop>" + props +
         "</d:prop></d:propfind>\n";
}

std::vector<PropertyName> parse_propfind_body(std::string_view xml) {
  if (xml.find_first_not_of(" \t\r\n") == std::string_view::npos) return {};
  PropfindHandler handler;
  run_expat(xml, handler);
  return handler.properties;
}

std::vector<DavResponse> parse_multistatus(std::string_view xml) {
  MultistatusHandler handler;
  run_expat(xml, handler);
  return std::move(handler.responses);
}

std::string serialize_multistatus(const std::vector<DavResponse>& responses) {
  std::map<std::string, std::string> extra;
  std::string body;
  for (const auto& r : responses) {
    body += "<d:response><d:href>" + xml_escape(r.href) + "</d:href>";
    if (!r.properties.empty()) {
      body += "<d:propstat><d:prop>";
      for (const auto& [name, value] : r.properties) {
        const std::string tag = prefix_for(name.ns, extra) + ":" + name.name;
        if (is_dav(name, "resourcetype")) {
          body += r.is_collection ? "<d:resourcetype><d:collection/></d:resourcetype>"
                                  : "<d:resourcetype/>";
        } else if (value.empty()) {
          body += "<" + tag + "/>";
        } else {
          body += "<" + tag + ">" + xml_escape(value) + "</" + tag + ">";
        }
      }
      body += "</d:prop><d:status>HTTP/1.1 200 OK</d:status></d:propstat>";
    }
    if (!r.missing.empty()) {
      body += "<d:propstat><d:prop>";
      for (const auto& name : r.missing) {
        body += "<" + prefix_for(name.ns, extra) + ":" + name.name + "/>";
      }
      body += "</d:prop><d:status>HTTP/1.1 404 Not Found</d:status></d:propstat>";
    }
    body += "</d:response>";
  }
  return "<?xml version=\"1.0\"?>\n<d:multistatus" + namespace_decls(extra) +
         ">" + body + "</d:multistatus>\n";
}

}  // namespace ncf
