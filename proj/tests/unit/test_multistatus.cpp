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

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <random>
#include <sstream>

#include "doctest.h"
#include "ncf/error.hpp"
#include "ncf/multistatus.hpp"
#include "test_support.hpp"

using namespace ncf;
namespace pt = boost::property_tree;

namespace {

// Element names under <propfind><prop>, read with a parser that knows nothing
// about namespaces; the prefix is resolved by hand from the root attributes.
std::vector<PropertyName> oracle_props(const std::string& xml) {
  std::istringstream in(xml);
  pt::ptree tree;
  pt::read_xml(in, tree);
  REQUIRE(tree.size() == 1);
  const auto& [root_name, root] = tree.front();
  std::map<std::string, std::string> prefixes;
  for (const auto& [k, v] : root.get_child("<xmlattr>", pt::ptree())) {
    if (k.rfind("xmlns:", 0) == 0) prefixes[k.substr(6)] = v.data();
  }
  const auto colon = root_name.find(':');
  CHECK(prefixes.at(root_name.substr(0, colon)) == "DAV:");
  CHECK(root_name.substr(colon + 1) == "propfind");
  std::vector<PropertyName> out;
  for (const auto& [k, v] : root) {
    if (k == "<xmlattr>") continue;
    CHECK(k.substr(k.find(':') + 1) == "prop");
    for (const auto& [pk, pv] : v) {
      const auto c = pk.find(':');
      out.push_back({prefixes.at(pk.substr(0, c)), pk.substr(c + 1)});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("propfind body for a single property") {
  const std::vector<PropertyName> one = {dav_prop("getetag")};
  CHECK(oracle_props(build_propfind_body(one)) == one);
  CHECK(parse_propfind_body(build_propfind_body(one)) == one);
}

TEST_CASE("default property sets parse back through an independent parser") {
  for (const auto& set : {default_file_properties(), trash_properties(), version_properties()}) {
    const std::string body = build_propfind_body(set);
    CHECK(oracle_props(body) == set);
    CHECK(parse_propfind_body(body) == set);
  }
  bool has_fileid = false;
  for (const auto& p : default_file_properties()) {
    if (p == oc_prop("fileid")) has_fileid = true;
  }
  CHECK(has_fileid);
}

TEST_CASE("duplicate properties are dropped in order") {
  const std::vector<PropertyName> dup = {dav_prop("getetag"), oc_prop("fileid"),
                                         dav_prop("getetag"), nc_prop("trashbin-filename")};
  const std::vector<PropertyName> expect = {dav_prop("getetag"), oc_prop("fileid"),
                                            nc_prop("trashbin-filename")};
  CHECK(parse_propfind_body(build_propfind_body(dup)) == expect);
}

TEST_CASE("empty property list is an input error") {
  const std::vector<PropertyName> none;
  try {
    build_propfind_body(none);
    FAIL("expected input error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::input_error);
  }
  CHECK(parse_propfind_body("").empty());
  CHECK(parse_propfind_body(R"(<d:propfind xmlns:d="DAV:"><d:allprop/></d:propfind>)").empty());
}

TEST_CASE("multistatus parsing with arbitrary prefixes") {
  const std::string xml = R"(<?xml version="1.0"?>
<D:multistatus xmlns:D="DAV:" xmlns:X="http://owncloud.org/ns">
 <D:response>
  <D:href>/remote.php/dav/files/admin/a%20b/</D:href>
  <D:propstat>
   <D:prop><D:resourcetype><D:collection/></D:resourcetype><X:fileid>12</X:fileid>
    <D:getetag>"abc"</D:getetag></D:prop>
   <D:status>HTTP/1.1 200 OK</D:status>
  </D:propstat>
  <D:propstat>
   <D:prop><D:getcontentlength/></D:prop>
   <D:status>HTTP/1.1 404 Not Found</D:status>
  </D:propstat>
 </D:response>
</D:multistatus>)";
  const auto rs = parse_multistatus(xml);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].href == "/remote.php/dav/files/admin/a%20b/");
  CHECK(rs[0].is_collection);
  CHECK(*rs[0].find(oc_prop("fileid")) == "12");
  CHECK(*rs[0].find(dav_prop("getetag")) == "\"abc\"");
  CHECK(rs[0].missing == std::vector<PropertyName>{dav_prop("getcontentlength")});
  CHECK(rs[0].find(dav_prop("getcontentlength")) == nullptr);
}

TEST_CASE("non-conforming documents are parse errors") {
  for (const std::string bad : {"", "<x", "<a/>", "<d:multistatus xmlns:d=\"other\"/>"}) {
    try {
      parse_multistatus(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse_error);
    }
  }
}

TEST_CASE("serialize then parse reproduces random response sets") {
  std::mt19937_64 rng(99);
  const std::vector<PropertyName> pool = {dav_prop("getetag"), dav_prop("getcontentlength"),
                                          dav_prop("getcontenttype"), oc_prop("fileid"),
                                          oc_prop("owner-id"), nc_prop("trashbin-filename"),
                                          nc_prop("trashbin-deletion-time")};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DavResponse> rs(rng() % 6);
    for (auto& r : rs) {
      r.href = "/remote.php/dav/files/u/" + std::to_string(rng() % 1000) + "%20x";
      r.is_collection = rng() % 2;
      if (r.is_collection || rng() % 2) r.properties[dav_prop("resourcetype")] = "";
      for (const auto& p : pool) {
        const auto roll = rng() % 3;
        if (roll == 0) {
          std::string v = testing::random_bytes(rng, 20);
          // XML 1.0 cannot carry control characters or bare CR; keep printable text.
          for (auto& c : v) c = static_cast<char>('!' + static_cast<unsigned char>(c) % 90);
          r.properties[p] = v;
        } else if (roll == 1) {
          r.missing.push_back(p);
        }
      }
    }
    CHECK(parse_multistatus(serialize_multistatus(rs)) == rs);
  }
}

TEST_CASE("xml escaping") {
  CHECK(xml_escape("a<b>&\"'") == "a&lt;b&gt;&amp;&quot;&apos;");
}
