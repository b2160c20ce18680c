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

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ncf {

using Json = nlohmann::ordered_json;

/// One record of the line-delimited canonical serialization: compact UTF-8
/// JSON with keys in insertion order, terminated by a single LF.
std::string canonical_line(const Json& record);

/// Splits line-delimited records; throws nlohmann::json::parse_error on a bad
/// line. Blank lines are skipped.
std::vector<Json> parse_lines(std::string_view text);

}  // namespace ncf
