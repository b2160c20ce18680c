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

#include <optional>
#include <string>
#include <string_view>

namespace ncf {

/// Standard-alphabet, padded base64 (RFC 4648 section 4).
std::string base64_encode(std::string_view bytes);
std::optional<std::string> base64_decode(std::string_view text);

std::string hex_encode(std::string_view bytes);

/// Percent-encodes a path, leaving unreserved characters and '/' intact.
std::string percent_encode_path(std::string_view path);
std::string percent_encode_component(std::string_view component);
/// Decodes %XX escapes; malformed escapes are kept literally.
std::string percent_decode(std::string_view text);

}  // namespace ncf
