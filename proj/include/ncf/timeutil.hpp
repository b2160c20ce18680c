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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ncf {

/// UTC instant with millisecond precision.
using Instant = std::chrono::sys_time<std::chrono::milliseconds>;

Instant now_utc();
std::int64_t to_epoch_ms(Instant t);
std::int64_t to_epoch_seconds(Instant t);
Instant from_epoch_ms(std::int64_t ms);

/// "2024-10-06T18:01:15.123Z"
std::string format_instant(Instant t);
/// "2024-10-06T18:01:15Z" from epoch seconds.
std::string format_epoch_seconds(std::int64_t seconds);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM|+HHMM)".
std::optional<Instant> parse_iso8601(std::string_view text);

/// RFC 1123 HTTP date, e.g. "Sun, 06 Oct 2024 18:01:15 GMT".
std::optional<std::int64_t> parse_http_date(std::string_view text);
std::string format_http_date(std::int64_t epoch_seconds);

}  // namespace ncf
