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

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncf/error.hpp"

namespace ncf::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitAuth = 2,
  kExitNotFound = 3,
  kExitWrongKind = 4,
  kExitPartial = 5,
  kExitVerifyMismatch = 6,
};

int exit_code_for(ErrorKind kind) noexcept;

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the real process environment.
EnvLookup process_environment();

inline constexpr const char* kEnvUrl = "NC_URL";
inline constexpr const char* kEnvUser = "NC_USER";
inline constexpr const char* kEnvPassword = "NC_APP_PASSWORD";
inline constexpr const char* kEnvCredentialFile = "NC_CREDENTIAL_FILE";

/// Runs one invocation. args[0] is the subcommand (e.g. "fls"), followed by
/// its flags. Returns the exit code; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_environment());

/// Entry point shared by the installed binaries. `fixed_subcommand`, when
/// set, is prepended to the arguments (nc-fls -> "fls").
int main_entry(int argc, char** argv,
               const std::optional<std::string>& fixed_subcommand = std::nullopt);

}  // namespace ncf::cli
