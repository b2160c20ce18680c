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

// Serves a fixture file until interrupted. Intended for manual testing of
// the command-line tools.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "ncf/error.hpp"
#include "ncf/mock_server.hpp"

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local mock instance serving a fixture file", "nc-mock"};
  std::string fixture, prefix, port_file;
  std::uint64_t seed = 1;
  std::optional<std::int64_t> clock;
  app.add_option("fixture", fixture, "Fixture JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("--prefix", prefix, "Serve below this URL path, e.g. /nextcloud");
  app.add_option("--seed", seed, "Seed for generated ETags");
  app.add_option("--clock", clock, "Fixed server clock, epoch seconds");
  app.add_option("--port-file", port_file, "Write the bound port to this file");
  CLI11_PARSE(app, argc, argv);

  try {
    ncf::mock::MockOptions options;
    options.seed = seed;
    options.url_prefix = prefix;
    options.clock = clock;
    ncf::mock::MockServer server(ncf::mock::load_fixture(fixture), options);
    if (!port_file.empty()) std::ofstream(port_file) << server.port() << "\n";
    std::cout << "listening on " << server.base_url() << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds{100});
    server.stop();
  } catch (const ncf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
