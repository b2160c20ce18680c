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

// Python bindings for the mock instance, bundle verification and the CLI.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ncf/acquisition.hpp"
#include "ncf/cli.hpp"
#include "ncf/digest.hpp"
#include "ncf/mock_server.hpp"

namespace py = pybind11;
using namespace ncf;

namespace {

py::dict counts_to_dict(const mock::MethodCounts& c) {
  py::dict by_token;
  for (const auto& [token, methods] : c.by_token) by_token[py::str(token)] = methods;
  py::dict out;
  out["total"] = c.total;
  out["by_token"] = by_token;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of ncforensic";

  // The module owns the type object.
  static py::handle error_type = py::exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      exc.attr("status") = e.status();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("sha256_hex", [](py::bytes data) { return sha256_hex(std::string(data)); });

  m.def(
      "verify_bundle",
      [](const std::string& dir) { return to_json(verify_bundle(dir)).dump(); },
      py::arg("bundle_dir"), py::call_guard<py::gil_scoped_release>());

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args, std::map<std::string, std::string> env) {
        std::ostringstream out;
        std::ostringstream err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err, [&env](const std::string& k) -> std::optional<std::string> {
            auto it = env.find(k);
            if (it == env.end()) return std::nullopt;
            return it->second;
          });
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), py::arg("env"));

  py::class_<mock::MockServer>(m, "MockServer")
      .def(py::init([](const std::string& fixture_json, const std::string& url_prefix,
                       std::optional<std::int64_t> clock, std::uint64_t seed) {
             mock::MockOptions opts;
             opts.url_prefix = url_prefix;
             opts.clock = clock;
             opts.seed = seed;
             return std::make_unique<mock::MockServer>(
                 mock::fixture_from_json(Json::parse(fixture_json)), opts);
           }),
           py::arg("fixture_json"), py::arg("url_prefix") = "", py::arg("clock") = py::none(),
           py::arg("seed") = 1)
      .def_property_readonly("port", &mock::MockServer::port)
      .def_property_readonly("base_url", &mock::MockServer::base_url)
      // Environment for run_cli; the caller decides where the secret goes.
      .def(
          "client_env",
          [](const mock::MockServer& s, const std::string& uid, const std::string& token) {
            const Credentials c = s.credentials(uid, token);
            return std::map<std::string, std::string>{{cli::kEnvUrl, c.base_url},
                                                      {cli::kEnvUser, c.username},
                                                      {cli::kEnvPassword, c.app_password}};
          },
          py::arg("uid") = "", py::arg("token_name") = "")
      .def(
          "apply",
          [](mock::MockServer& s, const std::string& step_json) {
            s.apply(mock::mutation_step_from_json(Json::parse(step_json)));
          },
          py::arg("step_json"))
      .def("set_clock", &mock::MockServer::set_clock, py::arg("epoch_seconds"))
      .def(
          "inject_fault",
          [](mock::MockServer& s, const std::string& method, const std::string& path_contains,
             int status, int remaining) {
            s.inject_fault({method, path_contains, status, remaining});
          },
          py::arg("method"), py::arg("path_contains"), py::arg("status") = 500,
          py::arg("remaining") = -1)
      .def("clear_faults", &mock::MockServer::clear_faults)
      .def("method_counts",
           [](const mock::MockServer& s) { return counts_to_dict(s.method_counts()); })
      .def("reset_counts", &mock::MockServer::reset_counts)
      .def("file_paths", &mock::MockServer::file_paths, py::arg("uid") = "")
      .def(
          "file_content",
          [](const mock::MockServer& s, const std::string& path,
             const std::string& uid) -> std::optional<py::bytes> {
            auto c = s.file_content(path, uid);
            if (!c) return std::nullopt;
            return py::bytes(*c);
          },
          py::arg("path"), py::arg("uid") = "")
      .def("stop", &mock::MockServer::stop, py::call_guard<py::gil_scoped_release>());
}
