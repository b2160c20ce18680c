# Copyright 2026 The ncforensic Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the ncforensic core."""

import json

from ._core import Error, MockServer as _MockServer, run_cli, sha256_hex
from ._core import verify_bundle as _verify_bundle

__all__ = ["Error", "MockServer", "run", "verify_bundle", "sha256_hex"]


class MockServer(_MockServer):
    """Mock instance built from a fixture given as a dict or a JSON string."""

    def __init__(self, fixture, url_prefix="", clock=None, seed=1):
        if not isinstance(fixture, str):
            fixture = json.dumps(fixture)
        super().__init__(fixture, url_prefix, clock, seed)

    def apply(self, step):
        if not isinstance(step, str):
            step = json.dumps(step)
        super().apply(step)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()


def run(args, env):
    """Runs one CLI invocation in-process. Returns (exit_code, stdout, stderr)."""
    return run_cli([str(a) for a in args], dict(env))


def verify_bundle(bundle_dir):
    return json.loads(_verify_bundle(str(bundle_dir)))
