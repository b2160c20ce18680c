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

import hashlib
import json
import os
from pathlib import Path

import pytest

import ncforensic

FIXTURE = Path(os.environ.get("NCF_FIXTURE_DIR", Path(__file__).parents[1] / "fixtures")) / "demo.json"


@pytest.fixture
def server():
    with ncforensic.MockServer(json.loads(FIXTURE.read_text())) as s:
        yield s


def machine(server, *args, uid="admin", token="ncforensic"):
    env = server.client_env(uid, token)
    code, out, err = ncforensic.run([*args, "--format", "machine"], env)
    secret = env["NC_APP_PASSWORD"]
    assert secret not in out and secret not in err
    return code, [json.loads(line) for line in out.splitlines() if line]


def test_sha256_matches_hashlib():
    for data in (b"", b"abc", bytes(range(256)) * 3):
        assert ncforensic.sha256_hex(data) == hashlib.sha256(data).hexdigest()


def test_list_files_and_read_only_dump(server, tmp_path):
    code, entries = machine(server, "list-files", "-r")
    assert code == 0
    paths = {e["relative_path"] for e in entries}
    assert "Documents/report.txt" in paths

    server.reset_counts()
    code, lines = machine(server, "dump", "-o", str(tmp_path / "bundle"))
    assert code == 0
    assert set(server.method_counts()["total"]) <= {"GET", "HEAD", "PROPFIND"}
    report = ncforensic.verify_bundle(tmp_path / "bundle")
    assert report["ok"] is True
    assert lines[0]["manifest_digest"]


def test_tampering_is_detected(server, tmp_path):
    bundle = tmp_path / "b"
    assert machine(server, "dump", "-o", str(bundle))[0] == 0
    stored = next(p for p in (bundle / "files").rglob("*") if p.is_file() and p.stat().st_size)
    data = bytearray(stored.read_bytes())
    data[0] ^= 0x01
    stored.write_bytes(bytes(data))
    report = ncforensic.verify_bundle(bundle)
    assert report["ok"] is False
    assert report["mismatched"] == [stored.relative_to(bundle).as_posix()]


def test_mutation_and_exit_codes(server):
    server.apply({"kind": "create", "user": "admin", "path": "notes.txt", "content": "hi"})
    assert server.file_content("notes.txt", "admin") == b"hi"
    assert machine(server, "file-id-to-path", "987654")[0] == 3
    assert machine(server, "download-file", "Documents")[0] == 4
    env = server.client_env("admin", "ncforensic")
    env["NC_APP_PASSWORD"] = "wrong"
    assert ncforensic.run(["fsstat"], env)[0] == 2


def test_password_flag_is_refused(server):
    env = server.client_env("admin", "ncforensic")
    code, out, err = ncforensic.run(["fsstat", "--password", "hunter2"], env)
    assert code == 1
    assert "hunter2" not in out + err


def test_native_errors_carry_kind(tmp_path):
    with pytest.raises(ncforensic.Error) as info:
        ncforensic.verify_bundle(tmp_path)
    assert info.value.kind == "manifest-missing"
