# Copyright 2026 The cutflow Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json

import pytest

import cutflow


def test_fixtures_round_trip():
    assert "fgh" in cutflow.fixtures()
    doc = json.loads(cutflow.fixture("fgh"))
    assert doc["name"]


def test_match_lists_tiling_sites():
    sites = cutflow.match(cutflow.fixture("matrix_chain"), "map-tiling")
    assert len(sites) == 3
    assert all(s.startswith("map-tiling@") for s in sites)


def test_mincut_moves_inputs_to_x():
    prog = cutflow.fixture("fgh")
    plain = cutflow.cutout(prog, "tasklet-fusion", bind={"N": 8})
    cut = cutflow.cutout(prog, "tasklet-fusion", mincut=True, bind={"N": 8})
    assert cut["input_volume"] < plain["input_volume"]
    assert [name for name, _ in cut["input_configuration"]] == ["x"]


def test_verify_catches_off_by_one():
    prog = cutflow.fixture("matrix_chain")
    site = int(cutflow.match(prog, "map-tiling")[1].split("@")[1].split("?")[0])
    bad = cutflow.verify(prog, "map-tiling", site=site, bug="off-by-one")
    assert bad["verdict"] == "Invalid"
    assert json.loads(bad["report"])["seed"] == 1
    good = cutflow.verify(prog, "map-tiling", site=site, trials=20)
    assert good["verdict"] == "Valid"
    assert good["report"] is None


def test_errors_raise():
    with pytest.raises(cutflow.CutflowError):
        cutflow.fixture("nope")
    with pytest.raises(cutflow.CutflowError):
        cutflow.cutout(cutflow.fixture("fgh"), "identity")


def test_cli_in_process():
    code, out, _ = cutflow.run_cli(["--version"])
    assert code == 0
    assert cutflow.__version__ in out
