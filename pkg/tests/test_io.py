import hashlib
import json
import struct

import numpy as np
import pytest

from levy_spde.errors import ParameterError
from levy_spde.greens import GreenFunction
from levy_spde.io import (dumps, field_manifest, grid_from_dict, grid_to_dict, read_field_csv, read_json,
                          read_noise_binary, read_noise_csv, sha256, write_field_csv, write_json,
                          write_noise_binary, write_noise_csv)
from levy_spde.noise import GridSpec, sample_white_noise
from levy_spde.solutions import mild_field

GRID = GridSpec(2, (0.0, -1.0), (2.0, 2.0), (3, 5))


def test_binary_round_trip_and_layout(tmp_path):
    nz = sample_white_noise(GRID, 1.3, 2 ** 40 + 7)
    path = tmp_path / "n.bin"
    write_noise_binary(nz, path)
    assert read_noise_binary(path) == nz
    raw = path.read_bytes()
    assert raw[:4] == b"SASN"
    assert struct.unpack_from("<II", raw, 4) == (1, 2)
    assert struct.unpack_from("<2d2d2Q", raw, 12) == (0.0, -1.0, 2.0, 2.0, 3, 5)
    assert struct.unpack_from("<dQ", raw, 60) == (1.3, 2 ** 40 + 7)
    assert len(raw) == 76 + 8 * GRID.n_cells
    assert np.array_equal(np.frombuffer(raw[76:], "<f8"), nz.increments)


def test_binary_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + bytes(100))
    with pytest.raises(ParameterError):
        read_noise_binary(bad)
    nz = sample_white_noise(GRID, 1.3, 1)
    good = tmp_path / "n.bin"
    write_noise_binary(nz, good)
    (tmp_path / "short.bin").write_bytes(good.read_bytes()[:-8])
    with pytest.raises(ParameterError):
        read_noise_binary(tmp_path / "short.bin")


def test_csv_round_trip_is_exact(tmp_path):
    nz = sample_white_noise(GRID, 0.7, 3)
    write_noise_csv(nz, tmp_path / "n.csv")
    lines = (tmp_path / "n.csv").read_text().splitlines()
    assert lines[0] == "i0,i1,increment"
    assert len(lines) == GRID.n_cells + 1
    assert np.array_equal(read_noise_csv(tmp_path / "n.csv", GRID, 0.7, 3).increments, nz.increments)


def test_field_csv_round_trip(tmp_path):
    fld = mild_field(GreenFunction("heat", 1), sample_white_noise(GRID, 1.5, 4))
    write_field_csv(fld, tmp_path / "f.csv")
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "t,x1,value"
    back = read_field_csv(tmp_path / "f.csv")
    assert np.array_equal(back.values, fld.values)
    assert np.array_equal(back.eval_points, fld.eval_points)


def test_grid_dict_round_trip():
    assert grid_from_dict(json.loads(json.dumps(grid_to_dict(GRID)))) == GRID


def test_canonical_json(tmp_path):
    obj = {"b": np.float64(1.5), "a": np.arange(3), "g": GreenFunction("wave", 2)}
    text = dumps(obj)
    assert text.endswith("\n")
    assert list(json.loads(text)) == ["a", "b", "g"]
    write_json(obj, tmp_path / "o.json")
    assert read_json(tmp_path / "o.json")["a"] == [0, 1, 2]
    assert sha256(tmp_path / "o.json") == hashlib.sha256(text.encode()).hexdigest()
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_field_manifest_contents():
    g = GreenFunction("heat", 1)
    nz = sample_white_noise(GRID, 1.5, 4)
    m = field_manifest(mild_field(g, nz), g, GRID, 1.5, 4)
    assert m["green_id"] == "heat-d1" and m["seed"] == 4 and m["n_points"] == GRID.n_cells
    assert grid_from_dict(m["grid"]) == GRID
