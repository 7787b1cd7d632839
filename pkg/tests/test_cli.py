import csv
import json
from fractions import Fraction

import numpy as np
import pytest

from levy_spde.cli import main, parse_float_range, parse_grid, parse_int_range, parse_phi, ConfigError
from levy_spde.io import read_noise_binary, sha256
from levy_spde.noise import GridSpec, sample_white_noise


def run(tmp_path, name, *argv):
    out = tmp_path / name
    return main(list(argv) + ["--out", str(out)]), out


def test_range_parsers():
    assert parse_int_range("1..4") == [1, 2, 3, 4]
    assert parse_int_range([2, 5]) == [2, 5]
    r = parse_float_range("0.25..1.95:0.1")
    assert len(r) == 18 and r[0] == 0.25 and r[-1] == 1.95
    assert parse_float_range("0.5,1") == [0.5, 1.0]
    with pytest.raises(ConfigError):
        parse_int_range("")
    with pytest.raises(ConfigError):
        parse_grid("0,1,4", 2)
    assert parse_phi("1,0;0.5,0.5;2", 2) == {"center": [1.0, 0.0], "radii": [0.5, 0.5], "amplitude": 2.0}


def _reference(eq, d, a):
    a = Fraction(a).limit_denominator(1000)
    if eq == "heat":
        m = a < 1 + Fraction(2, d)
        return m, True, m
    if eq == "wave":
        return d <= 2, True, d <= 2
    return False, d > 4 and Fraction(d, d - 2) < a < 2, False


def test_verdict_table_matches_reference(tmp_path):
    code, out = run(tmp_path, "v", "verdict-table")
    assert code == 0
    rows = list(csv.DictReader(open(out / "verdicts.csv")))
    assert len(rows) == 3 * 6 * 18
    for r in rows:
        got = tuple(r[k] == "true" for k in ("mild", "generalized", "random_field"))
        assert got == _reference(r["equation"], int(r["d"]), float(r["alpha"])), r


def test_manifest_replay_is_byte_identical(tmp_path):
    code, a = run(tmp_path, "a", "mild-field", "--equation", "heat", "--d", "1", "--alpha", "1.5",
                  "--seed", "7", "--grid", "0,2,8,-2,2,8")
    assert code == 0
    code, b = run(tmp_path, "b", "mild-field", "--config", str(a / "manifest.json"))
    assert code == 0
    for f in ("field.csv", "field.json", "manifest.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()
    man = json.loads((a / "manifest.json").read_text())
    assert man["exit_status"] == 0 and man["artifacts"]["field.csv"] == sha256(a / "field.csv")


def test_flags_override_config(tmp_path):
    _, a = run(tmp_path, "a", "mild-field", "--equation", "heat", "--d", "1", "--alpha", "1.5",
               "--seed", "7", "--grid", "0,2,4,-2,2,4")
    _, b = run(tmp_path, "b", "mild-field", "--config", str(a / "manifest.json"), "--seed", "8")
    assert json.loads((b / "manifest.json").read_text())["config"]["seed"] == 8
    assert (a / "field.csv").read_bytes() != (b / "field.csv").read_bytes()


def test_sample_noise_outputs(tmp_path):
    code, out = run(tmp_path, "n", "sample-noise", "--alpha", "1.1", "--seed", "3", "--grid", "0,1,4,0,1,2")
    assert code == 0
    nz = read_noise_binary(out / "noise.bin")
    assert nz == sample_white_noise(GridSpec(2, (0, 0), (1, 1), (4, 2)), 1.1, 3)
    assert (out / "noise.csv").exists()


@pytest.mark.parametrize("argv", [
    ["mild-field", "--equation", "heat", "--d", "1", "--alpha", "1.5"],              # no seed
    ["mild-field", "--equation", "heat", "--d", "3", "--alpha", "1.8", "--seed", "1"],  # refused
    ["mild-field", "--equation", "wave", "--d", "3", "--alpha", "1.0", "--seed", "1"],  # unsupported
    ["pairing", "--equation", "poisson", "--d", "3", "--alpha", "1.5", "--seed", "1"],  # refused
    ["mild-field", "--equation", "heat", "--d", "1", "--alpha", "2.5", "--seed", "1"],  # bad alpha
    ["mild-field", "--equation", "heat", "--d", "1", "--alpha", "1", "--seed", "1", "--grid", "0,1"],
    ["mild-field", "--config", "/nonexistent/manifest.json"],
])
def test_configuration_errors_exit_2(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x" / "manifest.json").exists()


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as info:
        main(["integrate-everything"])
    assert info.value.code == 2


def test_failed_verification_exits_1(tmp_path):
    code, out = run(tmp_path, "n", "norms", "--equation", "heat", "--d", "1", "--alpha", "1.5",
                    "--t", "1", "--tol", "1e-18")
    assert code == 1
    assert json.loads((out / "manifest.json").read_text())["exit_status"] == 1


def test_norms_and_fubini_pass(tmp_path):
    assert run(tmp_path, "n", "norms", "--equation", "wave", "--d", "1,2", "--alpha", "0.5,1.5")[0] == 0
    code, out = run(tmp_path, "f", "fubini-check", "--equation", "wave", "--d", "1", "--alpha", "1.2",
                    "--seed", "2", "--grid", "0,2,16,-1,1,16")
    assert code == 0
    assert json.loads((out / "fubini.json").read_text())["passed"]


def test_pairing_replicates_cf(tmp_path):
    code, out = run(tmp_path, "p", "pairing", "--equation", "heat", "--d", "1", "--alpha", "1.5",
                    "--seed", "100", "--replicates", "2000", "--grid", "0,2,8,-2,2,8",
                    "--phi", "1,0;0.5,0.6;10")
    assert code == 0
    rep = json.loads((out / "pairing.json").read_text())
    assert rep["cf_test"]["passed"]
    vals = np.loadtxt(out / "pairings.csv", delimiter=",", skiprows=1)
    assert vals.shape == (2000, 2) and vals[0, 0] == 100


def test_cf_suite_and_repro_subset(tmp_path):
    assert run(tmp_path, "c", "cf-suite", "--seed", "1", "--n", "20000", "--trials", "3")[0] == 0
    code, out = run(tmp_path, "r", "repro-all", "--only", "1")
    assert code == 0
    assert json.loads((out / "acceptance.json").read_text())["passed"]
