import json
import subprocess
import sys

import numpy as np
import pytest

from involution_lengths.cli import RunConfig, main, parse_grid, parse_range
from involution_lengths.edge import REFERENCE_MOMENTS
from involution_lengths.exact_series import length_counts_table


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parsers():
    assert parse_range("3:6") == range(3, 7)
    assert np.allclose(parse_grid("-1:0.5:1"), [-1, -0.5, 0, 0.5, 1])
    with pytest.raises(ValueError):
        parse_grid("1:0:2")


def test_tables_match_library_csv(capsys, tmp_path, private_cache):
    code, out, _ = _run(capsys, "tables", "--case", "inv", "--n-max", "15")
    assert code == 0
    header, body = out.split("\n", 1)
    assert header.startswith("# invlen tables config=")
    length_counts_table("inv", 15).to_csv(tmp_path / "t.csv")
    assert body.encode() == (tmp_path / "t.csv").read_bytes()


def test_oracle_columns_agree(capsys):
    code, out, _ = _run(capsys, "oracle", "--case", "decr-fpf", "--n", "5")
    assert code == 0
    lines = out.splitlines()[2:]
    assert lines and all(row.split(",")[3] == row.split(",")[4] for row in lines)


def test_environment_default(capsys, monkeypatch):
    monkeypatch.setenv("INVLEN_N", "4")
    code, out, _ = _run(capsys, "oracle", "--case", "inv")
    assert code == 0 and len(out.splitlines()) == 2 + 4


def test_tw_moment_from_output(capsys, tmp_path):
    path = tmp_path / "tw.csv"
    # the mass outside [-8, 5] is below 1e-7, so the truncated mean stays well inside 1e-4
    code, _, _ = _run(capsys, "tw", "--beta", "4", "--grid=-8:0.01:5", "--order", "1", "--output", str(path))
    assert code == 0
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    t, dens = data[:, 1], data[:, 3]
    mean = np.sum(0.5 * (t[1:] * dens[1:] + t[:-1] * dens[:-1]) * np.diff(t))
    assert abs(mean - REFERENCE_MOMENTS[4][0]) < 1e-4


def test_sample_and_digest(capsys):
    code, out, _ = _run(capsys, "sample", "--case", "inv", "--n", "50", "--samples", "300", "--seed", "3")
    assert code == 0
    counts = [int(r.split(",")[3]) for r in out.splitlines()[2:]]
    assert sum(counts) == 300
    _, again, _ = _run(capsys, "sample", "--case", "inv", "--n", "50", "--samples", "300", "--seed", "3")
    assert again == out


def test_moments_and_expand(capsys):
    code, out, _ = _run(capsys, "moments", "--case", "inv", "--m", "7", "--n", "1000")
    assert code == 0 and len(out.splitlines()) == 2 + 8
    code, out, _ = _run(capsys, "expand", "--case", "incr-fpf", "--n", "200", "--l", "20:24", "--m", "3")
    assert code == 0 and len(out.splitlines()) == 2 + 5


def test_validate_selected_checks(capsys):
    code, out, err = _run(capsys, "validate", "--suite", "2")
    assert code == 0
    assert json.loads(out)["checks"][0]["pass"] is True
    assert err.split()[:2] == ["AC2", "PASS"]


def test_config_round_trip():
    cfg = RunConfig(command="tw", beta=4, grid="-1:0.1:1")
    back = RunConfig.from_json(cfg.to_json())
    assert back == cfg and back.digest() == cfg.digest()
    assert RunConfig(command="tw", output="x").digest() == RunConfig(command="tw").digest()
    with pytest.raises(Exception):
        RunConfig.from_json(json.dumps({"command": "tw", "bogus": 1}))


@pytest.mark.parametrize("argv", [["tw", "--beta", "3"], ["moments", "--case", "incr-fpf", "--m", "7"],
                                  ["nonsense"], ["tw", "--order", "x"]])
def test_errors_are_json(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    msg = json.loads(err.strip().splitlines()[-1])
    assert msg["error"] and msg["message"]


def test_export_figure_one(capsys):
    code, out, _ = _run(capsys, "export-figure", "--figure", "1", "--size", "100")
    assert code == 0
    assert out.splitlines()[1] == "beta,nu,t,scaled_residual,term3"


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "involution_lengths.cli", "hard-edge", "--beta", "4",
                          "--a", "1", "--grid", "0:1:2"], capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1] == "beta,a,s,E"
    assert len(res.stdout.splitlines()) == 5
