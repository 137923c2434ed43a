"""Command-line interface: determinism, formats, and exit codes."""

import json

import pytest

from dgslab.cli import (
    EXIT_DIMENSION_CAP,
    EXIT_OK,
    EXIT_VERIFY_FAILED,
    load_lattice,
    main,
)


@pytest.fixture
def z2_file(tmp_path):
    p = tmp_path / "z2.json"
    p.write_text('{"basis": [["1","0"],["0","1"]]}')
    return str(p)


@pytest.fixture
def shifted_file(tmp_path):
    p = tmp_path / "shifted.json"
    p.write_text('{"basis": [["3","0"],["0","1/2"]], '
                 '"shift": ["3/2","1/4"]}')
    return str(p)


def test_load_lattice(shifted_file):
    lat = load_lattice(shifted_file)
    assert lat.basis.n == 2
    assert str(lat.shift[0]) == "3/2"


def test_sample_deterministic(z2_file, capsys):
    args = ["sample", "dgs", "--lattice", z2_file, "--s", "1", "--f", "3",
            "--num", "8", "--seed", "99", "--fast"]
    assert main(args) == EXIT_OK
    first = capsys.readouterr().out
    assert main(args) == EXIT_OK
    second = capsys.readouterr().out
    assert first == second
    assert len(first.strip().splitlines()) == 8


def test_sample_cdgs_and_lq(z2_file, capsys):
    assert main(["sample", "cdgs", "--lattice", z2_file, "--num", "3",
                 "--seed", "1", "--fast"]) == EXIT_OK
    assert len(capsys.readouterr().out.strip().splitlines()) == 3
    assert main(["sample", "lq", "--lattice", z2_file, "--num", "3",
                 "--seed", "1", "--fast", "--body", "l1", "--q", "1",
                 "--f", "4"]) == EXIT_OK
    assert len(capsys.readouterr().out.strip().splitlines()) == 3


def test_count_exact_and_estimated(z2_file, shifted_file, capsys):
    assert main(["count", "--lattice", z2_file, "--radius-sq", "2",
                 "--exact"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"value": 9, "exact": True}
    assert main(["count", "--lattice", z2_file, "--radius-sq", "5",
                 "--primitive", "--exact"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["value"] == 8
    assert main(["count", "--lattice", z2_file, "--radius-sq", "2",
                 "--seed", "5", "--fast"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["value"] == 9 and not out["exact"]
    # --radius is squared internally: radius 2 -> radius_sq 4 -> 13 points
    assert main(["count", "--lattice", z2_file, "--radius", "2",
                 "--exact"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["value"] == 13


def test_usage_errors(z2_file):
    with pytest.raises(SystemExit) as exc:
        main(["sample", "dgs", "--lattice", z2_file])  # missing --seed
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["count", "--lattice", z2_file, "--exact"])  # missing radius


def test_dimension_cap_exit(tmp_path, monkeypatch):
    p = tmp_path / "z3.json"
    p.write_text('{"basis": [["1","0","0"],["0","1","0"],["0","0","1"]]}')
    monkeypatch.setenv("DGSLAB_DIM_CAP", "2")
    code = main(["sample", "dgs", "--lattice", str(p), "--seed", "1",
                 "--fast"])
    assert code == EXIT_DIMENSION_CAP


def test_verify_quick(tmp_path, capsys):
    report = tmp_path / "report.json"
    code = main(["verify", "--suite", "quick", "--seed", "3",
                 "--report", str(report)])
    assert code in (EXIT_OK, EXIT_VERIFY_FAILED)
    obj = json.loads(report.read_text())
    assert code == (EXIT_OK if obj["passed"] else EXIT_VERIFY_FAILED)
    assert obj["passed"]  # this suite should pass
