import csv
import io
import math

import numpy as np
import pytest
from conftest import load_table

from podium_dp.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, TABLE_GRID, main, parse_epsilons
from podium_dp.core import Mechanism
from podium_dp.simulate import (
    BLOCK_SIZE,
    ExperimentConfig,
    InputDist,
    beta22_from_uniforms,
    block_rng,
    run,
    summarize,
    write_records,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_summary(line):
    return dict(kv.split("=", 1) for kv in line.split())


# --- epsilon parsing --------------------------------------------------------


def test_parse_epsilons():
    assert parse_epsilons("1, 2.5,log(3)") == [1.0, 2.5, math.log(3)]
    assert parse_epsilons("log 16") == [math.log(16)]
    assert parse_epsilons("") == []


def test_parse_epsilons_rejects_garbage(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["table", "--epsilon", "abc"])
    assert exc.value.code == EXIT_USAGE


# --- table / efficiency -----------------------------------------------------


def test_table_single_epsilon(capsys):
    code, out, _ = run_cli(capsys, "table", "--epsilon", "1")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "epsilon,exp_epsilon,d_delta,w_over_delta,m,s"
    assert "4.1415014582196363" in lines[1]


def test_table_default_grid(capsys):
    code, out, _ = run_cli(capsys, "table")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert len(rows) == 55 == len(TABLE_GRID)
    assert [float(r["epsilon"]) for r in rows] == TABLE_GRID


def test_table_to_file(tmp_path, capsys):
    path = tmp_path / "t.csv"
    assert run_cli(capsys, "table", "--epsilon", "0.5,2", "--out", str(path))[0] == EXIT_OK
    data = path.read_bytes()
    assert b"\r" not in data
    assert len(data.decode().splitlines()) == 3


def test_efficiency_decimals(capsys):
    code, out, _ = run_cli(capsys, "efficiency", "--epsilon", "30", "--decimals", "4")
    row = list(csv.DictReader(io.StringIO(out)))[0]
    assert code == EXIT_OK
    assert row["pm_over_lm"] == "0.0000"
    assert row["pm_over_sm"] == "0.6300"


def test_efficiency_small_epsilon(capsys):
    _, out, _ = run_cli(capsys, "efficiency", "--epsilon", "0.1")
    row = list(csv.DictReader(io.StringIO(out)))[0]
    assert float(row["pm0_over_sm"]) == pytest.approx(0.6425, abs=5e-4)


def test_efficiency_default_grid_covers_table(capsys):
    _, out, _ = run_cli(capsys, "efficiency")
    got = list(csv.DictReader(io.StringIO(out)))
    assert len(got) == len(load_table("efficiency_table.csv"))


@pytest.mark.parametrize(
    "argv",
    [
        ["table", "--epsilon", ""],
        ["table", "--epsilon", "-1"],
        ["table", "--epsilon", "1", "--delta", "0"],
        ["simulate", "--n", "0"],
        ["simulate", "--dist", "fixed=0.9"],
        ["simulate", "--dist", "gamma"],
        ["simulate", "--epsilon", "1,2"],
    ],
)
def test_validation_errors(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == EXIT_USAGE
    assert "error" in err


# --- certify ----------------------------------------------------------------


def test_certify_podium(capsys):
    code, out, _ = run_cli(capsys, "certify", "--epsilon", "log(3)", "--nx", "21", "--nz", "2001")
    assert code == EXIT_OK
    assert "result=PASS" in out and "violations=0" in out
    assert "ratio_set={0.333333333333, 1, 3}" in out


@pytest.mark.parametrize("mech", ["laplace", "staircase", "podium-approx"])
def test_certify_other_mechanisms(capsys, mech):
    code, out, _ = run_cli(capsys, "certify", "--mechanism", mech, "--nx", "11", "--nz", "2001")
    assert code == EXIT_OK, out


def test_certify_negative_control(capsys):
    code, out, _ = run_cli(capsys, "certify", "--mechanism", "truncated-laplace", "--nx", "11", "--nz", "2001")
    assert code == EXIT_FAILED
    assert "zero-density" in out


# --- simulate ---------------------------------------------------------------


def test_simulate_line_count_and_header(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, out, _ = run_cli(capsys, "simulate", "--n", "1000", "--seed", "4", "--out", str(path))
    assert code == EXIT_OK
    lines = path.read_text().splitlines()
    assert lines[0] == "raw_x,privatized_x,mechanism,epsilon"
    assert len(lines) == 1001
    assert all(line.endswith(",podium-exact,1.0") for line in lines[1:])
    assert parse_summary(out)["n"] == "1000"


def test_simulate_without_out_prints_only_summary(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--n", "200")
    assert code == EXIT_OK
    assert len(out.splitlines()) == 1
    assert out.startswith("mechanism=podium-exact ")


def test_simulate_bytes_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        run_cli(capsys, "simulate", "--mechanism", "staircase", "--n", "3000", "--seed", "17", "--out", str(p))
    assert a.read_bytes() == b.read_bytes()
    run_cli(capsys, "simulate", "--mechanism", "staircase", "--n", "3000", "--seed", "18", "--out", str(a))
    assert a.read_bytes() != b.read_bytes()


def test_workers_match_serial():
    cfg = ExperimentConfig(Mechanism.LAPLACE, 2.0, 3 * BLOCK_SIZE + 123, seed=9)
    serial, parallel = io.StringIO(), io.StringIO()
    write_records(cfg, serial, workers=1)
    write_records(cfg, parallel, workers=4)
    assert serial.getvalue() == parallel.getvalue()


def test_prefix_stable_across_n():
    # Record i depends only on (seed, i), not on the total count.
    small = run(ExperimentConfig(Mechanism.PODIUM_EXACT, 1.0, 500, seed=2))
    large = run(ExperimentConfig(Mechanism.PODIUM_EXACT, 1.0, BLOCK_SIZE + 10, seed=2))
    np.testing.assert_array_equal(small[0], large[0][:500])
    np.testing.assert_array_equal(small[1], large[1][:500])


def test_beta22_generator():
    u = block_rng(5, 0).random((1_000_000, 3))
    x = beta22_from_uniforms(u) - 0.5
    assert abs(x.mean()) < 0.002
    assert x.var() == pytest.approx(0.05, rel=0.02)


def test_fixed_and_uniform_inputs():
    raw, _ = run(ExperimentConfig(Mechanism.LAPLACE, 1.0, 100, input_dist=InputDist.parse("fixed:0.25")))
    assert np.all(raw == 0.25)
    raw, _ = run(ExperimentConfig(Mechanism.LAPLACE, 1.0, 20000, input_dist=InputDist("uniform")))
    assert raw.min() >= -0.5 and raw.max() < 0.5
    assert raw.var() == pytest.approx(1 / 12, rel=0.03)


def test_summary_matches_write_records():
    cfg = ExperimentConfig(Mechanism.STAIRCASE, 1.0, 5000, seed=1)
    a = summarize(cfg)
    b = write_records(cfg, io.StringIO())
    assert a == b


def test_summary_line_fields(capsys):
    _, out, _ = run_cli(capsys, "simulate", "--mechanism", "laplace", "--epsilon", "5", "--n", "50000", "--seed", "3")
    fields = parse_summary(out)
    assert fields["mechanism"] == "laplace" and fields["dist"] == "beta22"
    assert float(fields["expected_variance"]) == pytest.approx(0.05 + 2 / 25, rel=1e-12)
    assert float(fields["variance"]) == pytest.approx(0.13, rel=0.05)
