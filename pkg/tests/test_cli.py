"""End-to-end tests of the command line interface.

All commands run in-process through cli.main so stdout/stderr are captured
cheaply; the contract under test is: machine-readable artifact on stdout,
human summary on stderr, --out an identical byte-for-byte copy, exit 0 on
success, 1 on a failed verification, 2 on a usage error.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np
import pytest

from dropletlab import cli, energy

BALL_COULOMB_1 = 16.0 * math.pi**2 / 15.0


def run_cli(argv, capsys):
    try:
        code = cli.main(list(argv))
    except SystemExit as exc:
        code = int(exc.code or 0)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_version(capsys):
    code, out, _err = run_cli(["--version"], capsys)
    assert code == 0
    assert out.startswith("dropletlab ")


def test_energy_ball_closed_form(capsys):
    code, out, err = run_cli(
        ["energy", "--body", "ball", "--radius", "1"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["package"] == "dropletlab"
    assert payload["command"] == "energy"
    assert payload["config"]["body"]["kind"] == "ball"
    res = payload["results"]
    np.testing.assert_allclose(res["coulomb"], BALL_COULOMB_1, rtol=1e-12)
    np.testing.assert_allclose(res["perimeter"], 4.0 * math.pi, rtol=1e-12)
    np.testing.assert_allclose(res["total"], res["perimeter"] + res["coulomb"],
                               rtol=1e-12)
    assert "E =" in err  # human summary goes to stderr, not stdout


def test_energy_deterministic_and_out_file(tmp_path, capsys):
    argv = ["energy", "--body", "star", "--coeff", "2,0=0.1",
            "--method", "mc", "--samples", "20000", "--seed", "3"]
    code_a, out_a, _ = run_cli(argv, capsys)
    code_b, out_b, _ = run_cli(argv, capsys)
    assert code_a == code_b == 0
    assert out_a == out_b

    target = tmp_path / "energy.json"
    code_c, out_c, err_c = run_cli(argv + ["--out", str(target)], capsys)
    assert code_c == 0
    assert target.read_text(encoding="utf-8") == out_c == out_a
    assert f"wrote {target}" in err_c


def test_energy_worker_invariance(capsys):
    argv = ["energy", "--body", "ellipsoid", "--semi-axes", "1,1,2",
            "--method", "mc", "--samples", "150000", "--seed", "5"]
    _, out_serial, _ = run_cli(argv + ["--workers", "1"], capsys)
    _, out_threads, _ = run_cli(argv + ["--workers", "3"], capsys)
    serial = json.loads(out_serial)
    threads = json.loads(out_threads)
    # artifacts differ only in the recorded worker count
    assert serial["results"] == threads["results"]
    assert serial["config"]["workers"] == 1
    assert threads["config"]["workers"] == 3


def test_energy_csv_format(capsys):
    code, out, _ = run_cli(
        ["energy", "--body", "ball", "--radius", "2", "--format", "csv"],
        capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == energy.EnergyReport.csv_fields()
    record = dict(zip(rows[0], rows[1]))
    np.testing.assert_allclose(float(record["coulomb"]),
                               BALL_COULOMB_1 * 32.0, rtol=1e-12)


def test_santalo_ball_passes(capsys):
    code, out, err = run_cli(
        ["santalo", "--body", "ball", "--samples", "30000", "--seed", "1"],
        capsys)
    assert code == 0
    payload = json.loads(out)
    res = payload["results"]
    assert res["failures"] == []
    assert [m["alpha"] for m in res["moments"]] == [0.0, 1.0, 2.0]
    assert all(m["ok"] for m in res["moments"])
    names = {r["name"] for r in res["inequalities"]}
    assert names == {"volume_squared", "volume_cubed"}
    assert "moment identities" in err


def test_santalo_custom_alphas_and_volume_recovery(capsys):
    code, out, _ = run_cli(
        ["santalo", "--body", "ball", "--samples", "40000", "--seed", "2",
         "--alphas", "0,2"], capsys)
    assert code == 0
    res = json.loads(out)["results"]
    assert [m["alpha"] for m in res["moments"]] == [0.0, 2.0]
    rec = res["volume_recovery"]
    vol = 4.0 * math.pi / 3.0
    assert abs(rec["estimate"] - vol) < 4.0 * rec["estimate_err"]
    np.testing.assert_allclose(rec["reference"], vol, rtol=1e-9)


def test_stationarity_ball_multiplier(capsys):
    code, out, _ = run_cli(
        ["stationarity", "--body", "ball", "--radius", "0.8",
         "--boundary-count", "128", "--require-stationary"], capsys)
    assert code == 0
    res = json.loads(out)["results"]
    lam_expected = 2.0 / 0.8 + 4.0 * math.pi * 0.8**2 / 3.0
    np.testing.assert_allclose(res["stationarity"]["lam"], lam_expected,
                               rtol=1e-9)
    assert res["mean_convexity"]["mean_convex"] is True


def test_stationarity_require_flag_rejects_ellipsoid(capsys):
    argv = ["stationarity", "--body", "ellipsoid", "--semi-axes", "1,1,2",
            "--samples", "30000", "--boundary-count", "128"]
    code_plain, _, _ = run_cli(argv, capsys)
    assert code_plain == 0  # reporting only
    code_strict, _, err = run_cli(argv + ["--require-stationary"], capsys)
    assert code_strict == 1
    assert "verification failed" in err


def test_proofcheck_all_chains(capsys):
    code, out, err = run_cli(["proofcheck"], capsys)
    assert code == 0
    payload = json.loads(out)
    chains = payload["results"]["chains"]
    assert [c["chain"] for c in chains] == [
        "outer-min", "roundness-polynomial", "binding-energy", "two-ball"]
    assert all(c["verdict"] == "pass" for c in chains)
    consts = payload["results"]["binding_constants"]
    np.testing.assert_allclose(consts["kmn_lower_bound"],
                               (243.0 * math.pi / 16.0) ** (1.0 / 3.0),
                               rtol=1e-12)
    assert consts["printed_lower_bound"] == 3.836
    assert "decimal slip" in err


def test_proofcheck_range_violation_exits_one(capsys):
    code, out, err = run_cli(
        ["proofcheck", "--chain", "outer", "--volume", "1.5"], capsys)
    assert code == 1
    chains = json.loads(out)["results"]["chains"]
    assert chains[0]["verdict"] != "pass"
    assert "verification failed" in err


def test_proofcheck_rejects_bad_volume(capsys):
    code, _, err = run_cli(["proofcheck", "--volume", "-2"], capsys)
    assert code == 2
    assert "--volume" in err


def test_flow_few_steps_reports_max_steps(tmp_path, capsys):
    traj = tmp_path / "steps.csv"
    shape = tmp_path / "final.json"
    code, out, err = run_cli(
        ["flow", "--coeff", "2,0=0.1", "--max-steps", "2",
         "--samples", "4000", "--tolerance", "1e-9",
         "--trajectory", str(traj), "--final-shape", str(shape)], capsys)
    assert code == 1  # did not converge in two steps
    payload = json.loads(out)
    assert payload["results"]["status"] == "max steps"
    assert payload["results"]["steps"] == 2
    assert "verification failed" in err

    rows = list(csv.reader(traj.open()))
    assert rows[0] == list(cli.flow.FlowTrajectory.CSV_FIELDS)
    assert len(rows) >= 3  # header + initial state + accepted steps
    saved = json.loads(shape.read_text(encoding="utf-8"))
    assert "coeffs" in saved


def test_flow_csv_artifact(capsys):
    code, out, _ = run_cli(
        ["flow", "--coeff", "2,0=0.05", "--max-steps", "1",
         "--samples", "4000", "--format", "csv"], capsys)
    assert code == 1
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == list(cli.flow.FlowTrajectory.CSV_FIELDS)


def test_sweep_minkowski_csv(capsys):
    code, out, err = run_cli(
        ["sweep", "--check", "minkowski", "--volumes", "0.5:1.5:0.5",
         "--boundary-count", "128"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:2] == ["volume", "radius"]
    assert len(rows) == 4
    assert all(row[4] == "True" for row in rows[1:])  # mean_convex column
    assert "3/3 rows mean-convex" in err


def test_sweep_twoball_json_below_crossover(capsys):
    code, out, err = run_cli(
        ["sweep", "--check", "twoball", "--volumes", "1:3:1",
         "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    winners = [row["winner"] for row in payload["results"]["rows"]]
    assert winners == ["one_ball"] * 3
    assert "no sign change" in err and "below" in err


def test_sweep_twoball_brackets_crossover(capsys):
    code, _, err = run_cli(
        ["sweep", "--check", "twoball", "--volumes", "3.4:3.6:0.05"], capsys)
    assert code == 0
    assert "sign change bracketed in [3.5, 3.55]" in err


def test_sweep_fprime_brackets_unit_volume(capsys):
    code, out, err = run_cli(
        ["sweep", "--check", "fprime", "--radii", "0.5:0.7:0.01"], capsys)
    assert code == 0
    assert "root volume 1.000000000" in err
    rows = list(csv.reader(io.StringIO(out)))
    signs = [int(row[3]) for row in rows[1:]]
    assert -1 in signs and 1 in signs


def test_sweep_seed_does_not_change_closed_columns(capsys):
    argv = ["sweep", "--check", "twoball", "--volumes", "1:2:0.5"]
    _, out_a, _ = run_cli(argv + ["--seed", "0"], capsys)
    _, out_b, _ = run_cli(argv + ["--seed", "99"], capsys)
    rows_a = [r for r in csv.reader(io.StringIO(out_a))]
    rows_b = [r for r in csv.reader(io.StringIO(out_b))]
    # drop the seed column; every closed-form column must agree exactly
    keep = [i for i, name in enumerate(rows_a[0]) if name != "seed"]
    assert [[r[i] for i in keep] for r in rows_a] == \
           [[r[i] for i in keep] for r in rows_b]


def test_sweep_empty_range_usage_error(capsys):
    code, _, err = run_cli(
        ["sweep", "--check", "twoball", "--volumes", "2:1:0.5"], capsys)
    assert code == 2
    assert "empty range" in err


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"body": "ball", "radius": 2.0}))
    code, out, _ = run_cli(["energy", "--config", str(cfg)], capsys)
    assert code == 0
    res = json.loads(out)["results"]
    np.testing.assert_allclose(res["coulomb"], BALL_COULOMB_1 * 32.0,
                               rtol=1e-12)
    # explicit flags override config entries
    code, out, _ = run_cli(
        ["energy", "--config", str(cfg), "--radius", "1"], capsys)
    assert code == 0
    res = json.loads(out)["results"]
    np.testing.assert_allclose(res["coulomb"], BALL_COULOMB_1, rtol=1e-12)


def test_config_file_errors(tmp_path, capsys):
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"bogus_option": 1}))
    code, _, err = run_cli(["energy", "--config", str(unknown)], capsys)
    assert code == 2
    assert "--bogus-option" in err

    not_object = tmp_path / "list.json"
    not_object.write_text("[1, 2]")
    code, _, err = run_cli(["energy", "--config", str(not_object)], capsys)
    assert code == 2
    assert "JSON object" in err

    code, _, err = run_cli(
        ["energy", "--config", str(tmp_path / "missing.json")], capsys)
    assert code == 2


def test_body_spec_round_trip(capsys):
    code, out, _ = run_cli(
        ["energy", "--body", "star", "--coeff", "2,0=0.1",
         "--coeff", "3,1=0.05", "--method", "quadrature"], capsys)
    assert code == 0
    payload = json.loads(out)
    spec = payload["config"]["body"]
    assert spec["kind"] == "star"
    rebuilt = cli.body_from_spec(spec)
    np.testing.assert_allclose(rebuilt.volume().value,
                               payload["results"]["volume"], rtol=1e-9)


@pytest.mark.parametrize("argv, fragment", [
    (["energy", "--body", "ball", "--radius", "-1"], "--radius"),
    (["energy", "--body", "ellipsoid"], "--semi-axes"),
    (["energy", "--body", "twoballs", "--radii", "1,1"], "--separation"),
    (["energy", "--body", "mesh"], "--file"),
    (["energy", "--body", "torus"], "invalid choice"),
    (["orbit"], "invalid choice"),
])
def test_usage_errors_exit_two(argv, fragment, capsys):
    code, _, err = run_cli(argv, capsys)
    assert code == 2
    assert fragment in err
