import json
import math
from importlib.resources import files

import numpy as np
import pytest

from framecover.cli import ScenarioError, emit_report, main, run_scenario


def write_csv(path, rows):
    path.write_text("\n".join(",".join(f"{v}" for v in row) for row in rows) + "\n")
    return str(path)


def run_main(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, json.loads(out) if out else None


def test_opnorm_subcommand(tmp_path, capsys):
    m = write_csv(tmp_path / "h.csv", [[1.0, 1.0], [1.0, -1.0]])
    rc, rep = run_main(capsys, ["opnorm", "--matrix", m,
                                "--dom", "lp:p=2:n=2", "--cod", "lp:p=2:n=2"])
    assert rc == 0
    assert rep["lower"] == pytest.approx(math.sqrt(2), rel=1e-11)
    assert rep["certified"] is True
    assert rep["dom"] == "lp:p=2:n=2"


def test_constants_subcommand(tmp_path, capsys):
    b = write_csv(tmp_path / "b.csv", [[1.0, 0.0], [1.0, 1.0]])
    rc, rep = run_main(capsys, ["constants", "--basis", b,
                                "--space", "lp:p=1:n=2", "--rho", "2"])
    assert rc == 0
    assert rep["bc"] == pytest.approx(1.0, abs=1e-9)
    assert rep["ubc"] == pytest.approx(3.0, abs=1e-9)
    assert rep["sign_sup"] == pytest.approx(3.0, abs=1e-9)
    assert rep["reflection"]["2"] == pytest.approx(3.0, abs=1e-9)


def test_frame_build_then_check(tmp_path, capsys):
    b = write_csv(tmp_path / "eye.csv", np.eye(3).tolist())
    out = tmp_path / "frame.json"
    rc, rep = run_main(capsys, ["frame", "build", "--space", "lp:p=2:n=3",
                                "--basis", b, "--eps", "1.0",
                                "--out", str(out)])
    assert rc == 0
    assert rep["repetitions"] == [6, 6, 6]
    assert rep["reconstruction_max"] <= 1e-9
    rc, rep = run_main(capsys, ["frame", "check", "--frame", str(out)])
    assert rc == 0
    assert rep["pairs"] == 18 and rep["boundaries"] == [0, 6, 12, 18]
    assert rep["frame_bound"] <= 2.0 + 1e-6


def test_dilate_subcommand(tmp_path, capsys):
    b = write_csv(tmp_path / "eye.csv", np.eye(2).tolist())
    rc, rep = run_main(capsys, ["dilate", "--space", "lp:p=2:n=2",
                                "--basis", b, "--eps", "1.0", "--samples", "40"])
    assert rc == 0
    assert rep["S_norm"] <= 1.0 + 1e-6
    assert rep["T_norm"] <= rep["lam"] + 1.0 + 1e-6
    assert rep["ufdd_constant"] == pytest.approx(1.0, abs=1e-9)


def test_cover_generate_subcommand(capsys):
    rc, rep = run_main(capsys, ["cover", "generate", "--dom", "lp:p=2:n=1",
                                "--cod", "lp:p=2:n=1", "--eta", "0.5"])
    assert rc == 0
    assert rep["count"] == 16
    assert rep["norm_deviation_max"] <= 1e-9


def test_cover_one_subcommand(tmp_path, capsys):
    m = write_csv(tmp_path / "t.csv", [[1.0, 0.0], [0.0, 0.0]])
    rc, rep = run_main(capsys, ["cover", "one", "--dom", "lp:p=2:n=2",
                                "--cod", "lp:p=2:n=2", "--matrix", m,
                                "--eps", "1.0", "--sigma", "0.2"])
    assert rc == 0
    assert rep["k0"] == 1
    assert rep["center_norm"] == pytest.approx(2.0, abs=1e-9)
    assert rep["distance"] == pytest.approx(1.0, abs=1e-3)
    assert rep["margin"] > 0 and rep["certified"] is True


def test_cover_verify_subcommand(tmp_path, capsys):
    c = write_csv(tmp_path / "centers.csv", [[2.0, 0.0, 0.0, 0.0]])
    args = ["cover", "verify", "--dom", "lp:p=2:n=2", "--cod", "lp:p=2:n=2",
            "--centers", c, "--radius", "3.1", "--samples", "32",
            "--restarts", "6", "--iters", "40"]
    rc, rep = run_main(capsys, args)
    assert rc == 0
    assert rep["verdict"] == "covered"
    assert rep["max_min_gap"] == pytest.approx(-0.1, abs=1e-3)
    assert rep["off_origin_ok"] is False
    rc, _ = run_main(capsys, args[:6] + ["--centers", c])  # no radius
    assert rc == 2


def test_bip_subcommand(tmp_path, capsys):
    sub = write_csv(tmp_path / "sub.csv", [[1.0, 0.0]])
    y = write_csv(tmp_path / "y.csv", [[0.0, 1.0]])
    pts = write_csv(tmp_path / "pts.csv", [[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]])
    base = ["bip", "--space", "lp:p=2:n=2", "--subspace", sub, "--y", y,
            "--points", pts, "--eps", "0.01"]
    rc, rep = run_main(capsys, base)
    assert rc == 0 and rep["feasible"] is True
    rc, rep = run_main(capsys, base + ["--offset", "-0.5"])
    assert rc == 0 and rep["feasible"] is False
    assert rep["violation"] == pytest.approx(0.46875, abs=1e-6)


def test_emit_report_csv_and_errors():
    rep = {"table": {"columns": ["id", "v"], "rows": [[0, 1 / 3], [1, 2.0]]}}
    data = emit_report(rep, "csv").decode()
    assert data == "id,v\n0,0.333333333333\n1,2\n"
    with pytest.raises(ValueError, match="no table"):
        emit_report({}, "csv")
    with pytest.raises(ValueError, match="format"):
        emit_report({}, "yaml")


def test_exit_codes_for_bad_inputs(tmp_path, capsys):
    rc = main(["opnorm", "--matrix", str(tmp_path / "absent.csv"),
               "--dom", "lp:p=2:n=2", "--cod", "lp:p=2:n=2"])
    assert rc == 2
    rc = main(["run", str(tmp_path / "absent.toml")])
    assert rc == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("this is not = [valid\n")
    assert main(["run", str(bad)]) == 2
    with pytest.raises(SystemExit) as exc:  # argparse handles missing flags
        main(["opnorm", "--dom", "lp:p=2:n=2", "--cod", "lp:p=2:n=2"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_scenario_requires_explicit_cover_params(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        '[scenario]\nname = "x"\npipeline = "cover"\n'
        '[space]\ndom = "lp:p=2:n=2"\ncod = "lp:p=2:n=2"\n'
        '[params]\neps = 1.0\nsigma = 0.2\n'  # alpha missing on purpose
    )
    with pytest.raises(ScenarioError, match="alpha"):
        run_scenario(cfg)
    assert main(["run", str(cfg)]) == 2


def test_scenario_unknown_pipeline(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[scenario]\nname = "x"\npipeline = "nope"\n')
    with pytest.raises(ScenarioError, match="pipeline"):
        run_scenario(cfg)


def test_scenario_expectation_failure(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        'space = "lp:p=1:n=2"\n'
        "basis = [[1.0, 0.0], [1.0, 1.0]]\n"
        '[scenario]\nname = "expect-fail"\npipeline = "constants"\n'
        "[expect]\nbc = 2.0\n"
    )
    rc, rep = run_main(capsys, ["run", str(cfg)])
    assert rc == 1
    assert rep["passed"] is False
    assert any("expected bc" in f for f in rep["findings"])


COVER_CFG = """\
[scenario]
name = "small-cover"
pipeline = "cover"

[space]
dom = "lp:p=2:n=2"
cod = "lp:p=2:n=2"

[params]
eps = 1.0
sigma = 0.2
alpha = "plain"
count = 6
seed = 7

[report]
json = "small_report.json"
csv = "small_table.csv"
"""


def test_scenario_outputs_byte_identical_across_threads(tmp_path, monkeypatch):
    cfg = tmp_path / "cover.toml"
    cfg.write_text(COVER_CFG)
    blobs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("FRAMECOVER_THREADS", threads)
        report, findings, outputs = run_scenario(cfg)
        assert not findings and report["passed"]
        assert sorted(outputs) == ["small_report.json", "small_table.csv"]
        blobs.append(outputs)
    assert blobs[0] == blobs[1]
    rows = blobs[0]["small_table.csv"].decode().splitlines()
    assert rows[0] == "id,distance,bound,margin"
    assert len(rows) == 1 + 6


def test_run_writes_output_files(tmp_path, capsys):
    cfg = tmp_path / "cover.toml"
    cfg.write_text(COVER_CFG)
    out = tmp_path / "out"
    rc, rep = run_main(capsys, ["run", str(cfg), "--out-dir", str(out)])
    assert rc == 0
    assert rep["margin_min"] > 0
    assert (out / "small_report.json").exists()
    assert json.loads((out / "small_report.json").read_text()) == rep


def test_bundled_scenarios_pass():
    root = files("framecover") / "scenarios"
    rep, findings, _ = run_scenario(str(root / "constants_skew_l1.toml"))
    assert rep["passed"] and not findings
    assert rep["bc"] == pytest.approx(1.0, abs=1e-9)
    rep, findings, _ = run_scenario(str(root / "ubcp_l2.toml"))
    assert rep["passed"] and not findings
    assert rep["count"] == 200 and rep["margin_min"] > 0
    assert rep["certified_runs"] == 200
