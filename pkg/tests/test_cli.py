import json

import numpy as np
import pytest

from revstruct import baker, cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_pgm(path):
    tokens = path.read_text().split()
    assert tokens[0] == "P2"
    w, h, maxval = map(int, tokens[1:4])
    assert maxval == 255
    return np.array(tokens[4:], dtype=int).reshape(h, w)


def test_bernoulli_suite_report_schema(capsys):
    code, out, _ = run(["--suite", "bernoulli", "--seed", "3"], capsys)
    assert code == 0
    report = json.loads(out)
    assert list(report) == ["suite", "seed", "reports", "duration_ms", "passed"]
    assert report["suite"] == "bernoulli" and report["seed"] == 3 and report["passed"]
    ids = [r["law_id"] for r in report["reports"]]
    assert ids == sorted(ids) == ["eq_3_10", "eq_3_7", "eq_3_9"]


def test_same_seed_same_body(tmp_path, capsys):
    bodies = []
    for name in ("a.json", "b.json"):
        assert run(["--suite", "densities", "--seed", "9", "--out", str(tmp_path / name)], capsys)[0] == 0
        d = json.loads((tmp_path / name).read_text())
        del d["duration_ms"]
        bodies.append(json.dumps(d, indent=2))
    assert bodies[0] == bodies[1]


def test_zero_tolerance_fails_float_checks(capsys):
    code, out, _ = run(["--suite", "symplectic", "--tol", "symplectic=0"], capsys)
    assert code == 1
    report = json.loads(out)
    failed = [r["law_id"] for r in report["reports"] if not r["passed"]]
    assert "flow_group_law" in failed and not report["passed"]
    assert all(r["tolerance"] == 0 for r in report["reports"])


def test_per_law_tolerance(capsys):
    code, out, _ = run(["--suite", "densities", "--tol", "eq_2_14=1e-20", "--samples", "3"], capsys)
    report = json.loads(out)
    by_id = {r["law_id"]: r for r in report["reports"]}
    assert by_id["eq_2_14"]["tolerance"] == 1e-20
    assert code == (0 if by_id["eq_2_14"]["passed"] else 1)
    assert by_id["eq_2_21c"]["tolerance"] == 1e-12


@pytest.mark.parametrize(
    "argv",
    [["--samples", "0"], ["--suite", "nope"], ["--tol", "eq_9_9=1"], ["--tol", "eq_5_3=-1"],
     ["--tol", "eq_5_3"], ["--frames-dir", "x", "--resolution", "11"], ["--frame", "theta:1"]],
)
def test_usage_errors(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as e:  # argparse reports its own errors this way
        code = e.code
    assert code == 2


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(["--suite", "bernoulli", "--out", str(blocker / "r.json")], capsys)[0] == 3
    assert run(["--frames-dir", str(blocker / "frames")], capsys)[0] == 3


def test_env_seed_and_config_file(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("REVSTRUCT_SEED", "42")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"suite": "bernoulli", "samples": 20, "tolerances": {"eq_3_10": 0.5}}))
    code, out, _ = run(["--config", str(cfg)], capsys)
    report = json.loads(out)
    assert code == 0 and report["seed"] == 42
    by_id = {r["law_id"]: r for r in report["reports"]}
    assert by_id["eq_3_10"]["tolerance"] == 0.5 and by_id["eq_3_10"]["samples_tested"] == 60
    # flags override the file
    code, out, _ = run(["--config", str(cfg), "--seed", "1", "--tol", "eq_3_10=0"], capsys)
    report = json.loads(out)
    assert report["seed"] == 1
    assert {r["law_id"]: r for r in report["reports"]}["eq_3_10"]["tolerance"] == 0


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert run(["--config", str(cfg)], capsys)[0] == 2
    assert run(["--config", str(tmp_path / "missing.json")], capsys)[0] == 3


class TestFrames:
    def test_export(self, tmp_path, capsys):
        code, _, err = run(["--frames-dir", str(tmp_path), "--resolution", "6",
                            "--frame", "partition_evolution:3", "--frame", "theta:-2"], capsys)
        assert code == 0
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["partition_evolution_t3_k6.csv", "partition_evolution_t3_k6.pgm",
                         "theta_F-2_k6.csv", "theta_F-2_k6.pgm"]
        img = read_pgm(tmp_path / "partition_evolution_t3_k6.pgm")
        assert np.array_equal(img, baker.partition_frame(3, 6))
        rows = (tmp_path / "theta_F-2_k6.csv").read_text().splitlines()
        assert rows[0] == "x,y,value" and len(rows) == 1 + 64 * 64

    def test_initial_frame_is_left_white(self, tmp_path):
        paths = cli.export_frames("partition_evolution", 0, 3, tmp_path)
        img = read_pgm(paths[0])
        assert (img[:, :4] == 255).all() and (img[:, 4:] == 0).all()

    def test_default_frames(self, tmp_path, capsys):
        assert run(["--frames-dir", str(tmp_path), "--resolution", "4"], capsys)[0] == 0
        assert len(list(tmp_path.glob("*.pgm"))) == len(cli.DEFAULT_FRAMES)


def test_list_laws(capsys):
    code, out, _ = run(["--list-laws"], capsys)
    assert code == 0 and "eq_5_3 " in out and "eq_2_21c" in out


def test_every_suite_has_laws():
    for suite in cli.SUITES:
        assert cli.SuiteConfig(suite=suite).laws()
