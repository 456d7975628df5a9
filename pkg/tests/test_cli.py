import csv
import io
import json

import pytest

from eigencast import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "hamiltonian": {"n": 3},
        "variant": "two_bell",
        "initial": {"kind": "ground_overlap", "gamma_sq": 0.9},
        "iterations": 20,
        "trajectories": 50,
        "seed": 3,
    }))
    return path


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--n", "1", "--boundary", "open")
    assert code == 0
    r = rows(out)
    assert [x["index"] for x in r] == ["0", "1", "gap"]
    assert float(r[0]["eigenvalue"]) == pytest.approx(-2**0.5)
    assert float(r[2]["eigenvalue"]) == pytest.approx(2 * 2**0.5)


def test_spectrum_from_config(capsys, config):
    code, out, _ = run(capsys, "spectrum", "--config", str(config))
    assert code == 0 and len(rows(out)) == 9


def test_run_writes_records_and_summary(capsys, config, tmp_path):
    out_path = tmp_path / "rec.csv"
    code, out, _ = run(capsys, "run", "--config", str(config), "--out", str(out_path), "--threads", "2")
    assert code == 0
    summary = json.loads(out)
    assert summary["trajectories"] == 50
    assert len(rows(out_path.read_text())) == 50 * 20


def test_run_overrides(capsys, config, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    run(capsys, "run", "--config", str(config), "--seed", "9", "--trajectories", "7",
        "--format", "jsonl", "--out", str(a))
    run(capsys, "run", "--config", str(config), "--seed", "9", "--trajectories", "7",
        "--format", "jsonl", "--out", str(b), "--threads", "4")
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 7


def test_sweep(capsys, config):
    code, out, _ = run(capsys, "sweep", "--config", str(config), "--param", "initial.gamma_sq",
                       "--values", "0.8,0.95")
    assert code == 0
    r = rows(out)
    assert [x["value"] for x in r] == ["0.8", "0.95"]


def test_sweep_bad_param(capsys, config):
    code, _, err = run(capsys, "sweep", "--config", str(config), "--param", "iterations.x", "--values", "1")
    assert code == 2 and "config error" in err


def test_qaa(capsys):
    code, out, _ = run(capsys, "qaa", "--n", "3", "--zz", "1", "--times", "1,4")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == ["T", "infidelity", "wall_time"]
    assert float(r[1]["infidelity"]) < float(r[0]["infidelity"])


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--n", "2", "--rounds", "1")
    assert code == 0
    assert all(x["pass"] == "1" for x in rows(out))


def test_validate_failure_exit_code(capsys):
    code, _, _ = run(capsys, "validate", "--n", "2", "--rounds", "1", "--tol", "-1")
    assert code == 1


def test_validate_moments(capsys, monkeypatch):
    code, out, _ = run(capsys, "validate-moments", "--samples", "20000")
    r = rows(out)
    assert list(r[0]) == ["quantity", "closed_form", "mc_estimate", "std_error", "pass"]
    assert code == (0 if all(x["pass"] == "pass" for x in r) else 1)
    monkeypatch.setattr(cli, "validate_moments", lambda s, seed: iter([("q", 1.0, 2.0, 0.1, False)]))
    code, out, _ = run(capsys, "validate-moments")
    assert code == 1 and rows(out)[0]["pass"] == "fail"


def test_reproduce_fig2b(capsys, tmp_path):
    cfg = tmp_path / "f.json"
    cfg.write_text(json.dumps({"hamiltonian": {"n": 3}, "variant": "single", "iterations": 15,
                               "trajectories": 40, "initial": {"kind": "ground_overlap", "gamma_sq": 0.9}}))
    code, out, _ = run(capsys, "reproduce", "fig2b", "--config", str(cfg))
    assert code == 0
    r = rows(out)
    assert len(r) == 16 and list(r[0]) == ["iteration", "ratio_instance", "ratio_geomean", "reference"]


def test_reproduce_fig3b(capsys, tmp_path):
    cfg = tmp_path / "f.json"
    cfg.write_text(json.dumps({"hamiltonian": {"n": 3}, "iterations": 5, "trajectories": 30,
                               "initial": {"kind": "ground_overlap", "gamma_sq": 0.8}}))
    code, out, _ = run(capsys, "reproduce", "fig3b", "--config", str(cfg))
    assert code == 0
    r = rows(out)
    assert {x["variant"] for x in r} == {"single", "two_bell", "two_swap"}
    assert {"std", "sem"} <= set(r[0])


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"hamiltonian": {"n": 3}, "variant": "two_bell", "devices": 4}))
    code, _, err = run(capsys, "run", "--config", str(bad))
    assert code == 2 and "config error" in err
    code, _, _ = run(capsys, "run", "--config", str(tmp_path / "missing.json"))
    assert code == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, _, _ = run(capsys, "run", "--config", str(broken))
    assert code == 2


def test_argparse_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2
