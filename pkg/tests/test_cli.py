import json
import time

import numpy as np
import pytest

from clampedplate import cli, study
from clampedplate.config import ConfigError, StudyConfig, parse_config
from clampedplate.grid import Domain

BEAM_INI = """
[domain]
kind = interval
[grid]
divisions = 25, 50, 100
[solver]
K = 8
[trial]
g = cos:2, bump
k = 1, 2
"""

SQUARE_INI = """
[domain]
kind = box
extents = 1.0, 1.0
[grid]
divisions = 8, 16, 32
[solver]
K = 8
[trial]
k = 1, 2
"""


def _write(tmp_path, text, name="study.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_default_config():
    cfg = parse_config("")
    assert cfg.domain.kind == "interval" and cfg.divisions == (50, 100, 200)
    assert cfg.effective_k_max == cfg.K - 1


@pytest.mark.parametrize(
    "text,match",
    [
        ("[grid]\ndivisions = 64, 32", "increasing"),
        ("[solver]\nmethod = qr", "method"),
        ("[domain]\nkind = torus", "unknown domain"),
        ("[study]\ninequalities = ppw, nonsense", "unknown inequality"),
        ("[trial]\ng = tan:1", "multiplier"),
        ("[solver]\nK = 6\n[trial]\nk = 5", "trial k"),
        ("[solver]\nK = twelve", "invalid"),
        ("[study]\nseed = -1", "unsigned"),
        ("[trial]\naxes = 1", "axes"),
        ("not an ini", "invalid"),
        ("[grid]\ndivisions = 2, 8", "at least 4"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_overrides_and_echo():
    cfg = parse_config(SQUARE_INI).with_overrides(seed=7, method=None, tol=1e-9)
    assert cfg.seed == 7 and cfg.method == "auto" and cfg.tol == 1e-9
    echo = cfg.echo()
    json.dumps(echo)
    assert echo["domain"]["kind"] == "box" and echo["divisions"] == [8, 16, 32]


def test_cli_config_error_exit(tmp_path, capsys):
    assert cli.main(["solve", "--config", str(tmp_path / "missing.ini")]) == 3
    assert "configuration error" in capsys.readouterr().err
    bad = _write(tmp_path, "[grid]\ndivisions = 0")
    assert cli.main(["verify", "--config", bad, "--out", str(tmp_path / "o")]) == 3
    box = _write(tmp_path, SQUARE_INI, "box.ini")
    assert cli.main(["oracle", "--config", box, "--out", str(tmp_path / "o")]) == 3


def test_cli_stage_failure_exit(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        with study._Stage("solve", {}):
            raise np.linalg.LinAlgError("not positive definite")

    monkeypatch.setattr(study, "run_study", boom)
    assert cli.main(["solve", "--out", str(tmp_path)]) == 1
    assert "stage 'solve' failed" in capsys.readouterr().err


def test_cli_mutually_exclusive_solver_flags():
    with pytest.raises(SystemExit):
        cli.main(["solve", "--dense", "--shift-invert"])


def test_cli_violation_exit(tmp_path, monkeypatch):
    def fake(cfg, stages=None):
        rep = study.StudyReport({"schema_version": study.SCHEMA_VERSION}, {})
        rep.violations.append("theorem11")
        return rep

    monkeypatch.setattr(study, "run_study", fake)
    assert cli.main(["verify", "--out", str(tmp_path)]) == 2


def test_verify_outputs_and_schema(tmp_path):
    ini = _write(tmp_path, BEAM_INI)
    out = tmp_path / "out"
    assert cli.main(["verify", "--config", ini, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["schema_version"] == study.SCHEMA_VERSION
    assert report["violations"] == []
    for name in ("theorem11", "ppw", "hook", "cheng_yang", "conjecture", "levine_protter"):
        header = (out / f"inequality_{name}.csv").read_text().splitlines()[0]
        assert header == "k,lhs,rhs,margin,relative_margin"
    assert set(report["tables"]) >= {"eigenvalues.csv", "trial_sj_identity.csv", "trial_inequalities.csv"}
    assert report["functionals"]["grad_norm_ok"] is True


@pytest.mark.parametrize("command", ["verify", "lemma21", "oracle", "converge"])
def test_byte_identical_reruns(tmp_path, command):
    ini = _write(tmp_path, BEAM_INI.replace("K = 8", "K = 8\n[lemma21]\ninstances = 50"))
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        assert cli.main([command, "--config", ini, "--out", str(out), "--seed", "11"]) == 0
        outs.append(out)
    csvs = sorted(p.name for p in outs[0].glob("*.csv"))
    assert csvs
    for name in csvs:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_lemma21_seed_changes_output(tmp_path):
    ini = _write(tmp_path, "[lemma21]\ninstances = 20")
    for seed in ("1", "2"):
        assert cli.main(["lemma21", "--config", ini, "--out", str(tmp_path / seed), "--seed", seed]) == 0
    a = (tmp_path / "1" / "lemma21_sweep.csv").read_bytes()
    b = (tmp_path / "2" / "lemma21_sweep.csv").read_bytes()
    assert a != b


def test_solver_methods_agree():
    cfg = parse_config(SQUARE_INI)
    from clampedplate.grid import build_grid

    grid = build_grid(cfg.domain, 24)
    a = study.solve_grid(grid, 8, "dense")
    b = study.solve_grid(grid, 8, "shift-invert", tol=1e-11)
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10)


def test_convergence_orders_beam():
    cfg = parse_config(BEAM_INI.replace("25, 50, 100", "50, 100, 200"))
    rep = study.convergence_study(cfg)
    orders = rep.payload["convergence"]["orders"]
    assert orders["gamma_1"]["order"] == pytest.approx(2.0, abs=0.3)
    for key in ("gap_sj", "gap_lemma22", "gap_prop22"):
        assert orders[key]["order"] == pytest.approx(2.0, abs=0.3)
    with pytest.raises(ConfigError):
        study.convergence_study(cfg.with_overrides(divisions=(50, 100)))


def test_convergence_order_disk():
    cfg = StudyConfig(domain=Domain.disk(1.0), divisions=(32, 64, 128), K=4, k_values=(1, 2))
    rep = study.convergence_study(cfg)
    assert rep.payload["convergence"]["orders"]["gamma_1"]["order"] == pytest.approx(1.0, abs=0.5)


def test_beam_study_fast_and_holds():
    cfg = parse_config("[solver]\nK = 12")
    t0 = time.perf_counter()
    rep = study.run_study(cfg)
    assert time.perf_counter() - t0 < 10
    assert rep.exit_code == 0
    rows = rep.tables["inequality_theorem11"].rows
    assert all(r[3] >= 0 for r in rows)


def test_square_multiplet_study():
    rep = study.run_study(parse_config(SQUARE_INI.replace("8, 16, 32", "16, 32, 64")))
    ev = rep.tables["eigenvalues"].rows
    assert ev[1][1] == pytest.approx(ev[2][1], rel=1e-8)
    verdicts = {r["name"]: r["verdict"] for r in rep.payload["inequalities"]}
    assert rep.exit_code == 0 and verdicts["hook"] == "holds"
