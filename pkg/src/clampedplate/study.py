"""Study pipeline: solve, post-process, verify, and serialize.

A :class:`StudyReport` holds a JSON-ready ``payload`` and a set of flat
tables. :func:`emit_report` writes ``report.json`` plus one CSV per table;
floats in CSVs use 17 significant digits so repeated runs are byte-identical.
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import inequalities as ineq
from . import oracles
from . import trial as tr
from .config import ConfigError, StudyConfig
from .eigensolver import Spectrum, solve_dense, solve_shift_invert
from .functionals import compute_functionals, constant_C_branches, EigenfunctionFunctionals
from .grid import Grid, build_grid
from .operators import Stencils, assemble_biharmonic
from .sequence_lemma import brute_force_max, instance_bound, random_instance

SCHEMA_VERSION = "1.0"
MARGIN_HEADER = ("k", "lhs", "rhs", "margin", "relative_margin")
AUTO_DENSE_MAX = 1500

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VIOLATION = 2
EXIT_CONFIG = 3


class StudyError(RuntimeError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"stage '{stage}' failed: {exc}")
        self.stage = stage


@dataclass
class Table:
    header: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)


@dataclass
class StudyReport:
    payload: dict
    tables: dict[str, Table]
    violations: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_VIOLATION if self.violations else EXIT_OK


class _Stage:
    def __init__(self, name: str, timing: dict):
        self.name, self.timing = name, timing

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, typ, exc, tb):
        self.timing[self.name] = time.perf_counter() - self.t0
        if exc is not None and not isinstance(exc, (StudyError, ConfigError)):
            raise StudyError(self.name, exc) from exc
        return False


def solve_grid(grid: Grid, K: int, method: str = "auto", tol: float = 1e-10, seed: int = 0) -> Spectrum:
    B = assemble_biharmonic(grid)
    if K > grid.N:
        raise ConfigError(f"K = {K} exceeds the {grid.N} unknowns of the grid")
    if method == "dense" or (method == "auto" and grid.N <= AUTO_DENSE_MAX):
        return solve_dense(B, grid, K)
    return solve_shift_invert(B, grid, K, tol=tol, seed=seed)


def _finite(x):
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return _finite(x.tolist())
    return x


def _functionals_dict(f: EigenfunctionFunctionals) -> dict:
    b1, b2 = constant_C_branches(f)
    return {
        "grad_norm_sq": f.grad_norm_sq,
        "lap_sq": f.lap_sq,
        "grad_lap_sq": f.grad_lap_sq,
        "pure_second_sq": f.pure_second_sq,
        "gamma1": f.gamma1,
        "C": max(b1, b2),
        "C_branches": [b1, b2],
        "grad_norm_bound": math.sqrt(f.gamma1),
    }


def _spectrum_dict(S: Spectrum) -> dict:
    g = S.grid
    return {
        "divisions": list(g.divisions),
        "h": g.h,
        "N": g.N,
        "method": S.method,
        "converged": S.converged,
        "eigenvalues": S.eigenvalues,
        "residuals": S.residuals,
        "multiplets": S.multiplets(),
    }


def _inequality_reports(cfg: StudyConfig, eigs, functionals, n, vol, k_max, source, eps):
    out = []
    for name in cfg.inequalities:
        if name == "theorem11":
            out.append(ineq.theorem11_report(eigs, functionals, k_max, source, eps))
        elif name == "ppw":
            out.append(ineq.ppw_report(eigs, n, k_max, source, eps))
        elif name == "hook":
            out.append(ineq.hook_report(eigs, n, k_max, source, eps))
        elif name == "cheng_yang":
            out.append(ineq.cheng_yang_report(eigs, n, k_max, source, eps))
        elif name == "conjecture":
            out.append(ineq.conjecture_report(eigs, n, k_max, source, eps))
        elif name == "levine_protter":
            out.append(ineq.levine_protter_check(eigs, n, vol, k_max, source, eps))
    return out


def _add_inequalities(report: StudyReport, reps) -> None:
    summary = []
    for rep in reps:
        report.tables[f"inequality_{rep.name}"] = Table(MARGIN_HEADER, rep.rows())
        summary.append(
            {
                "name": rep.name,
                "source": rep.source,
                "verdict": rep.verdict,
                "asserted": rep.asserted,
                "eps": rep.eps,
                "min_relative_margin": rep.min_relative_margin,
                "notes": list(rep.notes),
            }
        )
        if rep.asserted and rep.verdict == ineq.VIOLATED:
            report.violations.append(rep.name)
    report.payload["inequalities"] = summary


def estimate_eps(cfg: StudyConfig, fine: Spectrum, k_max: int) -> tuple[float, str]:
    """Inconclusive band from the two finest grids (0 with a note if unavailable)."""
    if len(cfg.divisions) < 2:
        return 0.0, "single grid: no discretization band available"
    coarse_grid = build_grid(cfg.domain, cfg.divisions[-2])
    kk = min(k_max + 1, coarse_grid.N, fine.K)
    coarse = solve_grid(coarse_grid, kk, cfg.method, cfg.tol, cfg.seed)
    order = 1.0 if cfg.domain.kind == "disk" else 2.0
    ratio = coarse_grid.h / fine.grid.h
    eps = ineq.richardson_eps(coarse.eigenvalues, fine.eigenvalues, kk, order, ratio)
    return eps, f"5 x Richardson relative error, order {order:g}, divisions {cfg.divisions[-2]}->{cfg.divisions[-1]}"


def _trial_checks(report: StudyReport, cfg: StudyConfig, S: Spectrum, eps: float) -> None:
    grid = S.grid
    st = Stencils(grid)
    u1 = S.u(1)
    gs = [tr.parse_multiplier(s, m) for s in cfg.g_specs for m in cfg.axes]
    sj = Table(("g", "j", "relative_error"))
    gaps = Table(("check", "case", "lhs", "rhs", "gap"))
    ineqs = Table(("check", "g", "k", "lhs", "rhs", "margin", "relative_margin", "relative_tail"))
    for g in gs:
        for j, e in enumerate(tr.verify_sj_identity(S, g, stencils=st), start=1):
            sj.rows.append((g.name, j, e))
        c = tr.lemma22_check(g, u1, grid, st)
        gaps.rows.append(("lemma22", g.name, c.lhs, c.rhs, c.gap))
        for k in cfg.k_values:
            t = tr.theorem21_check(S, g, k, stencils=st)
            ineqs.rows.append(("theorem21", g.name, k, t.lhs, t.rhs, t.margin, t.relative_margin, 0.0))
            lm = tr.lemma21_gap_inequality_check(S, g, k, stencils=st)
            ineqs.rows.append(
                ("lemma21", g.name, k, lm.lhs, lm.rhs, lm.margin, lm.relative_margin, lm.relative_tail)
            )
            for name, rel in (("theorem21", t.relative_margin), ("lemma21", lm.relative_margin)):
                if rel < -eps and not (name == "lemma21" and lm.inconclusive):
                    report.violations.append(f"{name}[{g.name},k={k}]")
    for a in cfg.a_values:
        for m in cfg.axes:
            pair = tr.build_pair(a, m, u1, grid, st)
            case = f"a={a:g},m={m}"
            for name, c in (
                ("prop21", tr.prop21_check(pair, grid)),
                ("prop21_pointwise", tr.prop21_check(pair, grid, pointwise=True)),
                ("prop22", tr.prop22_check(pair, grid, st)),
            ):
                gaps.rows.append((name, case, c.lhs, c.rhs, c.gap))
    report.tables["trial_sj_identity"] = sj
    report.tables["trial_identity_gaps"] = gaps
    report.tables["trial_inequalities"] = ineqs
    report.payload["trial"] = {
        "max_sj_error": max((r[2] for r in sj.rows), default=0.0),
        "max_identity_gap": {
            name: max((r[4] for r in gaps.rows if r[0] == name), default=0.0)
            for name in ("lemma22", "prop21", "prop21_pointwise", "prop22")
        },
        "min_relative_margin": {
            name: min((r[6] for r in ineqs.rows if r[0] == name), default=0.0)
            for name in ("theorem21", "lemma21")
        },
    }


def run_study(cfg: StudyConfig, stages=("spectra", "functionals", "inequalities", "trial")) -> StudyReport:
    """Solve on the finest grid and run the requested stages."""
    timing: dict[str, float] = {}
    report = StudyReport({"schema_version": SCHEMA_VERSION, "config": cfg.echo()}, {})
    with _Stage("grid", timing):
        grid = build_grid(cfg.domain, cfg.divisions[-1])
    with _Stage("solve", timing):
        S = solve_grid(grid, cfg.K, cfg.method, cfg.tol, cfg.seed)
    report.payload["spectrum"] = _spectrum_dict(S)
    report.tables["eigenvalues"] = Table(
        ("k", "eigenvalue", "residual"),
        [(k, lam, r) for k, (lam, r) in enumerate(zip(S.eigenvalues, S.residuals), start=1)],
    )
    if not S.converged:
        report.violations.append("solver_not_converged")
    k_max = min(cfg.effective_k_max, S.K - 1)
    eps = 0.0
    if "functionals" in stages or "inequalities" in stages or "trial" in stages:
        with _Stage("epsilon", timing):
            eps, note = estimate_eps(cfg, S, k_max)
        report.payload["eps_h"] = {"value": eps, "definition": note}
    if "functionals" in stages or "inequalities" in stages:
        with _Stage("functionals", timing):
            f = compute_functionals(S)
        fd = _functionals_dict(f)
        fd["grad_norm_ok"] = f.grad_norm_sq <= math.sqrt(f.gamma1) * (1 + eps)
        report.payload["functionals"] = fd
        if "inequalities" in stages:
            with _Stage("inequalities", timing):
                reps = _inequality_reports(
                    cfg, S.eigenvalues, f, grid.n, cfg.domain.volume, k_max, "computed", eps
                )
            _add_inequalities(report, reps)
    if "trial" in stages:
        with _Stage("trial", timing):
            _trial_checks(report, cfg, S, eps)
    report.payload["timing"] = timing
    report.payload["violations"] = report.violations
    return report


def run_oracle(cfg: StudyConfig) -> StudyReport:
    """Analytic spectrum for the configured beam or disk and the inequality suites."""
    timing: dict[str, float] = {}
    report = StudyReport({"schema_version": SCHEMA_VERSION, "config": cfg.echo()}, {})
    dom = cfg.domain
    with _Stage("oracle", timing):
        if dom.kind == "interval" and dom.extents == (1.0,):
            spec, f = oracles.beam_spectrum(cfg.K), oracles.beam_mode_functionals()
        elif dom.kind == "disk" and dom.radius == 1.0:
            spec, f = oracles.disk_spectrum(cfg.K), oracles.disk_mode_functionals()
        else:
            raise ConfigError("analytic spectra exist only for the unit interval and the unit disk")
    eigs = spec.eigenvalues
    report.tables["eigenvalues"] = Table(
        ("k", "eigenvalue", "root", "order", "residual"),
        [(k, e, r, int(o), res) for k, (e, r, o, res) in enumerate(
            zip(eigs, spec.roots, spec.orders, spec.residuals), start=1)],
    )
    report.payload["oracle"] = {"domain": spec.domain, "K": spec.K, "max_residual": float(spec.residuals.max())}
    report.payload["functionals"] = _functionals_dict(f)
    report.payload["eps_h"] = {"value": 0.0, "definition": "analytic spectrum"}
    k_max = min(cfg.effective_k_max, spec.K - 1)
    with _Stage("inequalities", timing):
        reps = _inequality_reports(cfg, eigs, f, spec.n, spec.volume, k_max, "oracle", 0.0)
    _add_inequalities(report, reps)
    fit = ineq.agmon_pleijel_fit(eigs, spec.n, spec.volume, beam=spec.domain == "beam")
    cols = [fit.k, eigs, fit.ratios, np.full(spec.K, fit.coefficient)]
    header = ["k", "eigenvalue", "ratio", "coefficient"]
    if fit.beam_pi_ratio is not None:
        cols.append(fit.beam_pi_ratio)
        header.append("root_over_k_plus_half")
    report.tables["agmon_pleijel"] = Table(tuple(header), list(zip(*cols)))
    if spec.K - 1 >= 20:
        scan = ineq.remark11_order_scan(eigs, f)
        report.payload["remark11"] = {
            name: {"slope": s.slope, "stderr": s.stderr, "k_lo": s.k_lo, "k_hi": s.k_hi, "expected": s.expected}
            for name, s in (("rhs", scan.rhs_slope), ("gap", scan.gap_slope))
        }
    report.payload["timing"] = timing
    report.payload["violations"] = report.violations
    return report


def run_lemma21(cfg: StudyConfig) -> StudyReport:
    """Seeded sweep of random sequences against the two-point bound."""
    report = StudyReport({"schema_version": SCHEMA_VERSION, "config": cfg.echo()}, {})
    t = Table(("instance", "A", "B", "S", "bound", "brute_force_max", "slack"))
    worst = math.inf
    for i in range(cfg.lemma_instances):
        inst = random_instance(cfg.seed + i, cfg.lemma_length, cfg.lemma_spread)
        if inst.mu[0] + inst.mu[1] == 0:
            continue
        bound = instance_bound(inst)
        best, _ = brute_force_max(inst.mu, inst.A, inst.B)
        slack = bound - max(inst.S, best)
        worst = min(worst, slack)
        t.rows.append((i, inst.A, inst.B, inst.S, bound, best, slack))
    report.tables["lemma21_sweep"] = t
    report.payload["lemma21"] = {"instances": len(t.rows), "min_slack": worst}
    if worst < -1e-12:
        report.violations.append("lemma21")
    report.payload["violations"] = report.violations
    return report


def observed_order(h, v) -> float:
    """Order ``p`` from three values with ``v_i = v* + c h_i^p``."""
    h1, h2, h3 = h
    e12, e23 = v[0] - v[1], v[1] - v[2]
    if e23 == 0 or e12 / e23 <= 0:
        return math.nan
    target = e12 / e23
    fn = lambda p: (h1**p - h2**p) / (h2**p - h3**p) - target
    try:
        return brentq(fn, 0.05, 12.0)
    except ValueError:
        return math.nan


def gap_order(h, g) -> float:
    """Order from two gaps that tend to zero."""
    if g[0] <= 0 or g[1] <= 0:
        return math.nan
    return math.log(g[0] / g[1]) / math.log(h[0] / h[1])


def convergence_study(cfg: StudyConfig) -> StudyReport:
    if len(cfg.divisions) < 3:
        raise ConfigError("a convergence study needs at least three divisions")
    timing: dict[str, float] = {}
    report = StudyReport({"schema_version": SCHEMA_VERSION, "config": cfg.echo()}, {})
    nk = min(cfg.K, 6)
    g = tr.parse_multiplier(cfg.g_specs[0], cfg.axes[0])
    a, m = cfg.a_values[0], cfg.axes[0]
    hs, values = [], {}
    for d in cfg.divisions:
        with _Stage(f"divisions_{d}", timing):
            grid = build_grid(cfg.domain, d)
            S = solve_grid(grid, max(nk, min(cfg.K, 10)), cfg.method, cfg.tol, cfg.seed)
            st = Stencils(grid)
            f = compute_functionals(S, grid, st)
            pair = tr.build_pair(a, m, S.u(1), grid, st)
            row = {f"gamma_{j}": S.eigenvalues[j - 1] for j in range(1, nk + 1)}
            row.update(
                grad_norm_sq=f.grad_norm_sq,
                grad_lap_sq=f.grad_lap_sq,
                pure_second_sq=f.pure_second_sq,
                gap_sj=float(tr.verify_sj_identity(S, g, min(10, S.K), st).max()),
                gap_lemma22=tr.lemma22_check(g, S.u(1), grid, st).gap,
                gap_prop22=tr.prop22_check(pair, grid, st).gap,
            )
        hs.append(grid.h)
        for key, val in row.items():
            values.setdefault(key, []).append(float(val))
    table = Table(("quantity", "divisions", "h_fine", "value_fine", "order"))
    orders = {}
    for key, vals in values.items():
        for i in range(len(hs) - 2 if not key.startswith("gap_") else len(hs) - 1):
            if key.startswith("gap_"):
                used = cfg.divisions[i : i + 2]
                p = gap_order(hs[i : i + 2], vals[i : i + 2])
                last = i + 1
            else:
                used = cfg.divisions[i : i + 3]
                p = observed_order(hs[i : i + 3], vals[i : i + 3])
                last = i + 2
            label = "/".join(str(d) for d in used)
            table.rows.append((key, label, hs[last], vals[last], p))
            orders[key] = {"divisions": label, "order": p}
    report.tables["convergence"] = table
    report.payload["convergence"] = {"h": hs, "values": values, "orders": orders}
    report.payload["timing"] = timing
    report.payload["violations"] = report.violations
    return report


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_table(table: Table, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([_fmt(x) for x in row])


def emit_report(report: StudyReport, out_dir: str | Path) -> list[Path]:
    """Write ``report.json`` and one CSV per table; returns the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = []
    for name in sorted(report.tables):
        p = out / f"{name}.csv"
        write_table(report.tables[name], p)
        paths.append(p)
    payload = dict(report.payload)
    payload["tables"] = sorted(f"{n}.csv" for n in report.tables)
    p = out / "report.json"
    p.write_text(json.dumps(_finite(payload), indent=2, sort_keys=True) + "\n")
    paths.append(p)
    return paths
