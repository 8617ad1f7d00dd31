"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py``; lines are printed even
without ``-s``.
"""
import json
import math
import time

import numpy as np
import pytest

from clampedplate import cli
from clampedplate import inequalities as iq
from clampedplate import sequence_lemma as sl
from clampedplate import trial as tr
from clampedplate.functionals import compute_functionals, constant_C
from clampedplate.grid import Domain, build_grid
from clampedplate.operators import Stencils, assemble_biharmonic
from clampedplate.oracles import (
    beam_mode_functionals,
    beam_roots,
    beam_characteristic,
    beam_spectrum,
    disk_mode_functionals,
    disk_spectrum,
)
from clampedplate.study import gap_order, observed_order, solve_grid

from conftest import spectrum

TEST_SET = (tr.cos_mode(2.0), tr.sin_mode(3.0), tr.bump())
FINE = {"beam": 200, "square": 64}
LADDER = {"beam": (50, 100, 200), "square": (16, 32, 64)}


@pytest.fixture
def report(capsys):
    def _report(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, detail

    return _report


def _eps(kind, k_max=6, K=12):
    coarse, fine = LADDER[kind][-2:]
    return iq.richardson_eps(spectrum(kind, coarse, K).eigenvalues, spectrum(kind, fine, K).eigenvalues, k_max)


def test_c01_beam_oracle_match(report):
    t0 = time.perf_counter()
    vals = [solve_grid(build_grid(Domain.interval(), d), 4).eigenvalues[0] for d in (50, 100, 200)]
    elapsed = time.perf_counter() - t0
    beta = beam_roots(1)[0]
    oracle = beta**4
    residual = abs(beam_characteristic(beta))
    rel = abs(vals[-1] - oracle) / oracle
    p = observed_order([1 / 50, 1 / 100, 1 / 200], vals)
    ok = rel <= 5e-3 and abs(oracle - 500.564) < 1e-3 and residual <= 1e-13 and abs(p - 2) <= 0.3 and elapsed < 10
    report(
        "1 beam oracle match",
        ok,
        f"G1(200)={vals[-1]:.4f} oracle={oracle:.6f} rel={rel:.2e} residual={residual:.1e} order={p:.3f} time={elapsed:.2f}s",
    )


def test_c02_disk_trend(report):
    oracle = disk_spectrum(1).eigenvalues[0]
    vals = [spectrum("disk", d, 4).eigenvalues[0] for d in (32, 64, 128)]
    errs = [abs(v - oracle) / oracle for v in vals]
    monotone = all(np.diff(errs) < 0) and (all(np.diff(vals) > 0) or all(np.diff(vals) < 0))
    ok = monotone and errs[-1] <= 0.05 and abs(oracle - 104.363) < 1e-3
    report("2 disk trend", ok, f"oracle={oracle:.4f} values={np.round(vals, 3).tolist()} rel errors={np.round(errs, 4).tolist()}")


def _quadratic_form(B, u, grid):
    # extended-precision matvec: float64 u^T B u loses ~eps ||B|| to cancellation
    B = B.tocoo()
    ul = u.astype(np.longdouble)
    Bu = np.zeros(len(u), dtype=np.longdouble)
    np.add.at(Bu, B.row, B.data.astype(np.longdouble) * ul[B.col])
    return float(np.longdouble(grid.h) ** grid.n * np.dot(ul, Bu))


@pytest.mark.parametrize("kind,d", [("beam", 200), ("square", 64), ("disk", 128)])
def test_c03_exact_discrete_identities(report, kind, d):
    S = spectrum(kind, d, 12)
    g = S.grid
    B = assemble_biharmonic(g)
    asym = abs(B - B.T).max()
    u = S.u(1)
    lap_sq = g.integrate(Stencils(g).laplacian(u) ** 2)
    quad = _quadratic_form(B, u, g)
    e_parts = abs(quad - lap_sq) / lap_sq
    e_gamma = abs(lap_sq - S.eigenvalues[0]) / S.eigenvalues[0]
    gram = g.h**g.n * S.vectors.T @ S.vectors
    e_orth = np.abs(gram - np.eye(S.K)).max()
    ok = asym == 0 and e_parts <= 1e-10 and e_gamma <= 1e-10 and e_orth <= 1e-10
    report(
        f"3 exact discrete identities ({kind} {d})",
        ok,
        f"max|B-B^T|={asym} parts={e_parts:.1e} lap_sq vs G1={e_gamma:.1e} orthonormality={e_orth:.1e}",
    )


@pytest.mark.parametrize("kind", ["beam", "square"])
@pytest.mark.parametrize("g", TEST_SET, ids=lambda g: g.name)
def test_c04_expansion_identity_refinement(report, kind, g):
    errs = [tr.verify_sj_identity(spectrum(kind, d, 12), g, 10).max() for d in LADDER[kind]]
    ratios = np.array(errs[:-1]) / errs[1:]
    report(
        f"4 expansion-coefficient identity ({kind}, {g.name})",
        bool(np.all(ratios >= 3)),
        f"max errors={[f'{e:.2e}' for e in errs]} ratios={np.round(ratios, 2).tolist()}",
    )


def _pair_cases(kind):
    return [(a, m) for a in (1.0, 2.5) for m in range(1 if kind == "beam" else 2)]


@pytest.mark.parametrize("kind", ["beam", "square"])
def test_c05_integral_identities(report, kind):
    lines, ok = [], True
    hs = [1 / d for d in LADDER[kind]]
    for g in TEST_SET:
        gaps = [tr.lemma22_check(g, spectrum(kind, d, 12).u(1), spectrum(kind, d, 12).grid).gap for d in LADDER[kind]]
        p = gap_order(hs[-2:], gaps[-2:])
        good = gaps[-1] <= 1e-3 and abs(p - 2) <= 0.5
        ok &= good
        lines.append(f"product({g.name}) gap={gaps[-1]:.1e} order={p:.2f}")
    pointwise = 0.0
    for a, m in _pair_cases(kind):
        for name, fn in (("pair-bracket", tr.prop21_check), ("pair-norm", tr.prop22_check)):
            gaps = []
            for d in LADDER[kind]:
                S = spectrum(kind, d, 12)
                gaps.append(fn(tr.build_pair(a, m, S.u(1), S.grid), S.grid).gap)
            p = gap_order(hs[-2:], gaps[-2:])
            good = gaps[-1] <= 1e-3 and abs(p - 2) <= 0.5
            ok &= good
            lines.append(f"{name}(a={a:g},m={m}) gap={gaps[-1]:.1e} order={p:.2f}")
        S = spectrum(kind, FINE[kind], 12)
        pointwise = max(pointwise, tr.prop21_pointwise_error(tr.build_pair(a, m, S.u(1), S.grid)))
    ok &= pointwise <= 1e-12
    lines.append(f"pointwise={pointwise:.1e}")
    report(f"5 integral identities ({kind} {FINE[kind]})", ok, "; ".join(lines))


@pytest.mark.parametrize("kind", ["beam", "square"])
def test_c06_trial_inequalities(report, kind):
    S = spectrum(kind, FINE[kind], 40)
    eps = _eps(kind)
    worst_th, worst_lm, worst_tail, inconclusive = np.inf, np.inf, 0.0, 0
    for g in TEST_SET:
        for k in range(1, 6):
            th = tr.theorem21_check(S, g, k)
            lm = tr.lemma21_gap_inequality_check(S, g, k)
            worst_th = min(worst_th, th.relative_margin)
            worst_lm = min(worst_lm, lm.relative_margin)
            worst_tail = max(worst_tail, lm.relative_tail)
            inconclusive += lm.inconclusive
    oracle_min = np.inf
    if kind == "beam":
        ev = beam_spectrum(40).eigenvalues
        for g in TEST_SET:
            for k in range(1, 6):
                oracle_min = min(oracle_min, tr.theorem21_check(S, g, k, eigenvalues=ev).margin)
    ok = worst_th >= -eps and worst_lm >= -eps and worst_tail < 1e-3 and inconclusive == 0
    if kind == "beam":
        ok &= oracle_min > 0
    detail = f"eps_h={eps:.2e} min rel margins: expansion={worst_th:.3f} two-level={worst_lm:.3f} max tail={worst_tail:.1e}"
    if kind == "beam":
        detail += f" oracle-assisted min margin={oracle_min:.3e}"
    report(f"6 trial-function inequalities ({kind} {FINE[kind]})", ok, detail)


def test_c07_sequence_bound_suite(report):
    slacks = []
    for seed in range(1000):
        inst = sl.random_instance(seed)
        if inst.mu[0] + inst.mu[1] == 0:
            continue
        slacks.append(sl.instance_bound(inst) - inst.S)
    worked = sl.lemma_bound(1.0, 2.0, 5.0, 2.0)
    worked_brute, support = sl.brute_force_max([1.0, 2.0], 5.0, 2.0)
    family_err = 0.0
    rng = np.random.default_rng(0)
    for _ in range(200):
        mu = np.sort(rng.uniform(0, 20, 6))
        w = np.zeros(6)
        w[:2] = rng.exponential(1.0, 2)
        inst = sl.SequenceInstance(mu, w)
        best, _ = sl.brute_force_max(mu, inst.A, inst.B)
        bound = sl.instance_bound(inst)
        family_err = max(family_err, abs(best - bound) / bound)
    ok = min(slacks) >= -1e-12 and family_err <= 1e-12 and worked == 3.0 and abs(worked_brute - 3.0) <= 1e-12
    report(
        "7 sequence bound suite",
        ok,
        f"{len(slacks)} instances min slack={min(slacks):.1e}; two-point family max rel diff={family_err:.1e}; "
        f"worked case bound={worked} brute={worked_brute} support={support}",
    )


def test_c08_gap_inequality(report):
    S = spectrum("beam", 200, 12)
    f = compute_functionals(S)
    eps = _eps("beam")
    beam = iq.theorem11_report(S.eigenvalues, f, 10, eps=eps)
    C = constant_C(f)
    g1 = S.eigenvalues[0]
    gap1 = S.eigenvalues[1] - g1
    disk_f = disk_mode_functionals()
    disk = iq.theorem11_report(disk_spectrum(12).eigenvalues, disk_f, 10, source="oracle")
    grad_ok = f.grad_norm_sq <= math.sqrt(g1) * (1 + eps)
    ok = (
        beam.min_margin >= 0
        and disk.min_margin >= 0
        and gap1 <= C
        and C >= 68 * g1 * (1 - 1e-12)
        and abs(gap1 - 3303) / 3303 < 0.01
        and grad_ok
    )
    report(
        "8 gap inequality",
        ok,
        f"beam min rel margin={beam.min_relative_margin:.4f} k=1: G2-G1={gap1:.2f} <= C={C:.1f} (68 G1={68 * g1:.1f}); "
        f"disk oracle min rel margin={disk.min_relative_margin:.4f}; |grad u1|^2={f.grad_norm_sq:.4f} <= sqrt(G1)={math.sqrt(g1):.4f}",
    )


def test_c09_classical_suite(report):
    beam = beam_spectrum(51).eigenvalues
    disk = disk_spectrum(31).eigenvalues
    lines, ok = [], True
    for label, lam, n, vol, k_max in (("beam", beam, 1, 1.0, 50), ("disk", disk, 2, math.pi, 30)):
        reps = iq.classical_suite(lam, n, k_max, source="oracle") + [iq.levine_protter_check(lam, n, vol, k_max)]
        for rep in reps:
            if rep.asserted:
                good = rep.verdict == iq.HOLDS and rep.min_margin > 0
                ok &= good
            lines.append(f"{label}/{rep.name}={rep.min_relative_margin:.3f}{'' if rep.asserted else ' (recorded)'}")
    spot = iq.ppw_report(beam, 1, 1).records[0]
    ok &= abs(spot.rhs - 12014) < 1 and abs(spot.lhs - 3303) < 1 and spot.margin > 0
    lines.append(f"spot k=1: {spot.rhs:.2f} - {spot.lhs:.2f} = {spot.margin:.2f}")
    report("9 classical suite on analytic spectra", ok, "; ".join(lines))


def test_c10_asymptotics(report):
    beam = beam_spectrum(201).eigenvalues
    disk = disk_spectrum(101).eigenvalues
    fit = iq.agmon_pleijel_fit(beam, 1, 1.0, k_range=[50], beam=True)
    pi_err = abs(fit.beam_pi_ratio[0] / math.pi - 1)
    bs = iq.remark11_order_scan(beam, beam_mode_functionals())
    ds = iq.remark11_order_scan(disk, disk_mode_functionals())
    ok = pi_err <= 1e-3 and abs(bs.rhs_slope.slope - 2.0) <= 0.3 and abs(ds.rhs_slope.slope - 1.0) <= 0.3
    report(
        "10 asymptotics",
        ok,
        f"beam root ratio at k=50 rel err={pi_err:.1e}; slopes beam={bs.rhs_slope.slope:.3f} (2) "
        f"disk={ds.rhs_slope.slope:.3f} (1); implied gap slopes beam={bs.gap_slope.slope:.3f} disk={ds.gap_slope.slope:.3f}",
    )


def test_c11_determinism(report, tmp_path):
    ini = tmp_path / "study.ini"
    ini.write_text("[grid]\ndivisions = 50, 100\n[solver]\nK = 8\n[trial]\nk = 1, 2\n[lemma21]\ninstances = 100\n")
    same, names = True, []
    for command in ("verify", "lemma21", "oracle"):
        outs = []
        for i in range(2):
            out = tmp_path / f"{command}{i}"
            cli.main([command, "--config", str(ini), "--out", str(out), "--seed", "5"])
            outs.append(out)
        for p in sorted(outs[0].glob("*.csv")):
            names.append(p.name)
            same &= p.read_bytes() == (outs[1] / p.name).read_bytes()
        json.loads((outs[0] / "report.json").read_text())
    report("11 determinism", same and bool(names), f"{len(names)} tables compared byte for byte")
