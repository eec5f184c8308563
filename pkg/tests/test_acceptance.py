"""Acceptance criteria 1-11, one test each.

Every test records its outcome in the shared log before asserting, so the
terminal summary prints a pass/fail line per criterion even on failure.
"""
import math
import time

import numpy as np
import pytest

from conftest import experiment_report
from recurlab import analysis as A
from recurlab import signals as S
from recurlab.config import parse_signal
from recurlab.experiments import list_experiments


def _tables(rep):
    d = rep.to_dict()
    return {k: [dict(zip(t["columns"], r)) for r in t["rows"]] for k, t in d["tables"].items()}


def _ladder_passed(rows, signal):
    rungs = [r for r in rows if r["signal"] == signal]
    return bool(rungs) and all(r["passed"] for r in rungs)


def _record(log, n, title, ok, detail):
    log[n] = (bool(ok), title, detail)
    assert ok, f"criterion {n} ({title}): {detail}"


def test_criterion_01_operator_identities(acceptance_log, rng):
    tol = 1e-6
    t0 = time.perf_counter()
    worst_tel, monotone = 0.0, True
    t = np.linspace(-6.0, 6.0, 61)
    for _ in range(10):
        m = int(rng.integers(1, 5))
        terms = [(float(rng.uniform(-3, 3)), complex(*rng.normal(size=2))) for _ in range(m)]
        f = S.trig_poly(terms)
        scale = max(1.0, sum(abs(c) for _, c in terms))
        h = float(rng.uniform(0.2, 3.0))
        lhs = h * f.running_mean(h, method="quadrature").evaluate(t)
        rhs = f.integral(0.0, method="quadrature").difference(h).evaluate(t)
        worst_tel = max(worst_tel, float(np.abs(lhs - rhs).max()) / scale)

        k = float(rng.uniform(0.5, 3.0))
        fv = f.evaluate(t)
        mk = f.running_mean(k, method="quadrature").evaluate(t)
        errs = []
        for n in (4, 16, 64):
            avg = sum(f.evaluate(t + k * j / n) for j in range(1, n + 1)) / n
            errs.append(float(np.abs((fv - mk) - (fv - avg)).max()))
        monotone &= errs[0] >= errs[1] - tol and errs[1] >= errs[2] - tol
    dt = time.perf_counter() - t0
    ok = worst_tel <= tol and monotone and dt < 10
    _record(acceptance_log, 1, "operator identities", ok,
            f"telescoping err {worst_tel:.2e} (tol {tol}), Cesaro monotone={monotone}, {dt:.1f}s")


def test_criterion_02_hierarchy(acceptance_log):
    rep, dt = experiment_report("hierarchy")
    tb = _tables(rep)
    gaps = {}
    for r in tb["gap_stability"]:
        gaps.setdefault(r["signal"], []).append(r["max_gap"])
    sin, aa = gaps["sin"], gaps["aa_phi"]
    variation = (max(sin) - min(sin)) / min(sin)
    growth = max(aa) / min(aa)
    chirp = [r for r in tb["ladders"] if r["signal"] == "chirp" and r["rung"] == 1]
    chirp_rejected = bool(chirp) and not chirp[0]["passed"] and chirp[0]["eps"] == 0.5 \
        and (chirp[0]["window_lo"], chirp[0]["window_hi"]) == (-2.0, 2.0)
    disc = tb["chirp_discrete"][0]
    disc_ok = sorted(disc["probes"]) == [0.0, 1.0, math.sqrt(2)] and disc["members"] > 0 \
        and isinstance(disc["max_gap"], float) and math.isfinite(disc["max_gap"])
    ok = variation < 0.10 and growth >= 3 and chirp_rejected and disc_ok and dt < 120
    _record(acceptance_log, 2, "hierarchy separation", ok,
            f"sin variation {variation:.3f}, aa growth {growth:.2f}, chirp rejected={chirp_rejected}, "
            f"discrete gap {disc['max_gap']}, {dt:.1f}s")


def test_criterion_03_nonlinearity(acceptance_log):
    rep, dt = experiment_report("nonlinearity")
    tb = _tables(rep)
    g1 = [r for r in tb["ladders"] if r["signal"] == "g1"]
    g2 = [r for r in tb["ladders"] if r["signal"] == "g2"]
    rung2 = all(any(r["rung"] == 2 for r in rows) and all(r["passed"] for r in rows) for rows in (g1, g2))
    tent = tb["tent_scan"][0]
    empty = tent["members"] == 0 and tent["max_gap"] == "inf" and tent["eps"] == 0.5 \
        and (tent["scan_lo"], tent["scan_hi"]) == (5.0, 1e4)
    ok = rung2 and empty and dt < 120
    _record(acceptance_log, 3, "non-linearity of recurrence", ok,
            f"g1,g2 pass rung 2={rung2}, tent members {tent['members']} gap {tent['max_gap']}, {dt:.1f}s")


def test_criterion_04_lacunary(acceptance_log):
    rep, dt = experiment_report("lacunary")
    tb = _tables(rep)
    fs = tb["f_scan"][0]
    big_gap = fs["eps"] == 0.5 and fs["window_T"] == 4.0 and fs["scan_hi"] == 256.0 and fs["max_gap"] >= 64
    pf = [r["max_gap"] for r in tb["pf_gaps"] if r["eps"] == 0.2]
    stable = bool(pf) and max(pf) <= 2 * min(pf)
    ok = big_gap and stable and dt < 60
    _record(acceptance_log, 4, "lacunary example", ok,
            f"f gap {fs['max_gap']:.2f}, Pf gaps at 0.2 {pf}, {dt:.1f}s")


def test_criterion_05_bbak(acceptance_log):
    rep, dt = experiment_report("bbak")
    tb = _tables(rep)
    rows = sorted((r for r in tb["pf_gaps"] if r["eps"] == 0.5 and r["window_T"] == 5.0), key=lambda r: r["d"])
    ds = [r["d"] for r in rows]
    gaps = [r["max_gap"] for r in rows]
    increasing = ds == [1, 2, 4, 8, 16] and all(a < b for a, b in zip(gaps, gaps[1:]))
    positive = _ladder_passed(tb["ladders"], "P(cos)")
    ok = increasing and positive and dt < 180
    _record(acceptance_log, 5, "bbak shadow", ok,
            f"Pf_d gaps {[round(g, 2) for g in gaps]}, P(cos) ladder={positive}, {dt:.1f}s")


def test_criterion_06_bohr_neugebauer(acceptance_log):
    rep, dt = experiment_report("bohr_neugebauer")
    tb = _tables(rep)
    worst_res = max(r["residual"] for r in tb["solves"])
    worst_ratio = max(max(r["gap_y"] / r["gap_f"], r["gap_f"] / r["gap_y"]) for r in tb["transfer"])
    sinrow = next(r for r in tb["closed_forms"] if r["case"] == "y'+y=sin" and r["quantity"] == "sup|y|")
    closed = abs(sinrow["value"] - math.sqrt(2) / 2) <= 1e-6
    ok = worst_res <= 1e-5 and worst_ratio <= 2 and closed and dt < 120
    _record(acceptance_log, 6, "bounded solutions", ok,
            f"residual {worst_res:.2e}, gap ratio {worst_ratio:.3f}, sup|y| {sinrow['value']:.10f}, {dt:.1f}s")


def test_criterion_07_esclangon(acceptance_log):
    rep, dt = experiment_report("esclangon")
    tb = _tables(rep)
    forcings = [r["forcing"] for r in tb["sups"]]
    dy_pass = all(_ladder_passed(tb["ladders"], f"y′[{f}]") for f in forcings)
    tri = all(r["sup_d2y"] <= r["triangle_rhs"] for r in tb["sups"])
    ok = dy_pass and tri and dt < 60
    _record(acceptance_log, 7, "derivative recurrence", ok,
            f"y' ladders pass={dy_pass}, triangle bound holds={tri}, {dt:.1f}s")


def test_criterion_08_period_inclusion(acceptance_log):
    t0 = time.perf_counter()
    bad = []
    for name, g in (("sin", S.sine()), ("quasi", parse_signal("quasi"))):
        for h in (0.5, 1.0):
            for n in (2, 3):
                r = A.period_inclusion_215(g, h, n)
                if not r.holds or r.witness is not None or r.checked == 0:
                    bad.append((name, h, n, r.witness))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    _record(acceptance_log, 8, "period inclusion", ok, f"violating cases {bad}, {dt:.1f}s")


def test_criterion_09_cover_inclusion(acceptance_log):
    t0 = time.perf_counter()
    r = A.cover_inclusion_search(S.sine(), 0.2, S.ProbeWindow.interval(3.0), [math.pi], [0.8, 0.6, 0.4, 0.2])
    dt = time.perf_counter() - t0
    row = next(x for x in r.table if x["delta"] == 0.4)
    ok = row["violators"] == 0 and row["intersection"] > 0 and r.verified and r.delta >= 0.4 and dt < 30
    _record(acceptance_log, 9, "cover inclusion", ok,
            f"delta 0.4: {row['intersection']} members, {row['violators']} violators, best delta {r.delta}, {dt:.1f}s")


def test_criterion_10_chirp_integral(acceptance_log):
    mp = pytest.importorskip("mpmath")
    t0 = time.perf_counter()
    got = S.chirp().integral(0.0, method="quadrature")(100.0)[0]
    dt = time.perf_counter() - t0
    with mp.workdps(30):
        nodes = mp.linspace(0, 100, 400)
        oracle = complex(float(mp.quad(lambda s: mp.cos(s * s), nodes)),
                         float(mp.quad(lambda s: mp.sin(s * s), nodes)))
    limit = math.sqrt(2 * math.pi) / 4 * (1 + 1j)
    agree = abs(got - oracle)
    dist = abs(got - limit)
    ok = dist <= 0.01 and agree <= 1e-6 and dt < 30
    _record(acceptance_log, 10, "chirp integral", ok,
            f"|Pg(100) - limit| {dist:.5f}, |Pg(100) - oracle| {agree:.1e}, {dt:.1f}s")


def test_criterion_11_determinism(acceptance_log):
    diff = []
    for name in list_experiments():
        one, _ = experiment_report(name, workers=1)
        four, _ = experiment_report(name, workers=4)
        if one.to_json() != four.to_json():
            diff.append(name)
    ok = not diff
    _record(acceptance_log, 11, "determinism across workers", ok,
            f"differing experiments {diff} of {len(list_experiments())}")
