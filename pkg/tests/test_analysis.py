import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from recurlab import analysis as A
from recurlab import signals as S
from recurlab.config import parse_signal
from recurlab.errors import ConfigError, DimensionError

SIN = S.sine()
SQRT2 = math.sqrt(2.0)
W = S.ProbeWindow.interval


# --- sup distance -------------------------------------------------------------


def test_sup_distance_examples():
    K = W(-math.pi, math.pi, step=math.pi / 200)
    assert A.sup_distance(SIN, SIN, K) == 0.0
    assert abs(A.sup_distance(SIN, S.zero(), K) - 1.0) < 1e-12
    assert abs(A.sup_distance(SIN, SIN.translate(math.pi), K) - 2.0) < 1e-12
    with pytest.raises(DimensionError):
        A.sup_distance(SIN, S.constant([1, 2]), K)


# --- max gap ------------------------------------------------------------------


def test_max_gap_examples():
    assert A.max_gap((0.0, 2 * math.pi, 4 * math.pi), 0.0, 4 * math.pi) == pytest.approx(2 * math.pi)
    assert A.max_gap((), 0.0, 10.0) == math.inf
    assert A.max_gap((0.0, 1.0, 10.0), 0.0, 10.0) == 9.0
    # boundary gaps count
    assert A.max_gap((4.0,), 0.0, 10.0) == 6.0


# --- almost-period sets ----------------------------------------------------------


def test_sin_periods():
    E = A.almost_period_set(SIN, 1e-6, W(10.0), (0.0, 20.0))
    assert len(E.members) == 4
    assert abs(E.members[0]) < 1e-9 and abs(E.members[1] - 2 * math.pi) < 1e-6
    assert E.max_gap == pytest.approx(2 * math.pi, abs=1e-5)
    assert E.refined


def test_tent_has_no_periods():
    tent = parse_signal("tent")
    E = A.almost_period_set(tent, 0.5, W(2.0), (5.0, 1000.0))
    assert E.members == () and E.max_gap == math.inf


def test_quasi_periodic_nonempty():
    f = parse_signal("quasi")
    E = A.almost_period_set(f, 0.3, W(5.0), (0.0, 500.0))
    assert E.members and math.isfinite(E.max_gap)
    # every member satisfies the sampled criterion
    t = W(5.0).samples()
    base = f.evaluate(t)
    for tau in E.members:
        assert np.abs(f.evaluate(t + tau) - base).max() <= 0.3 + 1e-12


def test_members_sorted_and_gap_consistent():
    E = A.almost_period_set(parse_signal("aa_phi"), 0.2, W(5.0), (0.0, 3000.0))
    m = np.array(E.members)
    assert np.all(np.diff(m) > 0)
    assert E.max_gap == A.max_gap(E.members, *E.scan_range)


def test_scan_rejections():
    with pytest.raises(ConfigError):
        A.almost_period_set(SIN, 0.0, W(1.0), (0, 1))
    with pytest.raises(ConfigError):
        A.almost_period_set(SIN, 0.1, W(1.0), (2, 1))
    with pytest.raises(ConfigError):
        A.almost_period_set(SIN, 0.1, W(1.0), (0, 1), step=0.0)


def test_strict_is_subset():
    f = parse_signal("quasi")
    loose = A.almost_period_set(f, 0.3, W(5.0), (0.0, 300.0), refine=False)
    strict = A.almost_period_set(f, 0.3, W(5.0), (0.0, 300.0), refine=False, strict=True)
    assert set(strict.members) <= set(loose.members)


def test_trace_matches_members():
    E = A.almost_period_set(SIN, 1e-3, W(1.0), (0.0, 20.0), refine=False, trace=True)
    taus, supd, acc = E.trace
    assert len(taus) == 2001
    assert set(np.round(taus[acc], 9)) == set(np.round(E.members, 9))
    assert np.all(supd[acc] <= 1e-3)


# --- discrete scans --------------------------------------------------------------


def test_discrete_chirp_passes():
    # the full [0, 1e5] range runs inside the hierarchy experiment
    E = A.discrete_period_scan(S.chirp(), 0.1, S.ProbeWindow.finite([0.0, 1.0, SQRT2]), (0.0, 2e4))
    assert E.members and math.isfinite(E.max_gap)


def test_discrete_sin_single_probe():
    E = A.discrete_period_scan(SIN, 1e-3, S.ProbeWindow.finite([0.0]), (0.0, 30.0))
    for k in range(5):
        assert any(abs(tau - 2 * math.pi * k) < 0.02 for tau in E.members)


def test_discrete_tent_empty():
    E = A.discrete_period_scan(parse_signal("tent"), 0.5, S.ProbeWindow.finite([0.0]), (5.0, 100.0))
    assert E.members == ()


# --- ladders ----------------------------------------------------------------------


def test_rung_schedule():
    assert A.rung_schedule(1) == (0.5, (-2.0, 2.0), 800.0)
    assert A.rung_schedule(3) == (0.125, (-6.0, 6.0), 12800.0)
    assert A.rung_schedule(12)[2] == 1e6
    assert A.rung_schedule(2, origin=0.0)[1] == (0.0, 4.0)


def test_sin_ladder_passes():
    v = A.recurrence_ladder(SIN, 3)
    assert v.passed and v.failed_rung is None
    assert all(r.max_gap <= 2 * math.pi + 0.02 for r in v.rungs)
    assert v.describe().startswith("empirically-recurrent")


def test_chirp_ladder_rejected_at_first_rung():
    v = A.recurrence_ladder(S.chirp(), 3)
    assert not v.passed and v.verdict == "rejected-at-rung-1"
    assert v.rungs[0].window == (-2.0, 2.0) and v.rungs[0].eps == 0.5
    assert len(v.rungs) == 1


def test_aa_phi_ladder_passes_rung3():
    assert A.recurrence_ladder(parse_signal("aa_phi"), 3).passed


def test_custom_policy():
    v = A.recurrence_ladder(SIN, 1, policy=A.GapPolicy(ratio=1e-3))
    assert not v.passed


def test_ladder_needs_depth():
    with pytest.raises(ConfigError):
        A.recurrence_ladder(SIN, 0)


# --- joint tuples --------------------------------------------------------------------


def test_joint_tuple_examples():
    K = W(3.0)
    a = A.almost_period_set(SIN, 1e-3, K, (0.0, 40.0))
    b = A.almost_period_set(A.joint_tuple([SIN, SIN]), 1e-3, K, (0.0, 40.0))
    assert a.members == b.members
    assert A.recurrence_ladder(A.joint_tuple([SIN, S.cosine()]), 2).passed
    g1, g2 = parse_signal("g1"), parse_signal("g2")
    assert A.recurrence_ladder(g1, 1).passed and A.recurrence_ladder(g2, 1).passed
    assert not A.recurrence_ladder(A.joint_tuple([g1, g2]), 1).passed
    with pytest.raises(ConfigError):
        A.joint_tuple([])


def test_stack_intersection_exact():
    fs = [SIN, parse_signal("quasi"), parse_signal("aa_phi")]
    K = W(2.0)
    sets = [set(A.almost_period_set(f, 0.4, K, (0.0, 400.0), refine=False).members) for f in fs]
    joint = A.almost_period_set(A.joint_tuple(fs), 0.4, K, (0.0, 400.0), refine=False)
    assert set(joint.members) == set.intersection(*sets)


# --- metric -------------------------------------------------------------------------------


def test_metric_examples():
    assert A.metric_d(SIN, SIN)[0] == 0.0
    d, n = A.metric_d(SIN, S.zero())
    assert abs(d - math.sin(1.0)) < 1e-12 and n == 1
    d, _ = A.metric_d(S.constant(100.0), S.zero())
    assert d == 1.0


def _rand_poly(rng):
    k = rng.integers(1, 4)
    return S.trig_poly([(rng.uniform(-3, 3), complex(*rng.uniform(-2, 2, 2))) for _ in range(k)])


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_metric_symmetry_and_triangle(seed):
    rng = np.random.default_rng(seed)
    f, g, h = (_rand_poly(rng) for _ in range(3))
    fg, gf = A.metric_d(f, g, 6)[0], A.metric_d(g, f, 6)[0]
    assert fg == gf
    fh, gh = A.metric_d(f, h, 6)[0], A.metric_d(g, h, 6)[0]
    assert fh <= fg + gh + 1e-15


def test_metric_period_set_matches_window_scan():
    f = parse_signal("quasi")
    E = A.metric_period_set(f, 0.25, (0.0, 200.0), refine=False)
    F = A.almost_period_set(f, 0.25, W(3.0), (0.0, 200.0), refine=False)
    assert E.members == F.members


# --- properties of E-sets ----------------------------------------------------------------


@settings(max_examples=8, deadline=None)
@given(e1=st.floats(0.05, 0.5), de=st.floats(0.0, 0.5), T1=st.floats(1.0, 4.0), dT=st.floats(0.0, 3.0))
def test_monotonicity(e1, de, T1, dT):
    f = parse_signal("quasi")
    big = A.almost_period_set(f, e1, W(T1 + dT), (0.0, 200.0), refine=False)
    small = A.almost_period_set(f, e1 + de, W(T1), (0.0, 200.0), refine=False)
    assert set(big.members) <= set(small.members)


def test_group_shift_stability():
    f = parse_signal("quasi")
    eps = 0.2
    K = W(2.0)
    E = A.almost_period_set(f, eps, K, (0.0, 120.0), refine=False)
    taus = E.members[:: max(1, len(E.members) // 12)]
    t = K.samples()
    checked = 0
    for t2 in taus:
        wide = W(2.0 + abs(t2))
        tw = wide.samples()
        if np.abs(f.evaluate(tw + t2) - f.evaluate(tw)).max() > eps:
            continue
        for t1 in taus:
            if np.abs(f.evaluate(tw + t1) - f.evaluate(tw)).max() > eps:
                continue
            d = np.abs(f.evaluate(t + t1 + t2) - f.evaluate(t)).max()
            assert d <= 2 * eps + 1e-12
            checked += 1
    assert checked > 0


def test_determinism_across_workers():
    f = parse_signal("aa_phi")
    a = A.almost_period_set(f, 0.1, W(5.0), (0.0, 3e4), workers=1)
    b = A.almost_period_set(f, 0.1, W(5.0), (0.0, 3e4), workers=4)
    assert a.members == b.members and a.max_gap == b.max_gap
    c = A.discrete_period_scan(S.chirp(), 0.1, S.ProbeWindow.finite([0, 1, SQRT2]), (0, 3e4), workers=3)
    d = A.discrete_period_scan(S.chirp(), 0.1, S.ProbeWindow.finite([0, 1, SQRT2]), (0, 3e4), workers=1)
    assert c.members == d.members


# --- inclusions ------------------------------------------------------------------------------


def test_period_inclusion_sin():
    r = A.period_inclusion_215(SIN, 1.0, 3)
    assert r.holds and r.checked > 0 and r.witness is None


def test_period_inclusion_constant():
    r = A.period_inclusion_215(S.constant(2.0), 1.0, 2, scan_range=(0.0, 5.0))
    assert r.holds and r.checked == 501


def test_period_inclusion_quasi():
    r = A.period_inclusion_215(parse_signal("quasi"), 0.5, 2)
    assert r.holds


def test_cover_inclusion_sin():
    r = A.cover_inclusion_search(SIN, 0.2, W(3.0), [math.pi], [0.8, 0.6, 0.4, 0.2])
    rows = {row["delta"]: row for row in r.table}
    assert rows[0.4]["violators"] == 0 and rows[0.4]["intersection"] > 0
    assert r.verified and r.delta >= 0.4


def test_cover_inclusion_constant_and_quasi():
    r = A.cover_inclusion_search(S.constant(1.0), 0.1, W(1.0), [1.0], [5.0], scan_range=(0, 10))
    assert r.verified and r.delta == 5.0
    q = A.cover_inclusion_search(parse_signal("quasi"), 0.3, W(2.0), [1.0, SQRT2], [0.4, 0.2, 0.1, 0.05])
    assert q.verified and q.delta > 0


# --- ergodic means, nets, moduli ----------------------------------------------------------------


def test_ergodic_examples():
    Ts = [10.0, 50.0, 100.0]
    r = A.ergodic_mean(SIN, Ts, [0.0, 1.0, 2.5])
    assert np.abs(r.mean).max() < 1e-2
    for T, dev in r.deviations:
        assert dev <= 1.0 / T + 1e-9
    c = A.ergodic_mean(S.constant(2 - 1j), Ts, [0.0, 3.0])
    assert abs(c.mean[0] - (2 - 1j)) < 1e-9 and all(d < 1e-9 for _, d in c.deviations)
    e = A.ergodic_mean(S.exponential(1.0), Ts, [0.0])
    for T, dev in e.deviations[:-1]:
        # single probe at x = 0: the window mean is sin(T)/T, and m is the mean at the largest T
        assert abs(dev - abs(math.sin(T) / T - math.sin(100.0) / 100.0)) < 1e-8
    with pytest.raises(ConfigError):
        A.ergodic_mean(SIN, [10.0, 5.0], [0.0])


def test_range_net_examples():
    assert A.range_net(S.constant(3.0), np.linspace(0, 10, 100), 0.1) == 1
    n = A.range_net(SIN, np.linspace(-10, 10, 20001), 0.1)
    assert 10 <= n <= 40
    c = A.range_net(S.chirp(), np.linspace(0, 100, 100001), 0.1)
    assert c <= math.ceil(2 * math.pi / 0.05) + 1


@settings(max_examples=10, deadline=None)
@given(e1=st.floats(0.02, 0.5), e2=st.floats(0.02, 0.5))
def test_range_net_monotone_in_eps(e1, e2):
    lo, hi = sorted((e1, e2))
    g = np.linspace(-10, 10, 2001)
    assert A.range_net(SIN, g, hi) <= A.range_net(SIN, g, lo)


def test_uc_modulus_examples():
    assert all(v == 0 for _, v in A.uc_modulus(S.constant(1.0), W(5.0), [0.01, 0.1, 1.0]))
    for d, v in A.uc_modulus(SIN, W(5.0), [0.01, 0.1, 0.5]):
        assert v <= d + 1e-12
    tab = A.uc_modulus(S.chirp(), W(0.0, 100.0, 0.01), [0.001, 0.005, 0.01])
    vals = [v for _, v in tab]
    assert vals == sorted(vals)
    assert 1.5 <= tab[-1][1] <= 2.0
