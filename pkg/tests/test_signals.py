import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from recurlab import signals as S
from recurlab.errors import ConfigError, DimensionError, NotDifferentiableError

T = np.linspace(-7.0, 7.0, 301)
TOL = 1e-8


def close(a, b, tol=1e-12):
    return float(np.abs(np.asarray(a) - np.asarray(b)).max()) <= tol


# --- generators -------------------------------------------------------------


def test_chirp_at_zero():
    assert S.chirp()(0.0)[0] == 1


def test_aa_phi_at_zero():
    assert S.aa_step_signal("phi")(0.0)[0] == 1


def test_sin_at_half_pi():
    assert abs(S.sine()(math.pi / 2)[0] - 1) < 1e-15


def test_aa_step_branches():
    assert S.build_aa_step("psi1").values(0) == 1j
    assert S.build_aa_step("psi2").values(0) == -1j
    n = np.arange(-500, 501)
    assert close(np.abs(S.build_aa_step("phi").values(n)), 1.0, 1e-14)
    with pytest.raises(ConfigError):
        S.build_aa_step("chi")


def test_linear_extension_affine_and_constant():
    f = S.linear_extension(S.AffineSequence(0j, 1 + 0j))
    assert f(0.5)[0] == 0.5
    assert close(f.evaluate(T)[:, 0], T, 1e-12)
    c = S.linear_extension(S.AffineSequence(3 + 0j, 0j))
    assert close(c.evaluate(T), 3.0)


def test_tent_from_psi_branches():
    tent = S.aa_step_signal("psi1") - S.aa_step_signal("psi2")
    assert abs(tent(0.0)[0] - 2j) < 1e-15
    t = np.concatenate([np.linspace(-50, -1, 200), np.linspace(1, 50, 200)])
    assert close(tent.evaluate(t), 0.0, 1e-15)
    assert abs(tent(0.5)[0] - 1j) < 1e-15


def test_lacunary_examples():
    f = S.build_lacunary(8)
    assert f(0.0)[0] == 0
    # the top bump sin(2^8 pi (t - 2^8)) peaks at 255 + (k + 1/2) / 256
    top = 255.0 + (np.arange(256) + 0.5) / 256.0
    assert np.abs(f.evaluate(top)).max() >= 1.0 - 1e-9
    assert close(f.evaluate(np.linspace(-4, 3, 701)), 0.0, 0.0)
    with pytest.raises(ConfigError):
        S.build_lacunary(25)
    with pytest.raises(ConfigError):
        S.build_lacunary(1)


def test_zero_dimension_rejected():
    with pytest.raises((ConfigError, DimensionError)):
        S.constant([])


# --- operators --------------------------------------------------------------


def test_translate_examples():
    sin = S.sine()
    assert close(sin.translate(2 * math.pi).evaluate(T), sin.evaluate(T), 1e-12)
    c = S.constant(2 - 1j)
    assert close(c.translate(17.0).evaluate(T), c.evaluate(T), 0.0)
    assert abs(S.chirp().translate(1.0)(0.0)[0] - np.exp(1j)) < 1e-15


def test_difference_examples():
    sin = S.sine()
    assert close(sin.difference(2 * math.pi).evaluate(T), 0.0, 1e-12)
    assert close(sin.difference(math.pi).evaluate(T), -2 * sin.evaluate(T), 1e-12)
    h = 0.7
    w = 2 * math.pi / h
    e = S.exponential(w)
    assert close(e.difference(h).evaluate(T), 0.0, 1e-12)
    w2 = 1.3
    got = S.exponential(w2).difference(h).evaluate(T)[:, 0]
    assert close(got, (np.exp(1j * w2 * h) - 1) * np.exp(1j * w2 * T), 1e-12)
    with pytest.raises(ConfigError):
        sin.difference(0.0)


@pytest.mark.parametrize("method", ["auto", "quadrature"])
def test_running_mean_examples(method):
    sin = S.sine()
    c = S.constant(1.5 + 0.5j)
    assert close(c.running_mean(0.8, method=method).evaluate(T), c.evaluate(T), 1e-9)
    assert close(sin.running_mean(2 * math.pi, method=method).evaluate(T), 0.0, 1e-8)
    assert abs(sin.running_mean(math.pi, method=method)(0.0)[0] - 2 / math.pi) < 1e-8
    with pytest.raises(ConfigError):
        sin.running_mean(0.0)
    with pytest.raises(ConfigError):
        sin.running_mean(-1.0)


@pytest.mark.parametrize("method", ["auto", "quadrature"])
def test_integral_examples(method):
    assert abs(S.sine().integral(0.0, method=method)(math.pi)[0] - 2.0) < 1e-8
    assert close(S.zero().integral(0.0, method=method).evaluate(T), 0.0, 0.0)


def test_chirp_integral_limit():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    # independent oracle: Fresnel-type integrals by mpmath quadrature
    t = 100.0
    re = mp.quad(lambda s: mp.cos(s * s), mp.linspace(0, t, 400))
    im = mp.quad(lambda s: mp.sin(s * s), mp.linspace(0, t, 400))
    oracle = complex(float(re), float(im))
    for method in ("auto", "quadrature"):
        got = S.chirp().integral(0.0, method=method)(t)[0]
        assert abs(got - oracle) < 1e-6
    limit = math.sqrt(2 * math.pi) / 4 * (1 + 1j)
    assert abs(oracle - limit) < 0.01


def test_character_examples():
    sin = S.sine()
    assert close(sin.character(0.0).evaluate(T), sin.evaluate(T), 0.0)
    assert close(S.constant(1.0).character(2.5).evaluate(T)[:, 0], np.exp(2.5j * T), 1e-15)
    assert abs(sin.character(1.0)(math.pi / 2)[0] - 1j) < 1e-15


def test_dimension_rules():
    v = S.constant([1.0, 2.0])
    assert v.translate(1).dim == 2
    assert v.difference(1).dim == 2
    assert v.running_mean(1).dim == 2
    assert v.integral(0).dim == 2
    assert v.character(1).dim == 2
    with pytest.raises(DimensionError):
        _ = v + S.sine()


def test_derivatives_closed_form():
    sin = S.sine()
    assert close(sin.derivative().evaluate(T), S.cosine().evaluate(T), 1e-14)
    ch = S.chirp()
    assert close(ch.derivative().evaluate(T)[:, 0], 2j * T * np.exp(1j * T * T), 1e-12)
    with pytest.raises(NotDifferentiableError):
        S.aa_step_signal("phi").derivative()


def test_breakpoints_reported():
    f = S.aa_step_signal("phi").translate(0.25)
    b = f.breakpoints(-2, 2)
    assert np.allclose(b, [-1.25, -0.25, 0.75, 1.75])
    assert S.sine().breakpoints(-5, 5).size == 0


def test_evaluation_deterministic_and_immutable():
    f = S.chirp().integral(0.0, method="quadrature")
    a = f.evaluate(np.linspace(0, 30, 500))
    b = f.evaluate(np.linspace(0, 30, 500))
    assert np.array_equal(a, b)
    with pytest.raises(Exception):
        f.base = 3.0


def test_concurrent_integral_reads_agree():
    f = S.chirp().integral(0.0, method="quadrature")
    t = np.linspace(-60, 60, 2000)
    ref = S.chirp().integral(0.0, method="quadrature").evaluate(t)
    out = [None] * 4

    def work(i):
        out[i] = f.evaluate(t[::-1] if i % 2 else t)

    threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    for i, v in enumerate(out):
        assert np.array_equal(v[::-1] if i % 2 else v, ref)


def test_probe_window_rules():
    w = S.ProbeWindow.finite([3.0, 1.0, 2.0])
    assert w.probes == (1.0, 2.0, 3.0)
    with pytest.raises(ConfigError):
        S.ProbeWindow.finite([])
    with pytest.raises(ConfigError):
        S.ProbeWindow.interval(0.0)
    k = S.ProbeWindow.interval(2.0, step=0.5)
    assert k.count == 9 and k.samples()[0] == -2.0 and k.samples()[-1] == 2.0


# --- properties ---------------------------------------------------------------

omegas = st.floats(-4.0, 4.0, allow_nan=False)
coefs = st.tuples(st.floats(-2, 2), st.floats(-2, 2))
terms = st.lists(st.tuples(omegas, coefs), min_size=1, max_size=4)


def _poly(ts):
    return S.trig_poly([(w, complex(a, b)) for w, (a, b) in ts])


@settings(max_examples=20, deadline=None)
@given(ts=terms, h=st.floats(0.1, 3.0))
def test_telescoping_identity(ts, h):
    f = _poly(ts)
    t = np.linspace(-5, 5, 41)
    lhs = h * f.running_mean(h, tol=TOL, method="quadrature").evaluate(t)
    rhs = f.integral(0.0, tol=TOL, method="quadrature").difference(h).evaluate(t)
    scale = max(1.0, sum(math.hypot(a, b) for _, (a, b) in ts))
    assert close(lhs, rhs, 10 * TOL * scale)


@settings(max_examples=10, deadline=None)
@given(ts=terms, k=st.floats(0.5, 3.0))
def test_cesaro_decrease(ts, k):
    f = _poly(ts)
    t = np.linspace(-5, 5, 41)
    fv = f.evaluate(t)
    mk = f.running_mean(k, tol=1e-10).evaluate(t)
    errs = []
    for n in (4, 16, 64):
        avg = sum(f.evaluate(t + k * j / n) for j in range(1, n + 1)) / n
        errs.append(float(np.abs((fv - mk) - (fv - avg)).max()))
    assert errs[0] >= errs[1] - 1e-9 and errs[1] >= errs[2] - 1e-9


@settings(max_examples=30, deadline=None)
@given(a=terms, b=terms, c=coefs)
def test_linearity_exact(a, b, c):
    f, g = _poly(a), _poly(b)
    z = complex(*c)
    t = np.linspace(-3, 3, 31)
    assert np.array_equal((f + g).evaluate(t), f.evaluate(t) + g.evaluate(t))
    assert np.array_equal((z * f).evaluate(t), z * f.evaluate(t))


@settings(max_examples=30, deadline=None)
@given(a=st.integers(-400, 400), b=st.integers(-400, 400))
def test_translation_composition(a, b):
    # dyadic shifts keep t + a + b exact in floating point
    a, b = a / 64, b / 64
    f = S.chirp() + S.aa_step_signal("phi")
    t = np.linspace(-3, 3, 193)
    assert np.array_equal(f.translate(a).translate(b).evaluate(t), f.translate(a + b).evaluate(t))
