"""Evaluable vector-valued signals on the real line.

A :class:`Signal` is an immutable expression tree. Leaves are generators with
exact formulas (trigonometric polynomials, chirps, the almost automorphic
step sequences and their piecewise-linear extensions, the lacunary burst
sum, constants, sampled trajectories); inner nodes are the calculus
operators ``f_s``, ``Δ_h f``, ``M_h f``, ``Pf``, multiplication by a
character ``e^{iωt}``, sums, scalar and matrix multiples and stacking.

Evaluation is vectorised: ``f(t)`` with a 1-D array ``t`` returns an array
of shape ``(len(t), f.dim)``; a scalar ``t`` returns shape ``(f.dim,)``.
Values are always complex. Repeated evaluation is bit-for-bit reproducible
and independent of how the abscissae are batched.
"""

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.special import fresnel

from .errors import ConfigError, DimensionError, NotDifferentiableError, NumericGuardError
from .quadrature import adaptive_simpson

DEFAULT_QUAD_TOL = 1e-8
CHECKPOINT_SPACING = 1.0
UNIT_MIN_DEPTH = 4  # 16 panels per checkpoint interval before error tests apply
LACUNARY_MAX_ORDER = 24


def _cvec(value, dim=None):
    arr = np.atleast_1d(np.asarray(value, dtype=complex)).ravel()
    if dim is not None and arr.size == 1 and dim > 1:
        arr = np.full(dim, arr[0])
    return tuple(complex(v) for v in arr)


def _merge_terms(terms):
    merged = {}
    for omega, coef in terms:
        key = float(omega)
        if key in merged:
            merged[key] = merged[key] + coef
        else:
            merged[key] = np.array(coef, dtype=complex)
    return [(w, c) for w, c in merged.items()]


class Signal:
    """Base class of every signal node."""

    dim: int

    # evaluation -----------------------------------------------------------

    def evaluate(self, t):
        t = np.asarray(t, dtype=float).ravel()
        return self._eval(t)

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        out = self.evaluate(np.atleast_1d(t))
        return out[0] if scalar else out

    def _eval(self, t):
        raise NotImplementedError

    # algebra --------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return Sum((self, other))

    def __neg__(self):
        return Scale(-1.0, self)

    def __sub__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return Sum((self, Scale(-1.0, other)))

    def __mul__(self, c):
        if isinstance(c, Signal):
            return NotImplemented
        return Scale(complex(c), self)

    __rmul__ = __mul__

    def translate(self, s):
        return Translate(float(s), self)

    def difference(self, h):
        return Difference(float(h), self)

    def running_mean(self, h, tol=DEFAULT_QUAD_TOL, method="auto"):
        return RunningMean(float(h), self, tol=tol, method=method)

    def integral(self, base=0.0, tol=DEFAULT_QUAD_TOL, method="auto"):
        return Integral(float(base), self, tol=tol, method=method)

    def character(self, omega):
        return Character(float(omega), self)

    def derivative(self, order=1):
        g = self
        for _ in range(int(order)):
            g = g._deriv()
        return g

    # generator-level calculus hooks -------------------------------------

    def _deriv(self):
        raise NotDifferentiableError(f"{type(self).__name__} has no closed-form derivative")

    def _trig(self):
        """Return the trigonometric-polynomial normal form, or None."""
        return None

    def breakpoints(self, lo, hi):
        """Points in ``[lo, hi]`` where the signal or its derivative may jump.

        Smooth generators report none. Used to keep finite-difference checks
        away from kinks of piecewise-linear inputs.
        """
        pts = np.unique(np.asarray(self._breaks(float(lo), float(hi)), dtype=float))
        return pts[(pts >= lo) & (pts <= hi)]

    def _breaks(self, lo, hi):
        parts = [self.of] if isinstance(getattr(self, "of", None), Signal) else []
        parts += list(getattr(self, "terms", ()) if isinstance(self, Sum) else ())
        parts += list(getattr(self, "parts", ()) if isinstance(self, Stack) else ())
        return np.concatenate([p._breaks(lo, hi) for p in parts]) if parts else np.empty(0)

    def to_dict(self):
        raise ConfigError(f"{type(self).__name__} is not serialisable")


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=True)
class TrigPoly(Signal):
    """Finite sum ``Σ c_k e^{i ω_k t}`` with vector coefficients ``c_k``."""

    terms: tuple  # ((omega, (c_1, ..., c_d)), ...)

    def __post_init__(self):
        if not self.terms:
            raise ConfigError("trig polynomial needs at least one term")
        dims = {len(c) for _, c in self.terms}
        if len(dims) != 1 or 0 in dims:
            raise DimensionError("trig polynomial coefficients must share a positive dimension")
        object.__setattr__(self, "_omegas", np.array([w for w, _ in self.terms], dtype=float))
        object.__setattr__(self, "_coefs", np.array([c for _, c in self.terms], dtype=complex))

    @classmethod
    def from_terms(cls, terms):
        return cls(tuple((float(w), _cvec(c)) for w, c in terms))

    @property
    def dim(self):
        return len(self.terms[0][1])

    def _eval(self, t):
        out = np.zeros((t.size, self.dim), dtype=complex)
        for w, c in zip(self._omegas, self._coefs):
            if w == 0.0:
                out += c
            else:
                out += np.exp(1j * (w * t))[:, None] * c
        return out

    def _deriv(self):
        return TrigPoly.from_terms((w, 1j * w * c) for w, c in zip(self._omegas, self._coefs))

    def _trig(self):
        return _merge_terms(zip(self._omegas, self._coefs))

    def to_dict(self):
        return {
            "kind": "trig_poly",
            "terms": [{"omega": w, "coef": [[z.real, z.imag] for z in c]} for w, c in self.terms],
        }


@dataclass(frozen=True)
class Constant(Signal):
    value: tuple

    def __post_init__(self):
        if len(self.value) == 0:
            raise DimensionError("zero-dimensional signals are not allowed")
        object.__setattr__(self, "_arr", np.array(self.value, dtype=complex))

    @property
    def dim(self):
        return len(self.value)

    def _eval(self, t):
        return np.broadcast_to(self._arr, (t.size, self.dim)).copy()

    def _deriv(self):
        return Constant(tuple(0j for _ in self.value))

    def _trig(self):
        return [(0.0, self._arr.copy())]

    def to_dict(self):
        return {"kind": "constant", "value": [[z.real, z.imag] for z in self.value]}


@dataclass(frozen=True)
class Chirp(Signal):
    """``p(t) e^{i a t^2}`` with polynomial prefactor ``p`` (ascending coefficients)."""

    rate: float = 1.0
    poly: tuple = (1 + 0j,)

    dim = 1

    def __post_init__(self):
        if not self.poly:
            raise ConfigError("chirp prefactor polynomial must be non-empty")
        object.__setattr__(self, "_p", np.array(self.poly, dtype=complex))

    def _eval(self, t):
        pre = np.zeros(t.size, dtype=complex)
        for c in self._p[::-1]:
            pre = pre * t + c
        return (pre * np.exp(1j * (self.rate * (t * t))))[:, None]

    def _deriv(self):
        p = list(self._p)
        dp = [k * p[k] for k in range(1, len(p))] or [0j]
        tp = [0j] + [2j * self.rate * c for c in p]
        n = max(len(dp), len(tp))
        new = [(dp[k] if k < len(dp) else 0j) + (tp[k] if k < len(tp) else 0j) for k in range(n)]
        return Chirp(self.rate, tuple(complex(c) for c in new))

    def to_dict(self):
        return {"kind": "chirp", "rate": self.rate, "poly": [[z.real, z.imag] for z in self.poly]}


# integer-indexed sequences ---------------------------------------------------


@dataclass(frozen=True)
class AAStep:
    """The unit-modulus step sequences ``φ``, ``ψ₁``, ``ψ₂`` on the integers.

    ``φ(n) = (1 + e^{in}) / |1 + e^{in}|``; ``ψ₁`` and ``ψ₂`` equal
    ``(1 - e^{in}) / |1 - e^{in}|`` off ``n = 0`` and take the values ``i``
    and ``-i`` at ``n = 0``. Neither denominator vanishes on the integers.
    """

    branch: str = "phi"

    dim = 1

    def __post_init__(self):
        if self.branch not in ("phi", "psi1", "psi2"):
            raise ConfigError(f"unknown aa-step branch {self.branch!r}")

    def values(self, n):
        n = np.asarray(n)
        e = np.exp(1j * n.astype(float))
        if self.branch == "phi":
            z = 1.0 + e
            return z / np.abs(z)
        z = 1.0 - e
        zero = n == 0
        with np.errstate(invalid="ignore", divide="ignore"):
            out = z / np.abs(z)
        out = np.where(zero, 1j if self.branch == "psi1" else -1j, out)
        return out

    def to_dict(self):
        return {"kind": "aa_step", "branch": self.branch}


@dataclass(frozen=True)
class AffineSequence:
    """``n ↦ a + b n``."""

    a: complex = 0j
    b: complex = 0j

    dim = 1

    def values(self, n):
        return self.a + self.b * np.asarray(n, dtype=float)

    def to_dict(self):
        return {
            "kind": "affine",
            "a": [complex(self.a).real, complex(self.a).imag],
            "b": [complex(self.b).real, complex(self.b).imag],
        }


def build_aa_step(branch="phi"):
    """Integer-indexed almost automorphic step sequence (``phi``, ``psi1``, ``psi2``)."""
    return AAStep(branch)


@dataclass(frozen=True)
class LinearExtension(Signal):
    """Continuous piecewise-linear interpolation of an integer sequence."""

    sequence: object

    @property
    def dim(self):
        return self.sequence.dim

    def _eval(self, t):
        n0 = np.floor(t)
        w = (t - n0)[:, None]
        n0 = n0.astype(np.int64)
        v0 = np.asarray(self.sequence.values(n0), dtype=complex).reshape(t.size, -1)
        v1 = np.asarray(self.sequence.values(n0 + 1), dtype=complex).reshape(t.size, -1)
        return (1.0 - w) * v0 + w * v1

    def _breaks(self, lo, hi):
        return np.arange(math.floor(lo), math.ceil(hi) + 1, dtype=float)

    def to_dict(self):
        return {"kind": "linear_extension", "sequence": self.sequence.to_dict()}


def linear_extension(seq):
    return LinearExtension(seq)


@dataclass(frozen=True)
class Lacunary(Signal):
    """Order-``N`` truncation ``Σ_{n=2}^{N} h_n`` of the lacunary burst sum.

    ``h_n`` has period ``2^{n+1}``, vanishes on ``[-2^n, 2^n - 1]`` and equals
    ``sin(2^n π (t - 2^n))`` on ``[2^n - 1, 2^n]``. On ``[-2^N, 2^N - 1]`` the
    truncation agrees with the infinite sum.
    """

    order: int

    dim = 1

    def __post_init__(self):
        if not (2 <= int(self.order) <= LACUNARY_MAX_ORDER):
            raise ConfigError(f"lacunary order must lie in [2, {LACUNARY_MAX_ORDER}]")

    def _eval(self, t):
        out = np.zeros(t.size)
        for n in range(2, int(self.order) + 1):
            half = float(2**n)
            u = np.mod(t + half, 2.0 * half) - half
            on = u > half - 1.0
            if on.any():
                out[on] += np.sin(half * math.pi * (u[on] - half))
        return out.astype(complex)[:, None]

    def _breaks(self, lo, hi):
        out = []
        for n in range(2, int(self.order) + 1):
            half = float(2**n)
            k = np.arange(math.floor((lo - half) / (2 * half)), math.ceil((hi + half) / (2 * half)) + 1)
            out += [half + 2 * half * k - 1.0, half + 2 * half * k]
        return np.concatenate(out)

    def to_dict(self):
        return {"kind": "lacunary", "order": int(self.order)}


def build_lacunary(order):
    return Lacunary(int(order))


class SampledSignal(Signal):
    """Uniformly sampled trajectory, interpolated between nodes.

    With ``slopes`` (the sampled derivative) interpolation is cubic Hermite,
    otherwise linear. Evaluation outside the sampled span raises
    :class:`NumericGuardError`.
    """

    def __init__(self, t0, dt, values, slopes=None):
        values = np.array(values, dtype=complex)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[1] == 0:
            raise DimensionError("zero-dimensional signals are not allowed")
        self.t0 = float(t0)
        self.dt = float(dt)
        self.values = values
        self.values.setflags(write=False)
        self.slopes = None
        if slopes is not None:
            slopes = np.array(slopes, dtype=complex).reshape(values.shape)
            slopes.setflags(write=False)
            self.slopes = slopes
        self.dim = values.shape[1]

    @property
    def span(self):
        return self.t0, self.t0 + (len(self.values) - 1) * self.dt

    def _eval(self, t):
        s = (t - self.t0) / self.dt
        last = len(self.values) - 1
        tol = 1e-9
        if s.size and (s.min() < -tol or s.max() > last + tol):
            raise NumericGuardError("evaluation outside the sampled span")
        i = np.clip(np.floor(s).astype(np.int64), 0, max(last - 1, 0))
        u = np.clip(s - i, 0.0, 1.0)[:, None]
        y0, y1 = self.values[i], self.values[np.minimum(i + 1, last)]
        if self.slopes is None:
            return (1.0 - u) * y0 + u * y1
        m0 = self.slopes[i] * self.dt
        m1 = self.slopes[np.minimum(i + 1, last)] * self.dt
        u2 = u * u
        u3 = u2 * u
        return (
            (2 * u3 - 3 * u2 + 1) * y0
            + (u3 - 2 * u2 + u) * m0
            + (-2 * u3 + 3 * u2) * y1
            + (u3 - u2) * m1
        )


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sum(Signal):
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise ConfigError("sum needs at least one term")
        if len({g.dim for g in self.terms}) != 1:
            raise DimensionError("summands must have equal dimension")

    @property
    def dim(self):
        return self.terms[0].dim

    def _eval(self, t):
        out = self.terms[0]._eval(t).copy()
        for g in self.terms[1:]:
            out += g._eval(t)
        return out

    def _deriv(self):
        return Sum(tuple(g._deriv() for g in self.terms))

    def _trig(self):
        forms = [g._trig() for g in self.terms]
        if any(f is None for f in forms):
            return None
        return _merge_terms(term for form in forms for term in form)

    def to_dict(self):
        return {"kind": "sum", "terms": [g.to_dict() for g in self.terms]}


@dataclass(frozen=True)
class Scale(Signal):
    factor: complex
    of: Signal

    @property
    def dim(self):
        return self.of.dim

    def _eval(self, t):
        return self.factor * self.of._eval(t)

    def _deriv(self):
        return Scale(self.factor, self.of._deriv())

    def _trig(self):
        form = self.of._trig()
        return None if form is None else [(w, self.factor * c) for w, c in form]

    def to_dict(self):
        z = complex(self.factor)
        return {"kind": "scale", "factor": [z.real, z.imag], "of": self.of.to_dict()}


@dataclass(frozen=True)
class MatrixMap(Signal):
    """Pointwise linear map ``t ↦ M f(t)`` with a constant complex matrix."""

    matrix: tuple  # rows
    of: Signal

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[1] != self.of.dim or m.shape[0] == 0:
            raise DimensionError("matrix shape does not match the signal dimension")
        object.__setattr__(self, "_m", m)

    @classmethod
    def of_array(cls, m, f):
        m = np.atleast_2d(np.asarray(m, dtype=complex))
        return cls(tuple(tuple(complex(z) for z in row) for row in m), f)

    @property
    def dim(self):
        return self._m.shape[0]

    def _eval(self, t):
        v = self.of._eval(t)
        out = np.zeros((t.size, self.dim), dtype=complex)
        # explicit accumulation keeps results independent of the batch size
        for j in range(v.shape[1]):
            out += v[:, j : j + 1] * self._m[:, j]
        return out

    def _deriv(self):
        return MatrixMap(self.matrix, self.of._deriv())

    def _trig(self):
        form = self.of._trig()
        return None if form is None else [(w, self._m @ c) for w, c in form]

    def to_dict(self):
        return {
            "kind": "matrix",
            "matrix": [[[z.real, z.imag] for z in row] for row in self._m],
            "of": self.of.to_dict(),
        }


@dataclass(frozen=True)
class Translate(Signal):
    shift: float
    of: Signal

    @property
    def dim(self):
        return self.of.dim

    def _eval(self, t):
        return self.of._eval(t + self.shift)

    def _deriv(self):
        return Translate(self.shift, self.of._deriv())

    def _trig(self):
        form = self.of._trig()
        return None if form is None else [(w, np.exp(1j * w * self.shift) * c) for w, c in form]

    def _breaks(self, lo, hi):
        return self.of._breaks(lo + self.shift, hi + self.shift) - self.shift

    def to_dict(self):
        return {"kind": "translate", "shift": self.shift, "of": self.of.to_dict()}


@dataclass(frozen=True)
class Difference(Signal):
    step: float
    of: Signal

    def __post_init__(self):
        if self.step == 0.0 or not math.isfinite(self.step):
            raise ConfigError("difference step must be finite and non-zero")

    @property
    def dim(self):
        return self.of.dim

    def _eval(self, t):
        return self.of._eval(t + self.step) - self.of._eval(t)

    def _deriv(self):
        return Difference(self.step, self.of._deriv())

    def _trig(self):
        form = self.of._trig()
        if form is None:
            return None
        return [(w, (np.exp(1j * w * self.step) - 1.0) * c) for w, c in form]

    def _breaks(self, lo, hi):
        h = self.step
        b = self.of._breaks(min(lo, lo + h), max(hi, hi + h))
        return np.concatenate([b, b - h])

    def to_dict(self):
        return {"kind": "difference", "step": self.step, "of": self.of.to_dict()}


@dataclass(frozen=True)
class Character(Signal):
    """Multiplication by ``γ_ω(t) = e^{iωt}``."""

    omega: float
    of: Signal

    @property
    def dim(self):
        return self.of.dim

    def _eval(self, t):
        if self.omega == 0.0:
            return self.of._eval(t)
        return np.exp(1j * (self.omega * t))[:, None] * self.of._eval(t)

    def _deriv(self):
        return Sum((Scale(1j * self.omega, self), Character(self.omega, self.of._deriv())))

    def _trig(self):
        form = self.of._trig()
        return None if form is None else _merge_terms((w + self.omega, c) for w, c in form)

    def to_dict(self):
        return {"kind": "character", "omega": self.omega, "of": self.of.to_dict()}


_METHODS = ("auto", "quadrature", "exact")


def _check_method(method, tol):
    if method not in _METHODS:
        raise ConfigError(f"unknown integration method {method!r}")
    if not tol > 0:
        raise ConfigError("quadrature tolerance must be positive")


@dataclass(frozen=True)
class RunningMean(Signal):
    """``M_h f(t) = (1/h) ∫_0^h f(t + s) ds``."""

    width: float
    of: Signal
    tol: float = DEFAULT_QUAD_TOL
    method: str = "auto"

    def __post_init__(self):
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ConfigError("running-mean width must be positive")
        _check_method(self.method, self.tol)
        closed = None
        if self.method != "quadrature":
            form = self.of._trig()
            if form is not None:
                h = self.width
                closed = TrigPoly.from_terms(
                    (w, c if w == 0.0 else c * (np.exp(1j * w * h) - 1.0) / (1j * w * h))
                    for w, c in form
                )
            elif self.method == "exact":
                raise NotDifferentiableError("no closed form for this running mean")
        object.__setattr__(self, "_closed", closed)

    @property
    def dim(self):
        return self.of.dim

    def _eval(self, t):
        if self._closed is not None:
            return self._closed._eval(t)
        h = self.width
        return adaptive_simpson(self.of._eval, t, t + h, self.tol * h) / h

    def _deriv(self):
        return Scale(1.0 / self.width, Difference(self.width, self.of))

    def _trig(self):
        return None if self._closed is None else self._closed._trig()

    def _breaks(self, lo, hi):
        b = self.of._breaks(lo, hi + self.width)
        return np.concatenate([b, b - self.width])

    def to_dict(self):
        return {
            "kind": "running_mean",
            "width": self.width,
            "tol": self.tol,
            "method": self.method,
            "of": self.of.to_dict(),
        }


@dataclass(frozen=True)
class _ChirpIntegral(Signal):
    """``∫_α^t e^{i a s^2} ds`` through the Fresnel integrals."""

    rate: float
    base: float

    dim = 1

    def _primitive(self, t):
        a = abs(self.rate)
        k = math.sqrt(2.0 * a / math.pi)
        s, c = fresnel(k * t)
        v = (c + 1j * s) / k
        return np.conj(v) if self.rate < 0 else v

    def _eval(self, t):
        return (self._primitive(t) - self._primitive(np.array([self.base])))[:, None]


@dataclass(frozen=True)
class Integral(Signal):
    """Indefinite integral ``Pf(t) = ∫_α^t f(s) ds``.

    The quadrature route keeps a table of checkpoint values at
    ``α + j * spacing``; an evaluation adds the adaptive-Simpson integral from
    the nearest checkpoint, so each call costs O(local work). The table grows
    on demand under a lock and is filled strictly sequentially, so concurrent
    readers always see the same values. When the integrand is a trigonometric
    polynomial without a constant term, or a plain chirp ``e^{i a t^2}``, the
    exact antiderivative is used (``method="auto"``); ``method="quadrature"``
    forces the table route.
    """

    base: float
    of: Signal
    tol: float = DEFAULT_QUAD_TOL
    method: str = "auto"
    spacing: float = CHECKPOINT_SPACING
    _cache: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        _check_method(self.method, self.tol)
        if not self.spacing > 0:
            raise ConfigError("checkpoint spacing must be positive")
        closed = None
        if self.method != "quadrature":
            form = self.of._trig()
            if form is not None and all(w != 0.0 or not np.any(c) for w, c in form):
                terms = [(w, c / (1j * w)) for w, c in form if w != 0.0]
                const = -sum(c * np.exp(1j * w * self.base) for w, c in terms) if terms else 0
                terms.append((0.0, np.zeros(self.of.dim, dtype=complex) + const))
                closed = TrigPoly.from_terms(terms)
            elif isinstance(self.of, Chirp) and self.of.poly == (1 + 0j,) and self.of.rate != 0.0:
                closed = _ChirpIntegral(self.of.rate, self.base)
            elif self.method == "exact":
                raise NotDifferentiableError("no closed-form antiderivative for this integrand")
        object.__setattr__(self, "_closed", closed)
        object.__setattr__(
            self,
            "_cache",
            {"lock": threading.Lock(), "pos": np.zeros((1, self.of.dim), dtype=complex),
             "neg": np.zeros((1, self.of.dim), dtype=complex)},
        )

    @property
    def dim(self):
        return self.of.dim

    @property
    def is_exact(self):
        return self._closed is not None

    def _unit_integrals(self, j0, j1, sign):
        # integrals over [c_j, c_{j+sign}] for j in [j0, j1)
        j = np.arange(j0, j1, dtype=float)
        a = self.base + j * sign * self.spacing
        b = self.base + (j + 1) * sign * self.spacing
        return adaptive_simpson(self.of._eval, a, b, self.tol, min_depth=UNIT_MIN_DEPTH)

    def _extend(self, key, upto):
        table = self._cache[key]
        have = len(table) - 1
        if upto <= have:
            return
        sign = 1.0 if key == "pos" else -1.0
        pieces = self._unit_integrals(have, upto, sign)
        ext = np.cumsum(np.concatenate([table[-1:], pieces]), axis=0)[1:]
        self._cache[key] = np.concatenate([table, ext])

    def precompute(self, lo, hi):
        """Eagerly fill the checkpoint table covering ``[lo, hi]``."""
        if self._closed is not None:
            return
        jlo = int(math.floor((lo - self.base) / self.spacing)) - 1
        jhi = int(math.ceil((hi - self.base) / self.spacing)) + 1
        with self._cache["lock"]:
            self._extend("pos", max(jhi, 0))
            self._extend("neg", max(-jlo, 0))

    def _checkpoint_values(self, j):
        jmax, jmin = int(j.max()), int(j.min())
        with self._cache["lock"]:
            self._extend("pos", max(jmax, 0))
            self._extend("neg", max(-jmin, 0))
            pos, neg = self._cache["pos"], self._cache["neg"]
        out = np.empty((j.size, self.dim), dtype=complex)
        nonneg = j >= 0
        out[nonneg] = pos[j[nonneg]]
        out[~nonneg] = neg[-j[~nonneg]]
        return out

    def _eval(self, t):
        if self._closed is not None:
            return self._closed._eval(t)
        if t.size == 0:
            return np.zeros((0, self.dim), dtype=complex)
        if not np.all(np.isfinite(t)):
            raise NumericGuardError("non-finite abscissa")
        j = np.rint((t - self.base) / self.spacing).astype(np.int64)
        anchor = self.base + j * self.spacing
        # local pieces are at most half a spacing long, so one level fewer keeps the panel width
        local = adaptive_simpson(self.of._eval, anchor, t, self.tol, min_depth=UNIT_MIN_DEPTH - 1)
        return self._checkpoint_values(j) + local

    def _deriv(self):
        return self.of

    def _trig(self):
        return None if self._closed is None else self._closed._trig()

    def to_dict(self):
        return {
            "kind": "integral",
            "base": self.base,
            "tol": self.tol,
            "method": self.method,
            "spacing": self.spacing,
            "of": self.of.to_dict(),
        }


@dataclass(frozen=True)
class Stack(Signal):
    """Joint tuple ``(f_1, ..., f_n)`` valued in the product space."""

    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ConfigError("stack needs at least one part")

    @property
    def dim(self):
        return sum(g.dim for g in self.parts)

    def _eval(self, t):
        return np.concatenate([g._eval(t) for g in self.parts], axis=1)

    def _deriv(self):
        return Stack(tuple(g._deriv() for g in self.parts))

    def _trig(self):
        forms = [g._trig() for g in self.parts]
        if any(f is None for f in forms):
            return None
        out, offset = [], 0
        for g, form in zip(self.parts, forms):
            for w, c in form:
                full = np.zeros(self.dim, dtype=complex)
                full[offset : offset + g.dim] = c
                out.append((w, full))
            offset += g.dim
        return _merge_terms(out)

    def to_dict(self):
        return {"kind": "stack", "parts": [g.to_dict() for g in self.parts]}


# ---------------------------------------------------------------------------
# constructors and functional spellings of the operators
# ---------------------------------------------------------------------------


def trig_poly(terms):
    """Build ``Σ c e^{iωt}`` from ``(omega, coef)`` pairs."""
    return TrigPoly.from_terms(terms)


def sine(omega=1.0, amplitude=1.0):
    a = complex(amplitude)
    return TrigPoly.from_terms([(omega, a / 2j), (-omega, -a / 2j)])


def cosine(omega=1.0, amplitude=1.0):
    a = complex(amplitude)
    return TrigPoly.from_terms([(omega, a / 2), (-omega, a / 2)])


def exponential(omega, vector=1.0):
    """The character signal ``e^{iωt} v``."""
    return TrigPoly.from_terms([(omega, vector)])


def chirp(rate=1.0):
    return Chirp(float(rate))


def constant(value, dim=None):
    return Constant(_cvec(value, dim))


def zero(dim=1):
    return Constant(tuple(0j for _ in range(dim)))


def aa_step_signal(branch="phi"):
    """Piecewise-linear extension ``π(φ)``, ``π(ψ₁)`` or ``π(ψ₂)``."""
    return LinearExtension(AAStep(branch))


def evaluate(f, t):
    return f(t)


def translate(f, s):
    return f.translate(s)


def difference(f, h):
    return f.difference(h)


def running_mean(f, h, tol=DEFAULT_QUAD_TOL, method="auto"):
    return f.running_mean(h, tol=tol, method=method)


def indefinite_integral(f, base=0.0, tol=DEFAULT_QUAD_TOL, method="auto"):
    return f.integral(base, tol=tol, method=method)


def character_multiply(f, omega):
    return f.character(omega)


def derivative(f, order=1):
    return f.derivative(order)


def matrix_map(m, f):
    return MatrixMap.of_array(m, f)


def stack(parts):
    parts = tuple(parts)
    if not parts:
        raise ConfigError("joint tuple needs at least one signal")
    return Stack(parts)


# ---------------------------------------------------------------------------
# probe windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeWindow:
    """Compact window ``K``: a sampled interval or a finite probe set."""

    lo: float = None
    hi: float = None
    probes: tuple = None
    sample_step: float = 1e-2

    def __post_init__(self):
        if self.probes is not None:
            pts = tuple(sorted(set(float(p) for p in self.probes)))
            if not pts or not all(math.isfinite(p) for p in pts):
                raise ConfigError("probe set must be non-empty and finite")
            object.__setattr__(self, "probes", pts)
        else:
            if self.lo is None or self.hi is None or not self.hi > self.lo:
                raise ConfigError("interval window needs lo < hi")
            if not self.sample_step > 0:
                raise ConfigError("window sample step must be positive")

    @classmethod
    def interval(cls, lo, hi=None, step=1e-2):
        """``interval(T)`` is ``[-T, T]``; ``interval(lo, hi)`` is ``[lo, hi]``."""
        if hi is None:
            lo, hi = -float(lo), float(lo)
        return cls(lo=float(lo), hi=float(hi), sample_step=float(step))

    @classmethod
    def finite(cls, probes):
        return cls(probes=tuple(probes))

    @property
    def kind(self):
        return "probes" if self.probes is not None else "interval"

    @property
    def count(self):
        if self.probes is not None:
            return len(self.probes)
        return int(math.floor((self.hi - self.lo) / self.sample_step + 1e-9)) + 1

    def samples(self):
        if self.probes is not None:
            return np.array(self.probes)
        return self.lo + self.sample_step * np.arange(self.count)

    def widen(self, margin):
        if self.probes is not None:
            raise ConfigError("cannot widen a probe set")
        return ProbeWindow(lo=self.lo - margin, hi=self.hi + margin, sample_step=self.sample_step)

    def to_dict(self):
        if self.probes is not None:
            return {"probes": list(self.probes)}
        return {"lo": self.lo, "hi": self.hi, "step": self.sample_step}
