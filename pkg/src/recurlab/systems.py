"""Linear difference-differential systems with constant coefficients.

Two representations:

* :class:`NeutralSystem`: ``Σ_{j,k} a_{jk} y^{(k)}(t + t_j) = f(t)``, used in
  the forward direction only (build ``y``, apply the operator, get ``f``).
* :class:`OdeSystem`: ``y^{(n)} + Σ_{k<n} a_k y^{(k)} = f``, which is also
  solved: the unique bounded solution on the line through the
  exponential-dichotomy Green kernel, and initial-value problems on half lines.

Both solvers work on the companion system ``x' = A x + B f`` with state
``x = (y, y', ..., y^{(n-1)})`` and step exactly with matrix exponentials,
integrating the forcing by Gauss-Legendre quadrature inside every step.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import (
    ConfigError,
    DimensionError,
    NonHyperbolicError,
    NumericGuardError,
    UnboundedForcingError,
)
from .quadrature import gauss_legendre
from .signals import Constant, MatrixMap, SampledSignal, Sum, Translate

DICHOTOMY_FLOOR = 1e-3
KERNEL_TAIL = 1e-8
FORCING_GUARD = 1e6
GREEN_STEP = 1.0 / 32.0
GL_ORDER = 8


def _mat(a, r):
    m = np.array(a, dtype=complex)
    if m.ndim == 0:
        m = m * np.eye(r)
    if m.shape != (r, r):
        raise DimensionError(f"expected an {r}x{r} coefficient, got shape {m.shape}")
    return m


def _op_norm(m):
    # operator norm induced by the sup norm: max absolute row sum
    return float(np.abs(m).sum(axis=-1).max())


def _freeze(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# system types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NeutralSystem:
    """Coefficients ``a[j, k]`` (``r x r``) at delays ``t_j``, derivatives ``k = 0..n``."""

    delays: tuple
    coeffs: np.ndarray  # shape (m, n + 1, r, r)

    def __post_init__(self):
        d = tuple(float(x) for x in self.delays)
        if not d:
            raise ConfigError("need at least one delay")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ConfigError("delays must be strictly increasing")
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 4 or c.shape[0] != len(d) or c.shape[2] != c.shape[3] or c.shape[2] < 1:
            raise DimensionError("coefficient array must have shape (m, n+1, r, r)")
        if not np.any(c[:, -1]):
            raise ConfigError("some leading coefficient a_{jn} must be non-zero")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "coeffs", _freeze(c))

    @classmethod
    def build(cls, terms, r=1):
        """From ``{(delay, order): coefficient}``; missing entries are zero."""
        delays = sorted({float(t) for t, _ in terms})
        n = max(int(k) for _, k in terms)
        c = np.zeros((len(delays), n + 1, r, r), dtype=complex)
        for (t, k), a in terms.items():
            c[delays.index(float(t)), int(k)] = _mat(a, r)
        return cls(tuple(delays), c)

    @property
    def m(self):
        return self.coeffs.shape[0]

    @property
    def n(self):
        return self.coeffs.shape[1] - 1

    @property
    def r(self):
        return self.coeffs.shape[2]

    def to_dict(self):
        return {
            "type": "neutral",
            "delays": list(self.delays),
            "coeffs": _nested(self.coeffs),
        }


@dataclass(frozen=True, eq=False)
class OdeSystem:
    """``y^{(n)} + Σ_{k<n} a_k y^{(k)} = f`` with ``r x r`` matrices ``a_k``."""

    coeffs: np.ndarray  # shape (n, r, r), a_0 first

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] < 1 or c.shape[1] != c.shape[2] or c.shape[1] < 1:
            raise DimensionError("coefficient array must have shape (n, r, r)")
        object.__setattr__(self, "coeffs", _freeze(c))

    @classmethod
    def scalar(cls, *a):
        """``scalar(a_0, ..., a_{n-1})`` for the scalar equation."""
        return cls(np.array(a, dtype=complex).reshape(len(a), 1, 1))

    @property
    def n(self):
        return self.coeffs.shape[0]

    @property
    def r(self):
        return self.coeffs.shape[1]

    def companion(self):
        n, r = self.n, self.r
        A = np.zeros((n * r, n * r), dtype=complex)
        for k in range(n - 1):
            A[k * r : (k + 1) * r, (k + 1) * r : (k + 2) * r] = np.eye(r)
        for k in range(n):
            A[(n - 1) * r :, k * r : (k + 1) * r] = -self.coeffs[k]
        B = np.zeros((n * r, r), dtype=complex)
        B[(n - 1) * r :] = np.eye(r)
        return A, B

    def char(self, lam):
        """``λ^n I + Σ_k λ^k a_k``."""
        out = lam**self.n * np.eye(self.r, dtype=complex)
        for k in range(self.n):
            out = out + lam**k * self.coeffs[k]
        return out

    def as_neutral(self):
        c = np.zeros((1, self.n + 1, self.r, self.r), dtype=complex)
        c[0, : self.n] = self.coeffs
        c[0, self.n] = np.eye(self.r)
        return NeutralSystem((0.0,), c)

    def to_dict(self):
        return {"type": "ode", "coeffs": _nested(self.coeffs)}


def _nested(a):
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_nested(x) for x in a]


# ---------------------------------------------------------------------------
# forward operator and symbol
# ---------------------------------------------------------------------------


def characteristic_matrix(sys, omega):
    """Leading delay symbol ``Σ_j a_{jn} e^{i ω t_j}``."""
    out = np.zeros((sys.r, sys.r), dtype=complex)
    for j, t in enumerate(sys.delays):
        out = out + sys.coeffs[j, sys.n] * np.exp(1j * omega * t)
    return out


@dataclass(frozen=True)
class SymbolCheck:
    ok: bool
    min_abs_det: float
    omega: float


def verify_52(sys, omega_range=(-50.0, 50.0), omega_step=1e-2, floor=DICHOTOMY_FLOOR):
    """Grid check that the leading symbol's determinant stays away from zero.

    The symbol is almost periodic in ω, so a fine grid over a long window is
    representative but not a proof.
    """
    lo, hi = (float(x) for x in omega_range)
    if not hi > lo or not omega_step > 0:
        raise ConfigError("invalid omega grid")
    w = lo + omega_step * np.arange(int(math.floor((hi - lo) / omega_step + 1e-9)) + 1)
    mats = np.zeros((w.size, sys.r, sys.r), dtype=complex)
    for j, t in enumerate(sys.delays):
        mats += np.exp(1j * w * t)[:, None, None] * sys.coeffs[j, sys.n]
    dets = np.abs(np.linalg.det(mats))
    i = int(np.argmin(dets))
    return SymbolCheck(bool(dets[i] >= floor), float(dets[i]), float(w[i]))


def apply_operator(sys, y):
    """The forcing ``f(t) = Σ_{j,k} a_{jk} y^{(k)}(t + t_j)`` as a signal."""
    if isinstance(sys, OdeSystem):
        sys = sys.as_neutral()
    if y.dim != sys.r:
        raise DimensionError(f"signal has dimension {y.dim}, system needs {sys.r}")
    derivs = [y]
    for _ in range(sys.n):
        derivs.append(derivs[-1]._deriv())
    terms = []
    for j, t in enumerate(sys.delays):
        for k in range(sys.n + 1):
            a = sys.coeffs[j, k]
            if not np.any(a):
                continue
            g = derivs[k] if t == 0.0 else Translate(t, derivs[k])
            terms.append(MatrixMap.of_array(a, g))
    if not terms:
        return Constant((0j,) * sys.r)
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


def spectrum(ode):
    """Roots of ``det(λ^n I + Σ λ^k a_k)``, repeated by multiplicity.

    Computed as companion-matrix eigenvalues and sorted by real part, then
    imaginary part.
    """
    A, _ = ode.companion()
    lam = np.linalg.eigvals(A)
    return lam[np.lexsort((lam.imag, lam.real))]


def _matrix_sign(A, tol=1e-14, max_iter=100):
    S = A.copy()
    N = A.shape[0]
    for _ in range(max_iter):
        det = abs(np.linalg.det(S))
        mu = det ** (-1.0 / N) if det > 0 else 1.0
        nxt = 0.5 * (mu * S + np.linalg.inv(S) / mu)
        if np.abs(nxt - S).max() <= tol * max(1.0, np.abs(nxt).max()):
            return nxt
        S = nxt
    return S


@dataclass(frozen=True)
class Dichotomy:
    """Stable/unstable spectral split of the companion matrix."""

    A: np.ndarray
    B: np.ndarray
    P_s: np.ndarray
    P_u: np.ndarray
    gap: float  # min |Re λ|
    tail: float

    @property
    def scale(self):
        return _op_norm(self.P_s) + _op_norm(self.P_u)


def dichotomy(ode, floor=DICHOTOMY_FLOOR, tail_tol=KERNEL_TAIL):
    """Spectral projections of the companion system; rejects non-hyperbolic ``L``."""
    lam = spectrum(ode)
    gap = float(np.abs(lam.real).min())
    if gap < floor:
        raise NonHyperbolicError(f"characteristic root with |Re λ| = {gap:.3g} below the floor {floor:g}")
    A, B = ode.companion()
    S = _matrix_sign(A)
    I = np.eye(A.shape[0])
    P_s, P_u = 0.5 * (I - S), 0.5 * (I + S)
    scale = _op_norm(P_s) + _op_norm(P_u)
    tail = math.log(max(scale, 1.0) / tail_tol) / gap
    return Dichotomy(A, B, P_s, P_u, gap, tail)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled solution with its derivative stack.

    ``derivatives[k]`` holds ``y^{(k)}`` at the grid nodes, ``k = 0..n``;
    the top order comes from the equation.
    """

    t0: float
    dt: float
    derivatives: np.ndarray  # (n + 1, K, r)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.array(self.derivatives, dtype=complex)
        if d.ndim != 3:
            raise DimensionError("derivative stack must have shape (n+1, K, r)")
        object.__setattr__(self, "derivatives", _freeze(d))

    @property
    def order(self):
        return self.derivatives.shape[0] - 1

    @property
    def values(self):
        return self.derivatives[0]

    @property
    def grid(self):
        return self.t0 + self.dt * np.arange(self.derivatives.shape[1])

    @property
    def span(self):
        return self.t0, self.t0 + self.dt * (self.derivatives.shape[1] - 1)

    def signal(self, k=0):
        """Cubic-Hermite adapter for ``y^{(k)}`` (linear for the top order)."""
        if not 0 <= k <= self.order:
            raise ConfigError(f"derivative order {k} not stored")
        slopes = self.derivatives[k + 1] if k < self.order else None
        return SampledSignal(self.t0, self.dt, self.derivatives[k], slopes)

    def sup(self, k=0):
        return float(np.abs(self.derivatives[k]).max())

    def derivative_mismatch(self, k=0, skip=None):
        """Max gap between 4th-order differences of ``y^{(k)}`` and stored ``y^{(k+1)}``.

        ``skip`` is a boolean mask of nodes to ignore (e.g. near forcing kinks).
        """
        y = self.derivatives[k]
        h = self.dt
        fd = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
        err = np.abs(fd - self.derivatives[k + 1][2:-2]).max(axis=-1)
        if skip is not None:
            err = err[~np.asarray(skip)[2:-2]]
        return float(err.max()) if err.size else 0.0

    def csv_header(self):
        cols = ["t"]
        for k in range(self.order + 1):
            for c in range(self.derivatives.shape[2]):
                cols += [f"y{k}_{c}_re", f"y{k}_{c}_im"]
        return cols

    def csv_rows(self):
        t = self.grid
        d = self.derivatives
        for i in range(d.shape[1]):
            row = [t[i]]
            for k in range(d.shape[0]):
                for z in d[k, i]:
                    row += [z.real, z.imag]
            yield row


def _step_weights(A, B, h, order, sign=1.0):
    # ∫_0^h e^{sign A (h - u)} B f(t + u) du ≈ Σ_i W_i f(t + h x_i) for sign=+1
    x, w = gauss_legendre(order)
    if sign > 0:
        return x, [h * wi * (expm(A * (h * (1.0 - xi))) @ B) for xi, wi in zip(x, w)]
    return x, [h * wi * (expm(-A * (h * xi)) @ B) for xi, wi in zip(x, w)]


def _forcing_terms(f, starts, h, x, W):
    """``g_k = Σ_i W_i f(starts_k + h x_i)`` with explicit accumulation."""
    N = W[0].shape[0]
    g = np.zeros((starts.size, N), dtype=complex)
    for xi, Wi in zip(x, W):
        v = f.evaluate(starts + h * xi)
        for b in range(v.shape[1]):
            g += v[:, b : b + 1] * Wi[:, b]
    return g


def _march(E, g, x0):
    out = np.empty((g.shape[0] + 1, E.shape[0]), dtype=complex)
    out[0] = x0
    cur = x0
    for k in range(g.shape[0]):
        cur = E @ cur + g[k]
        out[k + 1] = cur
    return out


def _stack_from_states(ode, f, t, X):
    n, r = ode.n, ode.r
    d = np.empty((n + 1, t.size, r), dtype=complex)
    for k in range(n):
        d[k] = X[:, k * r : (k + 1) * r]
    top = f.evaluate(t)
    for k in range(n):
        a = ode.coeffs[k]
        for b in range(r):
            top = top - d[k][:, b : b + 1] * a[:, b]
    d[n] = top
    return d


def _span(horizon):
    if np.ndim(horizon) == 0:
        h = float(horizon)
        if not h > 0:
            raise ConfigError("horizon must be positive")
        return -h, h
    lo, hi = (float(x) for x in horizon)
    if not hi > lo:
        raise ConfigError("empty horizon")
    return lo, hi


def green_bounded_solve(
    ode,
    f,
    horizon,
    step=GREEN_STEP,
    floor=DICHOTOMY_FLOOR,
    guard=FORCING_GUARD,
    order=GL_ORDER,
):
    """Unique bounded solution of ``Ly = f`` sampled on ``[-horizon, horizon]``.

    ``horizon`` may also be an explicit ``(lo, hi)`` span. The stable part of
    the state is marched forward from ``lo - tail`` and the unstable part
    backward from ``hi + tail``, both from zero; the tail makes the neglected
    kernel mass smaller than ``1e-8`` relative to the projection scale. The
    grid is anchored at an integer so integer kinks of the forcing fall on
    nodes when ``1/step`` is an integer.
    """
    if f.dim != ode.r:
        raise DimensionError(f"forcing has dimension {f.dim}, system needs {ode.r}")
    lo, hi = _span(horizon)
    dic = dichotomy(ode, floor)
    h = float(step)
    start = math.floor(lo - dic.tail)
    k_lo = int(math.floor((lo - start) / h + 1e-9))
    k_hi = int(math.ceil((hi - start) / h - 1e-9))
    k_end = int(math.ceil((hi + dic.tail - start) / h))
    starts = start + h * np.arange(k_end)
    nodes = start + h * np.arange(k_end + 1)

    fs = f.evaluate(nodes)
    sup_f = float(np.abs(fs).max())
    if not math.isfinite(sup_f) or sup_f > guard:
        raise UnboundedForcingError(f"sampled forcing sup {sup_f:.3g} exceeds the guard {guard:g}")

    N = dic.A.shape[0]
    X = np.zeros((k_end + 1, N), dtype=complex)
    if np.abs(dic.P_s).max() > 1e-14:
        x, W = _step_weights(dic.A, dic.P_s @ dic.B, h, order, +1.0)
        E = expm(dic.A * h) @ dic.P_s
        X += _march(E, _forcing_terms(f, starts, h, x, W), np.zeros(N, dtype=complex))
    if np.abs(dic.P_u).max() > 1e-14:
        x, W = _step_weights(dic.A, dic.P_u @ dic.B, h, order, -1.0)
        E = expm(-dic.A * h) @ dic.P_u
        g = _forcing_terms(f, starts, h, x, W)[::-1]
        X -= _march(E, g, np.zeros(N, dtype=complex))[::-1]
    t = nodes[k_lo : k_hi + 1]
    d = _stack_from_states(ode, f, t, X[k_lo : k_hi + 1])
    meta = {
        "solver": "green",
        "step": h,
        "tail": dic.tail,
        "dichotomy_gap": dic.gap,
        "forcing_sup": sup_f,
    }
    return Trajectory(float(t[0]), h, d, meta)


def ivp_halfline_solve(ode, f, init, alpha=0.0, horizon=100.0, step=1e-2, order=GL_ORDER):
    """March ``Ly = f`` from ``y^{(k)}(alpha) = init[k]`` over ``[alpha, alpha + horizon]``.

    Exact matrix-exponential propagation plus Gauss-Legendre quadrature of
    the forcing in each step. ``meta['outside_hypotheses']`` is set when a
    characteristic root has positive real part, where bounded forcing
    generally produces exponential growth.
    """
    if f.dim != ode.r:
        raise DimensionError(f"forcing has dimension {f.dim}, system needs {ode.r}")
    h = float(step)
    if not h > 0 or not horizon > 0:
        raise ConfigError("step and horizon must be positive")
    n, r = ode.n, ode.r
    x0 = np.zeros(n * r, dtype=complex)
    init = list(init)
    if len(init) != n:
        raise ConfigError(f"need {n} initial derivatives, got {len(init)}")
    for k, v in enumerate(init):
        x0[k * r : (k + 1) * r] = np.broadcast_to(np.asarray(v, dtype=complex), (r,))
    A, B = ode.companion()
    steps = int(math.ceil(horizon / h - 1e-9))
    starts = alpha + h * np.arange(steps)
    x, W = _step_weights(A, B, h, order, +1.0)
    with np.errstate(over="raise", invalid="raise"):
        try:
            X = _march(expm(A * h), _forcing_terms(f, starts, h, x, W), x0)
        except FloatingPointError as exc:
            raise NumericGuardError("initial-value march overflowed") from exc
    if not np.all(np.isfinite(X)):
        raise NumericGuardError("initial-value march overflowed")
    t = alpha + h * np.arange(steps + 1)
    d = _stack_from_states(ode, f, t, X)
    lam = spectrum(ode)
    meta = {
        "solver": "ivp",
        "step": h,
        "alpha": float(alpha),
        # roots on the imaginary axis come back with rounding-level real parts
        "outside_hypotheses": bool(np.any(lam.real > 1e-9 * max(1.0, float(np.abs(lam).max())))),
    }
    return Trajectory(float(alpha), h, d, meta)


# ---------------------------------------------------------------------------
# checks on solutions
# ---------------------------------------------------------------------------


def kink_mask(traj, f):
    """Nodes whose 5-point stencil touches a breakpoint of the forcing."""
    lo, hi = traj.span
    t = traj.grid
    mask = np.zeros(t.size, dtype=bool)
    reach = 2.0 * traj.dt * (1.0 + 1e-9)
    for b in f.breakpoints(lo - reach, hi + reach):
        mask |= np.abs(t - b) <= reach
    return mask


def residual(ode, traj, f):
    """Independent estimate of ``sup ||L y - f||`` on the trajectory grid.

    ``y^{(n)}`` is re-derived by 4th-order central differences of the stored
    ``y^{(n-1)}``; nodes whose stencil crosses a kink of ``f`` are skipped.
    """
    n = ode.n
    h = traj.dt
    d = traj.derivatives
    mask = kink_mask(traj, f)
    y = d[n - 1]
    fd = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    t = traj.grid[2:-2]
    lhs = fd.copy()
    for k in range(n):
        a = ode.coeffs[k]
        for b in range(ode.r):
            lhs = lhs + d[k][2:-2, b : b + 1] * a[:, b]
    err = np.abs(lhs - f.evaluate(t)).max(axis=-1)[~mask[2:-2]]
    return float(err.max()) if err.size else 0.0


@dataclass(frozen=True)
class KernelNorms:
    g1: float  # ∫ ||G(t)|| dt
    tail: float  # window beyond which ||G|| mass is below `eta`
    eta: float


def kernel_norms(ode, window=None, step=1e-3, floor=DICHOTOMY_FLOOR):
    """1-norm of the Green kernel ``y = ∫ G(t - s) f(s) ds`` and its tail mass.

    ``G(t) = C e^{At} P_s B`` for ``t > 0`` and ``-C e^{At} P_u B`` for
    ``t < 0``, with ``C`` reading off the ``y`` block. The norm is integrated
    by the trapezoid rule on each side; ``eta`` is the mass outside
    ``[-window, window]`` (default: the dichotomy tail, giving ``eta`` ≈ 0).
    """
    dic = dichotomy(ode, floor)
    r = ode.r
    span = 2.0 * dic.tail
    m = int(math.ceil(span / step))

    def side(P, sign):
        E = expm(sign * dic.A * step)
        cur = P @ dic.B
        vals = np.empty(m + 1)
        for k in range(m + 1):
            vals[k] = _op_norm(cur[:r])
            cur = E @ cur
        return vals

    s = side(dic.P_s, 1.0)
    u = side(dic.P_u, -1.0)
    t = step * np.arange(m + 1)
    trap = lambda v: float(step * (v.sum() - 0.5 * (v[0] + v[-1])))  # noqa: E731
    g1 = trap(s) + trap(u)
    w = dic.tail if window is None else float(window)
    out = t >= w
    eta = trap(np.where(out, s, 0.0)) + trap(np.where(out, u, 0.0)) if out.any() else 0.0
    return KernelNorms(g1, w, eta)


@dataclass(frozen=True)
class EsclangonReport:
    sups: tuple  # sup ||y^{(k)}|| for k = 0..order
    bounded: tuple  # boundedness flag per k
    verdicts: tuple  # LadderVerdict per k < order
    ladder: dict


def boundedness_flag(samples, ratio=1.5):
    """Heuristic: a bounded trajectory's sup over the full grid stays within
    ``ratio`` times its sup over the first half."""
    a = np.abs(np.asarray(samples))
    if a.ndim > 1:
        a = a.max(axis=-1)
    half = a[: max(1, a.size // 2)].max()
    return bool(a.max() <= ratio * half + 1e-12)


def esclangon_check(traj, order=None, n_max=2, step=1e-2, workers=1):
    """Sup norms of ``y^{(k)}`` and recurrence ladders for ``k < order``.

    Ladders run on the Hermite adapter of each derivative. The scan cap is
    fitted to the trajectory span: half-line trajectories scan ``τ >= 0``
    with windows starting at the left end.
    """
    from .analysis import recurrence_ladder

    order = traj.order if order is None else int(order)
    if order > traj.order or order < 0:
        raise ConfigError(f"order {order} exceeds the stored stack ({traj.order})")
    lo, hi = traj.span
    halfline = lo > -2.0 * n_max
    origin = lo if halfline else None
    reach = 2.0 * n_max
    s_cap = (hi - lo - reach) if halfline else (hi - reach)
    if s_cap <= 0:
        raise ConfigError("trajectory span too short for the requested ladder")
    sups, flags, verdicts = [], [], []
    for k in range(order + 1):
        sups.append(traj.sup(k))
        flags.append(boundedness_flag(traj.derivatives[k]))
    for k in range(order):
        verdicts.append(
            recurrence_ladder(traj.signal(k), n_max, s_cap=s_cap, step=step, origin=origin, workers=workers)
        )
    cfg = {"n_max": n_max, "s_cap": s_cap, "step": step, "origin": origin}
    return EsclangonReport(tuple(sups), tuple(flags), tuple(verdicts), cfg)


@dataclass(frozen=True)
class TransferCheck:
    ok: bool
    bound: float
    worst: float
    checked: int
    rows: tuple


def almost_period_transfer(ode, f, traj, eps, window, scan_range, step=1e-2, tail_window=None, slack=0.0):
    """Check ``sup_K ||y_τ - y|| <= g1 eps + 2 eta ||f||`` for shifts in ``E(f, eps, K_wide)``.

    ``K_wide`` widens ``K`` by the kernel window; ``y`` is read from the
    trajectory's Hermite adapter, so the scan range plus ``K`` must lie in
    the sampled span.
    """
    from .analysis import almost_period_set

    kn = kernel_norms(ode, tail_window)
    wide = window.widen(kn.tail)
    E = almost_period_set(f, eps, wide, scan_range, step, refine=False)
    y = traj.signal(0)
    t = window.samples()
    base = y.evaluate(t)
    fsup = float(np.abs(f.evaluate(wide.samples())).max())
    bound = kn.g1 * eps + 2.0 * kn.eta * fsup + slack
    rows = []
    worst = 0.0
    for tau in E.members:
        s = float(np.abs(y.evaluate(t + tau) - base).max())
        worst = max(worst, s)
        rows.append((tau, s))
    return TransferCheck(worst <= bound, bound, worst, len(rows), tuple(rows))
