"""Scanning for ε-K-almost periods and derived recurrence diagnostics.

The central routine, :func:`almost_period_set`, tests every shift ``τ`` of a
uniform grid against the sampled criterion

    max_{t in K} ||f(t + τ) - f(t)|| <= eps        (sup norm on C^d)

When the window samples sit on the τ grid (sample step an integer multiple
of the τ step) the shifted values are read from one table of ``f`` on the
combined grid, so a scan costs a single pass of evaluations plus table
lookups. Window samples are visited coarse-to-fine and a shift is dropped as
soon as one sample rejects it.

The τ range is processed in fixed-size chunks. Chunk boundaries never depend
on the worker count, so a scan gives bit-identical results with one thread or
many.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError
from .quadrature import adaptive_simpson, golden_section_min
from .signals import ProbeWindow, Signal, stack

CHUNK = 1 << 16
REFINE_LIMIT = 64
BLOCK_CELLS = 1 << 16
DEFAULT_STEP = 1e-2
DEFAULT_S_CAP = 1e6
RECURRENT = "empirically-recurrent"


def _vnorm(x):
    if x.shape[-1] == 1:
        return np.abs(x[..., 0])
    return np.abs(x).max(axis=-1)


def _grid_count(lo, hi, step):
    return int(math.floor((hi - lo) / step + 1e-9)) + 1


def _spread_order(n):
    """Visit order that samples the window coarse-to-fine."""
    i = np.arange(n, dtype=np.int64)
    tz = np.zeros(n, dtype=np.int64)
    tz[0] = 64
    rest = i[1:]
    tz[1:] = np.log2(rest & -rest).astype(np.int64)
    order = np.argsort(-tz, kind="stable")
    if n > 1 and order[1] != n - 1:
        order = np.concatenate([[order[0], n - 1], order[1:][order[1:] != n - 1]])
    return order


def _run_chunks(fn, chunks, workers):
    if workers is None or workers <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(fn, chunks))


# ---------------------------------------------------------------------------
# almost-period sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlmostPeriodSet:
    """Accepted grid shifts ``τ`` of a scan and their gap statistic.

    ``members`` holds the accepted shifts in strictly ascending order.
    ``max_gap`` is the largest distance between consecutive members,
    including the two boundary gaps to the ends of ``scan_range``; it is
    ``inf`` when no shift was accepted.
    """

    eps: float
    window: ProbeWindow
    scan_range: tuple
    scan_step: float
    members: tuple
    max_gap: float
    refined: bool = False
    trace: tuple = field(default=None, compare=False, repr=False)

    @property
    def empty(self):
        return not self.members

    def gaps(self):
        return _gap_list(self.members, *self.scan_range)


def _gap_list(members, lo, hi):
    if not members:
        return []
    pts = [lo, *members, hi]
    return [b - a for a, b in zip(pts[:-1], pts[1:])]


def max_gap(members, lo=None, hi=None):
    """Smallest ``L`` with every length-``L`` subinterval of ``[lo, hi]`` meeting ``members``.

    Accepts an :class:`AlmostPeriodSet` or an explicit member list with its
    range. Boundary gaps count; an empty member set gives ``inf``.
    """
    if isinstance(members, AlmostPeriodSet):
        lo, hi = members.scan_range
        members = members.members
    members = sorted(float(m) for m in members)
    if not members:
        return math.inf
    return float(max(_gap_list(members, float(lo), float(hi))))


def almost_period_set(
    f,
    eps,
    window,
    scan_range,
    step=DEFAULT_STEP,
    *,
    refine=True,
    strict=False,
    trace=False,
    workers=1,
):
    """Scan ``E(f, eps, K)`` over the τ grid ``lo, lo + step, ..., <= hi``.

    With ``refine`` a near miss (grid sup within the local grid modulus of
    ``eps``) is re-examined by golden-section search for the best shift in
    its ``2 * step`` neighbourhood, whenever the grid is coarse relative to
    ``eps``; a successful refinement contributes the refined shift. With
    ``strict`` the sampled sup is inflated by twice the local modulus at the
    window sample step before comparison, so accepted shifts also satisfy
    the criterion between window samples. ``trace`` keeps the per-shift sup
    distances (disabling early rejection) for CSV export.
    """
    if not isinstance(window, ProbeWindow):
        raise ConfigError("window must be a ProbeWindow")
    eps = float(eps)
    step = float(step)
    lo, hi = (float(x) for x in scan_range)
    if not eps > 0:
        raise ConfigError("eps must be positive")
    if not step > 0:
        raise ConfigError("scan step must be positive")
    if not hi >= lo:
        raise ConfigError("empty scan range")
    n_tau = _grid_count(lo, hi, step)
    tK = window.samples()
    fK = f.evaluate(tK)
    ratio = window.sample_step / step if window.kind == "interval" else 0.0
    lookup = window.kind == "interval" and abs(ratio - round(ratio)) < 1e-9 and round(ratio) >= 1
    ctx = _ScanContext(
        f=f, eps=eps, lo=lo, step=step, tK=tK, fK=fK, order=_spread_order(len(tK)),
        m=int(round(ratio)) if lookup else 0, refine=refine, strict=strict, full=trace,
        n_tau=n_tau,
    )
    chunks = [(j0, min(j0 + CHUNK, n_tau)) for j0 in range(0, n_tau, CHUNK)]
    parts = _run_chunks(ctx.run, chunks, workers)

    cand = []
    any_refined = False
    for part in parts:
        cand.extend((tau, 0) for tau in part["grid"])
        cand.extend((tau, 1) for tau in part["refined"])
        any_refined = any_refined or bool(part["refined"])
    cand.sort()
    members = []
    for tau, kind in cand:
        if members and tau - members[-1] < 0.5 * step:
            continue
        members.append(float(tau))
    members = tuple(members)
    tr = None
    if trace:
        taus = lo + step * np.arange(n_tau)
        supd = np.concatenate([p["supd"] for p in parts])
        acc = np.concatenate([p["accepted"] for p in parts])
        tr = (taus, supd, acc)
    return AlmostPeriodSet(
        eps=eps,
        window=window,
        scan_range=(lo, hi),
        scan_step=step,
        members=members,
        max_gap=max_gap(members, lo, hi),
        refined=any_refined,
        trace=tr,
    )


@dataclass
class _ScanContext:
    f: Signal
    eps: float
    lo: float
    step: float
    tK: np.ndarray
    fK: np.ndarray
    order: np.ndarray
    m: int
    refine: bool
    strict: bool
    full: bool
    n_tau: int

    def run(self, chunk):
        j0, j1 = chunk
        if self.m:
            rows, omega = self._lookup_rows(j0, j1)
        else:
            rows, omega = self._direct_rows(j0, j1)
        infl = 2.0 * max(self.m, 1) * omega if self.strict and self.m else 0.0
        do_refine = self.refine and omega > 0.25 * self.eps
        thr = self.eps + (omega if do_refine else 0.0) - infl
        surv = np.arange(j1 - j0)
        supd = np.zeros(j1 - j0)
        pos, bs, nK = 0, 1, len(self.order)
        while pos < nK:
            blk = self.order[pos:pos + bs]
            pos += len(blk)
            d = _vnorm(rows(blk, surv) - self.fK[blk][:, None]).max(axis=0)
            supd[surv] = np.maximum(supd[surv], d)
            if not self.full:
                surv = surv[d <= thr]
                if surv.size == 0:
                    break
            # grow the block while keeping the gathered slab near BLOCK_CELLS
            bs = max(1, min(2 * bs, BLOCK_CELLS // max(surv.size, 1)))
        if self.full:
            surv = np.arange(j1 - j0)
        s = supd[surv]
        accepted = surv[s + infl <= self.eps]
        grid = [self.lo + self.step * (j0 + j) for j in accepted]
        refined = []
        if do_refine:
            near = surv[(s + infl > self.eps) & (s - infl <= self.eps + omega)]
            if near.size:
                near = near[np.argsort(supd[near], kind="stable")[:REFINE_LIMIT]]
                for j in np.sort(near):
                    tau = self._refine(self.lo + self.step * (j0 + j), infl)
                    if tau is not None:
                        refined.append(tau)
        out = {"grid": grid, "refined": refined}
        if self.full:
            acc = np.zeros(j1 - j0, dtype=bool)
            acc[accepted] = True
            out["supd"] = supd
            out["accepted"] = acc
        return out

    def _lookup_rows(self, j0, j1):
        m = self.m
        nK = len(self.tK)
        l0, l1 = j0, j1 + (nK - 1) * m
        x = (self.lo + self.tK[0]) + self.step * np.arange(l0, l1)
        F = self.f.evaluate(x)
        omega = float(_vnorm(np.diff(F, axis=0)).max()) if len(F) > 1 else 0.0

        def rows(blk, surv):
            return F[blk[:, None] * m + surv[None, :]]

        return rows, omega

    def _direct_rows(self, j0, j1):
        taus = self.lo + self.step * np.arange(j0, j1)
        first = self.f.evaluate(self.tK[self.order[0]] + taus)
        omega = float(_vnorm(np.diff(first, axis=0)).max()) if len(first) > 1 else 0.0
        head = int(self.order[0])

        def rows(blk, surv):
            if len(blk) == 1 and int(blk[0]) == head:
                return first[surv][None]
            x = (self.tK[blk][:, None] + taus[surv][None, :]).ravel()
            return self.f.evaluate(x).reshape(len(blk), len(surv), -1)

        return rows, omega

    def _sup_at(self, tau):
        return float(_vnorm(self.f.evaluate(self.tK + tau) - self.fK).max())

    def _refine(self, tau, infl):
        lo = max(tau - self.step, self.lo)
        hi = min(tau + self.step, self.lo + self.step * (self.n_tau - 1))
        if hi <= lo:
            return None
        x, fx = golden_section_min(self._sup_at, lo, hi, xtol=max(self.step * 1e-9, 1e-13))
        return x if fx + infl <= self.eps else None


def discrete_period_scan(f, eps, probes, scan_range, step=DEFAULT_STEP, **kw):
    """ε-periods tested only on a finite probe set (discrete-topology semantics)."""
    window = probes if isinstance(probes, ProbeWindow) else ProbeWindow.finite(probes)
    if window.kind != "probes":
        raise ConfigError("discrete scans need a finite probe set")
    return almost_period_set(f, eps, window, scan_range, step, **kw)


def sup_distance(f, g, window):
    """Sampled ``max_{t in K} ||f(t) - g(t)||``."""
    if f.dim != g.dim:
        raise DimensionError("signals differ in dimension")
    t = window.samples()
    return float(_vnorm(f.evaluate(t) - g.evaluate(t)).max())


def joint_tuple(fs):
    """Stack signals into one valued in the product space (max-of-components norm)."""
    fs = list(fs)
    if not fs:
        raise ConfigError("joint tuple needs at least one signal")
    return stack(fs)


# ---------------------------------------------------------------------------
# recurrence ladder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapPolicy:
    """Rung ``n`` passes iff its max gap is at most ``ratio * S_n``."""

    ratio: float = 1.0 / 20.0

    def bound(self, scan_length):
        return self.ratio * scan_length


@dataclass(frozen=True)
class Rung:
    n: int
    eps: float
    window: tuple
    scan_range: tuple
    max_gap: float
    gap_bound: float
    passed: bool
    members: int

    def as_row(self):
        return {
            "rung": self.n,
            "eps": self.eps,
            "window_lo": self.window[0],
            "window_hi": self.window[1],
            "scan_lo": self.scan_range[0],
            "scan_hi": self.scan_range[1],
            "max_gap": self.max_gap,
            "gap_bound": self.gap_bound,
            "members": self.members,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class LadderVerdict:
    rungs: tuple
    verdict: str

    @property
    def passed(self):
        return self.verdict == RECURRENT

    @property
    def failed_rung(self):
        for r in self.rungs:
            if not r.passed:
                return r.n
        return None

    @property
    def certificate(self):
        return [r.as_row() for r in self.rungs]

    def describe(self):
        if self.passed:
            last = self.rungs[-1]
            return f"{RECURRENT} (up to rung {last.n}, range S={last.scan_range[1] - last.scan_range[0]:g})"
        return self.verdict


def rung_schedule(n, s_cap=DEFAULT_S_CAP, origin=None):
    """``(eps_n, K_n, S_n) = (2^-n, [-2n, 2n], min(200 * 4^n, S_cap))``.

    With a half-line ``origin`` the window is the restriction of
    ``[-2n, 2n]`` to the half line, translated to start at the origin:
    ``[origin, origin + 2n]``.
    """
    eps = 2.0 ** (-n)
    if origin is None:
        window = (-2.0 * n, 2.0 * n)
    else:
        window = (float(origin), float(origin) + 2.0 * n)
    return eps, window, min(200.0 * 4.0**n, float(s_cap))


def recurrence_ladder(
    f,
    n_max=3,
    policy=None,
    *,
    s_cap=DEFAULT_S_CAP,
    step=DEFAULT_STEP,
    window_step=DEFAULT_STEP,
    origin=None,
    workers=1,
    refine=True,
):
    """Run almost-period scans at escalating rungs; reject at the first failure.

    The verdict is empirical: passing every rung only says the scanned gaps
    stayed within the policy bound up to rung ``n_max``.
    """
    if n_max < 1:
        raise ConfigError("ladder needs n_max >= 1")
    policy = policy or GapPolicy()
    rungs = []
    verdict = RECURRENT
    start = 0.0 if origin is None else float(origin)
    for n in range(1, int(n_max) + 1):
        eps, (klo, khi), S = rung_schedule(n, s_cap, origin)
        window = ProbeWindow.interval(klo, khi, window_step)
        E = almost_period_set(f, eps, window, (start, start + S), step, refine=refine, workers=workers)
        bound = policy.bound(S)
        ok = E.max_gap <= bound
        rungs.append(Rung(n, eps, (klo, khi), (start, start + S), E.max_gap, bound, ok, len(E.members)))
        if not ok:
            verdict = f"rejected-at-rung-{n}"
            break
    return LadderVerdict(tuple(rungs), verdict)


# ---------------------------------------------------------------------------
# metric, inclusions, means, moduli
# ---------------------------------------------------------------------------


def metric_d(f, g, n_max=10, step=DEFAULT_STEP):
    """``d(f, g) = max_{n <= n_max} min{1/n, sup_{|t| <= n} ||f - g||}``.

    Returns ``(d, n)`` with ``n`` the first index achieving the maximum.
    """
    if f.dim != g.dim:
        raise DimensionError("signals differ in dimension")
    best, arg = -1.0, 1
    for n in range(1, int(n_max) + 1):
        t = np.linspace(-n, n, 2 * int(round(n / step)) + 1)
        term = min(1.0 / n, float(_vnorm(f.evaluate(t) - g.evaluate(t)).max()))
        if term > best:
            best, arg = term, n
    return best, arg


def metric_period_set(f, eps, scan_range, step=DEFAULT_STEP, n_max=None, window_step=DEFAULT_STEP, **kw):
    """Shifts with ``d(f, f_τ) <= eps``.

    For ``n >= 1/eps`` the ``min{1/n, ...}`` term never exceeds ``eps``, so the
    set equals ``E(f, eps, [-N, N])`` with ``N = ceil(1/eps) - 1``.
    """
    N = int(math.ceil(1.0 / eps)) - 1
    if n_max is not None:
        N = min(N, int(n_max))
    if N < 1:
        lo, hi = (float(x) for x in scan_range)
        n = _grid_count(lo, hi, step)
        members = tuple(float(lo + step * j) for j in range(n))
        return AlmostPeriodSet(eps, ProbeWindow.interval(1.0, 1.0 + step, window_step),
                               (lo, hi), step, members, max_gap(members, lo, hi))
    return almost_period_set(f, eps, ProbeWindow.interval(N, step=window_step), scan_range, step, **kw)


@dataclass(frozen=True)
class InclusionResult:
    holds: bool
    checked: int
    witness: float = None
    max_excess: float = 0.0
    details: dict = field(default_factory=dict, compare=False)


def uc_modulus(f, window, deltas):
    """Table ``δ ↦ sup_{|s| <= δ, t in K} ||f(t + s) - f(t)||`` (sampled).

    All shifts come from one common grid, so the table is non-decreasing.
    """
    deltas = sorted(float(d) for d in deltas)
    if not deltas or deltas[0] < 0:
        raise ConfigError("deltas must be non-negative")
    t = window.samples()
    fK = f.evaluate(t)
    positive = [d for d in deltas if d > 0]
    ds = min([window.sample_step, *(d / 4.0 for d in positive)]) if positive else 1.0
    k_max = int(math.ceil(deltas[-1] / ds))
    shifts = sorted({*(k * ds for k in range(1, k_max + 1)), *positive}, key=abs)
    shifts = [s for s in shifts if s <= deltas[-1] * (1 + 1e-12)]
    vals = []
    for s in shifts:
        a = _vnorm(f.evaluate(t + s) - fK).max()
        b = _vnorm(f.evaluate(t - s) - fK).max()
        vals.append((s, float(max(a, b))))
    table = []
    for d in deltas:
        table.append((d, max([v for s, v in vals if s <= d * (1 + 1e-12)], default=0.0)))
    return table


def period_inclusion_215(g, h, n, scan_range=(0.0, 100.0), step=DEFAULT_STEP, window_step=DEFAULT_STEP, workers=1):
    """Check ``E(g, 1/m, [-m, m]) ⊂ E(Δ_h P g, 1/n, [-n, n])`` with ``m = n + floor|h| + 1``.

    The left set is scanned on the τ grid; each member is then tested on the
    right-hand criterion. Sampling slack ``|h| * 2 ω_g(window_step)`` is
    granted. The returned witness is the first violating shift, if any.
    """
    h = float(h)
    n = int(n)
    if h == 0 or n < 1:
        raise ConfigError("need h != 0 and n >= 1")
    m = n + int(math.floor(abs(h))) + 1
    Km = ProbeWindow.interval(m, step=window_step)
    E = almost_period_set(g, 1.0 / m, Km, scan_range, step, refine=False, workers=workers)
    target = g.integral(0.0).difference(h)
    Kn = ProbeWindow.interval(n, step=window_step)
    t = Kn.samples()
    base = target.evaluate(t)
    omega = uc_modulus(g, Km, [window_step])[0][1]
    slack = abs(h) * 2.0 * omega
    witness, worst = None, -math.inf
    for tau in E.members:
        sup = float(_vnorm(target.evaluate(t + tau) - base).max())
        worst = max(worst, sup - 1.0 / n)
        if sup > 1.0 / n + slack and witness is None:
            witness = tau
    return InclusionResult(
        holds=witness is None,
        checked=len(E.members),
        witness=witness,
        max_excess=worst if E.members else 0.0,
        details={"m": m, "analytic_bound": abs(h) / m, "target": 1.0 / n, "slack": slack},
    )


@dataclass(frozen=True)
class CoverResult:
    delta: float
    window: ProbeWindow
    verified: bool
    table: tuple = ()


def cover_inclusion_search(f, eps, window, shifts, delta_grid, scan_range=(0.0, 200.0),
                           step=DEFAULT_STEP, workers=1):
    """Search the largest ``δ`` with ``∩_j E(Δ_{s_j} f, δ, K_*) ⊂ E(f, eps, K)``.

    ``K_*`` is ``K`` widened by ``max |s_j|``. The intersection is one scan of
    the stacked differences. Each ``δ`` row records the intersection size and
    the number of violators; the first violator-free ``δ`` (descending
    order) is reported.
    """
    shifts = [float(s) for s in shifts]
    if not shifts:
        raise ConfigError("need at least one shift")
    K_star = window.widen(max(abs(s) for s in shifts))
    joint = joint_tuple([f.difference(s) for s in shifts])
    t = window.samples()
    base = f.evaluate(t)
    rows = []
    found = None
    for delta in sorted((float(d) for d in delta_grid), reverse=True):
        E = almost_period_set(joint, delta, K_star, scan_range, step, refine=False, workers=workers)
        violators = [tau for tau in E.members if float(_vnorm(f.evaluate(t + tau) - base).max()) > eps]
        rows.append({"delta": delta, "intersection": len(E.members), "violators": len(violators),
                     "first_violator": violators[0] if violators else None})
        if not violators and found is None:
            found = delta
    return CoverResult(found if found is not None else math.nan, K_star, found is not None, tuple(rows))


@dataclass(frozen=True)
class ErgodicResult:
    mean: np.ndarray
    deviations: tuple  # ((T, sup deviation), ...)
    ergodic: bool


def _window_mean(f, x, T, tol):
    # unit-length panels: a single Simpson pass over a long window can alias
    # an oscillation into a false convergence
    k = max(1, int(math.ceil(2.0 * T)))
    edges = -T + (2.0 * T / k) * np.arange(k + 1)
    a = (x[:, None] + edges[None, :-1]).ravel()
    b = (x[:, None] + edges[None, 1:]).ravel()
    vals = adaptive_simpson(f.evaluate, a, b, tol)
    return vals.reshape(x.size, k, -1).sum(axis=1) / (2.0 * T)


def ergodic_mean(f, T_ladder, x_probes, tol=1e-2, quad_tol=1e-8):
    """Estimate the ergodic mean from window averages ``(1/2T) ∫_{-T}^{T} f(t + x) dt``."""
    Ts = [float(T) for T in T_ladder]
    if any(b <= a for a, b in zip(Ts, Ts[1:])) or not Ts or Ts[0] <= 0:
        raise ConfigError("T ladder must be positive and increasing")
    x = np.asarray(x_probes, dtype=float)
    means = {T: _window_mean(f, x, T, quad_tol) for T in Ts}
    m = means[Ts[-1]].mean(axis=0)
    devs = tuple((T, float(_vnorm(means[T] - m).max())) for T in Ts)
    return ErgodicResult(m, devs, devs[-1][1] <= tol)


def range_net(f, grid, eps):
    """Size of a greedy ``eps``-net of the sampled range ``{f(t) : t in grid}``.

    Values are visited in lexicographic order of their real coordinates; in
    one real dimension this is the optimal interval cover.
    """
    if not eps > 0:
        raise ConfigError("eps must be positive")
    v = f.evaluate(np.asarray(grid, dtype=float))
    coords = np.concatenate([v.real, v.imag], axis=1)
    keys = [coords[:, k] for k in range(coords.shape[1] - 1, -1, -1)]
    v = v[np.lexsort(keys)]
    centres = np.empty((0, v.shape[1]), dtype=complex)
    for z in v:
        if centres.shape[0] and _vnorm(centres - z).min() <= eps:
            continue
        centres = np.vstack([centres, z])
    return int(centres.shape[0])
