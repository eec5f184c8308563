"""Vectorised quadrature and one-dimensional minimisation helpers."""

import math

import numpy as np

BLOCK = 2048
MAX_DEPTH = 48


def _vnorm(x):
    # sup norm over the codomain axis
    return np.abs(x).max(axis=-1)


def adaptive_simpson(f, a, b, tol=1e-8, max_depth=MAX_DEPTH, min_depth=0):
    """Integrate ``f`` over many intervals ``[a_i, b_i]`` at once.

    Adaptive composite Simpson rule with Richardson correction. ``f`` maps a
    1-D array of abscissae to an ``(n, dim)`` complex array. The absolute
    tolerance ``tol`` applies to each interval separately and is halved on
    every bisection. Intervals with ``b < a`` integrate with the sign flipped.
    ``min_depth`` forces that many bisection levels before the error test
    may accept a panel, which guards against a coarse first pass aliasing a
    fast oscillation into a false convergence.

    The result for an interval depends only on its own endpoints, never on
    which other intervals share the batch, so results are reproducible under
    any blocking or parallel split.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    n = a.size
    if n == 0:
        probe = f(np.zeros(1))
        return np.zeros((0, probe.shape[1]), dtype=complex)
    out = []
    for start in range(0, n, BLOCK):
        sl = slice(start, start + BLOCK)
        out.append(_simpson_block(f, a[sl].ravel(), b[sl].ravel(), tol, max_depth, min_depth))
    return np.concatenate(out, axis=0)


def _simpson_block(f, a, b, tol, max_depth, min_depth):
    n = a.size
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = ((b - a) / 6.0)[:, None] * (fa + 4.0 * fm + fb)
    result = np.zeros((n, fa.shape[1]), dtype=complex)
    idx = np.arange(n)
    tols = np.full(n, float(tol))
    depth = 0
    while idx.size:
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = ((m - a) / 6.0)[:, None] * (fa + 4.0 * flm + fm)
        right = ((b - m) / 6.0)[:, None] * (fm + 4.0 * frm + fb)
        err = left + right - whole
        done = ((_vnorm(err) <= 15.0 * tols) & (depth >= min_depth)) | (depth >= max_depth) | (lm == a) | (rm == b)
        if done.any():
            np.add.at(result, idx[done], (left + right + err / 15.0)[done])
        keep = ~done
        if not keep.any():
            break
        a_k, m_k, b_k = a[keep], m[keep], b[keep]
        a = np.concatenate([a_k, m_k])
        b = np.concatenate([m_k, b_k])
        m = np.concatenate([lm[keep], rm[keep]])
        fa, fm, fb = (
            np.concatenate([fa[keep], fm[keep]]),
            np.concatenate([flm[keep], frm[keep]]),
            np.concatenate([fm[keep], fb[keep]]),
        )
        whole = np.concatenate([left[keep], right[keep]])
        tols = np.concatenate([tols[keep], tols[keep]]) * 0.5
        idx = np.concatenate([idx[keep], idx[keep]])
        depth += 1
    return result


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(fun, lo, hi, xtol=1e-10, max_iter=80):
    """Minimise a scalar function on ``[lo, hi]`` by golden-section search.

    Returns ``(x, fx)`` for the best point seen. Only a local minimum is
    guaranteed when ``fun`` is not unimodal.
    """
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    best = (c, fc) if fc <= fd else (d, fd)
    for _ in range(max_iter):
        if abs(b - a) <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
            if fc < best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
            if fd < best[1]:
                best = (d, fd)
    return best


def gauss_legendre(order):
    """Nodes and weights of the Gauss-Legendre rule on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w
