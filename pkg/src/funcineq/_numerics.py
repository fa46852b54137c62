"""Small numerical kernels shared across modules."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.special import logsumexp

INF = math.inf
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(fun: Callable[[np.ndarray], np.ndarray], lo, hi, tol: float = 1e-12,
               max_iter: int = 200):
    """Vectorised golden-section search for the maximum of a unimodal function.

    ``fun`` is evaluated elementwise on arrays shaped like ``lo``/``hi``.
    Returns ``(argmax, maxval)``; the endpoints are included as candidates so a
    maximum sitting on the boundary of the bracket is not lost.
    """
    a = np.array(lo, dtype=float, copy=True)
    b = np.array(hi, dtype=float, copy=True)

    def f(z):
        v = np.asarray(fun(z), dtype=float)
        return np.where(np.isnan(v), -INF, v)

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    width = float(np.max(b - a, initial=0.0))
    target = tol * (1.0 + float(np.max(np.abs(a), initial=0.0)) + float(np.max(np.abs(b), initial=0.0)))
    n_iter = 0 if width <= target else min(max_iter, int(math.ceil(math.log(target / width) / math.log(_GOLDEN))))
    for _ in range(n_iter):
        left = fc >= fd
        # left wins: keep [a, d], old c becomes the new d; else keep [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        probe = np.where(left, b - _GOLDEN * (b - a), a + _GOLDEN * (b - a))
        fp = f(probe)
        c, d = np.where(left, probe, d), np.where(left, c, probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
    cand_x = np.stack([np.asarray(a), c, d, np.asarray(b)])
    cand_f = np.stack([f(a), fc, fd, f(b)])
    k = np.argmax(cand_f, axis=0)
    x = np.take_along_axis(cand_x, k[None, ...], axis=0)[0]
    best = np.take_along_axis(cand_f, k[None, ...], axis=0)[0]
    return x, best


def golden_min_scalar(fun: Callable[[float], float], lo: float, hi: float,
                      tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Scalar golden-section minimiser on ``[lo, hi]`` returning ``(x, f(x))``."""
    x, f = golden_max(lambda z: -np.vectorize(fun, otypes=[float])(z),
                      np.array(lo), np.array(hi), tol=tol, max_iter=max_iter)
    return float(x), -float(f)


def zoom_min(fun: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
             samples: int = 33, rounds: int = 10) -> tuple[float, float]:
    """Minimise a quasi-convex scalar function by repeated dense sampling.

    Each round evaluates ``samples`` points in one vectorised call and zooms
    onto the neighbours of the best one.  Unlike golden section this is not
    misled by +inf plateaus (infeasible regions) next to a boundary minimum.
    """
    best_x, best_f = math.nan, INF
    for _ in range(rounds):
        z = np.linspace(lo, hi, samples)
        v = np.asarray(fun(z), dtype=float)
        v = np.where(np.isnan(v), INF, v)
        k = int(np.argmin(v))
        if v[k] < best_f:
            best_x, best_f = float(z[k]), float(v[k])
        if not math.isfinite(v[k]):
            break
        lo, hi = z[max(k - 1, 0)], z[min(k + 1, samples - 1)]
    return best_x, best_f


def log_mean_exp(values: np.ndarray, log_weights: np.ndarray) -> float:
    """log(sum_i w_i exp(v_i)) with log-weights, tolerant of -inf/+inf entries."""
    values = np.asarray(values, dtype=float)
    if np.any(values == INF):
        return INF
    return float(logsumexp(values + log_weights))


def adaptive_simpson(fun: Callable[[float], float], a: float, b: float,
                     abs_tol: float = 1e-10, rel_tol: float = 1e-13,
                     max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature with Richardson correction.

    The error target is max(abs_tol, rel_tol * |coarse estimate|), so huge
    integrands near a blow-up stop at a relative accuracy instead of chasing
    an absolute one below machine precision.  Iterative (explicit stack) so
    deep refinement does not hit the interpreter recursion limit.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    fa, fb = fun(a), fun(b)
    m = 0.5 * (a + b)
    fm = fun(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, max(abs_tol, rel_tol * abs(whole)), 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = fun(lm), fun(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if depth >= max_depth or abs(delta) <= 15.0 * tol:
            total += left + right + delta / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * tol, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth + 1))
    return sign * total
