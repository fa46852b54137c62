"""Moments, entropy, variance and log-Lipschitz profiles of fields on a space.

All L^p norms are accumulated in the log domain, so fields like exp(40 x)
on long exponential grids do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, xlogy

from .space import MetricMeasureSpace, SpaceError, field_values, lipschitz_constant


def log_lp_norm(space: MetricMeasureSpace, f, p: float) -> float:
    """log ||f||_{L^p(mu)} for any real p; p = 0 is the geometric mean."""
    logf = np.log(field_values(f, space, positive=True))
    m = float(np.dot(space.weights, logf))
    if p == 0:
        return m
    h = p * (logf - m)
    if np.max(np.abs(h)) < 1.0:
        # centred expm1 form: no cancellation as p -> 0
        return m + math.log1p(float(np.dot(space.weights, np.expm1(h)))) / p
    return m + float(logsumexp(h + space.log_weights)) / p


def lp_norm(space: MetricMeasureSpace, f, p: float) -> float:
    """||f||_{L^p(mu)}; +inf only if the log-domain value itself overflows."""
    val = log_lp_norm(space, f, p)
    return math.inf if val > 709.78 else math.exp(val)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a single numerical identity or inequality check."""

    name: str
    lhs: float
    rhs: float
    error: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def negative_moment_reflection_check(space: MetricMeasureSpace, f, p: float,
                                     tol: float = 1e-12) -> CheckReport:
    """||1/f||_p against ||f||_{-p}^{-1}, compared in relative terms."""
    if not p > 0:
        raise SpaceError("reflection check needs p > 0")
    vals = field_values(f, space, positive=True)
    lhs = log_lp_norm(space, 1.0 / vals, p)
    rhs = -log_lp_norm(space, vals, -p)
    err = abs(math.expm1(lhs - rhs))
    return CheckReport("negative_moment_reflection", math.exp(lhs), math.exp(rhs), err, tol, err <= tol)


def entropy(space: MetricMeasureSpace, g) -> float:
    """Ent_mu(g) = int g log(g / int g dmu) dmu for g >= 0, with 0 log 0 = 0."""
    vals = field_values(g, space)
    if np.any(vals < 0):
        raise SpaceError("entropy needs a non-negative field")
    mass = float(np.dot(space.weights, vals))
    if mass <= 0:
        raise SpaceError("entropy of the zero field is undefined")
    return float(np.dot(space.weights, xlogy(vals, vals / mass)))


def variance(space: MetricMeasureSpace, f) -> float:
    vals = field_values(f, space)
    m = float(np.dot(space.weights, vals))
    return float(np.dot(space.weights, (vals - m) ** 2))


def _tilted_kl(space: MetricMeasureSpace, logf: np.ndarray, t: float) -> float:
    """Ent(f^t) / int f^t, computed as KL(w | mu) with w proportional to mu f^t."""
    logw = t * logf + space.log_weights
    logw = logw - logsumexp(logw)
    w = np.exp(logw)
    return float(np.dot(w, logw - space.log_weights))


def moment_log_derivative_check(space: MetricMeasureSpace, f, t: float, h: float = 1e-4,
                                tol: float = 1e-5) -> CheckReport:
    """Central difference of t -> log||f||_t against Ent(f^t) / (t^2 int f^t).

    The relative error uses an absolute floor of 1e-6 on the derivative, so a
    constant field (derivative exactly 0) compares round-off against 1e-6.
    """
    if abs(t) <= h:
        raise SpaceError(f"t = {t} is within the step h = {h} of 0")
    vals = field_values(f, space, positive=True)
    fd = (log_lp_norm(space, vals, t + h) - log_lp_norm(space, vals, t - h)) / (2 * h)
    exact = _tilted_kl(space, np.log(vals), t) / (t * t)
    err = abs(fd - exact) / max(abs(exact), 1e-6)
    return CheckReport("moment_log_derivative", fd, exact, err, tol, err <= tol)


def log_lipschitz_constant(space: MetricMeasureSpace, f) -> float:
    return lipschitz_constant(space, np.log(field_values(f, space, positive=True)))


@dataclass(frozen=True)
class MomentCurve:
    exponents: np.ndarray
    log_norms: np.ndarray

    def is_monotone(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.log_norms) >= -tol * (1 + np.abs(self.log_norms[1:]))))

    def is_log_convex(self, tol: float = 1e-10) -> bool:
        """t * log||f||_t (the log-moment generating function) is convex in t."""
        t, y = self.exponents, self.exponents * self.log_norms
        slopes = np.diff(y) / np.diff(t)
        return bool(np.all(np.diff(slopes) >= -tol * (1 + np.abs(slopes[1:]))))


def moment_curve(space: MetricMeasureSpace, f, exponents) -> MomentCurve:
    ts = np.sort(np.asarray(exponents, dtype=float))
    vals = field_values(f, space, positive=True)
    return MomentCurve(ts, np.array([log_lp_norm(space, vals, t) for t in ts]))


@dataclass(frozen=True)
class LogLipProfile:
    """Per-point slope L(x) and defect b(x) such that
    log f(y) >= log f(x) - L(x) d(x, y) - b(x) for all x, y."""

    L: np.ndarray
    b: np.ndarray

    def violation(self, space: MetricMeasureSpace, f) -> float:
        """Largest amount by which the one-sided condition fails (<= 0 means it holds)."""
        g = np.log(field_values(f, space, positive=True))
        worst = -math.inf
        for rows, block in space.iter_blocks():
            with np.errstate(invalid="ignore"):
                slack = g[rows, None] - self.L[rows, None] * block - self.b[rows, None] - g[None, :]
            slack = np.where(np.isnan(slack), -math.inf, slack)
            worst = max(worst, float(slack.max()))
        return worst

    def holds(self, space: MetricMeasureSpace, f, tol: float = 1e-12) -> bool:
        g = np.log(field_values(f, space, positive=True))
        return self.violation(space, f) <= tol * (1.0 + float(np.abs(g).max()))


def extract_one_sided_profile(space: MetricMeasureSpace, f, mode: str = "b_zero",
                              L=None) -> LogLipProfile:
    """Smallest one-sided slope (``b_zero``) or smallest defect for a given
    slope (``given_L``).  Never symmetrised: only y-variation below x counts."""
    g = np.log(field_values(f, space, positive=True))
    n = space.n
    if mode == "b_zero":
        Lx = np.zeros(n)
        for rows, block in space.iter_blocks():
            drop = g[rows, None] - g[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(block > 0, drop / np.where(block > 0, block, 1.0), 0.0)
            Lx[rows] = np.maximum(ratio.max(axis=1), 0.0)
        return LogLipProfile(Lx, np.zeros(n))
    if mode == "given_L":
        if L is None:
            raise SpaceError("mode 'given_L' needs L")
        Lx = np.broadcast_to(np.asarray(L, dtype=float), (n,)).copy()
        if np.any(Lx < 0):
            raise SpaceError("L must be non-negative")
        bx = np.zeros(n)
        for rows, block in space.iter_blocks():
            excess = g[rows, None] - g[None, :] - Lx[rows, None] * block
            bx[rows] = np.maximum(excess.max(axis=1), 0.0)
        return LogLipProfile(Lx, bx)
    raise SpaceError(f"unknown mode {mode!r}")
