"""Reverse-Hölder constants for log-Lipschitz functions and their verification.

Every constant compares moments of a positive f,

    ||f||_p <= C ||f||_0   and   ||f||_0 <= C ||f||_{-p},

and is carried in log form, so a value of +inf means the comparison gives no
information.  The module also holds the discrete-gradient estimators used as
diagnostics for the spectral-gap and modified log-Sobolev constants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.optimize import minimize
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import eigsh
from scipy.special import logsumexp

from ._numerics import INF, adaptive_simpson, zoom_min
from .convex import ConvexProfile, legendre, linear_offset
from .functionals import LogLipProfile, entropy, log_lp_norm
from .space import MetricMeasureSpace, SpaceError, field_values

THEOREMS = ("herbst_ls", "thm_1_1", "thm_main", "thm_Lb", "thm_poincare", "exp_nontight")
EXACT_TOL = 1e-9
LINE_TOL = 1e-3
EDGE_WARN = 0.999


class WindowError(ValueError):
    """An exponent or slope outside the admissible range of a bound."""


@dataclass(frozen=True)
class RHConstant:
    """A reverse-Hölder constant exp(log_value) in [1, inf].

    ``sides`` is ``"both"`` for two-sided comparisons and ``"upper"`` when only
    ||f||_p <= C ||f||_0 is asserted.
    """

    theorem: str
    params: dict
    log_value: float
    sides: str = "both"

    @property
    def value(self) -> float:
        return INF if self.log_value > 709.78 else math.exp(self.log_value)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.log_value)

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        v = self.value
        return {"theorem": self.theorem, "params": self.params, "sides": self.sides,
                "value": v if math.isfinite(v) else "inf",
                "log_value": self.log_value if math.isfinite(self.log_value) else "inf"}


def _nonneg(x: float) -> float:
    # constants are exp(non-negative); clip round-off below zero
    return max(float(x), 0.0)


def herbst_ls_constant(lambda_LS: float, L: float, p: float, q: float = 0.0) -> RHConstant:
    """exp(L^2 (p - q) / (2 lambda_LS)), comparing ||f||_p with ||f||_q."""
    if not lambda_LS > 0:
        raise WindowError("lambda_LS must be positive")
    if not p > q:
        raise WindowError("need q < p")
    return RHConstant("herbst_ls", {"lambda_LS": lambda_LS, "L": L, "p": p, "q": q},
                      _nonneg(L * L * (p - q) / (2.0 * lambda_LS)))


def k_function(ell, lambda_1: float):
    """(1/(2 l1)) ((2 sqrt(l1) + ell) / (2 sqrt(l1) - ell))^2 exp(ell sqrt(5) / l1)."""
    r = 2.0 * math.sqrt(lambda_1)
    ell = np.asarray(ell, dtype=float)
    with np.errstate(divide="ignore"):
        out = ((r + ell) / (r - ell)) ** 2 * np.exp(ell * math.sqrt(5.0) / lambda_1) / (2.0 * lambda_1)
    out = np.where(ell >= r, INF, out)
    return float(out) if out.ndim == 0 else out


def thm_1_1_constant(lambda_1: float, L: float, q: float, p: float,
                     abs_tol: float = 1e-10) -> RHConstant:
    """exp(L^2 int_q^p K(|t| L) dt) for -2 sqrt(l1)/L < q <= p < 2 sqrt(l1)/L.

    The integral is split at 0 (the |t| kink) and done by adaptive Simpson.
    Exponents within 0.1% of the window edge are integrated as given, with a
    warning, since K blows up there.
    """
    if not (lambda_1 > 0 and L >= 0):
        raise WindowError("need lambda_1 > 0 and L >= 0")
    if q > p:
        raise WindowError("need q <= p")
    params = {"lambda_1": lambda_1, "L": L, "q": q, "p": p}
    if L == 0 or q == p:
        return RHConstant("thm_1_1", params, 0.0)
    edge = 2.0 * math.sqrt(lambda_1) / L
    if not (-edge < q and p < edge):
        raise WindowError(f"(q, p) = ({q}, {p}) outside the window (-{edge:.6g}, {edge:.6g})")
    if max(abs(q), abs(p)) > EDGE_WARN * edge:
        warnings.warn("exponent within 0.1% of the window edge; the constant is very large",
                      RuntimeWarning, stacklevel=2)

    def integrand(t: float) -> float:
        return float(k_function(abs(t) * L, lambda_1))

    pieces = [(q, p)] if q >= 0 or p <= 0 else [(q, 0.0), (0.0, p)]
    total = sum(adaptive_simpson(integrand, a, b, abs_tol=abs_tol) for a, b in pieces)
    return RHConstant("thm_1_1", params, _nonneg(L * L * total))


def thm_main_constant(Psi: ConvexProfile, L: float, p: float) -> RHConstant:
    """exp(Psi*(p L) / p) for the concentration profile Psi = Phi o phi."""
    if not (L >= 0 and p > 0):
        raise WindowError("need L >= 0 and p > 0")
    val = legendre(Psi, p * L)
    return RHConstant("thm_main", {"Psi": repr(Psi), "L": L, "p": p}, _nonneg(val / p))


def thm_poincare_constant(lambda_1: float, L: float, p: float) -> RHConstant:
    """((2 sqrt(l1) + p L) / (2 sqrt(l1) - p L))^(1/p) for 0 < p < 2 sqrt(l1) / L."""
    if not (lambda_1 > 0 and L >= 0 and p > 0):
        raise WindowError("need lambda_1 > 0, L >= 0, p > 0")
    u = p * L / (2.0 * math.sqrt(lambda_1))
    if u >= 1.0:
        raise WindowError(f"p L = {p * L:.6g} is not below 2 sqrt(lambda_1) = {2 * math.sqrt(lambda_1):.6g}")
    # log((1 + u) / (1 - u)) = 2 atanh(u), accurate as p -> 0
    return RHConstant("thm_poincare", {"lambda_1": lambda_1, "L": L, "p": p},
                      _nonneg(2.0 * math.atanh(u) / p))


@dataclass(frozen=True)
class NontightPair:
    """Constants for the non-tight exponential profile -M + lambda_exp t."""

    displayed: RHConstant
    from_conjugate: RHConstant

    @property
    def discrepancy(self) -> float:
        return self.from_conjugate.log_value - self.displayed.log_value

    def to_dict(self) -> dict:
        return {"displayed": self.displayed.to_dict(), "from_conjugate": self.from_conjugate.to_dict(),
                "log_discrepancy": self.discrepancy}


def exp_nontight_constants(M: float, lambda_exp: float, L: float, p: float) -> NontightPair:
    """exp(M), uniform in p, next to exp(Psi*(p L) / p) = exp(M / p).

    The two agree at p = 1; for p < 1 the conjugate form is the larger one.
    """
    if not (M >= 0 and lambda_exp > 0 and L > 0):
        raise WindowError("need M >= 0, lambda_exp > 0, L > 0")
    if not (0 < p <= lambda_exp / L):
        raise WindowError(f"p must lie in (0, lambda_exp / L] = (0, {lambda_exp / L:.6g}]")
    params = {"M": M, "lambda_exp": lambda_exp, "L": L, "p": p}
    shown = RHConstant("exp_nontight", dict(params, form="uniform"), float(M))
    conj = legendre(linear_offset(M, lambda_exp), p * L) / p
    return NontightPair(shown, RHConstant("exp_nontight", dict(params, form="conjugate"), _nonneg(conj)))


# --------------------------------------------------------------------------
# averaged (one-sided) log-Lipschitz bound

GAMMA_GRID = 1.0 + np.logspace(-4.0, 2.0, 50)
ALPHA_GRID = np.logspace(-4.0, 4.0, 80)


def _lb_objective(Phi, phi, L, b, logw, p, gm1, alpha):
    """log of the bound at (gamma, alpha) = (1 + gm1, alpha), vectorised over pairs."""
    gm1 = np.atleast_1d(np.asarray(gm1, dtype=float))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    gm1, alpha = np.broadcast_arrays(gm1, alpha)
    gamma = 1.0 + gm1
    lam = p * gamma / alpha
    conj = legendre(Phi, lam.ravel()).reshape(lam.shape)
    h = legendre(phi, np.multiply.outer(alpha, L)) + np.multiply.outer(alpha, b)
    with np.errstate(invalid="ignore", over="ignore"):
        expo = (lam / gm1)[..., None] * h
        lse = logsumexp(expo + logw, axis=-1)
        val = conj / (p * gamma) + gm1 / (p * gamma) * lse
    return np.where(np.isnan(val), INF, val)


@dataclass(frozen=True)
class LbResult:
    constant: RHConstant
    gamma: float
    alpha: float
    iterations: int


def thm_Lb_bound(space: MetricMeasureSpace, phi: ConvexProfile, Phi: ConvexProfile, f,
                 profile: LogLipProfile, p: float, max_iter: int = 200,
                 rel_stop: float = 1e-9, check_profile: bool = True) -> LbResult:
    """Upper bound B with ||f||_p <= B ||f||_0 for f satisfying the one-sided
    condition log f(y) >= log f(x) - L(x) d(x, y) - b(x).

    For gamma > 1 and alpha > 0, with lam = p gamma / alpha and
    h(x) = phi*(alpha L(x)) + alpha b(x),

        log B = Phi*(lam) / (p gamma)
                + (gamma - 1) / (p gamma) * log int exp(lam h / (gamma - 1)) dmu,

    minimised over a (gamma, alpha) log grid, then refined by coordinate
    descent with sampled zoom line searches in log coordinates.
    """
    if not p > 0:
        raise WindowError("the averaged bound needs p > 0")
    if check_profile and not profile.holds(space, f):
        raise SpaceError("profile (L, b) does not satisfy the one-sided condition for f")
    L = np.asarray(profile.L, dtype=float)
    b = np.asarray(profile.b, dtype=float)
    logw = space.log_weights
    obj = lambda g, a: _lb_objective(Phi, phi, L, b, logw, p, g, a)  # noqa: E731
    G, A = np.meshgrid(GAMMA_GRID - 1.0, ALPHA_GRID, indexing="ij")
    vals = np.vstack([obj(G[i], A[i]) for i in range(G.shape[0])])
    params = {"phi": repr(phi), "Phi": repr(Phi), "p": p}
    if not np.any(np.isfinite(vals)):
        return LbResult(RHConstant("thm_Lb", params, INF, "upper"), math.nan, math.nan, 0)
    i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
    x = np.array([math.log(G[i, j]), math.log(A[i, j])])
    best = float(vals[i, j])
    steps = np.array([np.diff(np.log(GAMMA_GRID - 1.0))[0], np.diff(np.log(ALPHA_GRID))[0]])
    it = 0
    for it in range(1, max_iter + 1):
        prev = best
        for k in range(2):
            def line(z, k=k):
                y = np.repeat(x[None, :], np.size(z), axis=0)
                y[:, k] = np.ravel(z)
                return obj(np.exp(y[:, 0]), np.exp(y[:, 1]))
            z, val = zoom_min(line, x[k] - steps[k], x[k] + steps[k])
            if val < best:
                best, x[k] = val, z
        if abs(prev - best) <= rel_stop * max(1.0, abs(best)):
            break
    const = RHConstant("thm_Lb", dict(params, gamma=1.0 + math.exp(x[0]), alpha=math.exp(x[1])),
                       _nonneg(best), "upper")
    return LbResult(const, 1.0 + math.exp(x[0]), math.exp(x[1]), it)


# --------------------------------------------------------------------------
# verification


def is_line_grid(space: MetricMeasureSpace) -> bool:
    """True for an equally spaced 1-D grid (a discretised density on the line)."""
    if space.coords is None or space.coords.shape[1] != 1 or space.n < 3:
        return False
    gaps = np.diff(space.coords[:, 0])
    return bool(np.all(gaps > 0) and np.ptp(gaps) <= 1e-9 * gaps.mean())


@dataclass(frozen=True)
class RHVerification:
    """Measured moment ratios against a constant.

    ``ratio_plus`` = ||f||_p / ||f||_0 and ``ratio_minus`` = ||f||_0 / ||f||_{-p};
    the verdict passes iff each checked ratio is at most C (1 + tolerance).
    """

    field_id: str
    p: float
    ratio_plus: float
    ratio_minus: float
    constant: float
    tolerance: float
    sides: str = "both"
    theorem: str = ""

    @property
    def worst_ratio(self) -> float:
        return self.ratio_plus if self.sides == "upper" else max(self.ratio_plus, self.ratio_minus)

    @property
    def witness_side(self) -> str:
        return "plus" if self.sides == "upper" or self.ratio_plus >= self.ratio_minus else "minus"

    @property
    def margin(self) -> float:
        """C - worst ratio (negative means a violation before tolerance)."""
        return self.constant - self.worst_ratio

    @property
    def verdict(self) -> str:
        return "pass" if self.worst_ratio <= self.constant * (1.0 + self.tolerance) else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        c = self.constant if math.isfinite(self.constant) else "inf"
        m = self.margin if math.isfinite(self.margin) else "inf"
        return {"field_id": self.field_id, "p": self.p, "ratio_plus": self.ratio_plus,
                "ratio_minus": self.ratio_minus, "constant": c, "margin": m,
                "witness_side": self.witness_side, "verdict": self.verdict,
                "theorem": self.theorem, "tolerance": self.tolerance}


def moment_ratios(space: MetricMeasureSpace, f, p: float) -> tuple[float, float]:
    """(||f||_p / ||f||_0, ||f||_0 / ||f||_{-p}), evaluated in log form."""
    vals = field_values(f, space, positive=True)
    l0 = log_lp_norm(space, vals, 0.0)
    up = log_lp_norm(space, vals, p) - l0
    down = l0 - log_lp_norm(space, vals, -p)
    return math.exp(min(up, 709.78)), math.exp(min(down, 709.78))


def rh_verify(space: MetricMeasureSpace, f, p: float, constant: RHConstant | float,
              tol: float | None = None, field_id: str = "f") -> RHVerification:
    """Check ||f||_p <= C ||f||_0 (and ||f||_0 <= C ||f||_{-p} for two-sided C).

    The default tolerance is 1e-9 relative, or 1e-3 on discretised line grids.
    """
    if not p > 0:
        raise WindowError("p must be positive")
    if isinstance(constant, RHConstant):
        C, sides, tag = constant.value, constant.sides, constant.theorem
    else:
        C, sides, tag = float(constant), "both", ""
    if tol is None:
        tol = LINE_TOL if is_line_grid(space) else EXACT_TOL
    plus, minus = moment_ratios(space, f, p)
    return RHVerification(field_id, float(p), plus, minus, C, tol, sides, tag)


def rh_verify_grid(space: MetricMeasureSpace, f, p_grid: Sequence[float], constant_fn,
                   tol: float | None = None, field_id: str = "f") -> tuple[list[RHVerification], float]:
    """rh_verify over a p grid; ``constant_fn(p)`` supplies the constant.

    Returns the records and the exponent with the smallest relative margin.
    """
    recs = [rh_verify(space, f, p, constant_fn(p), tol, field_id) for p in p_grid]
    rel = [(r.constant - r.worst_ratio) / r.constant if math.isfinite(r.constant) else 1.0 for r in recs]
    return recs, float(p_grid[int(np.argmin(rel))]) if recs else math.nan


# --------------------------------------------------------------------------
# discrete-gradient diagnostics


def _edge_arrays(space: MetricMeasureSpace):
    if space.edges is None or len(space.edges) == 0:
        raise SpaceError("space has no edges")
    e = np.asarray(space.edges, dtype=int)
    i, j = e[:, 0], e[:, 1]
    d = np.array([space.dist_block(slice(a, a + 1))[0, c] for a, c in zip(i, j)]) \
        if space.n > 2000 else np.asarray(space.dist)[i, j]
    return i, j, d


def discrete_gradient(space: MetricMeasureSpace, g) -> np.ndarray:
    """|grad g|(x_i) = max over edge-neighbours j of |g_j - g_i| / d_ij."""
    vals = field_values(g, space)
    i, j, d = _edge_arrays(space)
    slope = np.abs(vals[j] - vals[i]) / d
    out = np.zeros(space.n)
    np.maximum.at(out, i, slope)
    np.maximum.at(out, j, slope)
    return out


def _max_rayleigh(space, f, i, j, d) -> float:
    w = space.weights
    m = float(np.dot(w, f))
    var = float(np.dot(w, (f - m) ** 2))
    if var <= 0:
        return INF
    slope2 = ((f[j] - f[i]) / d) ** 2
    g2 = np.zeros(space.n)
    np.maximum.at(g2, i, slope2)
    np.maximum.at(g2, j, slope2)
    return float(np.dot(w, g2)) / var


def _second_eigen(A, Mdiag: np.ndarray):
    """Second-smallest generalised eigenpair of A v = lam diag(M) v."""
    n = Mdiag.size
    if n <= 400:
        vals, vecs = eigh(A.toarray(), np.diag(Mdiag))
        return float(vals[1]), vecs[:, 1]
    Mmat = sparse.diags(Mdiag)
    shift = -1e-3 * float(A.diagonal().max() / Mdiag.max())
    vals, vecs = eigsh(A.tocsc(), k=2, M=Mmat.tocsc(), sigma=shift, which="LM")
    order = np.argsort(vals)
    return float(vals[order[1]]), vecs[:, order[1]]


def _connected(n: int, i: np.ndarray, j: np.ndarray) -> bool:
    g = sparse.coo_matrix((np.ones(i.size), (i, j)), shape=(n, n))
    return connected_components(g, directed=False)[0] == 1


def _laplacian(n: int, i, j, weights):
    W = sparse.coo_matrix((weights, (i, j)), shape=(n, n))
    W = (W + W.T).tocsr()
    return (sparse.diags(np.asarray(W.sum(axis=1)).ravel()) - W).tocsr()


def _smooth_quotient(f, w, src, dst, d2, n, k):
    """sum_i w_i M_i / Var(f) with M_i the l^k mean-free norm of the squared
    neighbour slopes (>= their max), and its gradient in f."""
    diff = f[dst] - f[src]
    s = diff * diff / d2
    with np.errstate(divide="ignore"):
        ls = k * np.log(s)
    top = np.full(n, -np.inf)
    np.maximum.at(top, src, ls)
    top_safe = np.where(np.isfinite(top), top, 0.0)
    e = np.exp(ls - top_safe[src])
    tot = np.bincount(src, e, minlength=n)
    with np.errstate(divide="ignore"):
        M = np.where(tot > 0, np.exp((np.log(np.where(tot > 0, tot, 1.0)) + top_safe) / k), 0.0)
    pi = np.where(tot[src] > 0, e / np.where(tot[src] > 0, tot[src], 1.0), 0.0)
    m = float(np.dot(w, f))
    var = float(np.dot(w, (f - m) ** 2))
    energy = float(np.dot(w, M))
    # dM_i / ds_ij = M_i pi_ij / s_ij and ds_ij / df_j = 2 diff / d2
    with np.errstate(divide="ignore", invalid="ignore"):
        ds = np.where(s > 0, w[src] * M[src] * pi / s, 0.0) * 2.0 * diff / d2
    g_energy = np.bincount(dst, ds, minlength=n) - np.bincount(src, ds, minlength=n)
    g_var = 2.0 * w * (f - m)
    return energy / var, (g_energy - (energy / var) * g_var) / var


@dataclass(frozen=True)
class PoincareEstimate:
    """Discrete spectral-gap surrogate (diagnostic).

    ``relaxed``: generalised eigenvalue with the neighbour maximum replaced by
    the root-mean-square; a lower bound for the max-form minimum.
    ``max_form``: max-form quotient at the relaxed eigenvector.
    ``estimate``: best max-form quotient after polishing (an upper bound).
    """

    relaxed: float
    max_form: float
    estimate: float
    eigenvector: np.ndarray = field(repr=False)
    caveat: str = ("discrete-gradient surrogate: the continuum gradient vanishes on finite "
                   "spaces, so this value is a diagnostic, not a certified constant")

    def to_dict(self) -> dict:
        return {"relaxed": self.relaxed, "max_form": self.max_form, "estimate": self.estimate,
                "caveat": self.caveat}


def estimate_poincare_discrete(space: MetricMeasureSpace, polish_iter: int = 10) -> PoincareEstimate:
    """min over non-constant f of sum mu_i |grad f|^2(x_i) / Var(f) (approximately)."""
    i, j, d = _edge_arrays(space)
    n = space.n
    w = np.asarray(space.weights)
    if not _connected(n, i, j):
        warnings.warn("edge graph is disconnected; spectral gap is 0", RuntimeWarning, stacklevel=2)
        return PoincareEstimate(0.0, 0.0, 0.0, np.zeros(n))
    deg = np.bincount(np.concatenate([i, j]), minlength=n).astype(float)
    base = 1.0 / d ** 2
    # RMS over neighbours: each endpoint spreads its mass over its degree
    A = _laplacian(n, i, j, (w[i] / deg[i] + w[j] / deg[j]) * base)
    relaxed, v = _second_eigen(A, w)
    r0 = _max_rayleigh(space, v, i, j, d)
    best, best_v = r0, v
    # polish: move neighbour weights toward each vertex's steepest edge
    theta_i = 1.0 / deg[i]
    theta_j = 1.0 / deg[j]
    cur = v
    for _ in range(polish_iter):
        slope2 = ((cur[j] - cur[i]) / d) ** 2
        top = np.zeros(n)
        np.maximum.at(top, i, slope2)
        np.maximum.at(top, j, slope2)
        act_i = (slope2 >= top[i] * (1 - 1e-12)).astype(float)
        act_j = (slope2 >= top[j] * (1 - 1e-12)).astype(float)
        cnt = np.bincount(np.concatenate([i, j]), np.concatenate([act_i, act_j]), minlength=n)
        theta_i = 0.5 * theta_i + 0.5 * act_i / np.maximum(cnt[i], 1.0)
        theta_j = 0.5 * theta_j + 0.5 * act_j / np.maximum(cnt[j], 1.0)
        A = _laplacian(n, i, j, (w[i] * theta_i + w[j] * theta_j) * base)
        _, cur = _second_eigen(A, w)
        r = _max_rayleigh(space, cur, i, j, d)
        if r < best:
            best, best_v = r, cur
    # local descent on a smoothed max-form, sharpened in stages
    src, dst = np.concatenate([i, j]), np.concatenate([j, i])
    d2 = np.concatenate([d, d]) ** 2
    for k in (4.0, 16.0, 64.0):
        res = minimize(_smooth_quotient, best_v, args=(w, src, dst, d2, n, k), jac=True,
                       method="L-BFGS-B", options={"maxiter": 300})
        r = _max_rayleigh(space, res.x, i, j, d)
        if r < best:
            best, best_v = r, res.x
    return PoincareEstimate(relaxed, r0, best, best_v)


@dataclass(frozen=True)
class ModifiedLSReport:
    ell: float
    K: float
    entropy: float
    energy: float
    ratio: float
    caveat: str = "diagnostic only: the chain rule fails for discrete gradients"

    def to_dict(self) -> dict:
        return {k: (v if not (isinstance(v, float) and math.isnan(v)) else "0/0")
                for k, v in self.__dict__.items()}


def modified_ls_diagnostic(space: MetricMeasureSpace, g, lambda_1: float,
                           K_value: float | None = None) -> ModifiedLSReport:
    """Ent(e^g) against K(ell) int |grad g|^2 e^g dmu with the discrete gradient.

    ``ell`` is the largest discrete slope of g and must be below 2 sqrt(lambda_1).
    The ratio is NaN when both sides vanish.
    """
    vals = field_values(g, space)
    grad = discrete_gradient(space, vals)
    ell = float(grad.max())
    if ell >= 2.0 * math.sqrt(lambda_1):
        raise WindowError(f"slope {ell:.6g} is not below 2 sqrt(lambda_1) = {2 * math.sqrt(lambda_1):.6g}")
    K = float(k_function(ell, lambda_1)) if K_value is None else float(K_value)
    eg = np.exp(vals - vals.max())
    ent = entropy(space, eg) * math.exp(vals.max())
    energy = K * float(np.dot(space.weights, grad ** 2 * eg)) * math.exp(vals.max())
    if energy == 0.0:
        ratio = math.nan if abs(ent) <= 1e-300 else INF
    else:
        ratio = ent / energy
    return ModifiedLSReport(ell, K, ent, energy, ratio)

