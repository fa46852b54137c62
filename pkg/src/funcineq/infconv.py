"""Infimum-convolution Q_c and the (phi, Phi) infimum-convolution inequality.

The inequality under test, for lambda > 0:

    log int exp(lambda Q_{c_phi} f) dmu  <=  lambda int f dmu + Phi*(lambda)

Both sides are kept in log units.  A lambda where Phi*(lambda) = +inf is a
*vacuous* pass and is reported as such, never folded into ordinary passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from ._numerics import INF, golden_max
from .convex import (ConvexProfile, compose, conjugate_of_composition, generalized_inverse,
                     identity, legendre)
from .space import MetricMeasureSpace, SpaceError, field_values, lipschitz_constant, min_plus
from .transport import as_cost, relative_entropy, wasserstein

IC_TOL = 1e-9


def inf_convolve(space: MetricMeasureSpace, f, cost: ConvexProfile | np.ndarray) -> np.ndarray:
    """(Q_c f)(x_i) = min_j f_j + c(x_i, x_j).

    ``cost`` is either an inner-role profile phi (c = phi o d, evaluated block-wise)
    or an explicit n x n cost matrix.
    """
    vals = field_values(f, space)
    if isinstance(cost, ConvexProfile):
        return min_plus(space, vals, lambda d: cost(d))
    c = as_cost(space, cost)
    return np.min(vals[None, :] + c, axis=1)


def default_lambda_grid(S: float, count: int = 40) -> tuple[np.ndarray, list[float]]:
    """``count`` log-spaced lambdas in (1e-3, min(0.99 S, 1e3)) plus, when S is
    finite, one sentinel past S where the right side is +inf."""
    hi = min(0.99 * S, 1e3) if math.isfinite(S) else 1e3
    grid = np.logspace(-3.0, math.log10(hi), count) if hi > 1e-3 else np.array([0.5 * hi])
    sentinel = [2.0 * S] if math.isfinite(S) and S > 0 else []
    return grid, sentinel


def _lambda_grid(Phi: ConvexProfile, lambda_grid) -> np.ndarray:
    if lambda_grid is None or (isinstance(lambda_grid, str) and lambda_grid == "auto"):
        grid, sentinel = default_lambda_grid(Phi.growth_rate)
        return np.concatenate([grid, sentinel])
    lam = np.atleast_1d(np.asarray(lambda_grid, dtype=float))
    if np.any(lam <= 0):
        raise SpaceError("lambda grid must be positive")
    return lam


@dataclass
class ICReport:
    """Per-lambda sides of the infimum-convolution inequality for one field."""

    field_id: str
    lambdas: np.ndarray
    log_left: np.ndarray
    right: np.ndarray
    status: list[str]
    tolerance: float = IC_TOL
    witness: list[float] = field(default_factory=list, repr=False)

    @property
    def margins(self) -> np.ndarray:
        return self.right - self.log_left

    @property
    def verdict(self) -> str:
        return "fail" if "fail" in self.status else "pass"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def vacuous(self) -> list[float]:
        return [float(l) for l, s in zip(self.lambdas, self.status) if s == "vacuous"]

    def to_dict(self) -> dict:
        return {"field_id": self.field_id, "verdict": self.verdict,
                "lambdas": self.lambdas.tolist(), "log_left": self.log_left.tolist(),
                "right": [r if math.isfinite(r) else "+inf" for r in self.right.tolist()],
                "status": self.status, "field": self.witness if self.verdict == "fail" else []}


def ic_check(space: MetricMeasureSpace, phi: ConvexProfile, Phi: ConvexProfile, f,
             lambda_grid=None, tol: float = IC_TOL, field_id: str = "f",
             qf: np.ndarray | None = None) -> ICReport:
    """Compare both sides of the (phi, Phi) infimum-convolution inequality on a lambda grid.

    ``qf`` may carry a precomputed Q_{c_phi} f.
    """
    vals = field_values(f, space)
    lam = _lambda_grid(Phi, lambda_grid)
    q = inf_convolve(space, vals, phi) if qf is None else qf
    mean = float(np.dot(space.weights, vals))
    log_left = np.array([logsumexp(l * q + space.log_weights) for l in lam])
    conj = legendre(Phi, lam)
    right = lam * mean + conj
    status = []
    for ll, r in zip(log_left, right):
        if r == INF:
            status.append("vacuous")
        else:
            status.append("pass" if ll <= r + tol * (1.0 + abs(r)) else "fail")
    return ICReport(field_id, lam, log_left, right, status, tol, vals.tolist())


# --------------------------------------------------------------------------
# concentration


def markov_chernoff_exponent(Phi: ConvexProfile, t: float) -> tuple[float, float]:
    """inf_{lambda > 0} Phi*(lambda) - lambda t, found numerically.

    Log grid on [1e-6, 1e6] plus the growth rate S as a candidate, then golden
    refinement in log lambda.  Returns ``(value, argmin)``.
    """
    lam = np.logspace(-6.0, 6.0, 721)
    S = Phi.growth_rate
    if 0 < S < INF:
        lam = np.unique(np.append(lam[lam < S], S))
    vals = legendre(Phi, lam) - lam * t
    k = int(np.argmin(vals))
    best, arg = float(vals[k]), float(lam[k])
    lo, hi = math.log(lam[max(k - 1, 0)]), math.log(lam[min(k + 1, lam.size - 1)])
    x, neg = golden_max(lambda z: -(legendre(Phi, np.exp(z)) - np.exp(z) * t),
                        np.array(lo), np.array(hi), tol=1e-15)
    if -float(neg) < best:
        best, arg = -float(neg), float(np.exp(x))
    return best, arg


@dataclass
class ConcentrationReport:
    t: np.ndarray
    tail: np.ndarray
    inf_bound: np.ndarray
    closed_bound: np.ndarray
    tolerance: float = 1e-6

    @property
    def tail_ok(self) -> bool:
        return bool(np.all(self.tail <= self.inf_bound * (1 + 1e-12)))

    @property
    def conjugacy_error(self) -> float:
        return float(np.max(np.abs(self.inf_bound - self.closed_bound) / self.closed_bound))

    @property
    def passed(self) -> bool:
        return self.tail_ok and self.conjugacy_error <= self.tolerance

    def to_dict(self) -> dict:
        return {"t": self.t.tolist(), "tail": self.tail.tolist(),
                "inf_bound": self.inf_bound.tolist(), "closed_bound": self.closed_bound.tolist(),
                "tail_ok": self.tail_ok, "conjugacy_error": self.conjugacy_error,
                "passed": self.passed}


def upper_tail(space: MetricMeasureSpace, f, t: float) -> float:
    """mu{f >= int f dmu + t}."""
    vals = field_values(f, space)
    mean = float(np.dot(space.weights, vals))
    return float(space.weights[vals >= mean + t - 1e-12 * (1 + abs(mean))].sum())


def ic_to_concentration(space: MetricMeasureSpace, Phi: ConvexProfile, f, t_grid,
                        lip_tol: float = 1e-9) -> ConcentrationReport:
    """Exact tails of a 1-Lipschitz f against inf_lambda exp(Phi*(lambda) - lambda t)
    and against exp(-Phi(t))."""
    vals = field_values(f, space)
    if lipschitz_constant(space, vals) > 1.0 + lip_tol:
        raise SpaceError("concentration check needs a 1-Lipschitz field")
    t = np.asarray(t_grid, dtype=float)
    tail = np.array([upper_tail(space, vals, ti) for ti in t])
    inf_b = np.array([math.exp(markov_chernoff_exponent(Phi, ti)[0]) for ti in t])
    closed = np.exp(-np.asarray(Phi(t), dtype=float))
    return ConcentrationReport(t, tail, inf_b, closed)


# --------------------------------------------------------------------------
# (phi, Phi) -> (Id, Phi o phi)


@dataclass
class ReductionReport:
    lambdas: np.ndarray
    direct_left: np.ndarray
    direct_right: np.ndarray
    alpha: np.ndarray
    alpha_right: np.ndarray
    alpha_ic_pass: np.ndarray
    chain_ok: np.ndarray
    tolerance: float = 1e-6

    @property
    def direct_pass(self) -> bool:
        return bool(np.all(self.direct_left <= self.direct_right + IC_TOL * (1 + np.abs(self.direct_right))))

    @property
    def alpha_pass(self) -> bool:
        return bool(np.all(self.alpha_ic_pass) and np.all(self.chain_ok)
                    and np.all(self.direct_left <= self.alpha_right + IC_TOL * (1 + np.abs(self.alpha_right))))

    @property
    def agreement(self) -> float:
        """Largest relative gap between the alpha-optimised and direct right sides."""
        fin = np.isfinite(self.direct_right)
        if not np.any(fin):
            return 0.0
        d, a = self.direct_right[fin], self.alpha_right[fin]
        return float(np.max(np.abs(a - d) / np.maximum(1.0, np.abs(d))))

    @property
    def passed(self) -> bool:
        return self.direct_pass and self.alpha_pass and self.agreement <= self.tolerance

    def to_dict(self) -> dict:
        return {"lambdas": self.lambdas.tolist(), "direct_pass": self.direct_pass,
                "alpha_pass": self.alpha_pass, "agreement": self.agreement,
                "passed": self.passed}


def ic_reduction_check(space: MetricMeasureSpace, phi: ConvexProfile, Phi: ConvexProfile, f,
                       lambda_grid=None) -> ReductionReport:
    """Check the (Id, Phi o phi) inequality for a 1-Lipschitz f directly, and
    again through the (phi, Phi) inequality applied to (lambda/alpha) f at the
    optimal alpha."""
    vals = field_values(f, space)
    if lipschitz_constant(space, vals) > 1.0 + 1e-9:
        raise SpaceError("reduction check needs a 1-Lipschitz field")
    Psi = compose(Phi, phi)
    lam = _lambda_grid(Psi, lambda_grid)
    mean = float(np.dot(space.weights, vals))
    qd = inf_convolve(space, vals, identity())
    direct_left = np.array([logsumexp(l * qd + space.log_weights) for l in lam])
    direct_right = lam * mean + legendre(Psi, lam)
    alphas, alpha_right, ic_ok, chain = [], [], [], []
    for l in lam:
        val, a = conjugate_of_composition(Phi, phi, float(l), return_argmin=True)
        alphas.append(a)
        alpha_right.append(l * mean + val)
        if not math.isfinite(val) or a <= 0:
            ic_ok.append(True)
            chain.append(True)
            continue
        g = (l / a) * vals
        qg = inf_convolve(space, g, phi)
        rep = ic_check(space, phi, Phi, g, [a], qf=qg)
        ic_ok.append(rep.passed)
        # pointwise: a * Q_{c_phi}(l f / a) >= l * Q_d f - a * phi*(l / a)
        slack = a * qg - (l * qd - a * legendre(phi, l / a))
        chain.append(bool(np.all(slack >= -1e-9 * (1 + np.abs(l * qd)))))
    return ReductionReport(lam, direct_left, direct_right, np.array(alphas),
                           np.array(alpha_right), np.array(ic_ok), np.array(chain))


# --------------------------------------------------------------------------
# instance-wise equivalence of the IC and TE formulations


@dataclass
class EquivalenceReport:
    chain_checks: int = 0
    chain_violations: int = 0
    tilt_pairs: int = 0
    te_pass_ic_fail: int = 0
    potential_pairs: int = 0
    ic_pass_te_bound_fail: int = 0
    ic_failures: int = 0
    te_failures: int = 0
    witnesses: list[dict] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.chain_violations == 0 and self.te_pass_ic_fail == 0 and self.ic_pass_te_bound_fail == 0

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["consistent"] = self.consistent
        return out


def _best_lambda_for_entropy(Phi: ConvexProfile, H: float) -> float:
    """argmin_lambda (H + Phi*(lambda)) / lambda, whose value is Phi^{-1}(H)."""
    lam = np.logspace(-6.0, 6.0, 721)
    S = Phi.growth_rate
    if 0 < S < INF:
        lam = np.unique(np.append(lam[lam < S], S))
    vals = (H + legendre(Phi, lam)) / lam
    k = int(np.argmin(vals))
    lo, hi = math.log(lam[max(k - 1, 0)]), math.log(lam[min(k + 1, lam.size - 1)])
    x, neg = golden_max(lambda z: -(H + legendre(Phi, np.exp(z))) / np.exp(z),
                        np.array(lo), np.array(hi), tol=1e-15)
    return float(np.exp(x)) if -float(neg) <= vals[k] else float(lam[k])


def prop_equivalence_smoke(space: MetricMeasureSpace, phi: ConvexProfile, Phi: ConvexProfile,
                           nu_family: Sequence, f_family: Sequence, lambda_grid=None,
                           tol: float = 1e-9) -> EquivalenceReport:
    """Cross-check the infimum-convolution and transport-entropy formulations.

    * weak duality: lambda (int Q f dnu - int f dmu) <= lambda W(nu, mu);
    * TE at the tilt nu ~ exp(lambda Q f) mu forces IC at (f, lambda);
    * IC for the optimal potential of nu, at the entropy-optimal lambda,
      forces W(nu, mu) <= (H + Phi*(lambda)) / lambda.
    """
    c = as_cost(space, phi)
    lam = _lambda_grid(Phi, lambda_grid)
    rep = EquivalenceReport()
    plans = [wasserstein(space, nu, None, c) for nu in nu_family]
    for fi, f in enumerate(f_family):
        vals = field_values(f, space)
        q = np.min(vals[None, :] + c, axis=1)
        mean = float(np.dot(space.weights, vals))
        for nu, plan in zip(nu_family, plans):
            dual = float(np.dot(nu, q)) - mean
            rep.chain_checks += 1
            if dual > plan.cost + tol:
                rep.chain_violations += 1
                rep.witnesses.append({"kind": "duality", "f": vals.tolist(), "nu": list(map(float, nu))})
        ic = ic_check(space, phi, Phi, vals, lam, qf=q)
        for l, st in zip(ic.lambdas, ic.status):
            if st == "vacuous":
                continue
            logw = l * q + space.log_weights
            tilt = np.exp(logw - logsumexp(logw))
            W = wasserstein(space, tilt, None, c).cost
            H = relative_entropy(tilt, space.weights)
            te_ok = W <= generalized_inverse(Phi, H) + tol
            rep.tilt_pairs += 1
            rep.te_failures += not te_ok
            rep.ic_failures += st == "fail"
            if te_ok and st == "fail":
                rep.te_pass_ic_fail += 1
                rep.witnesses.append({"kind": "tilt", "lambda": float(l), "f": vals.tolist()})
            elif st == "fail":
                rep.witnesses.append({"kind": "ic_fail_te_fail", "lambda": float(l),
                                      "f": vals.tolist(), "nu": tilt.tolist()})
    for nu, plan in zip(nu_family, plans):
        H = relative_entropy(nu, space.weights)
        l_star = _best_lambda_for_entropy(Phi, H)
        grid = np.unique(np.append(lam[np.isfinite(legendre(Phi, lam))], l_star))
        ic = ic_check(space, phi, Phi, plan.f, grid)
        te_ok = plan.cost <= generalized_inverse(Phi, H) + tol
        rep.potential_pairs += 1
        rep.te_failures += not te_ok
        if ic.passed:
            finite = np.isfinite(ic.right)
            bound = np.min((H + legendre(Phi, ic.lambdas[finite])) / ic.lambdas[finite])
            if plan.cost > bound + tol * (1 + abs(bound)):
                rep.ic_pass_te_bound_fail += 1
                rep.witnesses.append({"kind": "potential", "nu": list(map(float, nu))})
        else:
            rep.ic_failures += 1
            if not te_ok:
                rep.witnesses.append({"kind": "te_fail_ic_fail", "nu": list(map(float, nu)),
                                      "f": plan.f.tolist()})
    return rep
