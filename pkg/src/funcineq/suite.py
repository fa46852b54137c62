"""Named check batteries reproducing the package's reference results.

Each battery is deterministic (fixed seeds), returns a ``Battery`` record with
a pass flag, its runtime against a budget, and the numbers behind the verdict.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .convex import (ConvexProfile, biconjugate_check, compose, conjugate_of_composition, identity,
                     legendre, linear_offset, phi1_scaled, quadratic)
from .functionals import (LogLipProfile, extract_one_sided_profile, log_lipschitz_constant,
                          moment_log_derivative_check)
from .infconv import ic_check, markov_chernoff_exponent
from .reverse_holder import (estimate_poincare_discrete, exp_nontight_constants, moment_ratios,
                             rh_verify, thm_1_1_constant, thm_Lb_bound, thm_main_constant,
                             thm_poincare_constant)
from .space import (MetricMeasureSpace, discretize_line, grid_coordinates, lipschitz_regularize,
                    random_space)
from .transport import kantorovich_dual_value, wasserstein


@dataclass
class Battery:
    number: int
    name: str
    passed: bool
    seconds: float
    budget: float
    details: dict = field(default_factory=dict)
    caveat: str = ""

    @property
    def within_budget(self) -> bool:
        return self.seconds < self.budget

    @property
    def ok(self) -> bool:
        return self.passed and self.within_budget

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        note = "" if self.within_budget else f" (over budget {self.budget:g}s)"
        return f"[{tag}] {self.number:2d} {self.name}: {self.seconds:.2f}s{note}"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "seconds": self.seconds, "budget": self.budget, "within_budget": self.within_budget,
                "details": _jsonable(self.details), "caveat": self.caveat}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _rel(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if not (math.isfinite(a) and math.isfinite(b)):
        return math.inf
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


CATALOG_PROFILES = {
    "identity": identity(),
    "quadratic(1)": quadratic(1.0),
    "phi1(1)": phi1_scaled(1.0),
    "linear_offset(1,2)": linear_offset(1.0, 2.0),
}


# --------------------------------------------------------------------------


def convex_calculus() -> tuple[bool, dict]:
    biconj = {name: biconjugate_check(prof, step=1e-4) for name, prof in CATALOG_PROFILES.items()}
    outer = {"identity": identity(), "quadratic(2)": quadratic(2.0), "phi1(0.5)": phi1_scaled(0.5),
             "linear_offset(0.7,1.5)": linear_offset(0.7, 1.5)}
    inner = {"identity": identity(), "quadratic(1)": quadratic(1.0), "phi1(2)": phi1_scaled(2.0)}
    lams = np.logspace(-2.0, 1.0, 20)
    worst, mismatches = 0.0, []
    for on, Phi in outer.items():
        for inn, phi in inner.items():
            direct = legendre(compose(Phi, phi), lams)
            for lam, d in zip(lams, direct):
                v = conjugate_of_composition(Phi, phi, float(lam))
                if math.isinf(v) or math.isinf(d):
                    if v != d:
                        mismatches.append((on, inn, float(lam), v, float(d)))
                    continue
                err = abs(v - d) / max(abs(v), abs(d), 1.0)
                worst = max(worst, err)
    ok = max(biconj.values()) <= 1e-6 and worst <= 1e-6 and not mismatches
    return ok, {"biconjugate_error": biconj, "composition_rel_error": worst,
                "finiteness_mismatches": mismatches}


def transport_exactness(n_spaces: int = 50, n_fields: int = 100, seed: int = 2024) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    worst_gap, worst_excess, worst_marg = 0.0, -math.inf, 0.0
    for k in range(n_spaces):
        n = int(rng.integers(4, 21))
        space = random_space(n, seed + k)
        phi = quadratic(1.0) if k % 2 else identity()
        c = np.asarray(phi(space.dist))
        nu = rng.dirichlet(np.ones(n))
        plan = wasserstein(space, nu, None, c)
        worst_gap = max(worst_gap, abs(plan.gap))
        worst_marg = max(worst_marg, plan.marginal_error)
        scale = rng.uniform(0.1, 5.0, size=n_fields)
        fields = rng.normal(size=(n_fields, n)) * scale[:, None]
        for f in fields:
            worst_excess = max(worst_excess, kantorovich_dual_value(space, nu, f, c) - plan.cost)
    ok = worst_gap <= 1e-8 and worst_excess <= 1e-9
    return ok, {"max_gap": worst_gap, "max_dual_excess": worst_excess, "max_marginal_error": worst_marg}


def gaussian_tightness(step: float = 0.0025, L: float = 1.0) -> tuple[bool, dict]:
    space = discretize_line("gaussian", 8.0, step)
    x = grid_coordinates(space)
    f = np.exp(L * x)
    rows, ok = [], True
    for p in (0.5, 1.0, 2.0):
        plus, minus = moment_ratios(space, f, p)
        oracle = math.exp(p * L * L / 2.0)
        C = thm_main_constant(quadratic(1.0), L, p)
        ver = rh_verify(space, f, p, C)
        e_or = _rel(plus, oracle)
        e_c = _rel(plus, C.value)
        ok &= e_or <= 1e-3 and e_c <= 1e-3 and _rel(minus, oracle) <= 1e-3 and ver.passed
        rows.append({"p": p, "ratio_plus": plus, "ratio_minus": minus, "oracle": oracle,
                     "thm_main": C.value, "rel_err_oracle": e_or, "rel_err_constant": e_c,
                     "verdict": ver.verdict})
    return ok, {"rows": rows, "n": space.n}


def exponential_line(step: float = 0.01, L: float = 0.25, lambda_1: float = 0.25) -> tuple[bool, dict]:
    space = discretize_line("two_sided_exponential", 40.0, step)
    x = grid_coordinates(space)
    f = np.exp(L * x)
    rows, ok = [], True
    for p in (0.25, 0.5, 1.0, 1.5, 1.9):
        plus, minus = moment_ratios(space, f, p)
        u = p * L
        oracle = (1.0 - u * u) ** (-1.0 / p)
        C = thm_poincare_constant(lambda_1, L, p)
        ver = rh_verify(space, f, p, C)
        margin = C.value - max(plus, minus)
        ok &= _rel(plus, oracle) <= 1e-3 and _rel(minus, oracle) <= 1e-3 and margin > 0 and ver.passed
        rows.append({"p": p, "ratio_plus": plus, "ratio_minus": minus, "oracle": oracle,
                     "constant": C.value, "margin": margin, "verdict": ver.verdict})
    return ok, {"rows": rows, "n": space.n}


def _chain_profiles(kind: int, diam: float, kappa: float, rng) -> tuple[ConvexProfile, ConvexProfile]:
    hoeff = 4.0 / diam ** 2
    if kind == 0:
        return identity(), quadratic(kappa * hoeff)
    if kind == 1:
        return identity(), phi1_scaled(kappa * hoeff)
    if kind == 2:
        return phi1_scaled(float(rng.uniform(0.5, 4.0))), quadratic(kappa * hoeff)
    return quadratic(float(rng.uniform(0.5, 4.0))), quadratic(kappa * hoeff)


def theorem_chain(n_instances: int = 100, seed: int = 7) -> tuple[bool, dict]:
    """Whenever the infimum-convolution inequality holds on the fields the
    argument uses, the measured moment ratios respect exp(Psi*(pL)/p)."""
    rng = np.random.default_rng(seed)
    counts = {"instances": 0, "ic_pass": 0, "verified": 0, "counterexamples": 0, "infinite_constant": 0}
    witnesses = []
    for k in range(n_instances):
        n = int(rng.integers(5, 13))
        space = random_space(n, 1000 + k)
        diam = float(np.max(space.dist))
        g = lipschitz_regularize(space, rng.normal(size=n), 1.0)
        f = np.exp(float(rng.uniform(0.3, 3.0)) * g)
        phi, Phi = _chain_profiles(k % 4, diam, float(rng.uniform(0.3, 3.0)), rng)
        p = float(rng.uniform(0.2, 2.5))
        L = log_lipschitz_constant(space, f)
        counts["instances"] += 1
        C = thm_main_constant(compose(Phi, phi), L, p)
        if not C.finite:
            counts["infinite_constant"] += 1
            continue
        _, lam_star = conjugate_of_composition(Phi, phi, p * L, return_argmin=True)
        lams = np.logspace(-2.0, 2.0, 9)
        lams = np.unique(np.append(lams[np.isfinite(legendre(Phi, lams))], lam_star))
        logf = np.log(f)
        passed = all(ic_check(space, phi, Phi, sgn * (p / lam) * logf, [lam], tol=1e-12).passed
                     for lam in lams for sgn in (1.0, -1.0))
        if not passed:
            continue
        counts["ic_pass"] += 1
        ver = rh_verify(space, f, p, C)
        if ver.passed:
            counts["verified"] += 1
        else:
            counts["counterexamples"] += 1
            witnesses.append({"instance": k, "p": p, "f": f.tolist(), "ratio_plus": ver.ratio_plus,
                              "ratio_minus": ver.ratio_minus, "constant": C.value})
    ok = counts["counterexamples"] == 0 and counts["ic_pass"] > 0
    return ok, dict(counts, witnesses=witnesses)


def clustered_jump_space(levels: int = 21, base: float = 1e-6) -> MetricMeasureSpace:
    """Points +-base*2^k on the line, Gaussian-weighted; the sign function has
    one-sided log-slope 2/(2 base) at the innermost pair."""
    r = base * 2.0 ** np.arange(levels)
    x = np.concatenate([-r[::-1], r])
    w = np.exp(-0.5 * x * x)
    w /= w.sum()
    return MetricMeasureSpace(tuple(f"{v:.6g}" for v in x), w, coords=x[:, None], metric="l1")


def averaged_bound(seed: int = 11) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    rows = []
    pairs = [(quadratic(2.0), identity()), (identity(), quadratic(3.0)),
             (phi1_scaled(2.0), identity()), (phi1_scaled(1.0), quadratic(2.0))]
    ok = True
    for k, (phi, Phi) in enumerate(pairs):
        space = random_space(25, 300 + k)
        f = np.exp(1.5 * lipschitz_regularize(space, rng.normal(size=25), 1.0))
        L = log_lipschitz_constant(space, f)
        p = 0.7
        prof = LogLipProfile(np.full(space.n, L), np.zeros(space.n))
        B = thm_Lb_bound(space, phi, Phi, f, prof, p).constant.value
        C = thm_main_constant(compose(Phi, phi), L, p).value
        err = _rel(B, C)
        ok &= err <= 0.01
        rows.append({"phi": repr(phi), "Phi": repr(Phi), "bound": B, "thm_main": C, "rel_err": err})
    jump = clustered_jump_space()
    fj = np.exp(np.sign(grid_coordinates(jump)))
    prof = extract_one_sided_profile(jump, fj)
    degenerate = thm_Lb_bound(jump, identity(), quadratic(1.0), fj, prof, 1.0).constant.value
    ok &= math.isinf(degenerate)
    gs = discretize_line("gaussian", 8.0, 0.01)
    fg = np.exp(0.5 * grid_coordinates(gs) ** 2)
    res = thm_Lb_bound(gs, quadratic(0.9), identity(), fg, extract_one_sided_profile(gs, fg), 0.5)
    ver = rh_verify(gs, fg, 0.5, res.constant)
    ok &= res.constant.finite and ver.passed
    return ok, {"constant_profile": rows, "jump_max_slope": float(prof.L.max()),
                "jump_bound": degenerate, "gaussian_square_bound": res.constant.value,
                "gaussian_square_ratio": ver.ratio_plus, "gaussian_square_verdict": ver.verdict}


def smoke_fields() -> list[tuple[str, MetricMeasureSpace, np.ndarray]]:
    rng = np.random.default_rng(5)
    two = MetricMeasureSpace(("a", "b"), np.array([0.5, 0.5]), dist_matrix=np.array([[0.0, 1.0], [1.0, 0.0]]))
    rs = random_space(30, 17)
    gs = discretize_line("gaussian", 6.0, 0.05)
    es = discretize_line("two_sided_exponential", 20.0, 0.05)
    return [
        ("two_point", two, np.array([1.0, 3.0])),
        ("constant", rs, np.full(rs.n, 2.5)),
        ("random_positive", rs, np.exp(rng.normal(size=rs.n))),
        ("gaussian_exp", gs, np.exp(grid_coordinates(gs))),
        ("gaussian_bump", gs, 1.0 + grid_coordinates(gs) ** 2),
        ("exponential_tilt", es, np.exp(0.2 * grid_coordinates(es))),
    ]


def derivative_identity(h: float = 1e-4) -> tuple[bool, dict]:
    worst, rows = 0.0, []
    for name, space, f in smoke_fields():
        for t in (-2.0, -0.5, 0.5, 1.0, 3.0):
            rep = moment_log_derivative_check(space, f, t, h=h)
            worst = max(worst, rep.error)
            rows.append((name, t, rep.error))
    return worst <= 1e-5, {"max_rel_error": worst, "checks": len(rows)}


def markov_chernoff() -> tuple[bool, dict]:
    profiles = dict(CATALOG_PROFILES, **{"quadratic(2.5)": quadratic(2.5), "phi1(3)": phi1_scaled(3.0),
                                         "linear_offset(0.5,0.8)": linear_offset(0.5, 0.8)})
    ts = np.round(np.arange(1, 51) * 0.1, 10)
    worst = {}
    for name, Phi in profiles.items():
        errs = [_rel(math.exp(markov_chernoff_exponent(Phi, float(t))[0]), math.exp(-float(Phi(t))))
                for t in ts]
        worst[name] = max(errs)
    return max(worst.values()) <= 1e-6, {"max_rel_error": worst}


def limits() -> tuple[bool, dict]:
    c_small = thm_main_constant(quadratic(1.0), 1.0, 1e-6).value
    t11 = [thm_1_1_constant(0.25, 1.0, 0.3, 0.3 + e).value for e in (1e-2, 1e-4, 1e-6, 1e-8, 0.0)]
    edge = 2.0 * math.sqrt(0.25) / 1.0
    near = thm_poincare_constant(0.25, 1.0, edge * (1 - 1e-7)).value
    nt = exp_nontight_constants(1.0, 1.0, 1.0, 0.5)
    ok = c_small <= 1 + 1e-4 and abs(t11[-1] - 1.0) == 0.0 and t11[-2] - 1 <= 1e-5 and near > 1e6
    ok &= all(a >= b for a, b in zip(t11, t11[1:]))
    return ok, {"thm_main_p_1e-6": c_small, "thm_1_1_shrinking": t11, "poincare_near_edge": near,
                "nontight_uniform_vs_conjugate": [nt.displayed.value, nt.from_conjugate.value]}


def discrete_diagnostics() -> tuple[bool, dict]:
    two = MetricMeasureSpace(("a", "b"), np.array([0.5, 0.5]),
                             dist_matrix=np.array([[0.0, 1.0], [1.0, 0.0]]), edges=((0, 1),))
    est2 = estimate_poincare_discrete(two)
    gs = discretize_line("gaussian", 8.0, 0.01).path_edges()
    estg = estimate_poincare_discrete(gs)
    ok = abs(est2.estimate - 4.0) <= 1e-12 and abs(estg.estimate - 1.0) <= 0.05
    return ok, {"two_point": est2.to_dict(), "gaussian_path": estg.to_dict()}


BATTERIES: dict[int, tuple[str, Callable[[], tuple[bool, dict]], float, str]] = {
    1: ("convex calculus", convex_calculus, 5.0, ""),
    2: ("transport exactness", transport_exactness, 10.0, ""),
    3: ("gaussian tightness", gaussian_tightness, 5.0, ""),
    4: ("exponential line", exponential_line, 5.0, ""),
    5: ("infimum-convolution to reverse-Hölder chain", theorem_chain, 30.0, ""),
    6: ("averaged bound reduction and degeneracy", averaged_bound, 10.0, ""),
    7: ("moment derivative identity", derivative_identity, 2.0, ""),
    8: ("Markov-Chernoff conjugacy", markov_chernoff, 2.0, ""),
    9: ("limits", limits, 1.0, ""),
    10: ("discrete diagnostics", discrete_diagnostics, 10.0,
         "discrete-gradient surrogate; diagnostic values, not certified constants"),
}

PRESETS = {
    "convex-calculus": (1, 8, 9),
    "random-finite": (2, 5, 7),
    "gaussian-line": (3, 6, 10),
    "exponential-line": (4,),
    "all": tuple(range(1, 11)),
}


def run_battery(number: int) -> Battery:
    name, fn, budget, caveat = BATTERIES[number]
    t0 = time.perf_counter()
    ok, details = fn()
    return Battery(number, name, bool(ok), time.perf_counter() - t0, budget, details, caveat)


def run_preset(preset: str) -> list[Battery]:
    if preset not in PRESETS:
        raise KeyError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    return [run_battery(k) for k in PRESETS[preset]]
