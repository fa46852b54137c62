"""Convex non-decreasing profiles on [0, inf) and their Legendre-Fenchel calculus.

Profiles come from a small closed-form catalog, from tabulated knots, or as
compositions ``Phi o phi``.  Conjugates are taken over t >= 0 only:

    conj(s) = sup_{t >= 0} s*t - profile(t),   s >= 0

and +inf is returned as ``math.inf`` whenever s exceeds the growth rate
S = lim profile(t)/t.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from ._numerics import INF, golden_max

CATALOG = ("identity", "quadratic", "phi1", "linear_offset")
KINDS = CATALOG + ("grid", "composite")

T_MAX = 100.0
KNOT_STEP = 1e-4
CONVEXITY_TOL = 1e-12
TIGHT_TOL = 1e-12


class ProfileError(ValueError):
    pass


def phi1(t):
    """t^2/2 on [0, 1] and t - 1/2 beyond: quadratic near 0, linear at infinity."""
    t = np.asarray(t, dtype=float)
    return np.where(t <= 1.0, 0.5 * t * t, t - 0.5)


@dataclass(frozen=True, eq=False)
class ConvexProfile:
    """A convex non-decreasing function on [0, inf).

    Use the constructors :func:`identity`, :func:`quadratic`,
    :func:`phi1_scaled`, :func:`linear_offset`, :func:`grid_profile` and
    :func:`compose` rather than instantiating directly.
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    knots: np.ndarray | None = None
    values: np.ndarray | None = None
    parts: tuple["ConvexProfile", "ConvexProfile"] | None = None
    t_max: float = T_MAX
    step: float = KNOT_STEP

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = self.kind
        if k == "identity":
            return t * 1.0
        if k == "quadratic":
            return 0.5 * self.params["lam"] * t * t
        if k == "phi1":
            return phi1(math.sqrt(self.params["lam"]) * t)
        if k == "linear_offset":
            return -self.params["M"] + self.params["lam"] * t
        if k == "grid":
            inside = np.interp(t, self.knots, self.values)
            tail = self.values[-1] + self.growth_rate * (t - self.knots[-1])
            return np.where(t > self.knots[-1], tail, inside)
        outer, inner = self.parts
        return outer(inner(t))

    @property
    def closed_form(self) -> bool:
        return self.kind in CATALOG

    @cached_property
    def value_at_zero(self) -> float:
        return float(self(0.0))

    @property
    def tight(self) -> bool:
        return abs(self.value_at_zero) <= TIGHT_TOL

    @cached_property
    def growth_rate(self) -> float:
        """S = lim_{t -> inf} profile(t) / t (may be inf)."""
        k = self.kind
        if k == "identity":
            return 1.0
        if k == "quadratic":
            return INF
        if k == "phi1":
            return math.sqrt(self.params["lam"])
        if k == "linear_offset":
            return float(self.params["lam"])
        if k == "grid":
            return float((self.values[-1] - self.values[-2]) / (self.knots[-1] - self.knots[-2]))
        s_out, s_in = (p.growth_rate for p in self.parts)
        if s_out == 0 or s_in == 0:
            return 0.0
        return s_out * s_in

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Knots, values and running-max segment slopes used by numeric conjugates."""
        if self.kind == "grid":
            t, v = self.knots, self.values
        else:
            t = np.linspace(0.0, self.t_max, int(round(self.t_max / self.step)) + 1)
            v = self(t)
        slopes = np.maximum.accumulate(np.diff(v) / np.diff(t))
        return t, v, slopes

    def is_phi_role(self) -> bool:
        t, v, _ = self._table
        return abs(self.value_at_zero) <= TIGHT_TOL and v.min() >= -TIGHT_TOL

    def check(self) -> None:
        """Assert convexity and monotonicity on the knot table."""
        t, v, _ = self._table
        dv = np.diff(v)
        scale = 1.0 + np.abs(v[1:])
        if np.any(dv < -CONVEXITY_TOL * scale):
            raise ProfileError(f"{self.kind} profile is decreasing somewhere")
        sl = dv / np.diff(t)
        d2 = np.diff(sl)
        if np.any(d2 < -CONVEXITY_TOL * (1.0 + np.abs(sl[1:]))):
            raise ProfileError(f"{self.kind} profile fails the convexity check")

    def __repr__(self) -> str:
        if self.kind == "composite":
            return f"compose({self.parts[0]!r}, {self.parts[1]!r})"
        if self.kind == "grid":
            return f"grid_profile(<{self.knots.size} knots>)"
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.kind}({args})"


# --------------------------------------------------------------------------
# constructors


def identity() -> ConvexProfile:
    return ConvexProfile("identity")


def quadratic(lam: float = 1.0) -> ConvexProfile:
    """t -> lam * t^2 / 2."""
    if not lam > 0:
        raise ProfileError("quadratic coefficient must be positive")
    return ConvexProfile("quadratic", {"lam": float(lam)})


def phi1_scaled(lam: float = 1.0) -> ConvexProfile:
    """t -> phi1(sqrt(lam) * t)."""
    if not lam > 0:
        raise ProfileError("phi1 scale must be positive")
    return ConvexProfile("phi1", {"lam": float(lam)})


def linear_offset(M: float, lam: float) -> ConvexProfile:
    """t -> -M + lam * t  (non-tight when M != 0)."""
    if not lam > 0:
        raise ProfileError("linear_offset slope must be positive")
    return ConvexProfile("linear_offset", {"M": float(M), "lam": float(lam)})


def grid_profile(knots, values) -> ConvexProfile:
    """Piecewise-linear profile through ``(knots, values)``, extended past the
    last knot with the final slope."""
    t = np.asarray(knots, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape or t.size < 2:
        raise ProfileError("grid profile needs matching knot/value vectors of length >= 2")
    if t[0] != 0 or np.any(np.diff(t) <= 0):
        raise ProfileError("knots must start at 0 and be strictly increasing")
    t.flags.writeable = False
    v.flags.writeable = False
    prof = ConvexProfile("grid", {}, t, v, t_max=float(t[-1]))
    prof.check()
    return prof


def compose(Phi: ConvexProfile, phi: ConvexProfile) -> ConvexProfile:
    """Psi = Phi o phi, where ``phi`` is non-negative with phi(0) = 0."""
    if not phi.is_phi_role():
        raise ProfileError(f"{phi!r} cannot play the inner role: need phi >= 0 and phi(0) = 0")
    if Phi.kind == "identity":
        return phi
    if phi.kind == "identity":
        return Phi
    return ConvexProfile("composite", parts=(Phi, phi))


# --------------------------------------------------------------------------
# conjugates


def legendre(profile: ConvexProfile, s):
    """sup_{t >= 0} s*t - profile(t) for s >= 0; vectorised over ``s``."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ProfileError("conjugate is only defined for s >= 0 here")
    out = _legendre(profile, np.atleast_1d(s_arr))
    return float(out[0]) if s_arr.ndim == 0 else out


def _legendre(profile: ConvexProfile, s: np.ndarray) -> np.ndarray:
    k, p = profile.kind, profile.params
    with np.errstate(over="ignore"):
        if k == "identity":
            return np.where(s <= 1.0, 0.0, INF)
        if k == "quadratic":
            return s * s / (2.0 * p["lam"])
        if k == "phi1":
            return np.where(s <= math.sqrt(p["lam"]), s * s / (2.0 * p["lam"]), INF)
        if k == "linear_offset":
            return np.where(s <= p["lam"], p["M"], INF)
    return _numeric_legendre(profile, s)


def _numeric_legendre(profile: ConvexProfile, s: np.ndarray) -> np.ndarray:
    t, v, slopes = profile._table
    S = profile.growth_rate
    out = np.full(s.shape, INF)
    finite = s <= S
    if not np.any(finite):
        return out
    sf = s[finite]
    # concave objective s*t - v(t); its knot maximiser sits where the slope crosses s
    k = np.searchsorted(slopes, sf, side="left")
    val = sf * t[k] - v[k]
    if profile.kind == "grid":
        out[finite] = val
        return out
    lo = t[np.maximum(k - 1, 0)]
    hi = t[np.minimum(k + 1, t.size - 1)]
    _, ref = golden_max(lambda z: sf * z - profile(z), lo, hi, tol=1e-13)
    res = np.maximum(val, ref)
    beyond = k >= t.size - 1
    for idx in np.flatnonzero(beyond):
        res[idx] = _far_sup(profile, float(sf[idx]), float(t[-1]))
    out[finite] = res
    return out


def _far_sup(profile: ConvexProfile, s: float, start: float) -> float:
    """Maximiser lies beyond the knot table: double the window until the
    profile's secant slope exceeds s, then refine."""
    lo, hi = start, 2.0 * start
    while hi < 1e12 and (profile(hi) - profile(lo)) / (hi - lo) < s:
        lo, hi = hi, 2.0 * hi
    _, val = golden_max(lambda z: s * z - profile(z), np.array(lo), np.array(hi), tol=1e-13)
    return float(val)


@dataclass(frozen=True)
class ConjugateProfile:
    """The conjugate of ``base`` as a callable extended-real function."""

    base: ConvexProfile

    def __call__(self, s):
        return legendre(self.base, s)

    @property
    def finite_everywhere(self) -> bool:
        return self.base.growth_rate == INF


def conjugate(profile: ConvexProfile) -> ConjugateProfile:
    return ConjugateProfile(profile)


def biconjugate_check(profile: ConvexProfile, t_max: float = T_MAX, step: float = KNOT_STEP,
                      s_knots: int = 20001) -> float:
    """Max relative error sup_t |conj(conj)(t) - profile(t)| / (1 + |profile(t)|)
    over the interior knots of ``[0, t_max]``."""
    t = np.linspace(0.0, t_max, int(round(t_max / step)) + 1)[1:-1]
    base = profile(t)
    # maximising slope for t <= t_max is at most the right derivative at t_max
    s_hi = float((profile(t_max + step) - profile(t_max)) / step)
    s_hi = min(profile.growth_rate, s_hi)
    s = np.linspace(0.0, s_hi, s_knots)
    cs = legendre(profile, s)
    cs_slopes = np.maximum.accumulate(np.diff(cs) / np.diff(s))
    k = np.searchsorted(cs_slopes, t, side="left")
    bi = t * s[k] - cs[k]
    if profile.closed_form:
        lo = s[np.maximum(k - 1, 0)]
        hi = s[np.minimum(k + 1, s.size - 1)]
        for start in range(0, t.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            tc = t[sl]
            # value error is quadratic in the slope error at the maximiser
            _, ref = golden_max(lambda z: tc * z - _legendre(profile, z), lo[sl], hi[sl], tol=1e-7)
            bi[sl] = np.maximum(bi[sl], ref)
    err = np.abs(bi - base) / (1.0 + np.abs(base))
    return float(err.max())


_CHUNK = 1 << 15
_ALPHA_GRID = np.logspace(-6.0, 6.0, 12 * 60 + 1)


def composition_objective(Phi: ConvexProfile, phi: ConvexProfile, lam: float, alpha):
    """Phi*(alpha) + alpha * phi*(lam / alpha)."""
    alpha = np.asarray(alpha, dtype=float)
    a = np.atleast_1d(alpha)
    with np.errstate(invalid="ignore"):
        val = _legendre(Phi, a) + a * _legendre(phi, lam / a)
    val = np.where(np.isnan(val), INF, val)
    return float(val[0]) if alpha.ndim == 0 else val


def conjugate_of_composition(Phi: ConvexProfile, phi: ConvexProfile, lam: float,
                             return_argmin: bool = False):
    """inf_{alpha > 0} Phi*(alpha) + alpha * phi*(lam / alpha).

    Log-spaced alpha grid on [1e-6, 1e6] (60 per decade) plus the kink
    candidates S(Phi) and lam / S(phi), then golden refinement in log alpha.
    """
    if lam < 0:
        raise ProfileError("lambda must be non-negative")
    if lam == 0:
        val = legendre(Phi, 0.0)
        return (val, 0.0) if return_argmin else val
    cands = [_ALPHA_GRID]
    for c in (Phi.growth_rate, lam / phi.growth_rate if phi.growth_rate > 0 else INF):
        if 0 < c < INF:
            cands.append(np.array([c]))
    alpha = np.unique(np.concatenate(cands))
    vals = composition_objective(Phi, phi, lam, alpha)
    k = int(np.argmin(vals))
    best, best_a = float(vals[k]), float(alpha[k])
    if math.isfinite(best):
        lo = math.log(alpha[max(k - 1, 0)])
        hi = math.log(alpha[min(k + 1, alpha.size - 1)])
        x, negf = golden_max(lambda z: -composition_objective(Phi, phi, lam, np.exp(z)),
                             np.array(lo), np.array(hi), tol=1e-14)
        if -float(negf) < best:
            best, best_a = -float(negf), float(np.exp(x))
    return (best, best_a) if return_argmin else best


# --------------------------------------------------------------------------
# generalised inverse


def generalized_inverse(profile: ConvexProfile, y):
    """sup{t >= 0 : profile(t) <= y}, with 0 when the set is empty."""
    y_arr = np.asarray(y, dtype=float)
    out = np.vectorize(lambda v: _ginv(profile, float(v)), otypes=[float])(y_arr)
    return float(out) if y_arr.ndim == 0 else out


def _ginv(profile: ConvexProfile, y: float) -> float:
    if math.isnan(y):
        raise ProfileError("cannot invert at NaN")
    if profile.value_at_zero > y:
        return 0.0
    if y == INF:
        return INF
    k, p = profile.kind, profile.params
    if k == "identity":
        return y
    if k == "quadratic":
        return math.sqrt(2.0 * y / p["lam"])
    if k == "phi1":
        u = math.sqrt(2.0 * y) if y <= 0.5 else y + 0.5
        return u / math.sqrt(p["lam"])
    if k == "linear_offset":
        return (y + p["M"]) / p["lam"]
    if k == "grid":
        t, v = profile.knots, profile.values
        if y >= v[-1]:
            S = profile.growth_rate
            return INF if S <= 0 else float(t[-1] + (y - v[-1]) / S)
        j = int(np.searchsorted(v, y, side="right")) - 1
        return float(t[j] + (y - v[j]) / (v[j + 1] - v[j]) * (t[j + 1] - t[j]))
    outer, inner = profile.parts
    return _ginv(inner, _ginv(outer, y))


# --------------------------------------------------------------------------
# serialisation

_PARAM_ALIASES = {"lambda": "lam", "lam": "lam", "M": "M", "m": "M"}


def profile_from_dict(raw: Mapping) -> ConvexProfile:
    try:
        kind = raw["kind"]
    except (KeyError, TypeError):
        raise ProfileError("profile needs a 'kind' field") from None
    params = {_PARAM_ALIASES.get(k, k): float(v) for k, v in dict(raw.get("params", {})).items()}
    if kind == "identity":
        return identity()
    if kind == "quadratic":
        return quadratic(params.get("lam", 1.0))
    if kind == "phi1":
        return phi1_scaled(params.get("lam", 1.0))
    if kind == "linear_offset":
        if "lam" not in params:
            raise ProfileError("linear_offset needs params.lambda")
        return linear_offset(params.get("M", 0.0), params["lam"])
    if kind == "grid":
        if "knots" not in raw or "values" not in raw:
            raise ProfileError("grid profile needs 'knots' and 'values'")
        return grid_profile(raw["knots"], raw["values"])
    if kind == "composite":
        return compose(profile_from_dict(raw["outer"]), profile_from_dict(raw["inner"]))
    raise ProfileError(f"unknown profile kind {kind!r}; expected one of {KINDS}")


def profile_to_dict(profile: ConvexProfile) -> dict:
    if profile.kind == "grid":
        return {"kind": "grid", "params": {}, "knots": profile.knots.tolist(),
                "values": profile.values.tolist()}
    if profile.kind == "composite":
        return {"kind": "composite", "outer": profile_to_dict(profile.parts[0]),
                "inner": profile_to_dict(profile.parts[1])}
    params = {("lambda" if k == "lam" else k): v for k, v in profile.params.items()}
    return {"kind": profile.kind, "params": params}


def parse_profile(text: str) -> ConvexProfile:
    """Parse ``kind[:a=1,b=2]`` (``quadratic:1`` is shorthand for lambda=1),
    or load a profile JSON file if ``text`` names one."""
    text = text.strip()
    if text.endswith(".json"):
        with open(text) as fh:
            return profile_from_dict(json.load(fh))
    kind, _, rest = text.partition(":")
    params: dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            try:
                if eq:
                    params[key.strip()] = float(val)
                else:
                    params["lambda"] = float(key)
            except ValueError:
                raise ProfileError(f"bad profile parameter {item!r} in {text!r}") from None
    return profile_from_dict({"kind": kind, "params": params})
