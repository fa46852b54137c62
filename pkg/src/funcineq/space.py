"""Finite metric-measure spaces, fields on them, and benchmark generators.

A space is a finite point set with a metric and strictly positive probability
weights.  Distances are served in row blocks so that 1-D discretisations with
thousands of points never materialise an ``n x n`` matrix unless asked to.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.spatial.distance import cdist

WEIGHT_TOL = 1e-12
MAX_PRODUCT_POINTS = 10_000
MAX_RANDOM_POINTS = 500
MAX_GRID_RATIO = 1e6
_BLOCK_ENTRIES = 1 << 22


class SpaceError(ValueError):
    """Raised when a space, field or measure violates its invariants."""


@dataclass(frozen=True, eq=False)
class MetricMeasureSpace:
    """The triple (points, d, mu).

    Exactly one distance source is set: an explicit ``dist_matrix``, point
    ``coords`` with an ``l1``/``l2`` metric, or ``factors`` for a lazily
    combined product space.
    """

    points: tuple[str, ...]
    weights: np.ndarray
    dist_matrix: np.ndarray | None = None
    coords: np.ndarray | None = None
    metric: str = "l2"
    edges: tuple[tuple[int, int], ...] | None = None
    factors: tuple["MetricMeasureSpace", "MetricMeasureSpace", str] | None = field(
        default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return self.n

    @cached_property
    def log_weights(self) -> np.ndarray:
        return np.log(self.weights)

    def dist_block(self, rows) -> np.ndarray:
        """Rows ``rows`` of the distance matrix, shape ``(len(rows), n)``."""
        if self.dist_matrix is not None:
            return self.dist_matrix[rows]
        if self.coords is not None:
            metric = "cityblock" if self.metric == "l1" else "euclidean"
            return cdist(self.coords[rows], self.coords, metric=metric)
        a, b, combine = self.factors
        idx = np.arange(self.n)[rows]
        ia, ib = np.divmod(idx, b.n)
        da = a.dist_block(ia)[:, np.repeat(np.arange(a.n), b.n)]
        db = b.dist_block(ib)[:, np.tile(np.arange(b.n), a.n)]
        return da + db if combine == "l1" else np.hypot(da, db)

    def iter_blocks(self, max_entries: int = _BLOCK_ENTRIES) -> Iterator[tuple[slice, np.ndarray]]:
        step = max(1, max_entries // max(self.n, 1))
        for start in range(0, self.n, step):
            rows = slice(start, min(start + step, self.n))
            yield rows, self.dist_block(rows)

    @cached_property
    def dist(self) -> np.ndarray:
        """Full distance matrix (materialised on first access)."""
        if self.dist_matrix is not None:
            return self.dist_matrix
        out = np.empty((self.n, self.n))
        for rows, block in self.iter_blocks():
            out[rows] = block
        out.flags.writeable = False
        return out

    def with_edges(self, edges: Sequence[tuple[int, int]]) -> "MetricMeasureSpace":
        return MetricMeasureSpace(self.points, self.weights, self.dist_matrix, self.coords,
                                  self.metric, _normalize_edges(edges, self.n), self.factors)

    def path_edges(self) -> "MetricMeasureSpace":
        """Same space with consecutive points joined (for line grids)."""
        return self.with_edges([(i, i + 1) for i in range(self.n - 1)])


@dataclass(frozen=True)
class ScalarField:
    """Values of a function on the points of a space.

    ``positive`` marks fields that play the role of ``f`` in the moment
    comparisons and must be strictly positive.
    """

    values: np.ndarray
    positive: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise SpaceError("field values must be a flat vector")
        if not np.all(np.isfinite(vals)):
            raise SpaceError("field values must be finite")
        if self.positive and vals.size and vals.min() <= 0:
            raise SpaceError(f"positive field has min value {vals.min()!r}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def check_on(self, space: MetricMeasureSpace) -> "ScalarField":
        if self.values.size != space.n:
            raise SpaceError(f"field has {self.values.size} values, space has {space.n} points")
        return self


@dataclass(frozen=True)
class ProbabilityMeasure:
    """A second probability vector nu over the point set of a host space."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise SpaceError("measure weights must be a finite non-negative vector")
        if abs(w.sum() - 1.0) > WEIGHT_TOL * max(1, w.size):
            raise SpaceError(f"measure weights sum to {w.sum()!r}, expected 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def field_values(f, space: MetricMeasureSpace | None = None, positive: bool = False) -> np.ndarray:
    """Coerce a ScalarField or array-like into a checked float vector."""
    vals = f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
    if vals.ndim != 1:
        raise SpaceError("field values must be a flat vector")
    if space is not None and vals.size != space.n:
        raise SpaceError(f"field has {vals.size} values, space has {space.n} points")
    if positive and (vals.size == 0 or vals.min() <= 0):
        raise SpaceError("field must be strictly positive")
    return vals


def measure_weights(nu, space: MetricMeasureSpace | None = None) -> np.ndarray:
    w = nu.weights if isinstance(nu, (ProbabilityMeasure, MetricMeasureSpace)) else \
        ProbabilityMeasure(np.asarray(nu, dtype=float)).weights
    if space is not None and w.size != space.n:
        raise SpaceError(f"measure has {w.size} atoms, space has {space.n} points")
    return w


# --------------------------------------------------------------------------
# validation


def _normalize_edges(edges, n: int) -> tuple[tuple[int, int], ...]:
    out = set()
    for e in edges:
        i, j = (int(v) for v in e)
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise SpaceError(f"bad edge {tuple(e)!r} for {n} points")
        out.add((min(i, j), max(i, j)))
    return tuple(sorted(out))


def _check_weights(w: np.ndarray, n: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise SpaceError(f"weights has shape {w.shape}, expected ({n},)")
    if not np.all(np.isfinite(w)):
        raise SpaceError("weights must be finite")
    if np.any(w <= 0):
        bad = int(np.argmin(w))
        raise SpaceError(f"zero or negative weight {w[bad]!r} at point index {bad}")
    if abs(w.sum() - 1.0) > WEIGHT_TOL * max(1.0, math.sqrt(n)):
        raise SpaceError(f"weights are not normalized: sum = {w.sum()!r}")
    return w


def _worst_triangle(d: np.ndarray) -> tuple[float, tuple[int, int, int]]:
    """Largest excess d[i,k] - d[i,j] - d[j,k] over all triples."""
    worst, arg = -math.inf, (0, 0, 0)
    for j in range(d.shape[0]):
        excess = d - d[:, j, None] - d[None, j, :]
        flat = int(np.argmax(excess))
        if excess.flat[flat] > worst:
            i, k = divmod(flat, d.shape[0])
            worst, arg = float(excess.flat[flat]), (i, j, k)
    return worst, arg


def check_distance_matrix(d: np.ndarray, points: Sequence[str]) -> None:
    n = len(points)
    if d.shape != (n, n):
        raise SpaceError(f"dist has shape {d.shape}, expected ({n}, {n})")
    if not np.all(np.isfinite(d)):
        raise SpaceError("dist entries must be finite")
    if np.any(np.diag(d) != 0):
        raise SpaceError("dist diagonal must be zero")
    asym = np.abs(d - d.T)
    if asym.max(initial=0.0) > 0:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise SpaceError(f"asymmetric dist: d[{points[i]},{points[j]}] != d[{points[j]},{points[i]}]")
    off = d[~np.eye(n, dtype=bool)]
    if off.size and off.min() <= 0:
        raise SpaceError("distinct points must be at positive distance")
    scale = max(1.0, float(d.max(initial=0.0)))
    excess, (i, j, k) = _worst_triangle(d)
    if excess > 1e-12 * scale:
        raise SpaceError(
            f"triangle inequality violated for ({points[i]}, {points[j]}, {points[k]}): "
            f"d={d[i, k]!r} > {d[i, j]!r} + {d[j, k]!r}")


def validate_space(raw: dict) -> MetricMeasureSpace:
    """Build a space from its JSON description, enforcing every invariant."""
    if not isinstance(raw, dict):
        raise SpaceError("space description must be a JSON object")
    try:
        weights = np.asarray(raw["weights"], dtype=float)
    except KeyError:
        raise SpaceError("missing field 'weights'") from None
    except (TypeError, ValueError):
        raise SpaceError("field 'weights' must be a list of numbers") from None
    n = weights.size
    points = tuple(str(p) for p in raw.get("points", range(n)))
    if len(points) != n:
        raise SpaceError(f"'points' has {len(points)} entries but 'weights' has {n}")
    if len(set(points)) != n:
        raise SpaceError("point identifiers must be unique")
    weights = _check_weights(weights, n)

    dist = coords = None
    metric = "l2"
    if "dist" in raw:
        try:
            dist = np.asarray(raw["dist"], dtype=float)
        except (TypeError, ValueError):
            raise SpaceError("field 'dist' must be a numeric matrix") from None
        check_distance_matrix(dist, points)
        dist.flags.writeable = False
    elif "coords" in raw:
        metric = raw.get("metric", "l2")
        if metric not in ("l1", "l2"):
            raise SpaceError(f"field 'metric' must be 'l1' or 'l2', got {metric!r}")
        try:
            coords = np.asarray(raw["coords"], dtype=float)
        except (TypeError, ValueError):
            raise SpaceError("field 'coords' must be a numeric matrix") from None
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.shape[0] != n or coords.ndim != 2:
            raise SpaceError(f"'coords' must have {n} rows")
        if n <= MAX_RANDOM_POINTS:
            d = cdist(coords, coords, metric="cityblock" if metric == "l1" else "euclidean")
            off = d[~np.eye(n, dtype=bool)]
            if off.size and off.min() <= 0:
                raise SpaceError("coordinates contain duplicate points")
        coords.flags.writeable = False
    else:
        raise SpaceError("space needs either 'dist' or 'coords' + 'metric'")
    weights.flags.writeable = False
    edges = _normalize_edges(raw["edges"], n) if raw.get("edges") is not None else None
    return MetricMeasureSpace(points, weights, dist, coords, metric, edges)


def space_to_dict(space: MetricMeasureSpace) -> dict:
    out = {"points": list(space.points), "weights": space.weights.tolist()}
    if space.coords is not None:
        out["coords"] = space.coords.tolist()
        out["metric"] = space.metric
    else:
        out["dist"] = space.dist.tolist()
    if space.edges is not None:
        out["edges"] = [list(e) for e in space.edges]
    return out


def load_space(path: str | Path) -> MetricMeasureSpace:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpaceError(f"{path}: not valid JSON ({exc})") from None
    return validate_space(raw)


def load_field(path: str | Path) -> ScalarField:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "values" not in raw:
        raise SpaceError(f"{path}: field file needs a 'values' list")
    return ScalarField(np.asarray(raw["values"], dtype=float), bool(raw.get("positive", False)))


def load_measure(path: str | Path) -> ProbabilityMeasure:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "weights" not in raw:
        raise SpaceError(f"{path}: measure file needs a 'weights' list")
    return ProbabilityMeasure(np.asarray(raw["weights"], dtype=float))


# --------------------------------------------------------------------------
# generators

_LOG_DENSITIES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gaussian": lambda x: -0.5 * x * x - 0.5 * math.log(2 * math.pi),
    "two_sided_exponential": lambda x: -np.abs(x) - math.log(2.0),
}


def log_density(name: str, x):
    return _LOG_DENSITIES[name](np.asarray(x, dtype=float))


def discretize_line(density: str, half_width: float, step: float) -> MetricMeasureSpace:
    """Uniform grid on [-half_width, half_width] weighted by a density.

    Mass outside the window is dropped and the weights renormalised, so
    there are no boundary atoms.
    """
    if density not in _LOG_DENSITIES:
        raise SpaceError(f"unknown density {density!r}; choose from {sorted(_LOG_DENSITIES)}")
    if not (half_width > 0 and step > 0):
        raise SpaceError("half_width and step must be positive")
    if half_width / step > MAX_GRID_RATIO:
        raise SpaceError(f"grid too large: half_width/step = {half_width / step:.3g} > 1e6")
    if step > 2 * half_width:
        raise SpaceError("step exceeds the window width: degenerate single-point grid")
    count = int(math.floor(2 * half_width / step + 1e-9)) + 1
    x = -half_width + step * np.arange(count)
    logw = log_density(density, x)
    w = np.exp(logw - logw.max())
    w /= w.sum()
    w.flags.writeable = False
    coords = x[:, None]
    coords.flags.writeable = False
    points = tuple(f"{v:.12g}" for v in x)
    return MetricMeasureSpace(points, w, coords=coords, metric="l1")


def grid_coordinates(space: MetricMeasureSpace) -> np.ndarray:
    """The 1-D coordinate of each point of a line space."""
    if space.coords is None or space.coords.shape[1] != 1:
        raise SpaceError("space is not a 1-D line grid")
    return space.coords[:, 0]


def product_space(a: MetricMeasureSpace, b: MetricMeasureSpace, combine: str = "l1") -> MetricMeasureSpace:
    if combine not in ("l1", "l2"):
        raise SpaceError(f"combine must be 'l1' or 'l2', got {combine!r}")
    if a.n * b.n > MAX_PRODUCT_POINTS:
        raise SpaceError(f"product has {a.n * b.n} points, limit is {MAX_PRODUCT_POINTS}")
    points = tuple(f"{p}|{q}" for p in a.points for q in b.points)
    w = np.outer(a.weights, b.weights).ravel()
    w /= w.sum()
    w.flags.writeable = False
    edges = None
    if a.edges is not None and b.edges is not None:
        edges = [(i * b.n + k, j * b.n + k) for i, j in a.edges for k in range(b.n)]
        edges += [(i * b.n + k, i * b.n + l) for i in range(a.n) for k, l in b.edges]
        edges = _normalize_edges(edges, a.n * b.n)
    return MetricMeasureSpace(points, w, edges=edges, factors=(a, b, combine))


def random_space(n: int, seed: int, dim: int = 2, box: float = 1.0) -> MetricMeasureSpace:
    """Points uniform in ``[0, box]^dim`` with Euclidean distances and
    symmetric Dirichlet(1) weights; deterministic per seed."""
    if not (2 <= n <= MAX_RANDOM_POINTS):
        raise SpaceError(f"n must be in [2, {MAX_RANDOM_POINTS}], got {n}")
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, box, size=(n, dim))
    w = rng.dirichlet(np.ones(n))
    w /= w.sum()
    coords.flags.writeable = False
    w.flags.writeable = False
    space = MetricMeasureSpace(tuple(f"p{i}" for i in range(n)), w, coords=coords, metric="l2")
    check_space(space)
    return space


def check_space(space: MetricMeasureSpace) -> None:
    """Assert the metric-measure invariants (full triangle check when n <= 500)."""
    _check_weights(space.weights, space.n)
    if space.n <= MAX_RANDOM_POINTS:
        check_distance_matrix(np.asarray(space.dist), space.points)


# --------------------------------------------------------------------------
# min-plus envelopes


def min_plus(space: MetricMeasureSpace, values: np.ndarray,
             cost: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """x_i -> min_j values[j] + cost(d(x_i, x_j)), evaluated block-wise."""
    values = np.asarray(values, dtype=float)
    out = np.empty(space.n)
    for rows, block in space.iter_blocks():
        out[rows] = np.min(values[None, :] + cost(block), axis=1)
    return out


def lipschitz_regularize(space: MetricMeasureSpace, g, L: float) -> np.ndarray:
    """Largest L-Lipschitz minorant of ``g``: min_y g(y) + L d(x, y)."""
    if not L > 0:
        raise SpaceError("L must be positive")
    vals = field_values(g, space)
    return np.minimum(min_plus(space, vals, lambda d: L * d), vals)


def lipschitz_constant(space: MetricMeasureSpace, g) -> float:
    """max over pairs i != j of |g_i - g_j| / d_ij."""
    vals = field_values(g, space)
    best = 0.0
    for rows, block in space.iter_blocks():
        diff = np.abs(vals[rows, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(block > 0, diff / np.where(block > 0, block, 1.0), 0.0)
        best = max(best, float(ratio.max(initial=0.0)))
    return best
