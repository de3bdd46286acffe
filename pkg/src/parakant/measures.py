"""Finite metric spaces, discrete probability measures and measure-level operations."""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from functools import cached_property

import numpy as np

from . import _numeric as num
from ._numeric import FLOAT, RATIONAL


class MeasureError(ValueError):
    """Invalid measure, space or incompatible operands."""


class FiniteMetricSpace:
    """Finitely many labeled points with a pairwise distance matrix.

    Give either ``points`` (coordinates in R^d, Euclidean metric) or an explicit
    symmetric ``dist`` matrix, which is checked against the metric axioms.
    One-dimensional coordinates keep exact arithmetic; in higher dimensions the
    Euclidean distances are floats.
    """

    def __init__(self, points=None, dist=None, labels: Sequence | None = None):
        if (points is None) == (dist is None):
            raise MeasureError("give exactly one of points or dist")
        if points is not None:
            rows = [list(p) if isinstance(p, (list, tuple, np.ndarray)) else [p] for p in points]
            if not rows:
                raise MeasureError("a space needs at least one point")
            d = len(rows[0])
            if d < 1 or any(len(r) != d for r in rows):
                raise MeasureError("all points need the same dimension d >= 1")
            mode = num.infer_mode(np.array(rows, dtype=object))
            coords = num.as_array(np.array(rows, dtype=object), mode)
            if mode == FLOAT and not np.all(np.isfinite(coords)):
                raise MeasureError("coordinates must be finite")
            self._coords = num.frozen(coords)
            self._dist = num.frozen(_euclidean(coords))
        else:
            raw = np.array(dist, dtype=object)
            if raw.ndim != 2 or raw.shape[0] != raw.shape[1] or raw.shape[0] == 0:
                raise MeasureError("dist must be a nonempty square matrix")
            mode = num.infer_mode(raw)
            dm = num.as_array(raw, mode)
            _check_metric(dm, mode)
            self._coords = None
            self._dist = num.frozen(dm)
        n = self._dist.shape[0]
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if len(self.labels) != n:
            raise MeasureError("one label per point")

    @classmethod
    def discrete(cls, n: int, labels=None) -> FiniteMetricSpace:
        """``n`` points at mutual distance 1."""
        dm = np.ones((n, n), dtype=int) - np.eye(n, dtype=int)
        return cls(dist=dm.tolist(), labels=labels)

    @classmethod
    def line(cls, xs: Sequence) -> FiniteMetricSpace:
        return cls(points=[[x] for x in xs])

    @property
    def dist(self) -> np.ndarray:
        return self._dist

    @property
    def coords(self) -> np.ndarray | None:
        return self._coords

    @property
    def mode(self) -> str:
        return RATIONAL if self.dist.dtype == object else FLOAT

    def __len__(self) -> int:
        return self.dist.shape[0]

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, FiniteMetricSpace) or len(self) != len(other):
            return False
        return bool(np.all(self.dist == other.dist))

    def __hash__(self) -> int:
        return hash((len(self), tuple(self.dist.flat)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={len(self)})"

    def min_positive_distance(self):
        vals = [x for x in self.dist.flat if x > 0]
        return min(vals) if vals else None


def _euclidean(coords: np.ndarray) -> np.ndarray:
    n, d = coords.shape
    if coords.dtype == object:
        if d == 1:
            c = coords[:, 0]
            return np.array([[abs(a - b) for b in c] for a in c], dtype=object).reshape(n, n)
        coords = coords.astype(float)
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _check_metric(dm: np.ndarray, mode: str) -> None:
    tol = 0 if mode == RATIONAL else num.FEAS_TOL * max(1.0, float(np.max(np.abs(dm.astype(float)))))
    n = dm.shape[0]
    for i in range(n):
        if dm[i, i] != 0:
            raise MeasureError(f"dist[{i},{i}] must be 0")
        for j in range(n):
            if dm[i, j] < 0:
                raise MeasureError(f"dist[{i},{j}] is negative")
            if mode == FLOAT and not math.isfinite(dm[i, j]):
                raise MeasureError(f"dist[{i},{j}] is not finite")
            if dm[i, j] != dm[j, i]:
                raise MeasureError(f"dist is not symmetric at ({i},{j})")
    for k in range(n):
        # dist[i,j] <= dist[i,k] + dist[k,j]
        via = dm[:, k][:, None] + dm[k, :][None, :]
        bad = np.argwhere(dm - via > tol)
        if len(bad):
            i, j = bad[0]
            raise MeasureError(f"triangle inequality fails for ({i},{j}) via {k}")


class ProductSpace(FiniteMetricSpace):
    """Cartesian product of finite metric spaces with row-major flat indexing.

    The metric is the sum of the factor metrics; it is built on first access.
    """

    def __init__(self, *factors: FiniteMetricSpace):
        if len(factors) < 2:
            raise MeasureError("a product needs at least two factors")
        self.factors = tuple(factors)
        self.shape = tuple(len(f) for f in factors)
        self._coords = None
        self.labels = tuple(np.ndindex(*self.shape))

    @property
    def left(self) -> FiniteMetricSpace:
        return self.factors[0]

    @property
    def right(self) -> FiniteMetricSpace:
        return self.factors[-1]

    @cached_property
    def _dist(self) -> np.ndarray:
        grids = np.ix_(*[np.arange(s) for s in self.shape])
        total = None
        for axis, f in enumerate(self.factors):
            idx = np.broadcast_to(grids[axis], self.shape).ravel()
            part = f.dist[np.ix_(idx, idx)]
            total = part if total is None else total + part
        return num.frozen(total)

    def __len__(self) -> int:
        return math.prod(self.shape)

    def __eq__(self, other) -> bool:
        return isinstance(other, ProductSpace) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __repr__(self) -> str:
        return f"ProductSpace(shape={self.shape})"

    def index(self, *ij: int) -> int:
        return int(np.ravel_multi_index(ij, self.shape))

    def unravel(self, k: int) -> tuple[int, ...]:
        return tuple(int(v) for v in np.unravel_index(k, self.shape))

    def projection(self, axis: int) -> list[int]:
        """Point map sending each flat index to its coordinate on ``axis``."""
        return [int(v) for v in np.unravel_index(np.arange(len(self)), self.shape)[axis]]


class DiscreteMeasure:
    """Probability weights on the points of a finite metric space.

    Integer and ``Fraction`` weights select rational mode, where the total
    mass must be exactly 1; float weights must sum to 1 within 1e-12.
    """

    def __init__(self, space: FiniteMetricSpace, weights, mode: str | None = None):
        raw = np.asarray(weights, dtype=object).ravel() if not isinstance(weights, np.ndarray) \
            else weights.ravel()
        if raw.shape[0] != len(space):
            raise MeasureError(f"expected {len(space)} weights, got {raw.shape[0]}")
        mode = mode or num.infer_mode(raw)
        w = num.as_array(raw, mode)
        if mode == FLOAT and not np.all(np.isfinite(w)):
            raise MeasureError("weights must be finite")
        if any(x < 0 for x in w.flat):
            raise MeasureError("weights must be nonnegative")
        s = num.total(w)
        if mode == RATIONAL and s != 1:
            raise MeasureError(f"weights sum to {s}, not 1")
        if mode == FLOAT and abs(s - 1.0) > num.FEAS_TOL:
            raise MeasureError(f"weights sum to {s!r}, not 1 within 1e-12")
        self.space = space
        self.weights = num.frozen(w)

    @classmethod
    def dirac(cls, space: FiniteMetricSpace, i: int, mode: str = RATIONAL) -> DiscreteMeasure:
        w = [0] * len(space)
        w[i] = 1
        return cls(space, w, mode=mode)

    @classmethod
    def uniform(cls, space: FiniteMetricSpace, mode: str = RATIONAL) -> DiscreteMeasure:
        n = len(space)
        if mode == RATIONAL:
            from fractions import Fraction
            return cls(space, [Fraction(1, n)] * n, mode=mode)
        return cls(space, np.full(n, 1.0 / n), mode=mode)

    @classmethod
    def on_line(cls, xs: Sequence, weights) -> DiscreteMeasure:
        return cls(FiniteMetricSpace.line(xs), weights)

    @property
    def mode(self) -> str:
        return RATIONAL if self.weights.dtype == object else FLOAT

    @property
    def support(self) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w > 0]

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    def __eq__(self, other) -> bool:
        return (isinstance(other, DiscreteMeasure) and self.space == other.space
                and bool(np.all(self.weights == other.weights)))

    def __hash__(self) -> int:
        return hash((self.space, tuple(self.weights)))

    def __repr__(self) -> str:
        return f"DiscreteMeasure({[num.format_number(w) for w in self.weights]})"

    def astype(self, mode: str) -> DiscreteMeasure:
        if mode == self.mode:
            return self
        w = num.as_array(self.weights, mode)
        if mode == FLOAT:
            w = w / w.sum()
        return DiscreteMeasure(self.space, w, mode=mode)

    def matrix(self) -> np.ndarray:
        """Weights reshaped to the product shape (for measures on a ProductSpace)."""
        if not isinstance(self.space, ProductSpace):
            raise MeasureError("measure does not live on a product space")
        return self.weights.reshape(self.space.shape)

    def integrate(self, values):
        return num.dot(self.weights, np.asarray(values, dtype=self.weights.dtype))


def _common_mode(*measures: DiscreteMeasure) -> str:
    return RATIONAL if all(m.mode == RATIONAL for m in measures) else FLOAT


def tv_distance(mu1: DiscreteMeasure, mu2: DiscreteMeasure):
    """Total variation norm ``sum_i |w1_i - w2_i|`` of the signed difference."""
    if mu1.space != mu2.space:
        raise MeasureError("measures live on different spaces")
    mode = _common_mode(mu1, mu2)
    a = num.as_array(mu1.weights, mode)
    b = num.as_array(mu2.weights, mode)
    return num.total(np.abs(a - b))


def pushforward(mu: DiscreteMeasure, f: Sequence[int] | Mapping[int, int] | Callable[[int], int],
                target: FiniteMetricSpace) -> DiscreteMeasure:
    """Image measure ``mu o f^-1``: each target point collects its preimages' mass.

    ``f`` may be a sequence or mapping over point indices, or a callable.
    Only the support of ``mu`` needs to be mapped.
    """
    out = [num.zero(mu.mode)] * len(target)
    for i in mu.support:
        y = _apply(f, i)
        if y is None or not 0 <= y < len(target):
            raise MeasureError(f"map is undefined on support point {i}")
        out[y] = out[y] + mu.weights[i]
    if mu.mode == FLOAT:
        out = np.array(out, dtype=float)
    return DiscreteMeasure(target, out, mode=mu.mode)


def _apply(f, i: int):
    if callable(f):
        return f(i)
    try:
        y = f[i]
    except (IndexError, KeyError):
        return None
    return None if y is None else int(y)


def product(*measures: DiscreteMeasure) -> DiscreteMeasure:
    """Independent coupling: weight ``(i, j, ...)`` is the product of factor weights."""
    mode = _common_mode(*measures)
    ws = [num.as_array(m.weights, mode) for m in measures]
    joint = ws[0]
    for w in ws[1:]:
        joint = np.multiply.outer(joint, w)
    space = ProductSpace(*(m.space for m in measures))
    return DiscreteMeasure(space, joint.ravel(), mode=mode)


def project(sigma: DiscreteMeasure, axes: Sequence[int]) -> DiscreteMeasure:
    """Marginal of a product-space measure on the factors listed in ``axes``."""
    space = sigma.space
    if not isinstance(space, ProductSpace):
        raise MeasureError("projection needs a measure on a product space")
    axes = tuple(axes)
    drop = tuple(a for a in range(len(space.shape)) if a not in axes)
    m = sigma.matrix()
    if drop:
        m = m.sum(axis=drop)
    if list(axes) != sorted(axes):
        m = np.transpose(m, np.argsort(np.argsort(axes)))
    if len(axes) == 1:
        target = space.factors[axes[0]]
    else:
        target = ProductSpace(*(space.factors[a] for a in axes))
    return DiscreteMeasure(target, m.ravel(), mode=sigma.mode)


def marginals(sigma: DiscreteMeasure) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Row and column sums of a plan on a two-factor product space."""
    if not isinstance(sigma.space, ProductSpace) or len(sigma.space.shape) != 2:
        raise MeasureError("marginals need a measure on a two-factor product space")
    return project(sigma, (0,)), project(sigma, (1,))


def truncate_normalize(mu: DiscreteMeasure, n: int) -> tuple[DiscreteMeasure, list[int]]:
    """Renormalized restriction of ``mu`` to a greedy high-mass set.

    Points are taken in order of decreasing weight (lower index first on ties)
    until the kept mass strictly exceeds ``1 - 2**-n``. The kept sets are
    nested in ``n`` and the TV distance to ``mu`` is ``2 * (1 - kept mass)``.
    """
    if n < 1:
        raise MeasureError("n must be a positive integer")
    mode = mu.mode
    threshold = num.one(mode) - num.one(mode) / 2 ** n
    order = sorted(range(len(mu)), key=lambda i: (-mu.weights[i], i))
    kept: list[int] = []
    mass = num.zero(mode)
    for i in order:
        if mass > threshold or mu.weights[i] == 0:
            break
        kept.append(i)
        mass = mass + mu.weights[i]
    keep = set(kept)
    w = [mu.weights[i] / mass if i in keep else num.zero(mode) for i in range(len(mu))]
    if mode == FLOAT:
        w = np.array(w, dtype=float)
    return DiscreteMeasure(mu.space, w, mode=mode), sorted(kept)
