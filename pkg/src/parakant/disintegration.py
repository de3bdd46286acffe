"""Conditional measures along a finite map, dyadic partition schemes, and gluing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _numeric as num
from ._numeric import FLOAT, RATIONAL
from .measures import (DiscreteMeasure, FiniteMetricSpace, MeasureError, ProductSpace, _apply,
                       project, pushforward, tv_distance)


class OffImageError(KeyError):
    """Conditional requested at a point carrying no image mass."""


class GluingError(MeasureError):
    def __init__(self, discrepancy):
        super().__init__(f"middle marginals differ: TV discrepancy {num.format_number(discrepancy)}")
        self.discrepancy = discrepancy


def _resolve_map(mu: DiscreteMeasure, f, target: FiniteMetricSpace | None):
    image = [None] * len(mu)
    for i in range(len(mu)):
        y = _apply(f, i)
        if y is None:
            if mu.weights[i] > 0:
                raise MeasureError(f"map is undefined on support point {i}")
            continue
        image[i] = y
    if target is None:
        top = max((y for y in image if y is not None), default=0)
        target = FiniteMetricSpace.discrete(top + 1)
    if any(y is not None and not 0 <= y < len(target) for y in image):
        raise MeasureError("map leaves the target space")
    return image, target


@dataclass(frozen=True)
class Disintegration:
    """Image measure ``base = mu o f^-1`` with one conditional per charged point."""

    base: DiscreteMeasure
    conditionals: dict
    image: tuple

    def conditional(self, y: int) -> DiscreteMeasure:
        try:
            return self.conditionals[y]
        except KeyError:
            raise OffImageError(y) from None

    def reconstruct(self) -> DiscreteMeasure:
        """``sum_y base(y) * mu^y`` as a measure on the source space."""
        first = next(iter(self.conditionals.values()))
        mode = self.base.mode
        acc = np.empty(len(first), dtype=first.weights.dtype)
        acc[...] = num.zero(mode)
        for y, cond in self.conditionals.items():
            acc = acc + self.base.weights[y] * cond.weights
        return DiscreteMeasure(first.space, acc, mode=mode)

    def is_proper(self) -> bool:
        return all(self.image[x] == y for y, c in self.conditionals.items() for x in c.support)


def disintegrate(mu: DiscreteMeasure, f, target: FiniteMetricSpace | None = None) -> Disintegration:
    """Conditional measures of ``mu`` on the fibers of ``f``.

    ``mu^y(x) = mu(x) / nu(y)`` on ``f^-1(y)`` for every ``y`` with
    ``nu(y) > 0``; points of zero image mass get no conditional.
    """
    image, target = _resolve_map(mu, f, target)
    base = pushforward(mu, image, target)
    conds = {}
    for y in base.support:
        mass = base.weights[y]
        w = [mu.weights[x] / mass if image[x] == y else num.zero(mu.mode) for x in range(len(mu))]
        if mu.mode == FLOAT:
            w = np.array(w, dtype=float)
        conds[y] = DiscreteMeasure(mu.space, w, mode=mu.mode)
    return Disintegration(base, conds, tuple(image))


class PartitionScheme:
    """Nested dyadic partitions of an embedding of Y into [0, 1)^k.

    Level ``n`` cells are products of ``[i 2^-n, (i+1) 2^-n)``; level 0 is a
    single cell and each level refines the previous one.
    """

    def __init__(self, embedding):
        emb = np.array(embedding, dtype=object)
        if emb.ndim == 1:
            emb = emb.reshape(-1, 1)
        mode = num.infer_mode(emb)
        emb = num.as_array(emb, mode)
        if any(not 0 <= c < 1 for c in emb.flat):
            raise MeasureError("embedding must lie in [0, 1)^k")
        self.embedding = num.frozen(emb)

    @classmethod
    def for_space(cls, space: FiniteMetricSpace) -> PartitionScheme:
        """Default embedding: coordinates rescaled per axis into [0, 1/2], or index/|Y|."""
        if space.coords is None:
            n = len(space)
            return cls([[Fraction(i, n)] for i in range(n)])
        c = space.coords
        lo = c.min(axis=0) if c.dtype != object else np.array([min(col) for col in c.T], dtype=object)
        hi = c.max(axis=0) if c.dtype != object else np.array([max(col) for col in c.T], dtype=object)
        span = hi - lo
        span = np.array([s if s > 0 else 1 for s in span], dtype=c.dtype)
        return cls((c - lo) / (2 * span))

    def __len__(self) -> int:
        return self.embedding.shape[0]

    def cell(self, y: int, n: int) -> tuple[int, ...]:
        scale = 2 ** n
        return tuple(math.floor(c * scale) for c in self.embedding[y])

    def cells(self, n: int) -> dict[tuple[int, ...], list[int]]:
        out: dict[tuple[int, ...], list[int]] = {}
        for y in range(len(self)):
            out.setdefault(self.cell(y, n), []).append(y)
        return out

    def separation_level(self, points, max_level: int = 1100) -> int:
        """First level at which the given points lie in pairwise distinct cells."""
        points = sorted(set(points))
        for n in range(max_level + 1):
            if len({self.cell(y, n) for y in points}) == len(points):
                return n
        raise MeasureError("points share an embedding and cannot be separated")


def conditional_sequence(mu: DiscreteMeasure, f, scheme: PartitionScheme, n: int,
                         target: FiniteMetricSpace | None = None) -> dict[int, np.ndarray]:
    """Level-``n`` conditional weights for every point ``y`` of the target.

    ``mu^y_n`` is ``mu`` restricted to the preimage of y's level-n cell and
    normalized; a cell of zero mass gives the zero vector.
    """
    image, target = _resolve_map(mu, f, target)
    if len(scheme) != len(target):
        raise MeasureError("partition scheme does not cover the target space")
    mode = mu.mode
    cell_of = {y: scheme.cell(y, n) for y in range(len(target))}
    out = {}
    for y in range(len(target)):
        members = [x for x in range(len(mu)) if image[x] is not None and cell_of[image[x]] == cell_of[y]]
        mass = sum((mu.weights[x] for x in members), num.zero(mode))
        w = np.empty(len(mu), dtype=mu.weights.dtype)
        w[...] = num.zero(mode)
        if mass > 0:
            for x in members:
                w[x] = mu.weights[x] / mass
        out[y] = num.frozen(w)
    return out


def stabilization_level(mu: DiscreteMeasure, f, scheme: PartitionScheme,
                        target: FiniteMetricSpace | None = None) -> int:
    """Level from which ``conditional_sequence`` agrees with ``disintegrate`` on the image."""
    image, _ = _resolve_map(mu, f, target)
    return scheme.separation_level(image[x] for x in mu.support)


def glue(mu12: DiscreteMeasure, mu23: DiscreteMeasure) -> DiscreteMeasure:
    """Measure on X1 x X2 x X3 with faces ``mu12`` and ``mu23``.

    ``eta(x1, x2, x3) = mu12^{x2}(x1) * mu23^{x2}(x3) * pi(x2)`` where ``pi``
    is the shared X2-marginal.
    """
    for m in (mu12, mu23):
        if not isinstance(m.space, ProductSpace) or len(m.space.shape) != 2:
            raise MeasureError("gluing needs two measures on two-factor product spaces")
    if mu12.space.factors[1] != mu23.space.factors[0]:
        raise MeasureError("middle spaces differ")
    mode = RATIONAL if mu12.mode == mu23.mode == RATIONAL else FLOAT
    mu12, mu23 = mu12.astype(mode), mu23.astype(mode)
    pi12 = project(mu12, (1,))
    pi23 = project(mu23, (0,))
    gap = tv_distance(pi12, pi23)
    if gap > (0 if mode == RATIONAL else num.FEAS_TOL):
        raise GluingError(gap)
    a, b, pi = mu12.matrix(), mu23.matrix(), pi12.weights
    n1, n2 = a.shape
    n3 = b.shape[1]
    eta = np.empty((n1, n2, n3), dtype=a.dtype)
    eta[...] = num.zero(mode)
    for j in range(n2):
        if pi[j] > 0:
            eta[:, j, :] = np.multiply.outer(a[:, j], b[j, :]) / pi[j]
    space = ProductSpace(mu12.space.factors[0], mu12.space.factors[1], mu23.space.factors[1])
    return DiscreteMeasure(space, eta.ravel(), mode=mode)
