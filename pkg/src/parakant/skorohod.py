"""Quantile maps of discrete measures on the line and the d0 semimetric."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from . import _numeric as num
from ._numeric import FLOAT, RATIONAL
from .measures import DiscreteMeasure, MeasureError, ProductSpace
from .solver import solve_exact


@dataclass(frozen=True)
class QuantileMap:
    """Right-continuous step function ``[0, 1] -> R``.

    Takes ``values[j]`` on ``[breakpoints[j], breakpoints[j+1])`` and the last
    value at ``t = 1``. ``indices[j]`` is the point index of ``values[j]`` in
    the measure's space (``None`` for maps built by hand).
    """

    breakpoints: tuple
    values: tuple
    indices: tuple | None = None

    def __post_init__(self):
        b, v = self.breakpoints, self.values
        if len(b) != len(v) + 1 or not v:
            raise MeasureError("need len(breakpoints) == len(values) + 1 >= 2")
        if b[0] != 0 or b[-1] != 1 and abs(b[-1] - 1) > num.FEAS_TOL:
            raise MeasureError("breakpoints must run from 0 to 1")
        if any(y <= x for x, y in zip(b, b[1:])):
            raise MeasureError("breakpoints must be strictly increasing")
        if any(y <= x for x, y in zip(v, v[1:])):
            raise MeasureError("values must be strictly increasing")

    @classmethod
    def constant(cls, c) -> QuantileMap:
        return cls((num.to_fraction(0), num.to_fraction(1)), (c,))

    def __call__(self, t):
        if not 0 <= t <= 1:
            raise ValueError("t must lie in [0, 1]")
        j = bisect_right(self.breakpoints, t) - 1
        return self.values[min(j, len(self.values) - 1)]

    def evaluate(self, ts) -> list:
        return [self(t) for t in ts]

    def interval_lengths(self) -> list:
        b = self.breakpoints
        return [y - x for x, y in zip(b, b[1:])]

    def pushforward_lebesgue(self) -> dict:
        """Law of the map under Lebesgue measure: value -> length of its level set."""
        return dict(zip(self.values, self.interval_lengths()))


def _line_points(mu: DiscreteMeasure) -> list:
    c = mu.space.coords
    if c is None or c.shape[1] != 1:
        raise MeasureError("quantile maps need a measure on a one-dimensional point set")
    return list(c[:, 0])


def quantile_map(mu: DiscreteMeasure) -> QuantileMap:
    """``xi(t) = sup{x : mu((-inf, x)) <= t}`` for a discrete measure on R.

    Atoms of zero weight are dropped. Level-set lengths equal the weights
    exactly; ``xi(1)`` is taken as the largest atom.
    """
    xs = _line_points(mu)
    atoms = sorted((xs[i], i) for i in mu.support)
    bps = [num.zero(mu.mode)]
    for _, i in atoms:
        bps.append(bps[-1] + mu.weights[i])
    if mu.mode == FLOAT:
        # pin the right end so the last level set is [t_{k-1}, 1]
        bps[-1] = 1.0
        while len(bps) > 2 and bps[-2] >= 1.0:
            bps.pop(-2)
            atoms.pop(-2)
    return QuantileMap(tuple(bps), tuple(x for x, _ in atoms), tuple(i for _, i in atoms))


def _merged(*maps: QuantileMap) -> list:
    return sorted(set().union(*(m.breakpoints for m in maps)))


def d0_distance(xi: QuantileMap, eta: QuantileMap, metric=None):
    """``int_0^1 min(d(xi(t), eta(t)), 1) dt``, integrated exactly over merged breakpoints."""
    d = metric or (lambda a, b: abs(a - b))
    bps = _merged(xi, eta)
    total = None
    for a, b in zip(bps, bps[1:]):
        gap = d(xi(a), eta(a))
        term = (gap if gap < 1 else 1) * (b - a)
        total = term if total is None else total + term
    return total


def quantile_coupling(mu: DiscreteMeasure, nu: DiscreteMeasure) -> DiscreteMeasure:
    """Joint law of ``(xi_mu(t), xi_nu(t))`` under Lebesgue measure on [0, 1]."""
    qm, qn = quantile_map(mu), quantile_map(nu)
    mode = RATIONAL if mu.mode == nu.mode == RATIONAL else FLOAT
    mat = np.empty((len(mu), len(nu)), dtype=object if mode == RATIONAL else float)
    mat[...] = num.zero(mode)
    bps = _merged(qm, qn)
    for a, b in zip(bps, bps[1:]):
        i = qm.indices[min(bisect_right(qm.breakpoints, a) - 1, len(qm.values) - 1)]
        j = qn.indices[min(bisect_right(qn.breakpoints, a) - 1, len(qn.values) - 1)]
        mat[i, j] = mat[i, j] + (b - a)
    return DiscreteMeasure(ProductSpace(mu.space, nu.space), mat.ravel(), mode=mode)


def line_cost(mu: DiscreteMeasure, nu: DiscreteMeasure, truncate: bool = False) -> np.ndarray:
    """``|x - y|`` (or ``min(|x - y|, 1)``) between the points of two line measures."""
    xs, ys = _line_points(mu), _line_points(nu)
    exact = mu.space.coords.dtype == object and nu.space.coords.dtype == object
    one = num.one(RATIONAL if exact else FLOAT)
    rows = [[min(abs(x - y), one) if truncate else abs(x - y) for y in ys] for x in xs]
    return np.array(rows, dtype=object if exact else float)


def truncated_w1(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Optimal cost for ``h = min(|x - y|, 1)``."""
    return solve_exact(line_cost(mu, nu, truncate=True), mu, nu).cost


@dataclass(frozen=True)
class SkorohodReport:
    d0: tuple
    w1: tuple
    d0_vanishes: bool
    w1_vanishes: bool
    d0_monotone: bool

    @property
    def agree(self) -> bool:
        return self.d0_vanishes == self.w1_vanishes

    def rows(self):
        return [(n, a, b) for n, (a, b) in enumerate(zip(self.d0, self.w1), start=1)]


def skorohod_sequence(mus, mu: DiscreteMeasure, zero_tol: float = 1e-2,
                      monotone_tol: float = 1e-12) -> SkorohodReport:
    """d0 between quantile maps and truncated-W1 between laws along ``mus -> mu``.

    A finite sequence "vanishes" when its last term is at most ``zero_tol``.
    """
    mus = list(mus)
    if not mus:
        raise MeasureError("empty sequence")
    target = quantile_map(mu)
    d0 = tuple(d0_distance(quantile_map(m), target) for m in mus)
    w1 = tuple(truncated_w1(m, mu) for m in mus)
    mono = all(b <= a + monotone_tol for a, b in zip(d0, d0[1:]))
    return SkorohodReport(d0, w1, d0[-1] <= zero_tol, w1[-1] <= zero_tol, mono)
