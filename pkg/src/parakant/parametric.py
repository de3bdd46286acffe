"""Parameter sweeps over families (h_t, mu_t, nu_t) and stability certificates."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import _numeric as num
from ._numeric import FLOAT, RATIONAL
from .measures import (DiscreteMeasure, FiniteMetricSpace, MeasureError, ProductSpace, tv_distance,
                       truncate_normalize)
from .solver import CostMatrix, SolverError, solve_exact

THREADS_ENV = "PARAKANT_THREADS"


class ParametricError(ValueError):
    pass


class ParamGrid:
    """Finite parameter set: strictly increasing reals or arbitrary labels."""

    def __init__(self, values):
        values = list(values)
        if not values:
            raise ParametricError("grid must be nonempty")
        if all(isinstance(v, (int, float, Fraction)) and not isinstance(v, bool) for v in values):
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ParametricError("numeric grid must be strictly increasing")
        elif len(set(values)) != len(values):
            raise ParametricError("grid labels must be distinct")
        self.values = tuple(values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, k):
        return self.values[k]


@dataclass(frozen=True)
class Family:
    """Per-parameter cost and marginals over fixed spaces.

    Use the classmethods for the built-in generators; the constructor takes
    fully tabulated data.
    """

    grid: ParamGrid
    costs: tuple
    mus: tuple
    nus: tuple

    def __post_init__(self):
        k = len(self.grid)
        if not (len(self.costs) == len(self.mus) == len(self.nus) == k):
            raise ParametricError("need one cost and one marginal pair per grid point")
        costs = tuple(c if isinstance(c, CostMatrix) else CostMatrix(c) for c in self.costs)
        object.__setattr__(self, "costs", costs)
        X, Y = self.mus[0].space, self.nus[0].space
        for t, c, mu, nu in zip(self.grid, costs, self.mus, self.nus):
            if mu.space != X or nu.space != Y:
                raise ParametricError(f"marginals at t={t} change spaces")
            if c.shape != (len(X), len(Y)):
                raise ParametricError(f"cost shape at t={t} does not match the spaces")

    def __len__(self) -> int:
        return len(self.grid)

    def member(self, k: int):
        return self.grid[k], self.costs[k], self.mus[k], self.nus[k]

    @classmethod
    def tabulated(cls, grid, costs, mus, nus) -> Family:
        return cls(ParamGrid(grid), tuple(costs), tuple(mus), tuple(nus))

    @classmethod
    def constant(cls, grid, h, mu, nu) -> Family:
        g = ParamGrid(grid)
        return cls(g, (CostMatrix(h),) * len(g), (mu,) * len(g), (nu,) * len(g))

    @classmethod
    def mixture(cls, grid, h, mu0: DiscreteMeasure, mu1: DiscreteMeasure,
                nu0: DiscreteMeasure, nu1: DiscreteMeasure | None = None) -> Family:
        """``mu_t = (1-t) mu0 + t mu1`` and likewise for ``nu``; ``t`` in [0, 1]."""
        nu1 = nu0 if nu1 is None else nu1
        g = ParamGrid(grid)
        _check_unit(g)
        return cls(g, (CostMatrix(h),) * len(g),
                   tuple(_mix(mu0, mu1, t) for t in g), tuple(_mix(nu0, nu1, t) for t in g))

    @classmethod
    def cost_interpolation(cls, grid, h0, h1, mu, nu) -> Family:
        """``h_t = (1-t) h0 + t h1`` with fixed marginals; ``t`` in [0, 1]."""
        g = ParamGrid(grid)
        _check_unit(g)
        a, b = CostMatrix(h0), CostMatrix(h1)
        mode = RATIONAL if a.mode == b.mode == RATIONAL and _exact_grid(g) else FLOAT
        a, b = a.astype(mode), b.astype(mode)
        costs = tuple(CostMatrix((1 - _t(t, mode)) * a.values + _t(t, mode) * b.values, mode) for t in g)
        return cls(g, costs, (mu,) * len(g), (nu,) * len(g))

    @classmethod
    def cost_scaling(cls, grid, h, mu, nu) -> Family:
        """``h_t = t * h`` for ``t >= 0``."""
        g = ParamGrid(grid)
        if any(t < 0 for t in g):
            raise ParametricError("scaling parameters must be nonnegative")
        base = CostMatrix(h)
        mode = RATIONAL if base.mode == RATIONAL and _exact_grid(g) else FLOAT
        base = base.astype(mode)
        return cls(g, tuple(CostMatrix(_t(t, mode) * base.values, mode) for t in g),
                   (mu,) * len(g), (nu,) * len(g))


def _exact_grid(g: ParamGrid) -> bool:
    return all(num.is_exact_scalar(t) for t in g)


def _t(t, mode):
    return num.to_fraction(t) if mode == RATIONAL else float(t)


def _check_unit(g: ParamGrid) -> None:
    if any(not 0 <= t <= 1 for t in g):
        raise ParametricError("mixture parameters must lie in [0, 1]")


def _mix(a: DiscreteMeasure, b: DiscreteMeasure, t) -> DiscreteMeasure:
    if a.space != b.space:
        raise ParametricError("mixture endpoints live on different spaces")
    mode = RATIONAL if a.mode == b.mode == RATIONAL and num.is_exact_scalar(t) else FLOAT
    t = _t(t, mode)
    wa, wb = num.as_array(a.weights, mode), num.as_array(b.weights, mode)
    return DiscreteMeasure(a.space, (1 - t) * wa + t * wb, mode=mode)


@dataclass(frozen=True)
class SweepRow:
    t: object
    cost: object
    gap: object
    dual: object
    plan_hash: str
    plan: np.ndarray | None = None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    @property
    def costs(self) -> list:
        return [r.cost for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


class SweepError(SolverError):
    def __init__(self, t, cause: Exception):
        super().__init__(f"at t={t}: {cause}")
        self.t = t


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else 1


def _solve_member(args):
    t, h, mu, nu, mode = args
    try:
        return solve_exact(h, mu, nu, mode)
    except (SolverError, MeasureError) as exc:
        raise SweepError(t, exc) from exc


def sweep(family: Family, mode: str | None = None, keep_plans: bool = False,
          workers: int | None = None) -> SweepResult:
    """Solve every member of ``family``; results are ordered by grid index."""
    jobs = [(*family.member(k), mode) for k in range(len(family))]
    nworkers = min(worker_count(workers), len(jobs))
    if nworkers > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as ex:
            results = list(ex.map(_solve_member, jobs))
    else:
        results = [_solve_member(j) for j in jobs]
    rows = []
    for (t, *_), r in zip(jobs, results):
        rows.append(SweepRow(t, r.cost, r.gap, r.cost - r.gap, r.plan.digest(),
                             r.plan.matrix if keep_plans else None))
    return SweepResult(tuple(rows))


@dataclass
class Certificate:
    """Outcome of a pointwise check: every slack must be >= -tolerance."""

    name: str
    tolerance: float
    checks: int = 0
    min_slack: object = None
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def record(self, slack, where=None) -> None:
        self.checks += 1
        if self.min_slack is None or slack < self.min_slack:
            self.min_slack = slack
        if slack < -self.tolerance:
            self.failures.append((where, slack))

    def require(self, ok: bool, where=None) -> None:
        self.record(0 if ok else -math.inf, where)

    @property
    def passed(self) -> bool:
        return not self.failures


def _require_unit_cost(h: CostMatrix) -> None:
    if h.max() > 1:
        raise ParametricError("cost exceeds 1")


def lipschitz_certificate(family: Family, tol: float = num.OPT_TOL) -> Certificate:
    """Check ``|K(t) - K(s)| <= ||mu_t - mu_s|| + ||nu_t - nu_s||`` on all grid pairs.

    The family must use one cost ``h <= 1`` throughout.
    """
    h = family.costs[0]
    for c in family.costs[1:]:
        if c.shape != h.shape or not np.all(c.values == h.values):
            raise ParametricError("certificate needs a single cost across the family")
    _require_unit_cost(h)
    ks = sweep(family).costs
    cert = Certificate("lipschitz", tol)
    for a, b in combinations(range(len(family)), 2):
        bound = tv_distance(family.mus[a], family.mus[b]) + tv_distance(family.nus[a], family.nus[b])
        cert.record(bound - abs(ks[a] - ks[b]), (family.grid[a], family.grid[b]))
    cert.details["costs"] = ks
    return cert


def lipschitz_slack(h, mu1, nu1, mu2, nu2):
    """``||mu1-mu2|| + ||nu1-nu2|| - |K_h(mu1,nu1) - K_h(mu2,nu2)|`` for ``h <= 1``."""
    h = CostMatrix(h)
    _require_unit_cost(h)
    k1 = solve_exact(h, mu1, nu1).cost
    k2 = solve_exact(h, mu2, nu2).cost
    return tv_distance(mu1, mu2) + tv_distance(nu1, nu2) - abs(k1 - k2)


def _distance_matrix(space) -> np.ndarray:
    return space.dist if isinstance(space, FiniteMetricSpace) else np.asarray(space)


def inf_convolution(hvals, space, n: int) -> np.ndarray:
    """Lipschitz minorant ``h_n(x) = min_z h(z) + n d(x, z)``.

    ``space`` is a FiniteMetricSpace or a distance matrix over the points
    indexing ``hvals``. ``h_n`` is n-Lipschitz, ``h_n <= h_{n+1} <= h``.
    """
    if n < 1:
        raise ParametricError("n must be a positive integer")
    d = _distance_matrix(space)
    h = np.asarray(hvals)
    shape = h.shape
    h = h.ravel()
    if d.shape != (h.size, h.size):
        raise ParametricError("distance matrix does not match the cost values")
    exact = h.dtype == object and d.dtype == object
    if exact:
        out = np.array([min(h[z] + n * d[x, z] for z in range(h.size)) for x in range(h.size)],
                       dtype=object)
    else:
        out = np.min(h.astype(float)[None, :] + n * d.astype(float), axis=1)
    return out.reshape(shape)


def stabilization_threshold(hvals, space) -> int:
    """Smallest ``n >= 1`` with ``n >= (max h - min h) / delta_min``; past it ``h_n = h``."""
    d = _distance_matrix(space)
    pos = [x for x in d.flat if x > 0]
    h = list(np.asarray(hvals).flat)
    spread = max(h) - min(h)
    if not pos or spread == 0:
        return 1
    ratio = spread / min(pos)
    if isinstance(ratio, Fraction):
        return max(1, -((-ratio.numerator) // ratio.denominator))
    return max(1, math.ceil(ratio))


def cost_ladder(h, X: FiniteMetricSpace, Y: FiniteMetricSpace, n: int, kind: str = "inf_convolution"):
    """Rung ``n`` of an increasing approximation of ``h`` on X x Y."""
    h = CostMatrix(h)
    if kind == "truncation":
        cap = Fraction(n) if h.mode == RATIONAL else float(n)
        return CostMatrix(np.array([[min(x, cap) for x in row] for row in h.values], dtype=h.values.dtype))
    if kind == "inf_convolution":
        return CostMatrix(inf_convolution(h.values, ProductSpace(X, Y), n))
    raise ParametricError(f"unknown ladder {kind!r}")


def ladder_threshold(h, X, Y, kind: str = "inf_convolution") -> int:
    h = CostMatrix(h)
    if kind == "truncation":
        top = h.max()
        return max(1, math.ceil(top)) if not isinstance(top, Fraction) else max(1, -(-top.numerator // top.denominator))
    return stabilization_threshold(h.values, ProductSpace(X, Y))


def monotone_cost_limit(h, mu: DiscreteMeasure, nu: DiscreteMeasure, kind: str = "inf_convolution",
                        n_max: int | None = None, tol: float = num.OPT_TOL) -> Certificate:
    """Check that ``K_{h_n}`` increases along the ladder and equals ``K_h`` past the threshold.

    For the inf-convolution ladder the rungs themselves are also checked:
    ``h_n <= h_{n+1} <= h`` and n-Lipschitz on every pair of points.
    """
    h = CostMatrix(h)
    X, Y = mu.space, nu.space
    nstar = ladder_threshold(h, X, Y, kind)
    n_max = n_max or nstar + 2
    target = solve_exact(h, mu, nu).cost
    cert = Certificate(f"monotone[{kind}]", tol)
    seq = []
    prev_rung = None
    dist = None
    if kind == "inf_convolution":
        dist = ProductSpace(X, Y).dist
    for n in range(1, max(n_max, nstar) + 1):
        rung = cost_ladder(h, X, Y, n, kind)
        k = solve_exact(rung, mu, nu).cost
        seq.append(k)
        hv = rung.values.ravel()
        cert.record(min(a - b for a, b in zip(h.values.flat, hv)), ("below_h", n))
        if prev_rung is not None:
            cert.record(min(b - a for a, b in zip(prev_rung, hv)), ("increasing", n))
            cert.record(k - seq[-2], ("K_nondecreasing", n))
        if dist is not None:
            diff = np.abs(hv[:, None] - hv[None, :])
            cert.record(min((n * dist - diff).flat), ("lipschitz", n))
        if n >= nstar:
            cert.record(-abs(k - target), ("equals_K_h", n))
        prev_rung = hv
    cert.details.update(threshold=nstar, sequence=seq, target=target)
    return cert


def truncation_convergence(h, mu: DiscreteMeasure, nu: DiscreteMeasure, n_range=range(1, 11),
                           tol: float = num.OPT_TOL) -> Certificate:
    """Compare ``K(mu^n, nu^n)`` for Ulam truncations against ``K(mu, nu)``.

    Checks the TV bound for each ``n`` and exact equality once both
    truncations keep the full support.
    """
    h = CostMatrix(h)
    _require_unit_cost(h)
    target = solve_exact(h, mu, nu).cost
    cert = Certificate("truncation", tol)
    rows = []
    supp_mu, supp_nu = set(mu.support), set(nu.support)
    for n in n_range:
        mun, kept_mu = truncate_normalize(mu, n)
        nun, kept_nu = truncate_normalize(nu, n)
        k = solve_exact(h, mun, nun).cost
        bound = tv_distance(mu, mun) + tv_distance(nu, nun)
        cert.record(bound - abs(k - target), ("tv_bound", n))
        full = set(kept_mu) == supp_mu and set(kept_nu) == supp_nu
        if full:
            cert.require(k == target if h.mode == mu.mode == nu.mode == RATIONAL
                         else abs(k - target) <= tol, ("full_support_equal", n))
        rows.append((n, k, bound, full))
    cert.details.update(target=target, rows=rows)
    return cert


__all__ = ["ParamGrid", "Family", "SweepResult", "SweepRow", "sweep", "Certificate",
           "lipschitz_certificate", "lipschitz_slack", "inf_convolution", "stabilization_threshold",
           "cost_ladder", "monotone_cost_limit", "truncation_convergence"]
