"""Exact Kantorovich solver on finite marginals.

``solve_exact`` returns the canonical optimal plan: among all optimal plans,
the unique one minimizing ``sum_ij plan_ij * 2**-(i*cols + j)``. The tie-break
is a second simplex run restricted to the cells that are tight for the
optimal dual potentials, which is exactly the optimal face.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import _numeric as num
from ._numeric import FLOAT, RATIONAL
from ._simplex import northwest_corner, optimize
from .measures import DiscreteMeasure, ProductSpace


class SolverError(ValueError):
    """Invalid solver input (dimensions, non-finite or negative costs)."""


class CostMatrix:
    """Nonnegative finite cost values ``h(x_i, y_j)``."""

    def __init__(self, values, mode: str | None = None):
        if isinstance(values, CostMatrix):
            values = values.values
        raw = values if isinstance(values, np.ndarray) else np.array(values, dtype=object)
        if raw.ndim != 2 or 0 in raw.shape:
            raise SolverError("cost must be a nonempty 2-D matrix")
        mode = mode or num.infer_mode(raw)
        try:
            vals = num.as_array(raw, mode)
        except (TypeError, ValueError) as exc:
            raise SolverError(f"non-finite or non-numeric cost entry: {exc}") from None
        if mode == FLOAT and not np.all(np.isfinite(vals)):
            raise SolverError("cost entries must be finite")
        if any(x < 0 for x in vals.flat):
            raise SolverError("cost entries must be nonnegative")
        self.values = num.frozen(vals)

    @property
    def mode(self) -> str:
        return RATIONAL if self.values.dtype == object else FLOAT

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def max(self):
        return max(self.values.flat)

    def astype(self, mode: str) -> CostMatrix:
        return self if mode == self.mode else CostMatrix(num.as_array(self.values, mode), mode)

    def __repr__(self) -> str:
        return f"CostMatrix(shape={self.shape}, mode={self.mode!r})"


@dataclass(frozen=True)
class TransportPlan:
    matrix: np.ndarray
    mu: DiscreteMeasure
    nu: DiscreteMeasure
    cost: CostMatrix

    @property
    def value(self):
        """``I_h(plan) = sum_ij plan_ij * h_ij``."""
        return num.dot(self.matrix, self.cost.values)

    def as_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(ProductSpace(self.mu.space, self.nu.space), self.matrix.ravel(),
                               mode=self.mu.mode)

    def digest(self) -> str:
        payload = json.dumps(num.format_array(self.matrix), separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def __eq__(self, other) -> bool:
        return isinstance(other, TransportPlan) and bool(np.all(self.matrix == other.matrix))

    def __hash__(self) -> int:
        return hash(tuple(self.matrix.flat))


@dataclass(frozen=True)
class DualPotentials:
    phi: np.ndarray
    psi: np.ndarray

    def objective(self, mu: DiscreteMeasure, nu: DiscreteMeasure):
        return num.dot(self.phi, mu.weights) + num.dot(self.psi, nu.weights)

    def violation(self, h: CostMatrix):
        """Largest ``phi_i + psi_j - h_ij`` (nonpositive for a feasible pair)."""
        return max((self.phi[:, None] + self.psi[None, :] - h.values).flat)

    def is_feasible(self, h: CostMatrix, tol=None) -> bool:
        if tol is None:
            tol = 0 if h.mode == RATIONAL and self.phi.dtype == object else num.FEAS_TOL
        return self.violation(h) <= tol


@dataclass(frozen=True)
class SolveResult:
    cost: object
    plan: TransportPlan
    potentials: DualPotentials
    gap: object

    @property
    def mode(self) -> str:
        return self.plan.mu.mode


def _prepare(h, mu: DiscreteMeasure, nu: DiscreteMeasure, mode: str | None):
    h = CostMatrix(h) if not isinstance(h, CostMatrix) else h
    if h.shape != (len(mu), len(nu)):
        raise SolverError(f"cost shape {h.shape} does not match marginals ({len(mu)}, {len(nu)})")
    if mode is None:
        mode = RATIONAL if RATIONAL == h.mode == mu.mode == nu.mode else FLOAT
    if mode not in num.MODES:
        raise SolverError(f"unknown mode {mode!r}")
    return h.astype(mode), mu.astype(mode), nu.astype(mode), mode


def _float_tol(h: CostMatrix) -> float:
    return 1e-13 * max(1.0, float(np.max(h.values)))


def tie_break_weights(rows: int, cols: int) -> np.ndarray:
    """Secondary costs ``2**-(i*cols+j)`` scaled by ``2**(rows*cols-1)`` to exact integers."""
    top = rows * cols - 1
    return np.array([1 << (top - k) for k in range(rows * cols)], dtype=object).reshape(rows, cols)


def solve_exact(h, mu: DiscreteMeasure, nu: DiscreteMeasure, mode: str | None = None) -> SolveResult:
    """Minimize ``sum plan * h`` over couplings of ``mu`` and ``nu``.

    Rational mode (all inputs exact, or ``mode="rational"``) is exact end to
    end and has zero duality gap. Float mode keeps marginals within 1e-12 and
    the gap within 1e-9.
    """
    h, mu, nu, mode = _prepare(h, mu, nu, mode)
    cost = h.values
    tol = 0 if mode == RATIONAL else _float_tol(h)
    basis = northwest_corner(np.array(mu.weights), np.array(nu.weights))
    phi, psi = optimize(basis, cost, tol=tol)

    rc = cost - phi[:, None] - psi[None, :]
    tight = rc <= tol
    for i, j in basis.cells:
        tight[i, j] = True
    optimize(basis, tie_break_weights(*cost.shape), allowed=tight, tol=0)

    matrix = num.frozen(np.array(basis.flow))
    plan = TransportPlan(matrix, mu, nu, h)
    pots = DualPotentials(num.frozen(phi), num.frozen(psi))
    value = plan.value
    return SolveResult(value, plan, pots, value - pots.objective(mu, nu))


def duality_gap(result: SolveResult):
    """Primal value minus dual objective of a solve result."""
    return result.plan.value - result.potentials.objective(result.plan.mu, result.plan.nu)


def transport_cost(h, mu: DiscreteMeasure, nu: DiscreteMeasure, mode: str | None = None):
    return solve_exact(h, mu, nu, mode).cost


def normalize_potentials(pots: DualPotentials, h) -> DualPotentials:
    """Bring a feasible pair into ``0 <= phi <= 1``, ``-1 <= psi <= 0``.

    Requires ``h <= 1``. Shifts so that ``max phi = 1``, then clamps
    ``phi`` below at 0 and ``psi`` below at -1. Feasibility is kept and the
    dual objective never decreases.
    """
    h = CostMatrix(h) if not isinstance(h, CostMatrix) else h
    if h.max() > 1:
        raise SolverError("normalization needs max h <= 1")
    if h.shape != (len(pots.phi), len(pots.psi)):
        raise SolverError("potentials do not match the cost shape")
    exact = h.mode == RATIONAL and pots.phi.dtype == object and pots.psi.dtype == object
    mode = RATIONAL if exact else FLOAT
    phi = num.as_array(pots.phi, mode)
    psi = num.as_array(pots.psi, mode)
    h = h.astype(mode)
    if not DualPotentials(phi, psi).is_feasible(h):
        raise SolverError("potentials violate phi_i + psi_j <= h_ij")
    one = num.one(mode)
    shift = one - max(phi)
    phi = phi + shift
    psi = psi - shift
    phi = np.array([max(x, 0 * one) for x in phi], dtype=phi.dtype)
    psi = np.array([max(x, -one) for x in psi], dtype=psi.dtype)
    return DualPotentials(num.frozen(phi), num.frozen(psi))
