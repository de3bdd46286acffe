"""Brute-force vertex enumeration of the transportation polytope.

Every vertex of the set of couplings has an acyclic support, so it is the
unique flow on some spanning tree of the complete bipartite row/column graph.
Enumerating all spanning trees and keeping the nonnegative flows yields every
vertex. This is deliberately independent of the simplex code path.
"""

from __future__ import annotations

import numpy as np

from . import _numeric as num
from ._numeric import RATIONAL
from .measures import DiscreteMeasure
from .solver import CostMatrix, SolverError, TransportPlan, _prepare

MAX_CELLS = 16


def spanning_trees(m: int, n: int):
    """Yield every spanning tree of K_{m,n} as a tuple of (row, col) cells."""
    cells = [(i, j) for i in range(m) for j in range(n)]
    need = m + n - 1
    parent = list(range(m + n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    chosen: list[tuple[int, int]] = []

    def rec(start: int):
        if len(chosen) == need:
            yield tuple(chosen)
            return
        for k in range(start, len(cells)):
            if len(cells) - k < need - len(chosen):
                return
            i, j = cells[k]
            ri, rj = find(i), find(m + j)
            if ri == rj:
                continue
            parent[ri] = rj
            chosen.append((i, j))
            yield from rec(k + 1)
            chosen.pop()
            parent[ri] = ri

    yield from rec(0)


def tree_flow(tree, supply, demand):
    """Unique flow on ``tree`` matching the marginals, by leaf elimination."""
    m, n = len(supply), len(demand)
    rest = list(supply) + list(demand)
    adj: list[set[int]] = [set() for _ in range(m + n)]
    for i, j in tree:
        adj[i].add(m + j)
        adj[m + j].add(i)
    flow = {}
    leaves = [v for v in range(m + n) if len(adj[v]) == 1]
    while leaves:
        v = leaves.pop()
        if len(adj[v]) != 1:
            continue
        (w,) = adj[v]
        x = rest[v]
        cell = (v, w - m) if v < m else (w, v - m)
        flow[cell] = x
        rest[v] = rest[v] - x
        rest[w] = rest[w] - x
        adj[v].clear()
        adj[w].discard(v)
        if len(adj[w]) == 1:
            leaves.append(w)
    return flow


def enumerate_vertices(mu: DiscreteMeasure, nu: DiscreteMeasure, max_cells: int = MAX_CELLS):
    """All distinct vertices of the coupling polytope, as matrices."""
    m, n = len(mu), len(nu)
    if m * n > max_cells:
        raise SolverError(f"{m}x{n} exceeds the enumeration cap of {max_cells} cells")
    mode = RATIONAL if mu.mode == nu.mode == RATIONAL else num.FLOAT
    supply = num.as_array(mu.weights, mode)
    demand = num.as_array(nu.weights, mode)
    tol = 0 if mode == RATIONAL else num.FEAS_TOL
    seen = {}
    for tree in spanning_trees(m, n):
        flow = tree_flow(tree, supply, demand)
        if any(x < -tol for x in flow.values()):
            continue
        mat = np.empty((m, n), dtype=supply.dtype)
        mat[...] = num.zero(mode)
        for (i, j), x in flow.items():
            mat[i, j] = max(x, num.zero(mode))
        key = tuple(mat.flat) if mode == RATIONAL else tuple(np.round(mat, 12).flat)
        seen.setdefault(key, mat)
    return [seen[k] for k in sorted(seen)]


def enumerate_optimal_plans(h, mu: DiscreteMeasure, nu: DiscreteMeasure,
                            max_cells: int = MAX_CELLS) -> list[TransportPlan]:
    """Vertices of the coupling polytope attaining the minimal cost."""
    h, mu, nu, mode = _prepare(h, mu, nu, None)
    verts = enumerate_vertices(mu, nu, max_cells)
    values = [num.dot(v, h.values) for v in verts]
    best = min(values)
    tol = 0 if mode == RATIONAL else num.OPT_TOL
    return [TransportPlan(num.frozen(v), mu, nu, h) for v, c in zip(verts, values) if c - best <= tol]


def brute_force_cost(h, mu: DiscreteMeasure, nu: DiscreteMeasure, max_cells: int = MAX_CELLS):
    return min(p.value for p in enumerate_optimal_plans(h, mu, nu, max_cells))


__all__ = ["CostMatrix", "enumerate_optimal_plans", "enumerate_vertices", "brute_force_cost",
           "spanning_trees", "tree_flow"]
