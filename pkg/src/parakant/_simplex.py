"""Transportation simplex on a spanning-tree basis.

Works on numpy object arrays (exact ``Fraction``/``int``) or float64 alike.
Entering cells follow Dantzig's rule and the solver switches to Bland's rule
for good once it stalls on degenerate pivots, so it always terminates.
"""

from __future__ import annotations

from collections import deque

import numpy as np


class SimplexError(RuntimeError):
    pass


class Basis:
    """Basic cells forming a spanning tree of the bipartite row/column graph."""

    def __init__(self, m: int, n: int, cells, flow: np.ndarray):
        self.m, self.n = m, n
        self.flow = flow
        self.row_adj: list[set[int]] = [set() for _ in range(m)]
        self.col_adj: list[set[int]] = [set() for _ in range(n)]
        for i, j in cells:
            self.add(i, j)

    @property
    def cells(self) -> list[tuple[int, int]]:
        return sorted((i, j) for i in range(self.m) for j in self.row_adj[i])

    def add(self, i: int, j: int) -> None:
        self.row_adj[i].add(j)
        self.col_adj[j].add(i)

    def remove(self, i: int, j: int) -> None:
        self.row_adj[i].discard(j)
        self.col_adj[j].discard(i)

    def potentials(self, cost: np.ndarray):
        """Solve u_i + v_j = cost_ij on basic cells with u_0 = 0."""
        u = np.empty(self.m, dtype=cost.dtype)
        v = np.empty(self.n, dtype=cost.dtype)
        seen_r = [False] * self.m
        seen_c = [False] * self.n
        u[0] = cost.flat[0] * 0
        seen_r[0] = True
        queue = deque([(0, 0)])  # (kind, index): kind 0 = row, 1 = column
        while queue:
            kind, k = queue.popleft()
            if kind == 0:
                for j in self.row_adj[k]:
                    if not seen_c[j]:
                        v[j] = cost[k, j] - u[k]
                        seen_c[j] = True
                        queue.append((1, j))
            else:
                for i in self.col_adj[k]:
                    if not seen_r[i]:
                        u[i] = cost[i, k] - v[k]
                        seen_r[i] = True
                        queue.append((0, i))
        if not (all(seen_r) and all(seen_c)):
            raise SimplexError("basis is not a spanning tree")
        return u, v

    def path(self, i: int, j: int) -> list[tuple[int, int]]:
        """Tree edges on the path from row ``i`` to column ``j``, starting at row ``i``."""
        parent: dict[tuple[int, int], tuple[int, int] | None] = {(0, i): None}
        queue = deque([(0, i)])
        while queue:
            node = queue.popleft()
            if node == (1, j):
                break
            kind, k = node
            nbrs = [(1, c) for c in self.row_adj[k]] if kind == 0 else [(0, r) for r in self.col_adj[k]]
            for nb in nbrs:
                if nb not in parent:
                    parent[nb] = node
                    queue.append(nb)
        if (1, j) not in parent:
            raise SimplexError("basis is not connected")
        edges = []
        node = (1, j)
        while parent[node] is not None:
            prev = parent[node]
            edges.append((prev[1], node[1]) if prev[0] == 0 else (node[1], prev[1]))
            node = prev
        edges.reverse()
        return edges


def northwest_corner(supply: np.ndarray, demand: np.ndarray) -> Basis:
    m, n = len(supply), len(demand)
    s = list(supply)
    d = list(demand)
    flow = np.zeros((m, n), dtype=supply.dtype)
    if supply.dtype == object:
        flow[:] = supply.flat[0] * 0
    cells = []
    i = j = 0
    while True:
        x = min(s[i], d[j])
        flow[i, j] = x
        cells.append((i, j))
        s[i] = s[i] - x
        d[j] = d[j] - x
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif s[i] == 0:
            i += 1
        else:
            j += 1
    return Basis(m, n, cells, flow)


def optimize(basis: Basis, cost: np.ndarray, allowed: np.ndarray | None = None,
             tol=0, max_iter: int | None = None):
    """Pivot ``basis`` to optimality for ``cost`` over the ``allowed`` cells.

    Returns the final potentials ``(u, v)``. ``tol`` is the reduced-cost
    threshold below which a cell may enter (0 for exact arithmetic).
    """
    m, n = basis.m, basis.n
    if max_iter is None:
        max_iter = 50 * (m * n + m + n) + 1000
    stall_limit = m * n + 1
    bland = False
    stalled = 0
    for _ in range(max_iter):
        u, v = basis.potentials(cost)
        rc = cost - u[:, None] - v[None, :]
        neg = rc < -tol
        if allowed is not None:
            neg &= allowed
        candidates = np.flatnonzero(neg)
        if candidates.size == 0:
            return u, v
        if bland:
            k = int(candidates[0])
        else:
            vals = rc.flat[candidates]
            best = min(vals)
            k = int(candidates[next(t for t, x in enumerate(vals) if x == best)])
        ei, ej = divmod(k, n)
        path = basis.path(ei, ej)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(basis.flow[c] for c in minus)
        leave = min(c for c in minus if basis.flow[c] == theta)
        for c in minus:
            basis.flow[c] = basis.flow[c] - theta
        for c in plus:
            basis.flow[c] = basis.flow[c] + theta
        basis.flow[ei, ej] = basis.flow[ei, ej] + theta
        basis.flow[leave] = basis.flow[leave] * 0
        basis.remove(*leave)
        basis.add(ei, ej)
        if theta == 0:
            stalled += 1
            if stalled > stall_limit:
                bland = True
        else:
            stalled = 0
    raise SimplexError(f"no convergence after {max_iter} pivots")
