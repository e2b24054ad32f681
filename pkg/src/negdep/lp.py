"""Dense two-phase tableau simplex with Bland's rule.

Solves ``min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0`` over either
exact rationals (``Fraction`` entries, zero tolerance) or floats. Bland's rule
(lowest-index entering column, lowest-index leaving basic variable on ratio
ties) rules out cycling, which matters here: the LPs we solve are heavily
degenerate.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    value: object
    pivots: int


def _convert(rows, exact: bool, width: int) -> np.ndarray:
    out = np.empty((len(rows), width), dtype=object if exact else float)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"row {r} has {len(row)} entries, expected {width}")
        out[r] = [Fraction(v) if exact else float(v) for v in row]
    return out


class _Tableau:
    """Rows ``T[r] = (coefficients..., rhs)``; objective row stores reduced costs."""

    def __init__(self, T: np.ndarray, basis: list[int], exact: bool, eps: float):
        self.T = T
        self.basis = basis
        self.exact = exact
        self.eps = 0 if exact else eps
        self.pivots = 0

    def pivot(self, r: int, j: int):
        T = self.T
        T[r] = T[r] / T[r, j]
        if self.exact:
            cols = np.flatnonzero(T[r] != 0)
            rows = [k for k in np.flatnonzero(T[:, j] != 0) if k != r]
            if rows:
                T[np.ix_(rows, cols)] -= np.outer(T[rows, j], T[r, cols])
        else:
            col = T[:, j].copy()
            col[r] = 0.0
            T -= np.outer(col, T[r])
            T[np.abs(T) < 1e-14] = 0.0
        self.basis[r] = j
        self.pivots += 1

    def run(self, obj: int, allowed: int, max_pivots: int) -> str:
        """Minimise the objective stored in row ``obj`` over the first ``allowed`` columns."""
        T = self.T
        m = len(self.basis)
        eps = self.eps
        while True:
            costs = T[obj, :allowed]
            entering = next((j for j in range(allowed) if costs[j] < -eps), None)
            if entering is None:
                return OPTIMAL
            best = None
            for r in range(m):
                a = T[r, entering]
                if a > eps:
                    ratio = T[r, -1] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], entering)
            if self.pivots > max_pivots:
                raise LPError(f"simplex did not converge within {max_pivots} pivots")


def linprog(c: Sequence, A_ub=(), b_ub=(), A_eq=(), b_eq=(), *, exact: bool = True,
            eps: float = 1e-9, max_pivots: int = 200_000) -> LPResult:
    """Solve the LP; returns status, an optimal vertex, and the optimal value."""
    nv = len(c)
    A_ub, A_eq = list(A_ub), list(A_eq)
    b_ub, b_eq = list(b_ub), list(b_eq)
    if len(A_ub) != len(b_ub) or len(A_eq) != len(b_eq):
        raise ValueError("constraint matrix and right-hand side lengths differ")
    n_ub, n_eq = len(A_ub), len(A_eq)
    m = n_ub + n_eq
    A = _convert(A_ub + A_eq, exact, nv) if m else np.empty((0, nv), dtype=object if exact else float)
    b = _convert([[v] for v in b_ub + b_eq], exact, 1)[:, 0] if m else np.empty(0)
    cost = _convert([list(c)], exact, nv)[0]
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    # column layout: [structural | slacks | artificials | rhs]
    needs_art = [r >= n_ub or b[r] < 0 for r in range(m)]
    n_art = sum(needs_art)
    width = nv + n_ub + n_art + 1
    T = np.empty((m + 2, width), dtype=object if exact else float)
    T[:] = zero
    basis = []
    art = nv + n_ub
    for r in range(m):
        sign = -one if b[r] < 0 else one
        T[r, :nv] = A[r] * sign
        if r < n_ub:
            T[r, nv + r] = sign
        T[r, -1] = b[r] * sign
        if needs_art[r]:
            T[r, art] = one
            basis.append(art)
            art += 1
        else:
            basis.append(nv + r)
    obj, phase1 = m, m + 1
    T[obj, :nv] = cost
    tab = _Tableau(T, basis, exact, eps)

    if n_art:
        # phase 1 objective: sum of artificials, expressed in the non-basic columns
        T[phase1, nv + n_ub:nv + n_ub + n_art] = one
        for r in range(m):
            if needs_art[r]:
                T[phase1] -= T[r]
        tab.run(phase1, width - 1, max_pivots)
        if -T[phase1, -1] > tab.eps * max(1, m):
            return LPResult(INFEASIBLE, None, None, tab.pivots)
        # drive artificials still basic (at level zero) out of the basis
        for r in range(m):
            if basis[r] >= nv + n_ub:
                j = next((j for j in range(nv + n_ub) if abs(T[r, j]) > tab.eps), None)
                if j is not None:
                    tab.pivot(r, j)
    # make the phase 2 objective consistent with the current basis
    for r in range(m):
        j = basis[r]
        if j < nv + n_ub and T[obj, j] != 0:
            T[obj] -= T[obj, j] * T[r]
    keep = [r for r in range(m) if basis[r] < nv + n_ub]
    if len(keep) < m:
        T = np.vstack([T[keep], T[obj:obj + 1]])
        basis[:] = [basis[r] for r in keep]
        tab.T = T
        obj = len(keep)
    status = tab.run(obj, nv + n_ub, max_pivots)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None, tab.pivots)
    x = np.array([zero] * nv, dtype=object if exact else float)
    for r, j in enumerate(basis):
        if j < nv:
            x[j] = T[r, -1]
    value = np.dot(cost, x)
    return LPResult(OPTIMAL, x, value, tab.pivots)
