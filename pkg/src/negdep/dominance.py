"""Submodular Dominance: ``E_D[f] >= F(x)`` for every submodular ``f``.

The inequality is invariant under adding constants and under positive scaling,
so it suffices to look at ``f`` with values in ``[-1, 1]``. Minimising the gap
``E_D[f] - F(x) = sum_S (D(S) - prod_x(S)) f(S)`` over that box and the local
submodularity inequalities is a linear program; dominance holds iff its
optimum is zero (``f = 0`` is always feasible).

The program is solved over ``g = f + 1 in [0, 2]``; because the objective
coefficients sum to zero, ``c.f = c.g``. With this shift every constraint has a
nonnegative right-hand side and the slack basis is feasible, so the simplex
needs no phase 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize, sparse

from . import lp
from .core import (LP_TOL, Distribution, SetFunction, _exact_text, as_table, expect,
                   is_submodular, marginals, multilinear, product_pmf)
from .dependence import check_ncd

# Above this size the dense simplex gets slow (n=5 needs ~160 exact pivots,
# n=8 tens of thousands); larger programs go to HiGHS and the certificate is
# re-verified in exact arithmetic.
SIMPLEX_MAX_N = 5
SNAP_DENOMINATOR = 10**6


@dataclass
class DominanceVerdict:
    holds: bool
    gap: object
    certificate: SetFunction | None = None
    solver: str = "simplex"

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        gap = _exact_text(self.gap) if isinstance(self.gap, Fraction) else float(self.gap)
        cert = None if self.certificate is None else self.certificate.to_json()
        return {"holds": self.holds, "gap": gap, "certificate": cert, "solver": self.solver}


def dominance_gap(D: Distribution, f: SetFunction):
    """``E_D[f] - F(marginals(D))``."""
    return expect(f, D) - multilinear(f, marginals(D))


def _submodularity_rows(n: int):
    """Index quadruples ``(S, S+i, S+j, S+i+j)`` for the local inequalities."""
    quads = []
    for S in range(1 << n):
        for i in range(n):
            if S >> i & 1:
                continue
            for j in range(i + 1, n):
                if not S >> j & 1:
                    quads.append((S, S | 1 << i, S | 1 << j, S | 1 << i | 1 << j))
    return quads


def _objective(D: Distribution) -> np.ndarray:
    return D.pmf - product_pmf(marginals(D))


def _solve_simplex(D: Distribution, exact: bool):
    n, N = D.n, 1 << D.n
    c = _objective(D)
    A, b = [], []
    for S, Si, Sj, Sij in _submodularity_rows(n):
        row = [0] * N
        row[S] += 1
        row[Sij] += 1
        row[Si] -= 1
        row[Sj] -= 1
        A.append(row)
        b.append(0)
    for S in range(N):
        row = [0] * N
        row[S] = 1
        A.append(row)
        b.append(2)
    res = lp.linprog(list(c), A, b, exact=exact, eps=LP_TOL)
    if res.status != lp.OPTIMAL:
        raise lp.LPError(f"dominance LP reported {res.status}")
    one = Fraction(1) if exact else 1.0
    return res.value, as_table([g - one for g in res.x], exact)


def _solve_highs(D: Distribution):
    n, N = D.n, 1 << D.n
    quads = _submodularity_rows(n)
    rows = np.repeat(np.arange(len(quads)), 4)
    cols = np.array(quads).ravel()
    vals = np.tile([1.0, -1.0, -1.0, 1.0], len(quads))
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(len(quads), N))
    c = np.array([float(v) for v in _objective(D)])
    res = optimize.linprog(c, A_ub=A, b_ub=np.zeros(len(quads)), bounds=(0, 2), method="highs")
    if res.status != 0:
        raise lp.LPError(f"HiGHS: {res.message}")
    return float(res.fun), res.x - 1.0


def _snap(f: np.ndarray) -> SetFunction | None:
    """Rational rounding of a float certificate, kept only if it is still valid."""
    vals = [Fraction(float(v)).limit_denominator(SNAP_DENOMINATOR) for v in f]
    g = SetFunction(len(f).bit_length() - 1, as_table(vals, True))
    if is_submodular(g) and all(-1 <= v <= 1 for v in vals):
        return g
    return None


def check_dominance(D: Distribution, *, exact: bool | None = None, solver: str = "auto",
                    tol: float = LP_TOL) -> DominanceVerdict:
    """Minimise the dominance gap over submodular ``f`` with values in ``[-1, 1]``.

    ``solver`` is ``"simplex"`` (the dense Bland simplex, exact or float),
    ``"highs"`` (scipy's HiGHS, then exact re-verification of the certificate)
    or ``"auto"`` (simplex up to ``n = 5``).
    """
    exact = D.exact if exact is None else exact
    D = D.as_exact() if exact and not D.exact else D
    if solver == "auto":
        solver = "simplex" if D.n <= SIMPLEX_MAX_N else "highs"
    if solver == "simplex":
        try:
            value, f = _solve_simplex(D, exact)
        except lp.LPError:
            if exact:
                raise
            # float pivoting stalled; the exact tableau always terminates
            value, f = _solve_simplex(D.as_exact(), True)
            exact = True
        slack = 0 if exact else tol
        if value >= -slack:
            return DominanceVerdict(True, 0 * value, None, "simplex")
        return DominanceVerdict(False, value, SetFunction(D.n, f), "simplex")
    if solver != "highs":
        raise ValueError(f"unknown solver {solver!r}")

    value, f = _solve_highs(D)
    if value >= -tol:
        return DominanceVerdict(True, Fraction(0) if exact else 0.0, None, "highs")
    if not exact:
        return DominanceVerdict(False, value, SetFunction(D.n, f), "highs")
    cert = _snap(f)
    if cert is not None:
        gap = dominance_gap(D, cert)
        if gap < 0 and abs(float(gap) - value) <= 1e-6:
            return DominanceVerdict(False, gap, cert, "highs")
    value, f = _solve_simplex(D, True)
    return DominanceVerdict(False, value, SetFunction(D.n, f), "simplex")


def rank_certificates(T: int, n: int) -> tuple[SetFunction, SetFunction]:
    """``f_T(S) = 1 - 1[T ∩ S = ∅]`` and ``g_T(S) = |S ∩ T| - 1[T ⊆ S]``.

    ``f_T`` is the rank function of the rank-1 uniform matroid on ``T`` and
    ``g_T`` that of the rank ``|T| - 1`` uniform matroid on ``T``. Dominance
    against ``f_T`` bounds ``Pr[S ∩ T = ∅]`` and against ``g_T`` bounds
    ``Pr[T ⊆ S]``, which are the two cylinder inequalities.
    """
    if T == 0:
        raise ValueError("T must be nonempty")
    if T >> n:
        raise ValueError(f"T={T:#b} is not a subset of a {n}-element ground set")
    f = SetFunction.from_callable(n, lambda S: 0 if S & T == 0 else 1)
    g = SetFunction.from_callable(n, lambda S: bin(S & T).count("1") - (S & T == T))
    return f, g


def verify_necessity(D: Distribution, **kwargs) -> bool:
    """Dominance implies NCD on ``D``; never expected to return False."""
    return not check_dominance(D, **kwargs).holds or check_ncd(D).holds
