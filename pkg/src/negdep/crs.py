"""Contention resolution schemes built by linear programming.

For a distribution ``D`` on ``2^U`` and a matroid, the best selectability of any
CRS is the optimum of

    max c   s.t.  sum_T q[S, T] = 1                        for each S in supp(D)
                  sum_S D(S) sum_{T ∋ i} q[S, T] >= c x_i   for each i with x_i > 0

with ``q[S, .]`` a distribution over independent subsets ``T ⊆ S``. Only
maximal independent subsets of each ``S`` are needed: replacing ``T`` by an
independent superset inside ``S`` never lowers any element's probability.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import lp
from .core import Distribution, elements, marginals, submasks
from .dependence import check_wnr, random_wnr
from .optimize import Matroid, _rng, in_polytope

ONE_MINUS_INV_E = 1 - float(np.exp(-1))


@dataclass
class CRSScheme:
    rows: dict  # S -> [(T, prob)]

    def check(self, system) -> bool:
        for S, row in self.rows.items():
            if sum(p for _, p in row) != 1 or any(p < 0 for _, p in row):
                return False
            if any(p and (T & ~S or not system.independent(T)) for T, p in row):
                return False
        return True

    def selection(self, D: Distribution) -> list:
        """``Pr_{S~D}[i in pi(S)]`` for each element."""
        out = [Fraction(0)] * D.n
        for S, row in self.rows.items():
            for T, p in row:
                for i in elements(T):
                    out[i] += D.pmf[S] * p
        return out

    def to_json(self) -> dict:
        return {str(S): [{"T": T, "prob": str(p) if isinstance(p, Fraction) else p}
                         for T, p in row if p]
                for S, row in sorted(self.rows.items())}

    @classmethod
    def from_json(cls, data: dict) -> "CRSScheme":
        return cls({int(S): [(int(e["T"]), Fraction(e["prob"])) for e in row]
                    for S, row in data.items()})


def _maximal_inside(matroid, S: int) -> list[int]:
    indep = [T for T in submasks(S) if matroid.independent(T)]
    return [T for T in indep
            if not any(matroid.independent(T | 1 << e) for e in elements(S & ~T))]


def optimal_crs(matroid, D: Distribution) -> tuple[Fraction, CRSScheme]:
    """Best selectability of any CRS for ``(matroid, D)`` and a scheme attaining it."""
    D = D if D.exact else D.as_exact()
    x = marginals(D)
    if not in_polytope(matroid, x):
        raise ValueError("marginals lie outside the matroid polytope")
    support = D.support()
    cols = [(S, T) for S in support for T in _maximal_inside(matroid, S)]
    active = [i for i in range(D.n) if x[i] > 0]
    if not active:
        return Fraction(1), CRSScheme({S: [(0, Fraction(1))] for S in support})
    nv = len(cols) + 1  # last variable is c
    A_eq, b_eq = [], []
    for S in support:
        A_eq.append([1 if s == S else 0 for s, _ in cols] + [0])
        b_eq.append(1)
    A_ub, b_ub = [], []
    for i in active:
        A_ub.append([-D.pmf[s] if T >> i & 1 else 0 for s, T in cols] + [x[i]])
        b_ub.append(0)
    res = lp.linprog([0] * (nv - 1) + [-1], A_ub, b_ub, A_eq, b_eq, exact=True)
    if res.status != lp.OPTIMAL:
        raise lp.LPError(f"CRS LP reported {res.status}")
    rows: dict[int, list] = {S: [] for S in support}
    for (S, T), q in zip(cols, res.x[:-1]):
        if q:
            rows[S].append((T, q))
    return res.x[-1], CRSScheme(rows)


def apply_crs(scheme: CRSScheme, S: int, seed=None) -> int:
    if S not in scheme.rows:
        import logging
        logging.getLogger(__name__).warning("set %d is outside the scheme's support", S)
        return 0
    row = scheme.rows[S]
    rng = _rng(seed)
    k = rng.choice(len(row), p=[float(p) for _, p in row])
    return row[k][0]


def scale_into_polytope(matroid: Matroid, D: Distribution) -> Distribution:
    """Mix ``D`` with the point mass on the empty set just enough to land in the polytope."""
    x = marginals(D)
    lam = Fraction(1)
    for blk, cap in _block_caps(matroid):
        s = sum(x[i] for i in elements(blk))
        if s > cap:
            lam = min(lam, Fraction(cap) / s)
    if lam == 1:
        return D
    pmf = D.pmf * lam
    pmf[0] += 1 - lam
    return Distribution(D.n, pmf)


def _block_caps(matroid: Matroid):
    if matroid.variant == "uniform":
        return [((1 << matroid.n) - 1, matroid.k)]
    if matroid.variant == "partition":
        return list(zip(matroid.blocks, matroid.caps))
    raise ValueError("rescaling needs a uniform or partition matroid")


@dataclass
class CRSReport:
    c_stars: list
    skipped: int

    @property
    def minimum(self):
        return min(self.c_stars)

    @property
    def median(self):
        return statistics.median(self.c_stars)

    @property
    def holds(self) -> bool:
        return all(c >= ONE_MINUS_INV_E - 1e-9 for c in self.c_stars)

    def to_json(self) -> dict:
        return {"trials": len(self.c_stars), "min": float(self.minimum),
                "median": float(self.median), "bound": ONE_MINUS_INV_E,
                "holds": self.holds, "rescaled_not_wnr": self.skipped}


def verify_crs_theorem(matroid: Matroid, trials: int, seed=None) -> CRSReport:
    """``optimal_crs`` on random WNR distributions whose marginals lie in the polytope.

    Draws that are outside the polytope are mixed with the empty set; the
    mixture is checked for WNR again and redrawn if it lost the property.
    """
    if matroid.n > 4:
        raise ValueError("WNR rejection sampling is limited to n <= 4 here")
    rng = _rng(seed)
    c_stars, skipped = [], 0
    while len(c_stars) < trials:
        D = scale_into_polytope(matroid, random_wnr(matroid.n, int(rng.integers(2**63))))
        if not check_wnr(D).holds:
            skipped += 1
            continue
        c_stars.append(optimal_crs(matroid, D)[0])
    return CRSReport(c_stars, skipped)
