"""Matroids, set systems, continuous greedy, and swap rounding.

A *system* is anything with ``n``, ``independent(mask)`` and
``maximal_sets()``; :class:`Matroid` and :class:`SetSystem` both qualify.
Polytopes follow the convention of the applications: ``P_I`` is the convex hull
of the maximal independent sets, so for a matroid it is the base polytope.

Fractional points are accumulated exactly. Gradients are evaluated in floating
point because they only decide which vertex the linear oracle returns; the
vertices themselves and the step sizes are rationals, so every
:class:`FractionalSolution` satisfies its decomposition identity exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import lp
from .core import (Distribution, SetFunction, as_table, elements, gradient, is_monotone,
                   marginals, mask_of, multilinear, popcount, project)
from .dependence import check_wnr


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


# -- systems -----------------------------------------------------------------

def _downward_closed(n: int, sets) -> frozenset:
    family = frozenset(int(m) for m in sets)
    if 0 not in family:
        raise ValueError("family must contain the empty set")
    for m in family:
        if m >> n:
            raise ValueError(f"set {m:#b} has elements outside the {n}-element ground set")
        for e in elements(m):
            if m & ~(1 << e) not in family:
                raise ValueError(f"family is not downward-closed at {m:#b}")
    return family


class SetSystem:
    """Explicit downward-closed family of bitmasks."""

    variant = "system"

    def __init__(self, n: int, sets: Sequence[int]):
        self.n = n
        self.family = _downward_closed(n, sets)

    def independent(self, mask: int) -> bool:
        return mask in self.family

    @cached_property
    def _maximal(self) -> list[int]:
        full = (1 << self.n) - 1
        return sorted(m for m in self.family
                      if not any(m | 1 << e in self.family for e in elements(full & ~m)))

    def maximal_sets(self) -> list[int]:
        return list(self._maximal)

    def to_json(self) -> dict:
        return {"variant": "system", "n": self.n, "sets": sorted(self.family)}

    def __repr__(self):
        return f"SetSystem(n={self.n}, {len(self.family)} sets)"


class Matroid:
    """Uniform, partition, or explicit matroid on ``n`` elements."""

    def __init__(self, variant: str, n: int, *, k: int | None = None, blocks=None, caps=None,
                 sets=None):
        self.variant = variant
        self.n = n
        if variant == "uniform":
            if k is None or not 0 <= k:
                raise ValueError("uniform matroid needs k >= 0")
            self.k = k
        elif variant == "partition":
            blocks = [mask_of(b) if not isinstance(b, int) else b for b in blocks]
            if len(blocks) != len(caps):
                raise ValueError("one capacity per block")
            seen = 0
            for b in blocks:
                if b & seen or b >> n:
                    raise ValueError("blocks must be disjoint subsets of the ground set")
                seen |= b
            if any(c < 0 for c in caps):
                raise ValueError("capacities must be nonnegative")
            self.blocks, self.caps = list(blocks), list(caps)
        elif variant == "explicit":
            self.family = _downward_closed(n, sets)
            self._check_exchange()
        else:
            raise ValueError(f"unknown matroid variant {variant!r}")

    @classmethod
    def uniform(cls, n: int, k: int) -> "Matroid":
        return cls("uniform", n, k=k)

    @classmethod
    def partition(cls, blocks, caps, n: int | None = None) -> "Matroid":
        blocks = [mask_of(b) if not isinstance(b, int) else b for b in blocks]
        n = max((b.bit_length() for b in blocks), default=0) if n is None else n
        return cls("partition", n, blocks=blocks, caps=caps)

    @classmethod
    def explicit(cls, n: int, sets) -> "Matroid":
        return cls("explicit", n, sets=sets)

    def _check_exchange(self):
        by_size = sorted(self.family, key=popcount)
        for I in by_size:
            for J in by_size:
                if popcount(J) <= popcount(I):
                    continue
                if not any(I | 1 << e in self.family for e in elements(J & ~I)):
                    raise ValueError(f"exchange axiom fails for I={I:#b}, J={J:#b}")

    def independent(self, mask: int) -> bool:
        if self.variant == "uniform":
            return popcount(mask) <= self.k
        if self.variant == "partition":
            outside = mask & ~sum(self.blocks)
            return not outside and all(popcount(mask & b) <= c for b, c in zip(self.blocks, self.caps))
        return mask in self.family

    def rank(self, mask: int | None = None) -> int:
        mask = (1 << self.n) - 1 if mask is None else mask
        if self.variant == "uniform":
            return min(self.k, popcount(mask))
        if self.variant == "partition":
            return sum(min(c, popcount(mask & b)) for b, c in zip(self.blocks, self.caps))
        return max(popcount(m) for m in self.family if m & ~mask == 0)

    def spans(self, mask: int, e: int) -> bool:
        return self.rank(mask | 1 << e) == self.rank(mask)

    def greedy(self, w) -> int:
        """Max-weight base: scan by decreasing weight, lowest index first on ties."""
        order = sorted(range(self.n), key=lambda i: (-_tie_key(w[i]), i))
        S = 0
        for i in order:
            if self.independent(S | 1 << i):
                S |= 1 << i
        return S

    @lru_cache(maxsize=None)
    def maximal_sets(self) -> list[int]:
        r = self.rank()
        return [m for m in range(1 << self.n) if popcount(m) == r and self.independent(m)]

    def to_json(self) -> dict:
        if self.variant == "uniform":
            return {"variant": "uniform", "n": self.n, "k": self.k}
        if self.variant == "partition":
            return {"variant": "partition", "n": self.n,
                    "blocks": [elements(b) for b in self.blocks], "caps": list(self.caps)}
        return {"variant": "explicit", "n": self.n, "sets": sorted(self.family)}

    def __repr__(self):
        if self.variant == "uniform":
            return f"Matroid.uniform({self.n}, {self.k})"
        if self.variant == "partition":
            return f"Matroid.partition({[elements(b) for b in self.blocks]}, {self.caps})"
        return f"Matroid.explicit(n={self.n}, {len(self.family)} sets)"


def _tie_key(v) -> float:
    # gradients come from float arithmetic; round so exact ties stay ties
    return round(float(v), 12)


def system_from_json(data: dict):
    if not isinstance(data, dict) or "variant" not in data:
        raise ValueError("missing field 'variant'")
    variant = data["variant"]
    try:
        if variant == "uniform":
            return Matroid.uniform(int(data["n"]), int(data["k"]))
        if variant == "partition":
            blocks = [mask_of(b) for b in data["blocks"]]
            return Matroid.partition(blocks, [int(c) for c in data["caps"]], data.get("n"))
        if variant == "explicit":
            return Matroid.explicit(int(data["n"]), data["sets"])
        if variant == "system":
            return SetSystem(int(data["n"]), data["sets"])
    except KeyError as err:
        raise ValueError(f"missing field '{err.args[0]}'") from None
    raise ValueError(f"unknown variant {variant!r}")


def linear_oracle(system, w) -> int:
    """Maximal independent set of maximum weight; lowest index / bitmask wins ties."""
    if isinstance(system, Matroid):
        return system.greedy(w)
    best, best_val = None, None
    for m in system.maximal_sets():
        val = sum(_tie_key(w[i]) for i in elements(m))
        if best_val is None or val > best_val:
            best, best_val = m, val
    return best


def brute_force_max(f: SetFunction, system) -> tuple[int, object]:
    best, best_val = 0, f(0)
    for m in range(1, 1 << system.n):
        if f(m) > best_val and system.independent(m):
            best, best_val = m, f(m)
    return best, best_val


# -- fractional solutions ----------------------------------------------------

@dataclass
class FractionalSolution:
    x: np.ndarray
    b: object
    terms: list  # (mask, weight) pairs
    trace: list = field(default_factory=list)

    def check(self) -> bool:
        """The decomposition identity: weights sum to ``b`` and reproduce ``x``."""
        n = len(self.x)
        if sum((w for _, w in self.terms), Fraction(0)) != self.b:
            return False
        if any(w < 0 for _, w in self.terms):
            return False
        total = [Fraction(0)] * n
        for m, w in self.terms:
            for i in elements(m):
                total[i] += w
        return all(t == xi for t, xi in zip(total, self.x))


def _merge_terms(terms) -> list:
    acc: dict[int, Fraction] = {}
    for m, w in terms:
        if w:
            acc[m] = acc.get(m, 0) + w
    return list(acc.items())


def continuous_greedy(f: SetFunction, system, b=1, steps: int = 100) -> FractionalSolution:
    """``steps`` moves of size ``b/steps`` towards the best vertex under the gradient."""
    if not is_monotone(f):
        raise ValueError("continuous greedy needs a monotone function")
    if steps < 1:
        raise ValueError("steps must be positive")
    b = Fraction(b) if not isinstance(b, float) else Fraction(b).limit_denominator(10**6)
    if not 0 <= b <= 1:
        raise ValueError("horizon b must lie in [0, 1]")
    n = f.n
    fl = f.as_float()
    x = [Fraction(0)] * n
    step = b / steps
    terms = []
    trace = [float(fl(0))]
    if b == 0:
        return FractionalSolution(as_table(x, True), b, [], trace)
    for _ in range(steps):
        g = gradient(fl, np.array([float(v) for v in x]))
        B = linear_oracle(system, g)
        for i in elements(B):
            x[i] += step
        terms.append((B, step))
        trace.append(float(multilinear(fl, np.array([float(v) for v in x]))))
    return FractionalSolution(as_table(x, True), b, _merge_terms(terms), trace)


# -- basis decompositions ----------------------------------------------------

def _blocks(matroid: Matroid):
    if matroid.variant == "uniform":
        return [((1 << matroid.n) - 1, matroid.k)]
    if matroid.variant == "partition":
        return list(zip(matroid.blocks, matroid.caps))
    raise ValueError("closed-form decomposition needs a uniform or partition matroid")


def in_polytope(matroid: Matroid, x, bases: bool = False) -> bool:
    """Membership in the independence polytope, or the base polytope if ``bases``."""
    x = as_table(x)
    if any(v < 0 or v > 1 for v in x):
        return False
    if matroid.variant == "explicit":
        return _explicit_decomposition(matroid, x, bases) is not None
    covered = 0
    for blk, cap in _blocks(matroid):
        s = sum(x[i] for i in elements(blk))
        r = min(cap, popcount(blk))
        if s > r or (bases and s != r):
            return False
        covered |= blk
    return all(x[i] == 0 for i in range(matroid.n) if not covered >> i & 1)


def _padded(matroid: Matroid, x):
    """Extend each block with dummy elements so that ``x`` lifts into the base polytope.

    Returns ``(blocks, caps, y)`` on the extended ground set (real elements first).
    """
    n = matroid.n
    y = [Fraction(v) for v in x]
    blocks, caps = [], []
    nxt = n
    for blk, cap in _blocks(matroid):
        r = min(cap, popcount(blk))
        short = r - sum(y[i] for i in elements(blk))
        ext = blk
        if short > 0:
            for _ in range(r):
                y.append(short / r)
                ext |= 1 << nxt
                nxt += 1
        blocks.append(ext)
        caps.append(r)
    return blocks, caps, y


def _peel(blocks, caps, y) -> list:
    """Carathéodory peeling in the base polytope of a partition matroid (exact)."""
    mu = Fraction(1)
    y = list(y)
    terms = []
    while mu > 0:
        B = 0
        for blk, cap in zip(blocks, caps):
            top = sorted(elements(blk), key=lambda i: (-y[i], i))[:cap]
            B |= mask_of(top)
        inside = [y[i] for i in elements(B)]
        outside = [mu - y[i] for blk in blocks for i in elements(blk & ~B)]
        lam = min(inside + outside + [mu])
        if lam <= 0:
            raise ValueError("point is not in the polytope")
        for i in elements(B):
            y[i] -= lam
        mu -= lam
        terms.append((B, lam))
    return terms


def _explicit_decomposition(matroid, x, bases: bool):
    family = matroid.maximal_sets() if bases else sorted(matroid.family)
    n = matroid.n
    A_eq = [[1] * len(family)]
    b_eq = [1]
    for i in range(n):
        A_eq.append([1 if m >> i & 1 else 0 for m in family])
        b_eq.append(Fraction(x[i]))
    res = lp.linprog([0] * len(family), A_eq=A_eq, b_eq=b_eq, exact=True)
    if res.status != lp.OPTIMAL:
        return None
    return [(m, w) for m, w in zip(family, res.x) if w != 0]


def basis_decomposition(matroid: Matroid, x) -> list:
    """Write ``x`` as a convex combination of independent sets.

    If ``x`` is in the base polytope the sets are bases. Uniform and partition
    matroids use exact greedy peeling (after padding ``x`` up to a base-polytope
    point with dummy elements); explicit matroids solve a feasibility LP.
    """
    x = [Fraction(v) for v in as_table(x, True)]
    if not in_polytope(matroid, x):
        raise ValueError("marginals lie outside the matroid polytope")
    if matroid.variant == "explicit":
        return _explicit_decomposition(matroid, x, False)
    blocks, caps, y = _padded(matroid, x)
    real = (1 << matroid.n) - 1
    return _merge_terms((m & real, w) for m, w in _peel(blocks, caps, y))


def fractional_from_decomposition(n: int, terms, b=1) -> FractionalSolution:
    x = [Fraction(0)] * n
    for m, w in terms:
        for i in elements(m):
            x[i] += w
    return FractionalSolution(as_table(x, True), Fraction(b), list(terms))


# -- swap rounding -----------------------------------------------------------

def _exchange(matroid, C: int, B: int, i: int) -> int:
    """Lowest ``j`` in ``B \\ C`` with both ``C - i + j`` and ``B - j + i`` independent."""
    for j in elements(B & ~C):
        if matroid.independent((C & ~(1 << i)) | 1 << j) and \
                matroid.independent((B & ~(1 << j)) | 1 << i):
            return j
    raise ValueError("no symmetric exchange; are both sets bases of the same matroid?")


def _merge_paths(matroid, C: int, wc, B: int, wb):
    """All outcomes of merging ``C`` (weight wc) with ``B`` (weight wb), with probabilities."""
    if C == B:
        return [(C, Fraction(1))]
    i = elements(C & ~B)[0]
    j = _exchange(matroid, C, B, i)
    keep = wc / (wc + wb)
    out = []
    for m, p in _merge_paths(matroid, C, wc, (B & ~(1 << j)) | 1 << i, wb):
        out.append((m, p * keep))
    for m, p in _merge_paths(matroid, (C & ~(1 << i)) | 1 << j, wc, B, wb):
        out.append((m, p * (1 - keep)))
    return out


def _check_bases(matroid, sol: FractionalSolution):
    r = matroid.rank()
    for m, _ in sol.terms:
        if popcount(m) != r or not matroid.independent(m):
            raise ValueError("decomposition is not over bases")
    if sol.b != 1:
        raise ValueError("swap rounding needs a decomposition with total weight 1")


def swap_round(matroid: Matroid, sol: FractionalSolution, seed=None) -> int:
    """Randomized swap rounding of a convex combination of bases."""
    _check_bases(matroid, sol)
    rng = _rng(seed)
    terms = [(m, Fraction(w)) for m, w in sol.terms if w]
    C, wc = terms[0]
    for B, wb in terms[1:]:
        while C != B:
            i = elements(C & ~B)[0]
            j = _exchange(matroid, C, B, i)
            if rng.random() < wc / (wc + wb):
                B = (B & ~(1 << j)) | 1 << i
            else:
                C = (C & ~(1 << i)) | 1 << j
        wc += wb
    return C


def swap_round_distribution(matroid: Matroid, sol: FractionalSolution) -> Distribution:
    """Exact output law of :func:`swap_round`, by enumerating every coin path."""
    _check_bases(matroid, sol)
    terms = [(m, Fraction(w)) for m, w in sol.terms if w]
    state = {terms[0][0]: Fraction(1)}
    wc = terms[0][1]
    for B, wb in terms[1:]:
        nxt: dict[int, Fraction] = {}
        for C, p in state.items():
            for m, q in _merge_paths(matroid, C, wc, B, wb):
                nxt[m] = nxt.get(m, 0) + p * q
        state = nxt
        wc += wb
    return Distribution.from_mapping(matroid.n, state)


def wnr_sampler(system, x, seed=None, distribution: Distribution | None = None) -> int:
    """One draw from a WNR distribution on the system's independent sets with marginals ``x``.

    Uniform and partition matroids use swap rounding (on the padded matroid
    when ``x`` is below the base polytope). Any other system needs an explicit
    ``distribution``, which is validated.
    """
    rng = _rng(seed)
    if distribution is not None:
        _validate_supplied(system, x, distribution)
        return int(rng.choice(1 << distribution.n, p=distribution.pmf.astype(float)))
    if not isinstance(system, Matroid) or system.variant == "explicit":
        raise ValueError("no built-in WNR sampler for this system; supply a distribution")
    ext, y = _sampler_solution(system, tuple(Fraction(v) for v in as_table(x, True)))
    return swap_round(ext, y, rng) & ((1 << system.n) - 1)


@lru_cache(maxsize=256)
def _sampler_solution(matroid: Matroid, x: tuple):
    if not in_polytope(matroid, list(x)):
        raise ValueError("marginals lie outside the matroid polytope")
    blocks, caps, y = _padded(matroid, x)
    ext = Matroid.partition(blocks, caps, n=len(y))
    return ext, fractional_from_decomposition(ext.n, _merge_terms(_peel(blocks, caps, y)))


def sampler_distribution(matroid: Matroid, x) -> Distribution:
    """Exact law of :func:`wnr_sampler` on a uniform or partition matroid."""
    ext, sol = _sampler_solution(matroid, tuple(Fraction(v) for v in as_table(x, True)))
    return project(swap_round_distribution(ext, sol), (1 << matroid.n) - 1)


def _validate_supplied(system, x, D: Distribution):
    x = as_table(x, D.exact)
    mx = marginals(D)
    slack = 0 if D.exact else 1e-9
    if D.n != system.n or any(abs(a - b) > slack for a, b in zip(mx, x)):
        raise ValueError("supplied distribution does not have marginals x")
    if any(p != 0 and not system.independent(m) for m, p in enumerate(D.pmf)):
        raise ValueError("supplied distribution puts mass on dependent sets")
    if not check_wnr(D).holds:
        raise ValueError("supplied distribution is not WNR")


_CG_CACHE: dict = {}


def maximize_submodular(f: SetFunction, system, steps: int = 100, seed=None,
                        distribution: Distribution | None = None) -> int:
    """Continuous greedy (horizon 1) followed by a WNR sampler at the fractional point.

    The fractional point depends only on ``(f, system, steps)`` and is cached,
    so repeated calls with different seeds only pay for the rounding.
    """
    key = (f, json.dumps(system.to_json()), steps)
    sol = _CG_CACHE.get(key)
    if sol is None:
        sol = _CG_CACHE[key] = continuous_greedy(f, system, 1, steps)
    return wnr_sampler(system, sol.x, seed, distribution)
