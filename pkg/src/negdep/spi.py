"""Submodular prophet inequality: fractional solve, greedy OCRS rounding, exact evaluation.

Items ``i`` realize one of ``m`` elements; element ``ij`` is bit ``i*m + j`` of
the element ground set ``E``. The feasibility system lives on items.

The pipeline: continuous greedy over ``b * P''`` gives element marginals ``x``
with ``x_ij <= p_ij``; the online algorithm reveals item ``i`` as active with
probability ``x_ij / p_ij`` given its realization ``ij`` and lets a greedy OCRS
decide. The active elements then follow the product of singletons
distribution with marginals ``x``; everything below is evaluated exactly by
enumerating that distribution.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import permutations, product as cartesian

import numpy as np

from . import lp
from .core import (Distribution, SetFunction, as_table, coverage, elements, expect, gradient,
                   is_monotone, multilinear, to_number)
from .optimize import (FractionalSolution, Matroid, _explicit_decomposition, _rng,
                       basis_decomposition, system_from_json)

MAX_PROPHET_WORK = 2_000_000


# -- instances ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ItemModel:
    p: np.ndarray  # n x m, exact

    def __post_init__(self):
        p = np.array([[to_number(v, True) for v in row] for row in self.p], dtype=object)
        if p.ndim != 2:
            raise ValueError("p must be an n x m table")
        for i, row in enumerate(p):
            if any(v < 0 for v in row):
                raise ValueError(f"item {i} has a negative probability")
            if sum(row) != 1:
                raise ValueError(f"item {i} probabilities sum to {sum(row)}, not 1")
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def m(self) -> int:
        return self.p.shape[1]


@dataclass(eq=False)
class SPIInstance:
    items: ItemModel
    objective: SetFunction
    system: object

    def __post_init__(self):
        n, m = self.items.n, self.items.m
        if self.objective.n != n * m:
            raise ValueError(f"objective has n={self.objective.n}, expected {n * m} elements")
        if self.system.n != n:
            raise ValueError(f"system has n={self.system.n}, expected {n} items")
        if any(v < 0 for v in self.objective.values):
            raise ValueError("objective must be nonnegative")

    @property
    def n(self) -> int:
        return self.items.n

    @property
    def m(self) -> int:
        return self.items.m

    def element(self, i: int, j: int) -> int:
        return i * self.m + j

    def to_json(self) -> dict:
        from .core import _serialize
        return {"n": self.n, "m": self.m,
                "p": [_serialize(row) for row in self.items.p],
                "objective": self.objective.to_json(),
                "system": self.system.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "SPIInstance":
        for key in ("n", "m", "p", "objective", "system"):
            if key not in data:
                raise ValueError(f"missing field '{key}'")
        items = ItemModel(data["p"])
        if (items.n, items.m) != (data["n"], data["m"]):
            raise ValueError("field 'p' does not match n x m")
        return cls(items, SetFunction.from_json(data["objective"], True),
                   system_from_json(data["system"]))


def random_instance(n: int, m: int, seed, rank: int = 1, universe: int = 6) -> SPIInstance:
    """Random monotone coverage instance on a uniform matroid of the given rank."""
    rng = _rng(seed)
    p = []
    for _ in range(n):
        w = rng.integers(1, 10, size=m)
        p.append([Fraction(int(v), int(w.sum())) for v in w])
    covers = [int(rng.integers(1, 1 << universe)) for _ in range(n * m)]
    weights = [int(v) for v in rng.integers(1, 6, size=universe)]
    return SPIInstance(ItemModel(p), coverage(n * m, covers, weights), Matroid.uniform(n, rank))


def _independent_sets(system) -> list[int]:
    return [S for S in range(1 << system.n) if system.independent(S)]


def _realizations(items: ItemModel):
    """``(u, probability)`` over realization vectors with positive probability."""
    for u in cartesian(range(items.m), repeat=items.n):
        pr = Fraction(1)
        for i, j in enumerate(u):
            pr *= items.p[i, j]
            if pr == 0:
                break
        if pr:
            yield u, pr


def prophet_value(inst: SPIInstance):
    """Exact expected value of the best independent set chosen after seeing every realization."""
    indep = _independent_sets(inst.system)
    if inst.m ** inst.n * len(indep) > MAX_PROPHET_WORK:
        raise ValueError("instance too large to enumerate the prophet")
    f = inst.objective
    total = Fraction(0)
    for u, pr in _realizations(inst.items):
        elems = [inst.element(i, j) for i, j in enumerate(u)]
        best = max(f(sum(1 << elems[i] for i in elements(S))) for S in indep)
        total += pr * best
    return total


# -- fractional solve over P'' -----------------------------------------------

def _item_slack(system, z, i):
    """Largest increase of ``z_i`` that keeps ``z`` in the independence polytope."""
    if isinstance(system, Matroid) and system.variant == "uniform":
        return min(1 - z[i], system.k - sum(z))
    if isinstance(system, Matroid) and system.variant == "partition":
        for blk, cap in zip(system.blocks, system.caps):
            if blk >> i & 1:
                return min(1 - z[i], cap - sum(z[e] for e in elements(blk)))
        return Fraction(0)
    # explicit matroid: tightest rank inequality among sets containing i
    return min(system.rank(A) - sum(z[e] for e in elements(A))
               for A in range(1 << system.n) if A >> i & 1)


def p2_oracle(inst: SPIInstance, w) -> tuple[list, list]:
    """Vertex of ``P''`` maximising ``w . x``; returns ``(x over E, z over items)``.

    For a matroid, ``P''`` is the base polytope of a polymatroid on the
    element "segments" ``ij`` with capacities ``p_ij``, so the greedy that
    fills segments in decreasing weight order (lowest index on ties) is
    optimal. Other systems fall back to an exact LP.
    """
    n, m = inst.n, inst.m
    if not isinstance(inst.system, Matroid):
        return _p2_lp(inst, w)
    x = [Fraction(0)] * (n * m)
    z = [Fraction(0)] * n
    order = sorted(range(n * m), key=lambda e: (-round(float(w[e]), 12), e))
    for e in order:
        i, j = divmod(e, m)
        amt = min(inst.items.p[i, j], _item_slack(inst.system, z, i))
        if amt > 0:
            x[e] += amt
            z[i] += amt
    return x, z


def _p2_lp(inst: SPIInstance, w):
    n, m = inst.n, inst.m
    maximal = inst.system.maximal_sets()
    nx_, nl = n * m, len(maximal)
    c = [-Fraction(float(v)).limit_denominator(10**9) for v in w] + [0] * nl
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for e in range(nx_):
        row = [0] * (nx_ + nl)
        row[e] = 1
        A_ub.append(row)
        b_ub.append(inst.items.p[divmod(e, m)])
    for i in range(n):
        row = [0] * (nx_ + nl)
        for j in range(m):
            row[i * m + j] = 1
        for k, M in enumerate(maximal):
            if M >> i & 1:
                row[nx_ + k] = -1
        A_eq.append(row)
        b_eq.append(0)
    A_eq.append([0] * nx_ + [1] * nl)
    b_eq.append(1)
    res = lp.linprog(c, A_ub, b_ub, A_eq, b_eq, exact=True)
    x = list(res.x[:nx_])
    z = [sum(x[i * m:(i + 1) * m]) for i in range(n)]
    return x, z


@dataclass
class ElementFractional:
    x: np.ndarray  # over E, exact
    n: int
    m: int
    b: Fraction
    terms: list  # (maximal item set, weight), certifying agg in b * P_I
    trace: list = field(default_factory=list)

    @property
    def agg(self) -> np.ndarray:
        return np.array([sum(self.x[i * self.m:(i + 1) * self.m]) for i in range(self.n)],
                        dtype=object)

    def matrix(self) -> np.ndarray:
        return self.x.reshape(self.n, self.m)

    def check(self, inst: SPIInstance) -> bool:
        if any(self.x[e] > inst.items.p[divmod(e, self.m)] for e in range(self.n * self.m)):
            return False
        sol = FractionalSolution(self.agg, self.b, self.terms)
        return sol.check() and all(inst.system.independent(M) for M, _ in self.terms)


def _rational(b) -> Fraction:
    return Fraction(b) if not isinstance(b, float) else Fraction(b).limit_denominator(10**4)


def solve_fractional(inst: SPIInstance, b=1, steps: int = 200) -> ElementFractional:
    """Continuous greedy on the element-space multilinear extension over ``b * P''``.

    A float ``b`` is replaced by a nearby rational (denominator at most 10^4).
    """
    b = _rational(b)
    if not 0 <= b <= 1:
        raise ValueError("horizon b must lie in [0, 1]")
    n, m = inst.n, inst.m
    fl = inst.objective.as_float()
    x = [Fraction(0)] * (n * m)
    step = b / steps
    terms: dict[int, Fraction] = {}
    trace = [float(fl(0))]
    if b == 0:
        return ElementFractional(as_table(x, True), n, m, b, [], trace)
    for _ in range(steps):
        g = gradient(fl, np.array([float(v) for v in x]))
        v, z = p2_oracle(inst, g)
        for e in range(n * m):
            x[e] += step * v[e]
        for M, w in _decompose_items(inst.system, z):
            terms[M] = terms.get(M, 0) + step * w
        trace.append(float(multilinear(fl, np.array([float(v) for v in x]))))
    return ElementFractional(as_table(x, True), n, m, b, list(terms.items()), trace)


def _decompose_items(system, z):
    if isinstance(system, Matroid) and system.variant != "explicit":
        return basis_decomposition(system, z)
    return _explicit_decomposition(system, z, True)


# -- OCRS --------------------------------------------------------------------

@dataclass
class OCRSState:
    accepted: int = 0
    log: list = field(default_factory=list)


class GreedyOCRS:
    """Accept an active item whenever the accepted set stays independent."""

    def __init__(self, system):
        self.system = system

    def start(self) -> OCRSState:
        return OCRSState()

    def offer(self, state: OCRSState, i: int, active: bool) -> bool:
        take = active and self.system.independent(state.accepted | 1 << i)
        if take:
            state.accepted |= 1 << i
        state.log.append((i, active, take))
        return take

    def run(self, order, active: int) -> int:
        state = self.start()
        for i in order:
            self.offer(state, i, bool(active >> i & 1))
        return state.accepted


def greedy_ocrs_uniform(k: int, n: int) -> GreedyOCRS:
    return GreedyOCRS(Matroid.uniform(n, k))


def _blocked(system, R: int, i: int) -> bool:
    """Can some independent ``I ⊆ R`` stop ``i`` from being added?"""
    if isinstance(system, Matroid):
        return not system.independent(1 << i) or system.spans(R, i)
    return any(system.independent(I) and not system.independent(I | 1 << i)
               for I in range(1 << system.n) if I & ~R == 0)


def selectability(system, xvec) -> Fraction:
    """Exact selectability of the greedy OCRS under product activations with marginals ``xvec``.

    ``min_i Pr[no independent subset of the other active items blocks i]``.
    This is the worst case over arrival orders, including an adversary that
    sees every activation: placing all other items before ``i`` is worst.
    """
    n = system.n
    xvec = [Fraction(v) for v in xvec]
    worst = Fraction(1)
    for i in range(n):
        if xvec[i] == 0:
            continue
        ok = Fraction(0)
        others = [e for e in range(n) if e != i]
        for bits in range(1 << len(others)):
            R = sum(1 << others[k] for k in range(len(others)) if bits >> k & 1)
            pr = Fraction(1)
            for e in others:
                pr *= xvec[e] if R >> e & 1 else 1 - xvec[e]
            if pr and not _blocked(system, R, i):
                ok += pr
        worst = min(worst, ok)
    return worst


class SubsampledOCRS(GreedyOCRS):
    """Greedy OCRS that first keeps each active item independently with probability 1/2."""

    def __init__(self, system, seed=None):
        super().__init__(system)
        self.rng = _rng(seed)

    def offer(self, state, i, active):
        return super().offer(state, i, active and self.rng.random() < 0.5)


# -- online algorithm ----------------------------------------------------------

def algorithm1(inst: SPIInstance, frac: ElementFractional, ocrs: GreedyOCRS, ordering,
               seed=None) -> int:
    """One run; returns the accepted element set as a bitmask over ``E``."""
    rng = _rng(seed)
    n, m = inst.n, inst.m
    if sorted(ordering) != list(range(n)):
        raise ValueError("ordering must be a permutation of the items")
    P = inst.items.p
    X = frac.matrix()
    for i in range(n):
        for j in range(m):
            if X[i, j] > P[i, j]:
                raise ValueError(f"x[{i},{j}] exceeds p[{i},{j}]")
    state = ocrs.start()
    T = 0
    for i in ordering:
        j = int(rng.choice(m, p=[float(v) for v in P[i]]))
        active = P[i, j] > 0 and rng.random() < float(X[i, j] / P[i, j])
        if ocrs.offer(state, i, active):
            T |= 1 << inst.element(i, j)
    return T


def _pos_outcomes(X: np.ndarray):
    """``(choice, probability)`` with ``choice[i]`` an element index or -1 for none."""
    n, m = X.shape
    per_item = []
    for i in range(n):
        opts = [(-1, 1 - sum(X[i]))] + [(j, X[i, j]) for j in range(m)]
        per_item.append([o for o in opts if o[1] != 0])
    for combo in cartesian(*per_item):
        pr = Fraction(1)
        for _, q in combo:
            pr *= q
        yield tuple(j for j, _ in combo), pr


def product_of_singletons(x, m: int | None = None) -> Distribution:
    """Each item independently contributes element ``ij`` w.p. ``x_ij`` or nothing."""
    X = _as_matrix(x, m)
    n, m = X.shape
    for i in range(n):
        if sum(X[i]) > 1:
            raise ValueError(f"item {i} marginals sum to more than 1")
    pmf = [Fraction(0)] * (1 << (n * m))
    for choice, pr in _pos_outcomes(X):
        pmf[sum(1 << (i * m + j) for i, j in enumerate(choice) if j >= 0)] += pr
    return Distribution(n * m, as_table(pmf, True))


def _as_matrix(x, m=None) -> np.ndarray:
    arr = np.array([[to_number(v, True) for v in row] for row in x], dtype=object) \
        if m is None else np.array([to_number(v, True) for v in np.asarray(x).ravel()],
                                   dtype=object).reshape(-1, m)
    if arr.ndim != 2:
        raise ValueError("x must be an n x m table")
    return arr


def active_distribution(inst: SPIInstance, frac: ElementFractional) -> Distribution:
    """Law of the active elements inside the online algorithm, from realizations and coins."""
    n, m = inst.n, inst.m
    X, P = frac.matrix(), inst.items.p
    pmf = [Fraction(0)] * (1 << (n * m))
    for u, pr in _realizations(inst.items):
        coins = [[(True, X[i, j] / P[i, j]), (False, 1 - X[i, j] / P[i, j])] for i, j in enumerate(u)]
        for flips in cartesian(*coins):
            q = pr
            mask = 0
            for i, (on, c) in enumerate(flips):
                q *= c
                if on:
                    mask |= 1 << inst.element(i, u[i])
            if q:
                pmf[mask] += q
    return Distribution(n * m, as_table(pmf, True))


def algorithm1_value(inst: SPIInstance, frac: ElementFractional, ordering, *,
                     ocrs: GreedyOCRS | None = None, subsample: bool = False):
    """Exact ``E[f(T_ALG)]`` for a fixed arrival order and a greedy OCRS.

    Given the active elements the greedy OCRS is deterministic, so the
    expectation is a sum over the product of singletons outcomes. With
    ``subsample`` each active item is first kept with probability 1/2, which is
    the same as running on marginals ``x / 2``.
    """
    ocrs = ocrs or GreedyOCRS(inst.system)
    X = frac.matrix()
    if subsample:
        X = X / 2
    f = inst.objective
    m = inst.m
    total = Fraction(0)
    for choice, pr in _pos_outcomes(X):
        active = sum(1 << i for i, j in enumerate(choice) if j >= 0)
        acc = ocrs.run(ordering, active)
        total += pr * f(sum(1 << (i * m + choice[i]) for i in elements(acc)))
    return total


def verify_pos_decomposition(x, g: SetFunction, m: int | None = None):
    """Both sides of the product-of-singletons-as-mixture-of-products identity.

    ``lhs = E_{S ~ D}[g]`` for the product of singletons ``D``;
    ``rhs = sum_u E_{S ~ D_u}[g] * prod_i x_{i u_i} / x_i`` with ``D_u`` the
    product distribution on ``{i u_i}`` with item marginals ``x_i``.
    """
    X = _as_matrix(x, m)
    n, m = X.shape
    if g.n != n * m:
        raise ValueError("dimension mismatch")
    agg = [sum(X[i]) for i in range(n)]
    if any(a == 0 for a in agg):
        raise ValueError("every item needs a positive aggregate marginal")
    lhs = expect(g, product_of_singletons(X))
    rhs = 0 * lhs
    for u in cartesian(range(m), repeat=n):
        weight = Fraction(1)
        for i, j in enumerate(u):
            weight *= X[i, j] / agg[i]
        if weight == 0:
            continue
        inner = 0 * lhs
        for R in range(1 << n):
            pr = Fraction(1)
            for i in range(n):
                pr *= agg[i] if R >> i & 1 else 1 - agg[i]
            if pr:
                inner += pr * g(sum(1 << (i * m + u[i]) for i in elements(R)))
        rhs += weight * inner
    return lhs, rhs


# -- competitive ratio -------------------------------------------------------

@dataclass
class SPIReport:
    prophet: float
    F_x: float
    c_measured: float
    ratio_worst: float
    floor: float
    b: float
    mode: str
    values: dict
    inner_ok: bool
    monotone: bool

    def to_json(self) -> dict:
        out = asdict(self)
        out["values"] = {",".join(map(str, k)): float(v) for k, v in self.values.items()}
        return out

    def row(self) -> dict:
        return {k: getattr(self, k) for k in ("prophet", "F_x", "c_measured", "ratio_worst", "floor")}


def _orderings(inst: SPIInstance, mode: str, seed, count: int = 20, fixed=None):
    n = inst.n
    if mode == "worst":
        if n > 6:
            raise ValueError("exhaustive orderings need n <= 6; use mode='random'")
        return list(permutations(range(n)))
    if mode == "fixed":
        return [tuple(fixed) if fixed is not None else tuple(range(n))]
    if mode == "random":
        rng = _rng(seed)
        # heuristic adversary first: items with the least valuable elements arrive early
        f = inst.objective
        score = [max(float(f(1 << inst.element(i, j))) for j in range(inst.m)) for i in range(n)]
        orders = [tuple(sorted(range(n), key=lambda i: (score[i], i)))]
        orders += [tuple(int(v) for v in rng.permutation(n)) for _ in range(count)]
        return orders
    raise ValueError(f"unknown ordering mode {mode!r}")


def spi_competitive_ratio(inst: SPIInstance, b=math.log(2), steps: int = 200,
                          ordering_mode: str = "worst", *, eps: float = 0.05, seed=None,
                          ordering=None, frac: ElementFractional | None = None) -> SPIReport:
    """Run the pipeline and measure ``min over orderings E[f(T_ALG)] / prophet``.

    Monotone objectives use the greedy OCRS directly. Otherwise each active
    item is subsampled with probability 1/2 and the floor carries the extra
    factor 1/4.
    """
    monotone = is_monotone(inst.objective)
    frac = frac or solve_fractional(inst, b, steps)
    opt = prophet_value(inst)
    F = multilinear(inst.objective, frac.x)
    c = selectability(inst.system, frac.agg)
    values = {}
    inner_ok = True
    for order in _orderings(inst, ordering_mode, seed, fixed=ordering):
        v = algorithm1_value(inst, frac, order, subsample=not monotone)
        values[order] = v
        bound = c * F if monotone else c * F / 4
        inner_ok = inner_ok and v >= bound
    worst = min(values.values())
    bf = float(frac.b)
    floor = float(c) * (1 - math.exp(-bf) - eps) * (1 if monotone else 0.25)
    ratio = float(worst / opt) if opt else 1.0
    return SPIReport(float(opt), float(F), float(c), ratio, floor, bf, ordering_mode, values,
                     inner_ok, monotone)
