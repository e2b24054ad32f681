"""Checkers for negative dependence (WNR, NA, NR, NCD) that return certificates.

Every negative verdict carries a :class:`Certificate` -- an element, a monotone
event, a cylinder -- whose ``margin`` is the amount by which the defining
inequality fails. :func:`reverify` recomputes that amount from the raw
definition, independently of the search that found it.

Monotone functions enter only through upset indicators. A monotone ``f`` is a
nonnegative combination of upset indicators plus a constant
(``f = f_min + sum_t (t_{k+1} - t_k) 1[f >= t_{k+1}]`` over its sorted values),
and every inequality below is linear in ``f`` and unaffected by constants, so
upsets are the extreme cases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import networkx as nx
import numpy as np
import sympy

from .core import (Distribution, _exact_text, as_table, condition_on_element, elements, embed_mask,
                   marginals, membership, popcount, submasks, tol)


@dataclass
class Certificate:
    kind: str
    data: dict
    margin: object

    def to_json(self) -> dict:
        margin = self.margin
        margin = _exact_text(margin) if isinstance(margin, Fraction) else float(margin)
        return {"kind": self.kind, "data": self.data, "margin": margin}


@dataclass
class Verdict:
    holds: bool
    witness: Certificate | None = None
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        return {"holds": self.holds, "witness": None if self.witness is None else self.witness.to_json()}


# -- upsets ------------------------------------------------------------------

@lru_cache(maxsize=None)
def upset_families(k: int) -> tuple[int, ...]:
    """All upward-closed families of ``2^[k]``, each as a bitmask over the ``2^k`` subsets."""
    if k == 0:
        return (0b0, 0b1)
    prev = upset_families(k - 1)
    half = 1 << (k - 1)
    return tuple(lo | (hi << half) for lo in prev for hi in prev if lo & ~hi == 0)


def family_members(family: int) -> list[int]:
    return elements(family)


def minimal_sets(members) -> list[int]:
    members = sorted(set(members), key=lambda m: (popcount(m), m))
    out = []
    for m in members:
        if not any(g & m == g for g in out):
            out.append(m)
    return out


def upset_indicator(n: int, generators) -> np.ndarray:
    """Boolean table of ``S -> exists g in generators with g ⊆ S``."""
    idx = np.arange(1 << n)
    hit = np.zeros(1 << n, dtype=bool)
    for g in generators:
        hit |= (idx & g) == g
    return hit


# -- stochastic dominance ----------------------------------------------------

def _integer_capacities(p1: np.ndarray, p2: np.ndarray):
    if p1.dtype == object and p2.dtype == object:
        dens = [Fraction(v).denominator for v in list(p1) + list(p2) if v != 0]
        scale = math.lcm(*dens) if dens else 1
        return [int(v * scale) for v in p1], [int(v * scale) for v in p2]
    scale = 2 ** 40
    return ([int(round(float(v) * scale)) for v in p1],
            [int(round(float(v) * scale)) for v in p2])


def dominance_witness(n: int, p_upper: np.ndarray, p_lower: np.ndarray):
    """Decide whether ``p_upper`` stochastically dominates ``p_lower`` on ``2^[n]``.

    Builds the monotone-coupling network (source -> lower set S -> every
    superset T -> sink) and runs max-flow. Returns ``(margin, upset)`` where
    ``upset`` is the family of subsets reachable from the source in the
    residual network (an upward-closed family) and ``margin`` is
    ``P_lower(upset) - P_upper(upset)``; dominance fails iff margin > 0.
    """
    c_up, c_lo = _integer_capacities(p_upper, p_lower)
    G = nx.DiGraph()
    for s in range(1 << n):
        if c_lo[s]:
            G.add_edge("src", ("lo", s), capacity=c_lo[s])
    for t in range(1 << n):
        if c_up[t]:
            G.add_edge(("up", t), "snk", capacity=c_up[t])
    for s in range(1 << n):
        if not c_lo[s]:
            continue
        free = ((1 << n) - 1) & ~s
        for extra in submasks(free):
            t = s | extra
            if c_up[t]:
                G.add_edge(("lo", s), ("up", t))
    if "snk" not in G:
        reach_lo = [s for s in range(1 << n) if c_lo[s]]
    else:
        _, (reachable, _) = nx.minimum_cut(G, "src", "snk")
        reach_lo = [node[1] for node in reachable if isinstance(node, tuple) and node[0] == "lo"]
    gens = minimal_sets(reach_lo)
    hit = upset_indicator(n, gens)
    margin = p_lower[hit].sum() - p_upper[hit].sum() if hit.any() else 0
    return margin, gens


def stochastic_dominance(D1: Distribution, D2: Distribution) -> Verdict:
    """Holds iff ``Pr_D1[S in U] >= Pr_D2[S in U]`` for every upward-closed ``U``."""
    if D1.n != D2.n:
        raise ValueError(f"dimension mismatch: n={D1.n} vs n={D2.n}")
    margin, gens = dominance_witness(D1.n, D1.pmf, D2.pmf)
    if margin > tol(D1.pmf, D2.pmf):
        return Verdict(False, Certificate("upset", {"generators": gens}, margin))
    return Verdict(True)


# -- WNR ---------------------------------------------------------------------

def _lift(mask: int, positions) -> int:
    return embed_mask(mask, positions)


def check_wnr(D: Distribution) -> Verdict:
    """Weak negative regression via one dominance test per element.

    Elements with marginal 0 or 1 are skipped: one of the two conditionals is
    undefined and the condition is taken to hold vacuously.
    """
    x = marginals(D)
    for i in range(D.n):
        if x[i] == 0 or x[i] == 1:
            continue
        absent = condition_on_element(D, i, False)
        present = condition_on_element(D, i, True)
        margin, gens = dominance_witness(D.n - 1, absent.pmf, present.pmf)
        if margin > tol(D.pmf):
            rest = [e for e in range(D.n) if e != i]
            return Verdict(False, Certificate(
                "wnr", {"element": i, "generators": [_lift(g, rest) for g in gens]}, margin))
    return Verdict(True)


def _wnr_differences(D: Distribution, i: int, x_i) -> np.ndarray:
    """``d[T] = P(S\\i = T, i in S) - x_i P(S\\i = T)`` over ``T ⊆ U\\i``."""
    rest = [e for e in range(D.n) if e != i]
    has = membership(D.n, i)
    zero = Fraction(0) if D.exact else 0.0
    joint = np.array([zero] * (1 << (D.n - 1)), dtype=D.pmf.dtype)
    total = joint.copy()
    for m, p in enumerate(D.pmf):
        if p == 0:
            continue
        t = sum(1 << k for k, e in enumerate(rest) if m >> e & 1)
        total[t] += p
        if has[m]:
            joint[t] += p
    return joint - x_i * total


@lru_cache(maxsize=None)
def _upset_matrix(k: int) -> np.ndarray:
    fams = upset_families(k)
    return np.array([[(f >> s) & 1 for s in range(1 << k)] for f in fams], dtype=np.int64)


def check_wnr_covariance(D: Distribution) -> Verdict:
    """WNR through ``Cov[1_U(S\\i), 1_{i in S}] <= 0``, enumerating every upset ``U``.

    Shares nothing with :func:`check_wnr` beyond the distribution itself, so the
    two serve as cross-checks. Upsets of ``2^(n-1)`` are enumerated outright,
    which limits this route to ``n <= 6``.
    """
    if D.n > 6:
        raise ValueError("covariance enumeration is limited to n <= 6")
    if D.n == 0:
        return Verdict(True)
    x = marginals(D)
    fams = upset_families(D.n - 1)
    mat = _upset_matrix(D.n - 1)
    if D.exact:
        mat = mat.astype(object)
    best = None
    for i in range(D.n):
        d = _wnr_differences(D, i, x[i])
        covs = mat.dot(d)
        k = max(range(len(fams)), key=lambda r: covs[r])
        if covs[k] > tol(D.pmf) and (best is None or covs[k] > best[0]):
            best = (covs[k], i, fams[k])
    if best is None:
        return Verdict(True)
    cov, i, fam = best
    rest = [e for e in range(D.n) if e != i]
    gens = [_lift(g, rest) for g in minimal_sets(family_members(fam))]
    return Verdict(False, Certificate("wnr-covariance", {"element": i, "generators": gens}, cov))


# -- NA ----------------------------------------------------------------------

def _partitions(n: int):
    full = (1 << n) - 1
    for a in range(1, full):
        b = full & ~a
        ka, kb = popcount(a), popcount(b)
        if ka < kb or (ka == kb and a & 1):
            yield a, b


def check_na(D: Distribution) -> Verdict:
    """Negative association: ``Cov[f(S ∩ A), g(S ∩ B)] <= 0`` for disjoint A, B.

    Reduces to partitions ``A | B`` of the ground set (an upset on a subset of
    ``A`` is an upset on ``A``). Upsets of the smaller side are enumerated; for
    each event ``E = {S ∩ A in U_A}`` the covariance with every monotone
    ``g(S ∩ B)`` is nonpositive iff the law of ``S ∩ B`` given ``not E``
    dominates the law given ``E``, decided by max-flow. The smaller side has at
    most four elements for ``n <= 8``, so at most 168 upsets per partition.
    """
    if D.n > 8:
        raise ValueError("check_na is limited to n <= 8")
    t = tol(D.pmf)
    best = None
    for a, b in _partitions(D.n):
        a_el, b_el = elements(a), elements(b)
        joint = _joint_table(D, a_el, b_el)
        for fam in upset_families(len(a_el)):
            members = family_members(fam)
            if not members or len(members) == 1 << len(a_el):
                continue
            in_e = np.zeros(1 << len(a_el), dtype=bool)
            in_e[members] = True
            pe = joint[in_e].sum()
            if pe == 0 or pe == 1:
                continue
            given_e = joint[in_e].sum(axis=0) / pe
            given_not = joint[~in_e].sum(axis=0) / (1 - pe)
            margin, gens = dominance_witness(len(b_el), given_not, given_e)
            if margin > t:
                cov = pe * (1 - pe) * margin
                if best is None or cov > best.margin:
                    best = Certificate("na", {
                        "A": a, "B": b,
                        "generators_A": [_lift(g, a_el) for g in minimal_sets(members)],
                        "generators_B": [_lift(g, b_el) for g in gens],
                    }, cov)
    return Verdict(True) if best is None else Verdict(False, best)


def _joint_table(D: Distribution, a_el, b_el) -> np.ndarray:
    """Matrix ``J[s, t] = P(S ∩ A = s, S ∩ B = t)`` in compressed coordinates."""
    zero = Fraction(0) if D.exact else 0.0
    J = np.array([[zero] * (1 << len(b_el)) for _ in range(1 << len(a_el))], dtype=D.pmf.dtype)
    for m, p in enumerate(D.pmf):
        if p != 0:
            s = sum(1 << k for k, e in enumerate(a_el) if m >> e & 1)
            t = sum(1 << k for k, e in enumerate(b_el) if m >> e & 1)
            J[s, t] += p
    return J


# -- NR ----------------------------------------------------------------------

def check_nr(D: Distribution) -> Verdict:
    """Negative regression over pairs ``R- ⊊ R+ ⊆ T``.

    Dominance is transitive, so a pair joined by a chain of one-element steps
    through positive-probability conditioning events follows from the steps.
    Only those steps, and the positive pairs with no such chain between them,
    are tested.
    """
    t = tol(D.pmf)
    full = (1 << D.n) - 1
    for T in range(1, full):
        t_el = elements(T)
        rest = [e for e in range(D.n) if not T >> e & 1]
        J = _joint_table(D, t_el, rest)
        mass = J.sum(axis=1)
        positive = [r for r in range(1 << len(t_el)) if mass[r] != 0]
        pos_set = set(positive)
        for lo, hi in _nr_pairs(len(t_el), positive, pos_set):
            margin, gens = dominance_witness(len(rest), J[lo] / mass[lo], J[hi] / mass[hi])
            if margin > t:
                return Verdict(False, Certificate("nr", {
                    "T": T, "R_minus": _lift(lo, t_el), "R_plus": _lift(hi, t_el),
                    "generators": [_lift(g, rest) for g in gens],
                }, margin))
    return Verdict(True)


def _nr_pairs(k, positive, pos_set):
    reach = {}
    for r in sorted(positive, key=popcount, reverse=True):
        up = set()
        for j in range(k):
            nxt = r | (1 << j)
            if nxt != r and nxt in pos_set:
                up.add(nxt)
                up |= reach[nxt]
        reach[r] = up
    for lo in positive:
        for hi in positive:
            if hi != lo and hi & lo == lo:
                adjacent = popcount(hi) == popcount(lo) + 1
                if adjacent or hi not in reach[lo]:
                    yield lo, hi


# -- NCD ---------------------------------------------------------------------

def check_ncd(D: Distribution) -> Verdict:
    """Joint inclusion and joint exclusion bounded by the product values, ``|T| >= 2``."""
    x = marginals(D)
    t = tol(D.pmf)
    idx = np.arange(1 << D.n)
    best = None
    for T in range(1 << D.n):
        if popcount(T) < 2:
            continue
        els = elements(T)
        inside = D.pmf[(idx & T) == T].sum()
        outside = D.pmf[(idx & T) == 0].sum()
        bound_in = np.prod([x[i] for i in els])
        bound_out = np.prod([1 - x[i] for i in els])
        for side, val, bound in (("in", inside, bound_in), ("out", outside, bound_out)):
            margin = val - bound
            if margin > t and (best is None or margin > best.margin):
                best = Certificate("ncd", {"T": T, "side": side}, margin)
    return Verdict(True) if best is None else Verdict(False, best)


# -- certificate re-verification ---------------------------------------------

def reverify(D: Distribution, cert: Certificate):
    """Recompute a certificate's violation straight from the definition."""
    n = D.n
    idx = np.arange(1 << n)
    data = cert.data
    if cert.kind in ("wnr", "wnr-covariance"):
        i = data["element"]
        f = upset_indicator(n, data["generators"]).astype(int)
        ind = ((idx >> i) & 1).astype(int)
        # f never depends on element i by construction
        e_f_i = np.dot(D.pmf, f * ind)
        e_f = np.dot(D.pmf, f)
        e_i = np.dot(D.pmf, ind)
        cov = e_f_i - e_f * e_i
        if cert.kind == "wnr-covariance":
            return cov
        return cov / (e_i * (1 - e_i))
    if cert.kind == "na":
        f = upset_indicator(n, data["generators_A"]).astype(int)
        g = upset_indicator(n, data["generators_B"]).astype(int)
        return np.dot(D.pmf, f * g) - np.dot(D.pmf, f) * np.dot(D.pmf, g)
    if cert.kind == "nr":
        T, lo, hi = data["T"], data["R_minus"], data["R_plus"]
        f = upset_indicator(n, data["generators"])
        ev_lo = (idx & T) == lo
        ev_hi = (idx & T) == hi
        p_lo = D.pmf[ev_lo & f].sum() / D.pmf[ev_lo].sum()
        p_hi = D.pmf[ev_hi & f].sum() / D.pmf[ev_hi].sum()
        return p_hi - p_lo
    if cert.kind == "ncd":
        T = data["T"]
        x = marginals(D)
        if data["side"] == "in":
            return D.pmf[(idx & T) == T].sum() - np.prod([x[i] for i in elements(T)])
        return D.pmf[(idx & T) == 0].sum() - np.prod([1 - x[i] for i in elements(T)])
    if cert.kind == "upset":
        raise ValueError("upset certificates need both distributions; use stochastic_dominance")
    raise ValueError(f"unknown certificate kind {cert.kind!r}")


# -- random distributions ----------------------------------------------------

def random_distribution(n: int, seed, exact: bool = True, high: int = 1000) -> Distribution:
    """Independent uniform integer weights in ``[1, high]``, normalised."""
    rng = np.random.default_rng(seed)
    w = rng.integers(1, high + 1, size=1 << n)
    return _normalised(n, w, exact)


def _normalised(n: int, w, exact: bool) -> Distribution:
    w = [int(v) for v in w]
    total = sum(w)
    if exact:
        return Distribution(n, as_table([Fraction(v, total) for v in w], True))
    return Distribution(n, np.array(w, dtype=float) / total)


def _dpp_weights(n: int, rng) -> list[int]:
    # L-ensemble with an integer Gram kernel: weights det(L_S) are exact integers
    # and the resulting law is strongly Rayleigh.
    rank = int(rng.integers(1, n + 1))
    B = rng.integers(-4, 5, size=(n, rank + int(rng.integers(0, 2))))
    L = B @ B.T + np.diag(rng.integers(0, 3, size=n))
    Lm = sympy.Matrix(L.tolist())
    w = []
    for m in range(1 << n):
        els = elements(m)
        w.append(int(Lm.extract(els, els).det()) if els else 1)
    return w


def _size_tilted_weights(n: int, rng) -> list[int]:
    # Concentrate mass near a random size; concentrated size is a strong
    # (though not sufficient) source of negative dependence.
    target = rng.uniform(0, n)
    spread = rng.uniform(0.15, 1.0)
    u = rng.integers(1, 1001, size=1 << n)
    sizes = [popcount(m) for m in range(1 << n)]
    return [int(round(u[m] * math.exp(-((sizes[m] - target) ** 2) / spread))) for m in range(1 << n)]


def _sparse_weights(n: int, rng) -> list[int]:
    k = int(rng.integers(2, max(3, n + 2)))
    w = [0] * (1 << n)
    for m in rng.choice(1 << n, size=min(k, 1 << n), replace=False):
        w[int(m)] = int(rng.integers(1, 101))
    return w


PROPOSALS = ("uniform", "tilted", "sparse", "dpp")


def random_wnr(n: int, seed, max_attempts: int = 2000, exact: bool = True,
               proposals=PROPOSALS) -> Distribution:
    """Rejection-sample a WNR distribution.

    Each attempt draws from one of several proposal families in rotation
    (uniform weights, size-tilted weights, sparse support, integer-kernel
    determinantal weights) and keeps the first draw passing :func:`check_wnr`.
    Raises ``RuntimeError`` after ``max_attempts`` rejections.
    """
    if n > 5:
        raise ValueError("random_wnr is limited to n <= 5")
    rng = np.random.default_rng(seed)
    makers = {"uniform": lambda: rng.integers(1, 1001, size=1 << n).tolist(),
              "tilted": lambda: _size_tilted_weights(n, rng),
              "sparse": lambda: _sparse_weights(n, rng),
              "dpp": lambda: _dpp_weights(n, rng)}
    for attempt in range(max_attempts):
        w = makers[proposals[attempt % len(proposals)]]()
        if sum(w) <= 0:
            continue
        D = _normalised(n, w, exact)
        if check_wnr(D):
            return D
    raise RuntimeError(f"no WNR distribution found in {max_attempts} attempts at n={n}; lower n")
