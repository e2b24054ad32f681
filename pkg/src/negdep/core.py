"""Set functions and explicit distributions over the subsets of a small ground set.

Subsets are bitmasks: element ``i`` is bit ``i``. A table over ``2^n`` subsets is a
numpy array of length ``2^n`` whose entry ``m`` belongs to the subset with bitmask
``m``. Two arithmetic backends share this representation:

* exact -- ``dtype=object`` arrays of :class:`fractions.Fraction`; comparisons
  are exact.
* float -- ``float64`` arrays; equality comparisons use :data:`EQ_TOL`.

Every operation infers the backend from its inputs and returns values of the
same kind.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

MAX_N = 20
EQ_TOL = 1e-12
LP_TOL = 1e-9


# -- bitmask helpers ---------------------------------------------------------

def bit(i: int) -> int:
    return 1 << i


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def elements(mask: int) -> list[int]:
    """Elements of ``mask`` in increasing order."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(elems: Iterable[int]) -> int:
    m = 0
    for i in elems:
        m |= 1 << i
    return m


def submasks(mask: int):
    """All submasks of ``mask``, including 0 and ``mask`` itself."""
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def popcounts(n: int) -> np.ndarray:
    sizes = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        sizes[1 << i:1 << (i + 1)] = sizes[:1 << i] + 1
    return sizes


def membership(n: int, i: int) -> np.ndarray:
    """Boolean array: does subset ``m`` contain element ``i``."""
    return (np.arange(1 << n) >> i) & 1 == 1


# -- arithmetic backends -----------------------------------------------------

def to_number(v, exact: bool):
    """Parse ``v`` (number or ``"p/q"`` string) into the requested backend."""
    if exact:
        if isinstance(v, float):
            return Fraction(v).limit_denominator(10**12) if not v.is_integer() else Fraction(int(v))
        return Fraction(v)
    if isinstance(v, str):
        return float(Fraction(v))
    return float(v)


def as_table(values, exact: bool | None = None) -> np.ndarray:
    """Coerce ``values`` to a 1-d table in the requested backend.

    ``exact=None`` keeps Fractions exact if any entry is a Fraction or a
    ``"p/q"`` string, and uses floats otherwise.
    """
    if isinstance(values, np.ndarray) and exact is None:
        return values if values.dtype == object else values.astype(float)
    values = list(values)
    if exact is None:
        exact = any(isinstance(v, (Fraction, str, int)) and not isinstance(v, bool) for v in values) \
            and not any(isinstance(v, float) for v in values)
    if exact:
        return np.array([to_number(v, True) for v in values] or [], dtype=object)
    return np.array([to_number(v, False) for v in values], dtype=float)


def is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


def tol(*arrays: np.ndarray, eps: float = EQ_TOL):
    """Comparison slack: zero when every table is exact, ``eps`` otherwise."""
    return 0 if all(is_exact(a) for a in arrays) else eps


def _one(exact: bool):
    return Fraction(1) if exact else 1.0


def _zero(exact: bool):
    return Fraction(0) if exact else 0.0


# -- set functions -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SetFunction:
    n: int
    values: np.ndarray

    def __post_init__(self):
        if not 0 <= self.n <= MAX_N:
            raise ValueError(f"n={self.n} outside [0, {MAX_N}]")
        vals = as_table(self.values)
        if vals.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} values, got {vals.shape[0]}")
        if not is_exact(vals) and not np.all(np.isfinite(vals)):
            raise ValueError("set function values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, n: int, fn, exact: bool = True) -> "SetFunction":
        return cls(n, as_table([fn(m) for m in range(1 << n)], exact))

    @property
    def exact(self) -> bool:
        return is_exact(self.values)

    def __call__(self, mask: int):
        return self.values[mask]

    def __eq__(self, other):
        return isinstance(other, SetFunction) and self.n == other.n and \
            all(a == b for a, b in zip(self.values, other.values))

    def __hash__(self):
        return hash((self.n, tuple(self.values.tolist())))

    def __add__(self, other: "SetFunction") -> "SetFunction":
        _check_n(self, other)
        return SetFunction(self.n, self.values + other.values)

    def __neg__(self) -> "SetFunction":
        return SetFunction(self.n, -self.values)

    def scale(self, a, shift=0) -> "SetFunction":
        return SetFunction(self.n, self.values * a + shift)

    def as_exact(self) -> "SetFunction":
        return SetFunction(self.n, as_table(self.values.tolist(), True))

    def as_float(self) -> "SetFunction":
        return SetFunction(self.n, self.values.astype(float))

    def to_json(self) -> dict:
        return {"n": self.n, "values": _serialize(self.values)}

    @classmethod
    def from_json(cls, data: dict, exact: bool | None = None) -> "SetFunction":
        n = _field(data, "n", int)
        return cls(n, as_table(_field(data, "values", list), exact))


def cardinality(n: int, exact: bool = True) -> SetFunction:
    return SetFunction(n, as_table(popcounts(n).tolist(), exact))


def budget_additive(n: int, cap: int, within: int | None = None, exact: bool = True) -> SetFunction:
    """``S -> min(cap, |S ∩ within|)``; ``within`` defaults to the whole ground set."""
    within = (1 << n) - 1 if within is None else within
    return SetFunction.from_callable(n, lambda m: min(cap, popcount(m & within)), exact)


def coverage(n: int, covers: Sequence[int], weights: Sequence, exact: bool = True) -> SetFunction:
    """Weighted coverage: element ``i`` covers the universe items in bitmask ``covers[i]``."""
    def value(m):
        covered = reduce(lambda a, i: a | covers[i], elements(m), 0)
        return sum((to_number(weights[u], exact) for u in elements(covered)), _zero(exact))
    return SetFunction.from_callable(n, value, exact)


def is_submodular(f: SetFunction) -> bool:
    """Local test: f(S+i) + f(S+j) >= f(S+i+j) + f(S) for all S and i, j outside S."""
    v = f.values
    t = tol(v)
    idx = np.arange(1 << f.n)
    for i in range(f.n):
        for j in range(i + 1, f.n):
            base = idx[((idx >> i) & 1 == 0) & ((idx >> j) & 1 == 0)]
            lhs = v[base | (1 << i)] + v[base | (1 << j)]
            rhs = v[base | (1 << i) | (1 << j)] + v[base]
            if np.any(lhs - rhs < -t):
                return False
    return True


def is_monotone(f: SetFunction) -> bool:
    v = f.values
    t = tol(v)
    idx = np.arange(1 << f.n)
    for i in range(f.n):
        base = idx[(idx >> i) & 1 == 0]
        if np.any(v[base | (1 << i)] - v[base] < -t):
            return False
    return True


# -- distributions -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Distribution:
    n: int
    pmf: np.ndarray

    def __post_init__(self):
        if not 0 <= self.n <= MAX_N:
            raise ValueError(f"n={self.n} outside [0, {MAX_N}]")
        pmf = as_table(self.pmf)
        if pmf.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} probabilities, got {pmf.shape[0]}")
        t = tol(pmf)
        if any(p < -t for p in pmf):
            raise ValueError("negative probability")
        total = pmf.sum()
        if abs(total - 1) > t:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "pmf", pmf)

    @classmethod
    def point_mass(cls, n: int, mask: int, exact: bool = True) -> "Distribution":
        pmf = [0] * (1 << n)
        pmf[mask] = 1
        return cls(n, as_table(pmf, exact))

    @classmethod
    def uniform_over(cls, n: int, masks: Sequence[int], exact: bool = True) -> "Distribution":
        """Uniform over the listed subsets (repeats add weight)."""
        pmf = [Fraction(0)] * (1 << n)
        for m in masks:
            pmf[m] += Fraction(1, len(masks))
        return cls(n, as_table(pmf, exact))

    @classmethod
    def from_mapping(cls, n: int, weights: dict, exact: bool = True) -> "Distribution":
        """Build from ``{mask: weight}``; weights are normalised to sum to one."""
        w = {m: to_number(p, exact) for m, p in weights.items()}
        total = sum(w.values(), _zero(exact))
        pmf = [_zero(exact)] * (1 << n)
        for m, p in w.items():
            pmf[m] += p / total
        return cls(n, as_table(pmf, exact))

    @property
    def exact(self) -> bool:
        return is_exact(self.pmf)

    def support(self) -> list[int]:
        return [m for m, p in enumerate(self.pmf) if p != 0]

    def prob(self, event) -> object:
        """Probability of a boolean mask array or of a predicate on subsets."""
        if callable(event):
            event = np.array([bool(event(m)) for m in range(1 << self.n)])
        return self.pmf[event].sum() if np.any(event) else _zero(self.exact)

    def as_exact(self) -> "Distribution":
        return Distribution(self.n, as_table(self.pmf.tolist(), True))

    def as_float(self) -> "Distribution":
        return Distribution(self.n, self.pmf.astype(float))

    def to_json(self) -> dict:
        return {"n": self.n, "pmf": _serialize(self.pmf)}

    @classmethod
    def from_json(cls, data: dict, exact: bool | None = None) -> "Distribution":
        n = _field(data, "n", int)
        return cls(n, as_table(_field(data, "pmf", list), exact))


def _check_n(a, b):
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: n={a.n} vs n={b.n}")


def marginals(D: Distribution) -> np.ndarray:
    return np.array([D.pmf[membership(D.n, i)].sum() for i in range(D.n)],
                    dtype=D.pmf.dtype)


def product_pmf(x: Sequence, exact: bool | None = None) -> np.ndarray:
    x = as_table(x, exact)
    ex = is_exact(x)
    for xi in x:
        if xi < 0 or xi > 1:
            raise ValueError(f"marginal {xi} outside [0, 1]")
    pmf = np.array([_one(ex)], dtype=x.dtype)
    for xi in x:
        pmf = np.concatenate([pmf * (1 - xi), pmf * xi])
    return pmf


def product_distribution(x: Sequence, exact: bool | None = None) -> Distribution:
    x = as_table(x, exact)
    return Distribution(len(x), product_pmf(x))


def expect(f: SetFunction, D: Distribution):
    _check_n(f, D)
    return np.dot(D.pmf, f.values)


def multilinear(f: SetFunction, x: Sequence):
    x = as_table(x)
    if len(x) != f.n:
        raise ValueError(f"dimension mismatch: {len(x)} marginals for n={f.n}")
    return np.dot(product_pmf(x), f.values)


def partial_derivative(f: SetFunction, x: Sequence, i: int):
    """dF/dx_i = F(x | x_i = 1) - F(x | x_i = 0), exactly."""
    x = as_table(x)
    if not 0 <= i < f.n:
        raise IndexError(f"element {i} outside ground set of size {f.n}")
    if len(x) != f.n:
        raise ValueError(f"dimension mismatch: {len(x)} marginals for n={f.n}")
    lo = x.copy()
    lo[i] = _zero(is_exact(x))
    pmf = product_pmf(lo)
    has = membership(f.n, i)
    return np.dot(pmf[~has], f.values[has] - f.values[~has])


def gradient(f: SetFunction, x: Sequence) -> np.ndarray:
    x = as_table(x)
    return np.array([partial_derivative(f, x, i) for i in range(f.n)], dtype=x.dtype)


def indicator(n: int, mask: int, exact: bool = True) -> np.ndarray:
    return as_table([1 if mask >> i & 1 else 0 for i in range(n)], exact)


def _compress(mask: int, keep: Sequence[int]) -> int:
    return sum(1 << k for k, e in enumerate(keep) if mask >> e & 1)


def project(D: Distribution, keep: int) -> Distribution:
    """Law of ``S ∩ keep`` re-indexed on ``popcount(keep)`` bits (in element order)."""
    kept = elements(keep)
    pmf = np.array([_zero(D.exact)] * (1 << len(kept)), dtype=D.pmf.dtype)
    for m, p in enumerate(D.pmf):
        if p != 0:
            pmf[_compress(m, kept)] += p
    return Distribution(len(kept), pmf)


def embed_mask(mask: int, positions: Sequence[int]) -> int:
    """Map bit ``k`` of ``mask`` to bit ``positions[k]``."""
    return sum(1 << positions[k] for k in range(len(positions)) if mask >> k & 1)


def product(A: Distribution, B: Distribution,
            a_positions: Sequence[int] | None = None,
            b_positions: Sequence[int] | None = None) -> Distribution:
    """Independent union of ``S ~ A`` and ``T ~ B`` on disjoint element positions.

    By default ``A`` occupies bits ``0..A.n-1`` and ``B`` the next ``B.n`` bits.
    """
    a_pos = list(range(A.n)) if a_positions is None else list(a_positions)
    b_pos = list(range(A.n, A.n + B.n)) if b_positions is None else list(b_positions)
    if len(a_pos) != A.n or len(b_pos) != B.n:
        raise ValueError("embedding length does not match ground set")
    if set(a_pos) & set(b_pos):
        raise ValueError("overlapping ground sets")
    n = max(a_pos + b_pos, default=-1) + 1
    exact = A.exact and B.exact
    pmf = [_zero(exact)] * (1 << n)
    for s, pa in enumerate(A.pmf):
        if pa == 0:
            continue
        es = embed_mask(s, a_pos)
        for t, pb in enumerate(B.pmf):
            if pb != 0:
                pmf[es | embed_mask(t, b_pos)] += pa * pb
    return Distribution(n, as_table(pmf, exact))


def condition_on_element(D: Distribution, i: int, present: bool) -> Distribution:
    """Law of ``S \\ i`` over ``2^(U \\ i)`` given ``i ∈ S`` (or ``i ∉ S``)."""
    if not 0 <= i < D.n:
        raise IndexError(f"element {i} outside ground set of size {D.n}")
    has = membership(D.n, i)
    event = has if present else ~has
    mass = D.pmf[event].sum()
    if mass == 0:
        raise ZeroDivisionError(f"conditioning on a zero-probability event (element {i}, present={present})")
    rest = [e for e in range(D.n) if e != i]
    pmf = np.array([_zero(D.exact)] * (1 << (D.n - 1)), dtype=D.pmf.dtype)
    for m in np.flatnonzero(event):
        if D.pmf[m] != 0:
            pmf[_compress(int(m), rest)] += D.pmf[m] / mass
    return Distribution(D.n - 1, pmf)


def resample_independently(D: Distribution, k: int) -> Distribution:
    """``D`` with element ``k`` redrawn independently at its own marginal."""
    rest = [e for e in range(D.n) if e != k]
    xk = marginals(D)[k]
    rest_law = project(D, mask_of(rest))
    single = product_distribution(as_table([xk], D.exact))
    return product(rest_law, single, rest, [k])


# -- JSON helpers ------------------------------------------------------------

def _exact_text(v: Fraction):
    """Integers as ints, terminating decimals as ``"0.0577"``, anything else as ``"p/q"``."""
    if v.denominator == 1:
        return int(v.numerator)
    d = v.denominator
    twos = (d & -d).bit_length() - 1
    fives = 0
    while d % 5 == 0 and d > 1:
        d //= 5
        fives += 1
    if d >> twos == 1 and max(twos, fives) <= 15:
        return _decimal(v, max(twos, fives))
    return str(v)


def _decimal(v: Fraction, digits: int) -> str:
    scaled = abs(v.numerator) * 10**digits // v.denominator
    whole, frac = divmod(scaled, 10**digits)
    sign = "-" if v < 0 else ""
    return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0")


def _serialize(arr: np.ndarray) -> list:
    if is_exact(arr):
        return [_exact_text(v) for v in arr]
    return [float(v) for v in arr]


def _field(data: dict, name: str, kind):
    if not isinstance(data, dict):
        raise ValueError("expected a JSON object")
    if name not in data:
        raise ValueError(f"missing field '{name}'")
    value = data[name]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ValueError(f"field '{name}' must be {kind.__name__}")
    return value


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
