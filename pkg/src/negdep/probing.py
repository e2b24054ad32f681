"""Stochastic probing: exact adaptive optimum against the WNR-sampling non-adaptive policy.

Item ``i`` holds element ``i`` with probability ``p_i``. A policy probes items,
keeping the probed set independent in the system, and earns ``f`` of the
elements it found. The non-adaptive policy picks its probe set in advance from
a WNR distribution whose marginals maximise the multilinear extension of
``f'(S) = E[f(found elements among S)]``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import (SetFunction, coverage, expect, is_monotone, membership,
                   multilinear, to_number)
from .optimize import (Matroid, _rng, continuous_greedy, sampler_distribution, system_from_json,
                       wnr_sampler)

GAP_BOUND = math.e / (math.e - 1)


@dataclass(eq=False)
class ProbingInstance:
    p: list
    f: SetFunction
    system: object

    def __post_init__(self):
        self.p = [to_number(v, True) for v in self.p]
        if len(self.p) != self.f.n or self.system.n != self.f.n:
            raise ValueError("p, f and system must share the ground set")
        if any(q < 0 or q > 1 for q in self.p):
            raise ValueError("probabilities must lie in [0, 1]")
        if not is_monotone(self.f) or any(v < 0 for v in self.f.values):
            raise ValueError("f must be monotone and nonnegative")

    @property
    def n(self) -> int:
        return self.f.n

    def to_json(self) -> dict:
        return {"n": self.n, "p": [str(q) for q in self.p], "f": self.f.to_json(),
                "system": self.system.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "ProbingInstance":
        for key in ("p", "f", "system"):
            if key not in data:
                raise ValueError(f"missing field '{key}'")
        return cls(data["p"], SetFunction.from_json(data["f"], True), system_from_json(data["system"]))


def random_instance(n: int, seed, kind: str = "uniform", universe: int = 5) -> ProbingInstance:
    rng = _rng(seed)
    p = [Fraction(int(rng.integers(1, 10)), 10) for _ in range(n)]
    covers = [int(rng.integers(1, 1 << universe)) for _ in range(n)]
    weights = [int(v) for v in rng.integers(1, 6, size=universe)]
    if kind == "uniform":
        system = Matroid.uniform(n, int(rng.integers(1, n + 1)))
    elif kind == "partition":
        half = (n + 1) // 2
        system = Matroid.partition([list(range(half)), list(range(half, n))], [1, 1], n=n) \
            if n > 1 else Matroid.uniform(n, 1)
    else:
        raise ValueError(f"unknown system kind {kind!r}")
    return ProbingInstance(p, coverage(n, covers, weights), system)


def auxiliary_function(inst: ProbingInstance) -> SetFunction:
    """``f'(S) = sum_{R ⊆ S} prod_{i in R} p_i prod_{i in S-R} (1 - p_i) f(R)``."""
    if inst.n > 12:
        raise ValueError("auxiliary function is tabulated only for n <= 12")
    g = inst.f.as_exact().values.copy()
    for i in range(inst.n):
        has = membership(inst.n, i)
        g[has] = inst.p[i] * g[has] + (1 - inst.p[i]) * g[~has]
    return SetFunction(inst.n, g)


def adaptive_optimum(inst: ProbingInstance):
    """Value of the best adaptive policy, by dynamic programming over (probed, found)."""
    if inst.n > 10:
        raise ValueError("adaptive DP is limited to n <= 10")
    f, p, system, n = inst.f, inst.p, inst.system, inst.n

    @lru_cache(maxsize=None)
    def V(probed: int, found: int):
        best = f(found)
        for i in range(n):
            bit = 1 << i
            if probed & bit or not system.independent(probed | bit):
                continue
            v = p[i] * V(probed | bit, found | bit) + (1 - p[i]) * V(probed | bit, found)
            if v > best:
                best = v
        return best

    return V(0, 0)


@dataclass
class NonadaptiveResult:
    value: object
    F_x: object
    x: np.ndarray
    exact: bool


def nonadaptive(inst: ProbingInstance, steps: int = 100, seed=None,
                samples: int = 20_000) -> NonadaptiveResult:
    """Continuous greedy on ``f'`` then a WNR sampler; value exact for n <= 4."""
    g = auxiliary_function(inst)
    sol = continuous_greedy(g, inst.system, 1, steps)
    F = multilinear(g, sol.x)
    if inst.n <= 4:
        D = sampler_distribution(inst.system, sol.x)
        return NonadaptiveResult(expect(g, D), F, sol.x, True)
    rng = _rng(seed)
    draws = [g(wnr_sampler(inst.system, sol.x, rng)) for _ in range(samples)]
    return NonadaptiveResult(sum(draws) / samples, F, sol.x, False)


def nonadaptive_value(inst: ProbingInstance, steps: int = 100, seed=None):
    return nonadaptive(inst, steps, seed).value


@dataclass
class GapReport:
    rows: list
    bound: float

    @property
    def max_ratio(self) -> float:
        return max((r["ratio"] for r in self.rows), default=1.0)

    @property
    def holds(self) -> bool:
        return self.max_ratio <= self.bound

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, ["instance_id", "adaptive", "nonadaptive", "ratio"])
            w.writeheader()
            w.writerows(self.rows)


def _ratio(a, b) -> float:
    if b == 0:
        return 1.0 if a == 0 else math.inf
    return float(Fraction(a) / Fraction(b)) if not isinstance(a, float) else a / float(b)


def adaptivity_gap_report(instances, steps: int = 100, seed=None, slack: float = 0.03) -> GapReport:
    rows = []
    for k, inst in enumerate(instances):
        adaptive = adaptive_optimum(inst)
        na = nonadaptive(inst, steps, seed)
        rows.append({"instance_id": k, "adaptive": float(adaptive), "nonadaptive": float(na.value),
                     "ratio": _ratio(adaptive, na.value)})
    return GapReport(rows, GAP_BOUND + slack)
