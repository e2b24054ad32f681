"""Built-in distributions with known dependence behaviour.

Element ``k`` of the ground set is bit ``k``; the 1-based labels ``1..n`` used in
the docstrings and comments map to bits ``0..n-1``.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .core import Distribution, budget_additive, mask_of

# Four Bernoulli coordinates; rows indexed by (X3, X4), columns by (X1, X2).
# The printed cells sum to exactly 1 (0.24 + 0.26 + 0.26 + 0.24), so they are
# used verbatim with no renormalisation.
TABLE2_CELLS = {
    (0, 0): ("0.0577", "0.0623", "0.0623", "0.0577"),
    (0, 1): ("0.0623", "0.0677", "0.0677", "0.0623"),
    (1, 0): ("0.0623", "0.0677", "0.0677", "0.0623"),
    (1, 1): ("0.0577", "0.0623", "0.0623", "0.0577"),
}
_COLUMNS = ((0, 0), (0, 1), (1, 0), (1, 1))


def table2_wnr() -> Distribution:
    """WNR, but neither NA nor NR."""
    pmf = [Fraction(0)] * 16
    for (x3, x4), row in TABLE2_CELLS.items():
        for (x1, x2), cell in zip(_COLUMNS, row):
            pmf[x1 | x2 << 1 | x3 << 2 | x4 << 3] = Fraction(cell)
    return Distribution(4, pmf)


def dominance_not_wnr() -> Distribution:
    """Uniform over {}, {1}, {2}, {1,2}, {1,3}, {2,3}: dominant, not WNR at element 3."""
    sets = [(), (0,), (1,), (0, 1), (0, 2), (1, 2)]
    return Distribution.uniform_over(3, [mask_of(s) for s in sets])


def ncd_counterexample_4() -> Distribution:
    """Pick ``i`` uniformly, return ``{i}`` or its complement with equal odds."""
    full = 0b1111
    masks = []
    for i in range(4):
        masks += [1 << i, full & ~(1 << i)]
    return Distribution.uniform_over(4, masks)


HOMOGENEOUS_A = 0b00001111
HOMOGENEOUS_B = 0b11110000


def ncd_homogeneous_8() -> Distribution:
    """Size-4 sets: ``i ∪ (B \\ j)`` or ``(A \\ i) ∪ j`` for uniform ``i ∈ A``, ``j ∈ B``."""
    masks = []
    for i in range(4):
        for j in range(4, 8):
            masks.append((1 << i) | (HOMOGENEOUS_B & ~(1 << j)))
            masks.append((HOMOGENEOUS_A & ~(1 << i)) | (1 << j))
    return Distribution.uniform_over(8, masks)


CATALOG = {
    "table2-wnr": table2_wnr,
    "dominance-not-wnr": dominance_not_wnr,
    "ncd-counterexample-4": ncd_counterexample_4,
    "ncd-homogeneous-8": ncd_homogeneous_8,
}

# Submodular function exhibiting the dominance violation, where one is known.
VIOLATORS = {
    "ncd-counterexample-4": lambda: budget_additive(4, 2),
    "ncd-homogeneous-8": lambda: budget_additive(8, 2, within=HOMOGENEOUS_A),
}


def names() -> list[str]:
    return list(CATALOG)


def get(name: str) -> Distribution:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(CATALOG)}") from None


def emit(name: str, path) -> None:
    with open(path, "w") as fh:
        json.dump(get(name).to_json(), fh, indent=1)
        fh.write("\n")
