"""Independent reference implementations used to cross-check the library."""
from fractions import Fraction
from itertools import product as cartesian


def decision_trees(system, probed, n):
    """Every probing decision tree from a state: ``None`` stops, ``(i, yes, no)`` probes ``i``."""
    yield None
    for i in range(n):
        if probed >> i & 1 or not system.independent(probed | 1 << i):
            continue
        subs = list(decision_trees(system, probed | 1 << i, n))
        for yes in subs:
            for no in subs:
                yield (i, yes, no)


def tree_value(tree, inst, found=0):
    if tree is None:
        return inst.f(found)
    i, yes, no = tree
    p = inst.p[i]
    return p * tree_value(yes, inst, found | 1 << i) + (1 - p) * tree_value(no, inst, found)


def best_tree_value(inst):
    """Adaptive optimum as the best explicit decision tree (fine up to n = 3)."""
    return max(tree_value(t, inst) for t in decision_trees(inst.system, 0, inst.n))


def prophet_by_hand(inst):
    """Prophet value by re-enumerating realizations and every independent item subset."""
    n, m = inst.n, inst.m
    total = Fraction(0)
    for u in cartesian(range(m), repeat=n):
        pr = Fraction(1)
        for i, j in enumerate(u):
            pr *= inst.items.p[i, j]
        best = 0
        for S in range(1 << n):
            if inst.system.independent(S):
                mask = sum(1 << (i * m + u[i]) for i in range(n) if S >> i & 1)
                best = max(best, inst.objective(mask))
        total += pr * best
    return total
