import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from negdep.core import budget_additive, coverage, marginals, multilinear, popcount
from negdep.dependence import check_ncd, check_wnr
from negdep.dominance import check_dominance
from negdep.optimize import (Matroid, SetSystem, basis_decomposition, brute_force_max,
                             continuous_greedy, fractional_from_decomposition, in_polytope,
                             linear_oracle, maximize_submodular, sampler_distribution,
                             swap_round, swap_round_distribution, system_from_json, wnr_sampler)

F = Fraction


def test_matroid_basics():
    U = Matroid.uniform(4, 2)
    assert U.independent(0b0011) and not U.independent(0b0111)
    assert U.rank(0b0111) == 2
    assert U.spans(0b0011, 3)
    P = Matroid.partition([[0, 1], [2, 3]], [1, 1])
    assert P.independent(0b0101) and not P.independent(0b0011)
    assert len(P.maximal_sets()) == 4


def test_explicit_matroid_validation():
    graphic = Matroid.explicit(3, [0, 1, 2, 4, 3, 5, 6])  # triangle
    assert graphic.rank() == 2
    with pytest.raises(ValueError, match="exchange"):
        Matroid.explicit(3, [0, 1, 2, 4, 3])
    with pytest.raises(ValueError, match="downward"):
        Matroid.explicit(2, [0, 3])


def test_linear_oracle_ties_and_values():
    U = Matroid.uniform(4, 2)
    assert linear_oracle(U, [3, 1, 2, 0]) == 0b0101
    assert linear_oracle(U, [1, 1, 1, 1]) == 0b0011
    S = SetSystem(3, [0, 1, 2, 3, 4])
    assert S.maximal_sets() == [3, 4]
    assert linear_oracle(S, [1, 1, 3]) == 4


def test_json_round_trip():
    for sys_ in (Matroid.uniform(3, 1), Matroid.partition([[0], [1, 2]], [1, 1]),
                 SetSystem(2, [0, 1, 2])):
        again = system_from_json(sys_.to_json())
        assert again.to_json() == sys_.to_json()
    with pytest.raises(ValueError, match="missing field 'k'"):
        system_from_json({"variant": "uniform", "n": 3})


def test_in_polytope():
    U = Matroid.uniform(3, 1)
    assert in_polytope(U, [F(1, 3)] * 3, bases=True)
    assert in_polytope(U, [F(1, 4)] * 3)
    assert not in_polytope(U, [F(1, 4)] * 3, bases=True)
    assert not in_polytope(U, [F(1, 2)] * 3)


def test_basis_decomposition_reproduces_point():
    M = Matroid.partition([[0, 1, 2], [3]], [2, 1])
    x = [F(1, 2), F(2, 3), F(1, 3), F(1)]
    sol = fractional_from_decomposition(4, basis_decomposition(M, x))
    assert sol.check()
    assert all(M.independent(m) for m, _ in sol.terms)


def test_continuous_greedy_identity_and_quality():
    f = coverage(4, [0b001, 0b011, 0b110, 0b100], [3, 2, 1])
    U = Matroid.uniform(4, 2)
    sol = continuous_greedy(f, U, 1, 50)
    assert sol.check()
    _, opt = brute_force_max(f, U)
    assert multilinear(f, sol.x) >= (1 - 1 / math.e) * opt


def test_continuous_greedy_rejects_non_monotone():
    f = budget_additive(2, 1).scale(-1)
    with pytest.raises(ValueError, match="monotone"):
        continuous_greedy(f, Matroid.uniform(2, 1))


def test_swap_round_lands_on_bases_with_right_marginals():
    U = Matroid.uniform(4, 2)
    x = [F(1, 2), F(1, 4), F(3, 4), F(1, 2)]
    sol = fractional_from_decomposition(4, basis_decomposition(U, x))
    D = swap_round_distribution(U, sol)
    assert list(marginals(D)) == x
    assert all(popcount(m) == 2 for m in D.support())
    rng = np.random.default_rng(0)
    counts = Counter(swap_round(U, sol, rng) for _ in range(4000))
    for m in D.support():
        assert abs(counts[m] / 4000 - float(D.pmf[m])) < 0.03


def test_swap_round_is_not_always_wnr():
    # both outputs below are negatively cylinder dependent and dominant, but
    # conditioning on one element can raise the law of the rest
    U = Matroid.uniform(5, 2)
    x = [F(13, 27), F(13, 27), F(8, 27), F(4, 9), F(8, 27)]
    sol = fractional_from_decomposition(5, basis_decomposition(U, x))
    D = swap_round_distribution(U, sol)
    assert list(marginals(D)) == x
    assert not check_wnr(D).holds
    assert check_ncd(D).holds and check_dominance(D).holds

    D = sampler_distribution(Matroid.uniform(4, 3), [F(18, 41), F(15, 41), F(24, 41), F(18, 41)])
    assert not check_wnr(D).holds
    assert check_ncd(D).holds and check_dominance(D).holds


def test_sampler_matches_its_distribution():
    M = Matroid.partition([[0, 1], [2]], [1, 1])
    x = [F(1, 3), F(1, 3), F(1, 2)]
    D = sampler_distribution(M, x)
    assert list(marginals(D)) == x
    assert check_wnr(D).holds
    rng = np.random.default_rng(1)
    counts = Counter(wnr_sampler(M, x, rng) for _ in range(3000))
    for m in range(8):
        assert abs(counts[m] / 3000 - float(D.pmf[m])) < 0.03


def test_sampler_rejects_unsupported_input():
    with pytest.raises(ValueError, match="outside"):
        wnr_sampler(Matroid.uniform(2, 1), [F(2, 3), F(2, 3)])
    with pytest.raises(ValueError, match="supply a distribution"):
        wnr_sampler(SetSystem(2, [0, 1, 2]), [F(1, 2), F(1, 2)])


def test_maximize_submodular_is_feasible():
    f = coverage(4, [1, 3, 6, 4], [2, 1, 2])
    U = Matroid.uniform(4, 2)
    for seed in range(20):
        assert U.independent(maximize_submodular(f, U, steps=20, seed=seed))
