from fractions import Fraction

import pytest

from negdep import fixtures
from negdep.core import (Distribution, budget_additive, expect, is_submodular, marginals,
                         multilinear, product_distribution)
from negdep.dependence import check_ncd, random_distribution
from negdep.dominance import (check_dominance, dominance_gap, rank_certificates,
                              verify_necessity)


def test_counterexample_4_values():
    D = fixtures.ncd_counterexample_4()
    f = budget_additive(4, 2)
    assert expect(f, D) == Fraction(12, 8)
    assert multilinear(f, marginals(D)) == Fraction(13, 8)


def test_counterexample_4_fails_dominance():
    D = fixtures.ncd_counterexample_4()
    v = check_dominance(D)
    assert not v.holds
    assert v.solver == "simplex"
    assert is_submodular(v.certificate)
    assert all(-1 <= c <= 1 for c in v.certificate.values)
    assert dominance_gap(D, v.certificate) == v.gap < 0


def test_homogeneous_8_fails_with_exact_certificate():
    D = fixtures.ncd_homogeneous_8()
    f = budget_additive(8, 2, within=fixtures.HOMOGENEOUS_A)
    assert expect(f, D) < multilinear(f, marginals(D))
    v = check_dominance(D)
    assert not v.holds
    assert is_submodular(v.certificate)
    assert dominance_gap(D, v.certificate) == v.gap < 0


def test_dominant_fixtures():
    for name in ("table2-wnr", "dominance-not-wnr"):
        v = check_dominance(fixtures.get(name))
        assert v.holds and v.gap == 0 and v.certificate is None


def test_product_distribution_is_dominant():
    assert check_dominance(product_distribution([Fraction(1, 3), Fraction(2, 3), Fraction(1, 2)]))


def test_float_and_highs_agree_with_exact():
    D = fixtures.ncd_counterexample_4()
    exact = check_dominance(D)
    fl = check_dominance(D.as_float(), exact=False)
    hi = check_dominance(D, solver="highs")
    assert not fl.holds and abs(fl.gap - float(exact.gap)) < 1e-9
    assert not hi.holds and hi.gap == exact.gap


def test_rank_certificates():
    f, g = rank_certificates(0b011, 3)
    assert is_submodular(f) and is_submodular(g)
    assert f(0b100) == 0 and f(0b001) == 1
    assert g(0b011) == 1 and g(0b111) == 1 and g(0b001) == 1
    with pytest.raises(ValueError):
        rank_certificates(0, 3)


def test_rank_certificates_give_cylinder_bounds():
    D = Distribution.uniform_over(2, [0, 3])
    f, g = rank_certificates(0b11, 2)
    # Pr[S ∩ T = ∅] = 1/2 > 1/4 and Pr[T ⊆ S] = 1/2 > 1/4
    assert dominance_gap(D, f) == dominance_gap(D, g) == Fraction(-1, 4)
    assert not check_ncd(D).holds
    assert not check_dominance(D).holds


@pytest.mark.parametrize("seed", range(10))
def test_dominance_implies_ncd(seed):
    assert verify_necessity(random_distribution(3, seed, high=5))


def test_unknown_solver():
    with pytest.raises(ValueError):
        check_dominance(fixtures.ncd_counterexample_4(), solver="cplex")
