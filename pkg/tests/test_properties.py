"""Property tests over random small instances."""
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from negdep.core import (Distribution, SetFunction, _exact_text, expect, marginals, multilinear,
                         product, product_distribution, project)
from negdep.dependence import check_ncd, check_wnr, random_wnr
from negdep.optimize import (Matroid, basis_decomposition, fractional_from_decomposition,
                             sampler_distribution)

fractions = st.fractions(min_value=0, max_value=1, max_denominator=12)


@st.composite
def functions_and_points(draw):
    n = draw(st.integers(1, 4))
    vals = draw(st.lists(st.integers(-9, 9), min_size=1 << n, max_size=1 << n))
    x = draw(st.lists(fractions, min_size=n, max_size=n))
    return SetFunction(n, [Fraction(v) for v in vals]), x


@st.composite
def uniform_points(draw):
    n = draw(st.integers(2, 4))
    k = draw(st.integers(1, n - 1))
    w = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    scale = draw(st.fractions(min_value=Fraction(1, 4), max_value=1, max_denominator=8))
    total = sum(w)
    x = [min(Fraction(1), scale * k * Fraction(v, total)) for v in w]
    return Matroid.uniform(n, k), x


@given(functions_and_points())
def test_multilinear_is_product_expectation(fx):
    f, x = fx
    assert multilinear(f, x) == expect(f, product_distribution(x))


@given(st.fractions(min_value=-50, max_value=50, max_denominator=10**6))
def test_exact_text_round_trip(v):
    assert Fraction(str(_exact_text(v))) == v


@settings(max_examples=30, deadline=None)
@given(uniform_points())
def test_decomposition_identity(mx):
    M, x = mx
    sol = fractional_from_decomposition(M.n, basis_decomposition(M, x))
    assert sol.check()
    assert all(M.independent(m) for m, _ in sol.terms)


@settings(max_examples=20, deadline=None)
@given(uniform_points())
def test_sampler_marginals_and_ncd(mx):
    M, x = mx
    D = sampler_distribution(M, x)
    assert list(marginals(D)) == x
    assert all(M.independent(m) for m in D.support())
    assert check_ncd(D).holds


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 3), st.integers(0, 10**6), st.integers(0, 10**6))
def test_wnr_closure(n, s1, s2):
    A, B = random_wnr(n, s1), random_wnr(2, s2)
    assert check_wnr(product(A, B)).holds
    assert check_wnr(project(A, 0b11)).holds


@given(st.lists(fractions, min_size=1, max_size=4))
def test_product_laws_are_wnr(x):
    D = product_distribution(x)
    assert isinstance(D, Distribution)
    assert check_wnr(D).holds
