"""Submodular dominance as a linear program, and what it certifies.

    python3 demos/02_dominance_lp.py
"""
from negdep import fixtures
from negdep.core import Distribution, expect, marginals, multilinear, product_distribution
from negdep.dependence import check_ncd, random_wnr
from negdep.dominance import check_dominance, dominance_gap, rank_certificates

# A distribution can satisfy every cylinder inequality and still lose to the
# independent rounding on a budget-additive function.
D = fixtures.ncd_counterexample_4()
f = fixtures.VIOLATORS["ncd-counterexample-4"]()
print("ncd-counterexample-4")
print("  NCD holds:", check_ncd(D).holds)
print("  E_D[min(2,|S|)] =", expect(f, D), " F(x) =", multilinear(f, marginals(D)))

v = check_dominance(D)
print(f"  LP optimum (most negative gap over submodular f in [-1,1]): {v.gap}")
print("  certificate values by subset:", [str(c) for c in v.certificate.values])
print("  gap recomputed from the certificate:", dominance_gap(D, v.certificate))

# The 8-element version goes through HiGHS; the float certificate is rounded
# to rationals and re-verified exactly before it is reported.
v8 = check_dominance(fixtures.ncd_homogeneous_8())
print(f"\nncd-homogeneous-8: holds={v8.holds}, gap={v8.gap}, solver={v8.solver}")

# Product laws always pass, and so do WNR laws.
print("\nproduct law passes:", check_dominance(product_distribution(["1/3", "1/2", "3/4"])).holds)
passed = sum(check_dominance(random_wnr(3, s)).holds for s in range(20))
print(f"random WNR laws on 3 elements passing: {passed}/20")

# The two rank functions behind the cylinder inequalities. On two perfectly
# correlated coins both are violated, which is the NCD failure seen as a
# dominance failure.
coins = Distribution.uniform_over(2, [0b00, 0b11])
f_T, g_T = rank_certificates(0b11, 2)
print("\nperfectly correlated coins, T = {0, 1}:")
print("  gap against f_T:", dominance_gap(coins, f_T), " against g_T:", dominance_gap(coins, g_T))
