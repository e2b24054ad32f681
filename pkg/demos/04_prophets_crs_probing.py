"""Online selection, contention resolution, and stochastic probing on small instances.

    python3 demos/04_prophets_crs_probing.py
"""
import json
import math
from pathlib import Path

from negdep.crs import ONE_MINUS_INV_E, optimal_crs, verify_crs_theorem
from negdep.core import product_distribution
from negdep.optimize import Matroid
from negdep.probing import adaptive_optimum, nonadaptive, random_instance
from negdep.spi import SPIInstance, spi_competitive_ratio

ROOT = Path(__file__).resolve().parents[1]

# Prophet inequality with a submodular objective: three items, each realizing
# one of two elements, pick at most one item.
cfg = json.loads((ROOT / "fixtures" / "spi_small.json").read_text())
inst = SPIInstance.from_json(cfg["instance"])
rep = spi_competitive_ratio(inst, cfg["b"], cfg["steps"], cfg["ordering"], eps=cfg["eps"])
print("prophet value:", f"{rep.prophet:.4f}")
print("F(x) at the fractional point:", f"{rep.F_x:.4f}", " greedy OCRS selectability:", f"{rep.c_measured:.4f}")
for order, v in sorted(rep.values.items()):
    print(f"  arrival order {order}: E[f(ALG)] = {float(v):.4f}")
print(f"worst ratio {rep.ratio_worst:.4f} >= guaranteed floor {rep.floor:.4f}")

# The best offline CRS for two independent fair coins on a rank-1 matroid.
c, scheme = optimal_crs(Matroid.uniform(2, 1), product_distribution(["1/2", "1/2"]))
print(f"\noptimal CRS for two fair coins, rank 1: c* = {c}")
print("  scheme:", scheme.to_json())
crs = verify_crs_theorem(Matroid.uniform(4, 2), 20, seed=1)
print(f"20 random WNR laws on uniform(4,2): min c* = {float(crs.minimum):.4f} "
      f"(bound {ONE_MINUS_INV_E:.4f})")

# Probing: the adaptive policy sees outcomes as it goes, the non-adaptive one
# commits to a WNR-random probe set.
print()
for seed in range(5):
    pi = random_instance(4, seed, ("uniform", "partition")[seed % 2])
    a = adaptive_optimum(pi)
    na = nonadaptive(pi, steps=100)
    print(f"probing instance {seed}: adaptive {float(a):.4f}, non-adaptive {float(na.value):.4f}, "
          f"gap {float(a / na.value):.4f} (e/(e-1) = {math.e / (math.e - 1):.4f})")
