"""
Orthogonal arrays from finite fields
====================================

Build a few strength-2 arrays, check their balance and see how much of the
full grid they skip.
"""

# %%
import numpy as np

from oatune.arrays import catalog_lookup, construct_oa, full_factorial, verify_oa
from oatune.design import savings_fraction
from oatune.gf import build_field

# %%
# GF(4) is not arithmetic mod 4: element 2 stands for x and x*x = x + 1 (element 3)
gf4 = build_field(4)
print(gf4.mul_table)

# %%
# 4 factors at 3 levels need only 9 rows
l9 = construct_oa(3, 4)
print(l9.name)
print(l9.entries)

# %%
# every column holds each level 3 times, every column pair each level pair once
check = verify_oa(l9)
print(check.passed, check.index_lambda)
print(check.pair_counts[(0, 1)])

# %%
# break one cell and the pair counts notice
broken = np.array(l9.entries)
broken[4, 2] = 1
bad = verify_oa(type(l9)(broken, 3))
print(bad.first_violation)

# %%
# more factors than h + 1 moves up to h**3 rows
print(construct_oa(3, 6).name, construct_oa(2, 7).name)

# %%
# a full factorial is an orthogonal array too, just a wasteful one
print(verify_oa(full_factorial(3, 3)).index_lambda)

# %%
# catalog entries are verified when loaded
print(catalog_lookup("L25(5^6)").entries.shape)

# %%
for n, h, k in [(9, 3, 3), (9, 3, 4), (25, 5, 6), (49, 7, 8)]:
    print(f"L{n}({h}^{k}) skips {savings_fraction(n, h, k):.3%} of {h**k} runs")
