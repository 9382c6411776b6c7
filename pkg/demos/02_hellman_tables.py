"""
Inverting one function with less than a full table
===================================================

Chain tables store ~M/sigma endpoints per table and pay ~sigma^2 evaluations
per lookup.  Watch the success rate and the memory move together.
"""

import numpy as np

from invann.all_inversion import RandomKeys
from invann.inversion import EvalCounter, build_inversion, invert_one

M = 4096
values = RandomKeys(M, M, seed=1).values(np.arange(M)).astype(np.int64)
f = lambda x: values[x]  # noqa: E731
image = np.unique(values)
queries = np.random.default_rng(0).choice(image, 500)

print(f"{'sigma':>5} {'tables':>6} {'t':>3} {'bytes':>8} {'success':>8} {'max evals':>9}")
for sigma in (1, 2, 4, 8, 16):
    table = build_inversion(f, M, sigma, seed=sigma)
    hits, worst = 0, 0
    for y in queries:
        counter = EvalCounter()
        x = invert_one(table, int(y), counter)
        worst = max(worst, counter.count)
        if x is not None:
            assert values[x] == y  # answers are always verified
            hits += 1
    print(f"{sigma:>5} {table.tables:>6} {table.t:>3} {table.nbytes:>8} {hits / len(queries):>8.3f} {worst:>9}")

# A value outside the image never yields an answer.
outside = np.setdiff1d(np.arange(M), image)[0]
print("outside the image:", invert_one(build_inversion(f, M, 4, seed=0), int(outside)))
