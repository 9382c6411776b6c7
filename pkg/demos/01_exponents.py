"""
Query exponents for near-linear-space Euclidean ANN
===================================================

How much does list inversion buy over the plain list-of-points structure?
"""

import numpy as np

from invann import analysis

# The reference rows, as aligned text.
rows, text = analysis.report_table()
print(text)
print()

# At c = 2 the plain structure answers in about n^0.44.  Spending a little
# extra space exponent rho_u moves the query exponent down fast:
for rho_u in (0.0, 0.005, 0.01, 0.02):
    print(f"rho_u = {rho_u:.3f} -> rho_q = {analysis.rho_q_from(rho_u, 2.0):.4f}")

# Inversion charges about 4 rho_u to bring space back to near-linear, so the
# best trade sits at a tiny rho_u.
print(f"best rho_u at c=2: {analysis.optimal_rho_u(2.0):.6f}, alpha(2) = {analysis.alpha(2.0):.5f}")

# The gain is largest near c = 1.79 and the ratio tends to 4/5 for large c.
cs = np.arange(1.001, 10, 0.001)
gap = np.array([analysis.alrw_exponent(c) - analysis.alpha(c) for c in cs])
print(f"largest gap at c = {cs[gap.argmax()]:.3f}")
print(f"alpha/ALRW at c = 100: {analysis.alpha(100) / analysis.alrw_exponent(100):.4f}")
