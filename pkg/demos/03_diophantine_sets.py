"""
Rational approximations of sqrt(2)/k
=====================================

Near-zeros of S_z at t = q pi come from denominators q of good rational
approximations to sqrt(2)/k.  Continued fractions give them exactly.
"""
from jcmbloch.diophantine import (
    build_candidate_set,
    continued_fraction,
    convergents,
    quality,
    sqrt2_over,
    third_order_filter,
)

for k in (1, 2, 3, 4):
    cf = continued_fraction(sqrt2_over(k), 8)
    print(f"sqrt(2)/{k}: preperiod {cf.preperiod}, period {cf.period}")

alpha = sqrt2_over(1)
for c in convergents(alpha, 14)[10:]:
    q = quality(alpha, c)
    print(f"chi({c.index}) = {c.p}/{c.q}: err={float(q.err):.4e}, "
          f"< 1/q^2: {q.passes_q2}, < 1/(a q^2): {q.passes_next_quotient}")

M = build_candidate_set()
print(f"|M| = {len(M)}, smallest nonzero {M[1]}, largest {M[-1]}")
Mt = third_order_filter(M)
print(f"third-order filter at beta=2 keeps {len(Mt)}: {Mt}")
