"""
Scale invariance of sampled values
==================================

For steps in (pi, 2 pi) the sampled values of the fluorescence signal have
the same distribution whatever the step.  A step of 0.05 is a slow
arithmetic progression: its first 126 points never wrap around 2 pi and
look nothing like the equidistributed case.
"""
from jcmbloch import SampleGrid, with_precision
from jcmbloch.equidistribution import (
    histogram,
    sampled_values,
    scale_invariance_distance,
    time_average_vs_phase_average,
    weyl_sum,
)

ctx = with_precision(50)
for m in range(1, 4):
    w = weyl_sum(m, SampleGrid(7, 2, 10**6), ctx)
    print(f"Weyl sum m={m}, N=1e6: |W| = {float(w.magnitude):.3e}")

N = 500_000
print("KS(7/2, 9/2)      =", round(scale_invariance_distance("fluorescence", "7/2", "9/2", N, 1), 5))
print("KS(7/2, 1/20), N  =", round(scale_invariance_distance("fluorescence", "7/2", "1/20", N, 1,
                                                              enforce=False), 5))
print("KS(7/2, 1/20), 126 points =",
      round(scale_invariance_distance("fluorescence", "7/2", "1/20", 125, 1, enforce=False), 3))

h = histogram(sampled_values("fluorescence", "7/2", N, 1), 0.0, 1.0, 0.0025)
print(f"histogram: {len(h.counts)} bins, busiest bin at {h.edges[h.counts.argmax()]:.4f}")

for T in (1e3, 2e3, 4e3):
    r = time_average_vs_phase_average(1, T)
    print(f"T={T:.0f}: time average {r.time_average:+.2e}, phase average {r.phase_average}")
