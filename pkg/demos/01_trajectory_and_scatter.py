"""
Bloch trajectory and its discrete samples
=========================================

Starting from S(0) = (1, 0, 0) the Bloch vector stays in the xz-plane.
Sampled at a constant step the points fill a region of the disc instead of
tracing a curve.
"""
from pathlib import Path

import numpy as np

from jcmbloch import (
    BlochState,
    SampleGrid,
    ThermalParams,
    evolve,
    find_self_intersections,
    with_precision,
)
from jcmbloch.bloch import sample_trajectory_fast
from jcmbloch.fastpath import FastSeries
from jcmbloch.io import PlotSpec, svg_line, svg_scatter

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
ctx = with_precision(50)
params = ThermalParams(1)

# a few full-precision states; S_y is exactly zero
for t in ("0", "1", "3.5", "1000"):
    s = evolve(BlochState(1, 0, 0), t, params, ctx)
    print(f"t={t:>6}  S=({float(s.sx):+.12f}, {float(s.sy):+.1f}, {float(s.sz):+.12f})")

# the continuous curve for 0 <= t <= 30 (double precision is plenty for a picture)
ts = np.linspace(0, 30, 6001)
L1, _, L4 = FastSeries(1.0).at_times(ts)
(out / "trajectory.svg").write_text(svg_line(L1, L4, PlotSpec()))

# discrete samples at dt = 7/2, N = 384000
grid = SampleGrid(7, 2, 384_000)
xs, zs = [], []
for js, sx, _, sz in sample_trajectory_fast(grid, params):
    xs.append(sx)
    zs.append(sz)
xs, zs = np.concatenate(xs), np.concatenate(zs)
print(f"{len(xs)} samples, S_x in [{xs.min():.3f}, {xs.max():.3f}], "
      f"S_z in [{zs.min():.3f}, {zs.max():.3f}]")
(out / "scatter.svg").write_text(svg_scatter(xs, zs, PlotSpec()))

# the curve crosses itself once on [0, 5]
for (t1, t2), (x, z) in find_self_intersections(params, 5, ctx=ctx):
    print(f"self-crossing at t1={float(t1):.8f}, t2={float(t2):.8f}, point=({float(x):.6f}, {float(z):.6f})")
