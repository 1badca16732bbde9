"""
Near-zeros of S_z and the (beta, S_x) scatter
=============================================

At each beta the grid t_n = n * 7/2 is swept for |S_z| <= eps(beta).  A
double-precision prefilter flags candidates and each one is confirmed at
50 digits.  At low temperature S_x at the hits clusters near +-(1 - 2e^-beta).
"""
import math
from fractions import Fraction
from pathlib import Path

from jcmbloch import qpi_scan, scatter_sweep, schedule, with_precision
from jcmbloch.diophantine import build_candidate_set, third_order_filter
from jcmbloch.io import PlotSpec, svg_scatter

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
ctx = with_precision(50)

for b in ("0.5", "1", "2", "5"):
    s = schedule(b)
    print(f"beta={b:>3}: N={s.N}, eps={s.epsilon:.3g}")

# full schedules are cheap from beta = 3 upwards
recs = list(scatter_sweep("3.0", "5.0", "0.025", ctx=ctx, workers=2))
print(f"{len(recs)} confirmed hits for beta in [3, 5]")
for b in ("3", "4", "5"):
    sx = [float(r.sx) for r in recs if r.beta == Fraction(b)]
    if sx:
        print(f"  beta={b}: {len(sx)} hits, min |S_x|={min(abs(v) for v in sx):.4f}, "
              f"1 - 2e^-beta = {1 - 2 * math.exp(-float(b)):.4f}")
spec = PlotSpec(x_range=(2.9, 5.1), y_range=(-1.05, 1.05), x_label="beta")
(out / "zerocross.svg").write_text(
    svg_scatter([float(r.beta) for r in recs], [float(r.sx) for r in recs], spec))

# the same picture at t = q pi for the third-order candidate set
Mt = third_order_filter(build_candidate_set())
rows = qpi_scan(Mt, "1.0", "2.5", "0.1", ctx=ctx)
print(f"{len(rows)} (beta, q) pairs; worst |S_z| at beta=2: "
      f"{max(abs(float(r.sz)) for r in rows if r.beta == 2):.2e}")
