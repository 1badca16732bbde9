"""
The Bloch map as a compressible fluid
=====================================

Every point of the unit ball moves under the same affine map, so the
Eulerian velocity is a gradient field with position-independent divergence.
The analogy breaks where L1 or L3 vanishes.
"""
from pathlib import Path

from jcmbloch import ThermalParams, evaluate, with_precision
from jcmbloch.fluid import SingularTimeError, density, divergence, velocity, xz_vector_grid
from jcmbloch.io import svg_vectors

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
ctx = with_precision(50)
p = ThermalParams(1)

# past the first zero of L3 the density formula changes sign
for t in ("0", "0.5", "1.3", "2.5"):
    v = velocity(t, (ctx.mpf("0.5"), 0, ctx.mpf("-0.2")), p, ctx)
    print(f"t={t}: v=({float(v[0]):+.5f}, {float(v[2]):+.5f}), "
          f"div={float(divergence(t, p, ctx)):+.5f}, rho/rho0={float(density(t, 1, p, ctx)):.5f}")

for t in ("0.5", "1.3", "2.5"):
    (out / f"velocity_t{t}.svg").write_text(svg_vectors(xz_vector_grid(t, p, ctx, n=15)))

# near t ~ 0.903 L3 changes sign and the inversion fails
t0 = ctx.mp.findroot(lambda s: evaluate(s, p, ctx).L3, ctx.mpf("0.9"))
try:
    velocity(t0, (0, 0, 0), p, ctx)
except SingularTimeError as e:
    print("refused:", str(e)[:70], "...")
