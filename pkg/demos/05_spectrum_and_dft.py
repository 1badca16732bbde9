"""
Transient spectrum and discrete Fourier coefficients
====================================================

The filtered spectrum has peaks near sqrt(n); more of them appear as the
temperature rises.  The DFT of the sampled signal is checked against the
literal double sum.
"""
from fractions import Fraction
from pathlib import Path

import numpy as np

from jcmbloch import with_precision
from jcmbloch.io import PlotSpec, svg_line
from jcmbloch.spectra import (
    SpectrumParams,
    dft_closed,
    dft_direct,
    spectrum_closed,
    spectrum_grid,
    spectrum_numeric,
    spectrum_peaks,
)

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
ctx = with_precision(50)

for beta in (4, 2, 1, 0.5):
    pk = spectrum_peaks(beta)
    print(f"beta={beta}: {len(pk)} peaks, omega^2 ~ {[round(w * w, 2) for w in pk]}")

w = np.arange(0, 3.5, 1e-3)
s = spectrum_grid(w, 0.01, 100.0, 2.0)
(out / "spectrum_beta2.svg").write_text(
    svg_line(w, s, PlotSpec((0, 3.5), (0, float(s.max()) * 1.05), x_label="omega", y_label="S")))

sp = SpectrumParams("0.1", 10, 1)
print(f"closed {float(spectrum_closed('1.2', sp, ctx)):.12f} "
      f"vs quadrature {spectrum_numeric(1.2, sp).value:.12f}")

for k in (0, 5, 17):
    c = dft_closed(k, Fraction(7, 2), 32, 1, ctx=ctx)
    d = dft_direct(k, Fraction(7, 2), 32, 1, ctx)
    print(f"c_{k} = {float(c.real):.10f}, |closed - direct| = {float(abs(c - d)):.1e}")
