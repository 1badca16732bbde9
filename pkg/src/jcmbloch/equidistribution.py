"""Weyl sums, modular sequences, histograms and scale-invariance statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bloch import SampleGrid
from .fastpath import FastSeries
from .precision import PrecisionContext, Surd, as_argument, turns, with_precision

DEFAULT_BIN = 0.0025
# KS threshold for "indistinguishable" histograms, fixed by a pilot run
KS_THRESHOLD = 0.02


@dataclass(frozen=True)
class WeylSum:
    magnitude: object
    phase: object
    degenerate: bool = False

    @property
    def value(self):
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))


def _expj_exact(x: Surd, ctx: PrecisionContext):
    """exp(i x) with exact reduction; also reports whether x is 0 mod 2pi."""
    fr = turns(x, ctx)
    if isinstance(fr, Fraction):
        if fr == 0:
            return ctx.mp.mpc(1, 0), True
        fr = ctx.mp.mpf(fr.numerator) / fr.denominator
    return ctx.mp.mpc(ctx.mp.cospi(2 * fr), ctx.mp.sinpi(2 * fr)), False


def weyl_sum(m: int, grid: SampleGrid, ctx: PrecisionContext) -> WeylSum:
    """(1/(N+1)) sum_{n=0}^{N} exp(i m n dt) through the closed geometric form.

    When m dt is an exact multiple of 2pi every term is 1; the magnitude is
    then exactly 1 and ``degenerate`` is set.
    """
    if m == 0:
        raise ValueError("m must be nonzero")
    mp = ctx.mp
    N = grid.N
    e1, deg = _expj_exact(grid.dt.scale(m), ctx)
    if deg:
        return WeylSum(mp.mpf(1), mp.mpf(0), True)
    eN, _ = _expj_exact(grid.dt.scale(m * (N + 1)), ctx)
    z = (1 - eN) / ((N + 1) * (1 - e1))
    return WeylSum(abs(z), mp.arg(z), False)


def weyl_sum_direct(m: int, grid: SampleGrid, ctx: PrecisionContext):
    """Term-by-term version of :func:`weyl_sum`, returned as an mpc."""
    mp = ctx.mp
    s = mp.mpc(0)
    for n in range(grid.N + 1):
        s += _expj_exact(grid.dt.scale(m * n), ctx)[0]
    return s / (grid.N + 1)


def weyl_bound(m: int, grid: SampleGrid, ctx: PrecisionContext):
    """2 / ((N+1) |1 - exp(i m dt)|), the closed-form majorant."""
    e1, deg = _expj_exact(grid.dt.scale(m), ctx)
    if deg:
        return ctx.mp.inf
    return 2 / ((grid.N + 1) * abs(1 - e1))


def sequence_mod(grid: SampleGrid, modulus: str = "2pi", multiplier: int = 1,
                 ctx: PrecisionContext | None = None):
    """{n sqrt(multiplier) dt mod modulus : n = 0..N} with exact reduction.

    ``modulus`` is ``"pi"`` or ``"2pi"``; ``multiplier`` d stands for sqrt(d).
    """
    ctx = ctx or with_precision()
    mp = ctx.mp
    if modulus not in ("pi", "2pi"):
        raise ValueError("modulus must be 'pi' or '2pi'")
    k = 2 if modulus == "pi" else 1
    span = ctx.pi * (2 // k)
    out = []
    base = grid.dt.times_sqrt(multiplier)
    for n in range(grid.N + 1):
        fr = turns(base.scale(n * k), ctx)
        if isinstance(fr, Fraction):
            fr = mp.mpf(fr.numerator) / fr.denominator
        out.append(+(span * fr))
    return out


@dataclass
class Histogram:
    lo: float
    hi: float
    bin_width: float
    counts: np.ndarray
    total: int
    overflow: int = 0

    @property
    def edges(self) -> np.ndarray:
        e = self.lo + self.bin_width * np.arange(len(self.counts) + 1)
        e[-1] = min(e[-1], self.hi)
        return e

    def rows(self):
        e = self.edges
        return [(e[i], e[i + 1], int(c)) for i, c in enumerate(self.counts)]


def _n_bins(lo, hi, w) -> int:
    return int(math.ceil((Fraction(hi) - Fraction(lo)) / Fraction(w)))


def histogram(values, lo, hi, bin_width) -> Histogram:
    """Counts in half-open bins [lo + k w, lo + (k+1) w) covering [lo, hi).

    Float arrays are binned in floating point; sequences of exact numbers
    (int, Fraction, mpf) are binned exactly.  Values outside [lo, hi) go to
    the ``overflow`` tally.
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    if not lo < hi:
        raise ValueError("need lo < hi")
    nb = _n_bins(lo, hi, bin_width)
    if isinstance(values, np.ndarray) and values.dtype.kind == "f":
        v = values
        k = np.floor((v - float(lo)) / float(bin_width)).astype(np.int64)
        ok = (v >= float(lo)) & (v < float(hi)) & (k >= 0) & (k < nb)
        counts = np.bincount(k[ok], minlength=nb)[:nb]
        total = int(ok.sum())
        return Histogram(float(lo), float(hi), float(bin_width), counts, total,
                         int(len(v) - total))
    flo, fhi, fw = Fraction(lo), Fraction(hi), Fraction(bin_width)
    counts = np.zeros(nb, dtype=np.int64)
    over = 0
    n = 0
    for x in values:
        n += 1
        fx = _fraction(x)
        if fx < flo or fx >= fhi:
            over += 1
            continue
        k = math.floor((fx - flo) / fw)
        counts[min(k, nb - 1)] += 1
    return Histogram(float(lo), float(hi), float(bin_width), counts, n - over, over)


def _fraction(x) -> Fraction:
    if hasattr(x, "_mpf_"):
        sign, man, exp, _ = x._mpf_
        f = Fraction(int(man)) * (Fraction(2) ** exp)
        return -f if sign else f
    return Fraction(x)


def ks_binned(a: np.ndarray, b: np.ndarray, bin_width: float = DEFAULT_BIN) -> float:
    """Two-sample Kolmogorov-Smirnov statistic on binned empirical CDFs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = math.floor(min(a.min(), b.min()) / bin_width) * bin_width
    hi = math.ceil(max(a.max(), b.max()) / bin_width) * bin_width + bin_width
    ha = histogram(a, lo, hi, bin_width).counts
    hb = histogram(b, lo, hi, bin_width).counts
    return float(np.max(np.abs(np.cumsum(ha) / len(a) - np.cumsum(hb) / len(b))))


SAMPLED_FUNCTIONS = ("f", "g", "fluorescence")


def sampled_values(tag: str, dt, N: int, beta) -> np.ndarray:
    """Values of a sampled function on t = n dt, n = 0..N, in double precision.

    ``f`` is sum_{n>=1} b^n cos(2 sqrt(n) t) (the oscillating part of L4),
    ``g`` is sum_{n>=0} b^n cos(sqrt(n+1) t) cos(sqrt(n) t) (L1 / (1-b)) and
    ``fluorescence`` is the equal-time signal F(t, t).  Phases come from the
    exactly reduced 128-bit grid increments.
    """
    fs = FastSeries(float(beta))
    b = fs.b
    if tag == "fluorescence":
        return fs.fluorescence_grid(dt, N + 1)
    out = np.empty(N + 1)
    for js, L1, L3, L4 in fs.grid(dt, 0, N + 1):
        if tag == "g":
            out[js.astype(np.int64)] = L1 / (1 - b)
        elif tag == "f":
            out[js.astype(np.int64)] = (L4 + (1 - b) / 2) / ((1 - b) ** 2 / (2 * b))
        else:
            raise ValueError(f"unknown function tag {tag!r}")
    return out


def _dt_ok(tag: str, dt) -> bool:
    v = float(dt)
    if math.pi < v < 2 * math.pi:
        return True
    return tag in ("f", "fluorescence") and math.pi / 2 < v < math.pi


def scale_invariance_distance(tag: str, dt_a, dt_b, N: int, beta,
                              bin_width: float = DEFAULT_BIN, enforce: bool = True) -> float:
    """KS distance between the value distributions on two time grids.

    Samples are treated as unordered sets.  With ``enforce`` both steps must
    lie in (pi, 2pi); f and the fluorescence signal also accept (pi/2, pi).
    """
    dt_a, dt_b = as_argument(dt_a), as_argument(dt_b)
    if tag not in SAMPLED_FUNCTIONS:
        raise ValueError(f"unknown function tag {tag!r}")
    if enforce and not (_dt_ok(tag, dt_a) and _dt_ok(tag, dt_b)):
        raise ValueError("time step outside the pseudorandom range")
    if dt_a == dt_b:
        return 0.0
    a = sampled_values(tag, dt_a, N, beta)
    b = sampled_values(tag, dt_b, N, beta)
    return ks_binned(a, b, bin_width)


@dataclass(frozen=True)
class AverageResult:
    time_average: float
    phase_average: float


def _approx_L1(t, b):
    return (1 - b) * np.cos(t) + b * np.cos(math.sqrt(2) * t) * np.cos(t)


def time_average_vs_phase_average(beta, T, step: float = 1e-2) -> AverageResult:
    """Time average of the two-frequency approximant of L1 against its torus average.

    The time average (1/T) int_0^T L1~(t) dt uses composite Simpson at
    ``step`` (rounded so that it divides T into an even number of panels).
    The torus average of G(t1, t2) = (1-b) cos t1 + b cos(sqrt2 t2) cos t1
    over both angles vanishes identically because every mode carries cos t1.
    """
    b = math.exp(-float(beta))
    T = float(T)
    n = int(math.ceil(T / step))
    n += n % 2
    t = np.linspace(0.0, T, n + 1)
    y = _approx_L1(t, b)
    h = T / n
    integral = h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())
    return AverageResult(integral / T, 0.0)
