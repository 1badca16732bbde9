"""Fluorescence signal, filtered transient spectrum and discrete Fourier coefficients.

The two-time signal of the resonant thermal model is

    F(t1, t2) = (1-b)/2 sum_{n>=1} [cos(sqrt(n) t2) cos(sqrt(n) t1) b^(n-1)
                                    + sin(sqrt(n) t2) sin(sqrt(n) t1) b^n]

with b = exp(-beta).  Passing it through a single-pole filter of bandwidth
Gamma read out at time T gives the transient spectrum S(w), which has a
closed form as a sum over n.  The same signal sampled on t = l dt gives the
discrete Fourier coefficients c_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fastpath import FastSeries
from .precision import (
    PrecisionContext,
    Surd,
    as_argument,
    cos_sin_hp,
    cos_sin_sqrt_table,
    sqrt_int,
    with_precision,
)
from .series import ThermalParams, TruncationPolicy, _exact_or_mpf

# the closed-form c_k term is rerouted to a direct sum below this gap
NEAR_SINGULAR = 1e-15
# the quadrature kernel is cut at T - t = QUAD_SPAN / Gamma
QUAD_SPAN = 40
# default peak prominence, as a fraction of the global maximum
PEAK_FRACTION = 1e-3


@dataclass(frozen=True)
class SpectrumParams:
    """Filter bandwidth ``Gamma``, read-out time ``T`` and inverse temperature."""

    Gamma: object
    T: object
    beta: object
    trunc: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        for name in ("Gamma", "T", "beta"):
            v = _exact_or_mpf(getattr(self, name))
            if not v > 0:
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, v)

    @property
    def thermal(self) -> ThermalParams:
        return ThermalParams(self.beta, trunc=self.trunc)


@dataclass(frozen=True)
class SpectrumPoint:
    omega: object
    value: object


def fluorescence_signal(t1, t2, beta, trunc: TruncationPolicy | None = None,
                        ctx: PrecisionContext | None = None):
    """F(t1, t2), keeping n = 1..n_max+1.

    The dropped tail is at most b^(n_max+1) / 2.
    """
    ctx = ctx or with_precision()
    params = ThermalParams(beta, trunc=trunc or TruncationPolicy())
    N = params.n_max(ctx)
    b = ctx.exp_neg(params.beta)
    C1, S1 = cos_sin_sqrt_table(t1, N + 1, ctx)
    C2, S2 = cos_sin_sqrt_table(t2, N + 1, ctx)
    s = ctx.mp.mpf(0)
    w = ctx.mp.mpf(1)
    for n in range(1, N + 2):
        s += (C1[n] * C2[n] + b * S1[n] * S2[n]) * w
        w *= b
    return (1 - b) / 2 * s


def _double_arg(x):
    a = as_argument(x)
    return a.scale(2) if isinstance(a, Surd) else 2 * a


def _closed_terms(sp: SpectrumParams, ctx: PrecisionContext, omega_max2):
    """Highest n used by the closed form at frequencies up to sqrt(omega_max2)."""
    N = sp.thermal.n_max(ctx)
    G2 = float(sp.Gamma) ** 2
    # past the last resonance the terms fall off like b^n / n
    return N + 1 + int(math.ceil(2 * (float(omega_max2) + G2)))


def spectrum_closed(omega, sp: SpectrumParams, ctx: PrecisionContext | None = None):
    """S(w) from the closed-form sum over n.

    Each denominator [n + (G - iw)^2][n + (G + iw)^2] equals |n + (G + iw)^2|^2,
    so the sum is assembled in real arithmetic.
    """
    ctx = ctx or with_precision()
    mp = ctx.mp
    w = ctx.mpf(_exact_or_mpf(omega))
    G = ctx.mpf(sp.Gamma)
    b = ctx.exp_neg(sp.beta)
    eb = 1 / b
    n_top = _closed_terms(sp, ctx, w * w)
    C, S = cos_sin_sqrt_table(_double_arg(sp.T), n_top, ctx)
    G2w2 = G * G + w * w
    k_even = eb * eb - 1
    k_odd = (eb - 1) ** 2
    s = mp.mpf(0)
    bn = b * b
    for n in range(1, n_top + 1):
        A = n + G * G - w * w
        B = 2 * G * w
        num = k_even * (n + G2w2) + k_odd * ((G2w2 - n) * C[n] + 2 * G * sqrt_int(n, ctx) * S[n])
        s += bn * num / (2 * (A * A + B * B))
        bn *= b
    return G * s


def spectrum_grid(omegas, Gamma: float, T: float, beta: float) -> np.ndarray:
    """Double-precision closed form on an array of frequencies (for peak scans)."""
    w = np.asarray(omegas, dtype=float)
    G = float(Gamma)
    b = math.exp(-float(beta))
    N = FastSeries(beta).n_max + 1 + int(math.ceil(2 * (float(np.max(w * w)) + G * G)))
    n = np.arange(1, N + 1, dtype=float)[:, None]
    r = np.sqrt(n)
    phase = 2 * r * float(T)
    A = n + G * G - w[None, :] ** 2
    B = 2 * G * w[None, :]
    G2w2 = G * G + w[None, :] ** 2
    eb = 1 / b
    num = (eb * eb - 1) * (n + G2w2) + (eb - 1) ** 2 * (
        (G2w2 - n) * np.cos(phase) + 2 * G * r * np.sin(phase))
    return G * np.sum(b ** (n + 1) * num / (2 * (A * A + B * B)), axis=0)


@dataclass(frozen=True)
class NumericSpectrum:
    value: float
    error_estimate: float


def _filtered_amplitudes(omega, G, T, panels_per_unit, r):
    """int_{T-L}^{T} exp(-(G + i w)(T - t)) (cos, sin)(r t) dt by Gauss-Legendre."""
    L = QUAD_SPAN / G
    panels = max(1, int(math.ceil(L * panels_per_unit)))
    x, wq = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(T - L, T, panels + 1)
    h = (edges[1] - edges[0]) / 2
    ts = (edges[:-1, None] + h + h * x[None, :]).ravel()
    ker = np.exp(-(G + 1j * omega) * (T - ts)) * np.tile(wq * h, panels)
    ph = np.outer(r, ts)
    return np.cos(ph) @ ker, np.sin(ph) @ ker


def spectrum_numeric(omega, sp: SpectrumParams, quad_depth: int = 10) -> NumericSpectrum:
    """S(w) by direct quadrature of the filtered double integral.

    The double integral separates mode by mode into |int kernel * cos|^2 and
    |int kernel * sin|^2; each is evaluated with 20-point Gauss-Legendre
    panels, ``quad_depth`` panels per unit time, on [T - 40/Gamma, T].  The
    cut tail is below e^-40.  The error estimate is the change against half
    as many panels.
    """
    G, T, w = float(sp.Gamma), float(sp.T), float(omega)
    fs = FastSeries(float(sp.beta), tol=1e-18)
    b = fs.b
    n = np.arange(1, fs.n_max + 2, dtype=float)
    r = np.sqrt(n)

    def total(depth):
        Ic, Is = _filtered_amplitudes(w, G, T, depth, r)
        s = np.sum(b ** (n - 1) * np.abs(Ic) ** 2 + b ** n * np.abs(Is) ** 2)
        return 2 * G * 0.5 * (1 - b) * s

    full = total(quad_depth)
    half = total(max(1, quad_depth // 2))
    return NumericSpectrum(float(full), float(abs(full - half)))


def _theta_turns(k: int, N: int) -> Fraction:
    return Fraction(k % N, N)


def _dft_term_direct(theta_cs, w: Surd, N: int, n: int, b, ctx: PrecisionContext):
    """Mode-n part of c_k summed over l1, l2 directly.

    The double sum factorises into |sum_l e^{i theta l} cos(l w)|^2 and the
    matching sine sum.
    """
    mp = ctx.mp
    ct, st = theta_cs
    Ac = mp.mpc(0)
    As = mp.mpc(0)
    e = mp.mpc(1)
    step = mp.mpc(ct, st)
    for l in range(N):
        c, s = cos_sin_hp(w.scale(l), ctx)
        Ac += e * c
        As += e * s
        e *= step
    return (1 - b) / (2 * N * N) * (b ** (n - 1) * abs(Ac) ** 2 + b ** n * abs(As) ** 2)


def dft_closed(k: int, dt, N: int, beta, trunc: TruncationPolicy | None = None,
               ctx: PrecisionContext | None = None):
    """c_k from the closed-form sum over n, returned as an mpc.

    For integer k the factors sin(2 k pi) and cos(2 k pi) are 0 and 1.  A
    mode whose denominator gap |cos(2 k pi/N) - cos(sqrt(n) dt)| falls below
    1e-15 is summed directly instead.
    """
    ctx = ctx or with_precision()
    mp = ctx.mp
    k, N = int(k), int(N)
    if N < 1:
        raise ValueError("N must be positive")
    params = ThermalParams(beta, trunc=trunc or TruncationPolicy())
    nm = params.n_max(ctx) + 1
    dt = as_argument(dt)
    if not isinstance(dt, Surd):
        raise ValueError("dt must be exact (rational or rational * sqrt(d) [* pi])")
    beta_hp = ctx.mpf(params.beta)
    b = ctx.exp_neg(params.beta)
    th = Surd(Fraction(2 * (k % N), N), 1, True)
    ct, st = cos_sin_hp(th, ctx)
    C1, S1 = cos_sin_sqrt_table(dt, nm, ctx)
    CN, SN = cos_sin_sqrt_table(dt.scale(N), nm, ctx)
    CM, _ = cos_sin_sqrt_table(dt.scale(N - 1), nm, ctx)
    sh, ch = mp.sinh(beta_hp / 2), mp.cosh(beta_hp / 2)
    s = mp.mpf(0)
    bn = mp.mpf(1)
    for n in range(1, nm + 1):
        bn *= b
        gap = ct - C1[n]
        if abs(gap) < NEAR_SINGULAR:
            s += _dft_term_direct((ct, st), dt.times_sqrt(n), N, n, b, ctx)
            continue
        X = (1 - ct * C1[n]) * (1 - CN[n])
        Y = gap * CM[n] * (1 - CN[n])
        s += bn * sh * (ch * X + sh * Y) / (N * N * gap * gap)
    return mp.mpc(s, 0)


def signal_matrix(dt, N: int, beta, ctx: PrecisionContext) -> list:
    """F(l1 dt, l2 dt) for l1, l2 = 0..N-1 (symmetric, filled once)."""
    params = ThermalParams(beta)
    nm = params.n_max(ctx) + 1
    dt = as_argument(dt)
    b = ctx.exp_neg(params.beta)
    tabs = [cos_sin_sqrt_table(dt.scale(l), nm, ctx) for l in range(N)]
    wc = [(1 - b) / 2 * b ** (n - 1) for n in range(nm + 1)]
    ws = [(1 - b) / 2 * b ** n for n in range(nm + 1)]
    F = [[None] * N for _ in range(N)]
    fsum = ctx.mp.fsum
    for i in range(N):
        Ci, Si = tabs[i]
        for j in range(i, N):
            Cj, Sj = tabs[j]
            v = fsum(Ci[n] * Cj[n] * wc[n] + Si[n] * Sj[n] * ws[n] for n in range(1, nm + 1))
            F[i][j] = F[j][i] = v
    return F


def dft_direct(k: int, dt, N: int, beta, ctx: PrecisionContext | None = None, F=None):
    """c_k as the literal double sum (1/N^2) sum e^{-i 2 pi (l2-l1) k / N} F(l1 dt, l2 dt).

    O(N^2) and limited to N <= 1024.  A precomputed :func:`signal_matrix`
    may be passed as ``F`` to reuse it across k.
    """
    ctx = ctx or with_precision()
    mp = ctx.mp
    k, N = int(k), int(N)
    if not 1 <= N <= 1024:
        raise ValueError("dft_direct is limited to 1 <= N <= 1024")
    if F is None:
        F = signal_matrix(dt, N, beta, ctx)
    phases = []
    for d in range(N):
        c, s = cos_sin_hp(Surd(2 * _theta_turns(k * d, N), 1, True), ctx)
        phases.append(mp.mpc(c, -s))
    total = mp.mpc(0)
    for l1 in range(N):
        row = F[l1]
        total += mp.fsum(phases[(l2 - l1) % N] * row[l2] for l2 in range(N))
    return total / (N * N)


def find_peaks(points, min_prominence=None) -> list:
    """Frequencies of local maxima standing out by at least ``min_prominence``.

    The prominence of a maximum is its height above the larger of the two
    valley floors reached before climbing to a higher point (or the grid
    edge) on either side.  The default threshold is 0.1% of the global maximum.
    ``points`` is a sequence of :class:`SpectrumPoint` or (omega, value) pairs
    on a uniform grid.
    """
    pts = [(p.omega, p.value) if isinstance(p, SpectrumPoint) else tuple(p) for p in points]
    if len(pts) < 3:
        return []
    om = np.array([float(p[0]) for p in pts])
    v = np.array([float(p[1]) for p in pts])
    if min_prominence is None:
        min_prominence = PEAK_FRACTION * float(np.max(v))
    out = []
    n = len(v)
    for i in range(1, n - 1):
        if not (v[i] > v[i - 1] and v[i] >= v[i + 1]):
            continue
        lo_l = v[i]
        j = i - 1
        while j >= 0 and v[j] <= v[i]:
            lo_l = min(lo_l, v[j])
            j -= 1
        lo_r = v[i]
        j = i + 1
        while j < n and v[j] <= v[i]:
            lo_r = min(lo_r, v[j])
            j += 1
        if v[i] - max(lo_l, lo_r) >= min_prominence:
            out.append(float(om[i]))
    return out


def spectrum_peaks(beta, Gamma=0.01, T=100, w_lo=0.0, w_hi=3.5, step=1e-3,
                   min_prominence=None) -> list:
    """Peak frequencies of the double-precision spectrum on a uniform grid."""
    k = int(round((w_hi - w_lo) / step))
    w = w_lo + step * np.arange(k + 1)
    vals = spectrum_grid(w, Gamma, T, beta)
    return find_peaks(list(zip(w, vals)), min_prominence)
