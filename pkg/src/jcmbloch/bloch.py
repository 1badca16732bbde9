"""Bloch-vector trajectories, discrete time grids and self-intersections."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .fastpath import FastSeries
from .precision import PrecisionContext, Surd, with_precision
from .series import ThermalParams, eval_detuned, evaluate

NORM_SLACK = 1e-30


@dataclass(frozen=True)
class BlochState:
    sx: object
    sy: object
    sz: object

    def norm2(self):
        return self.sx * self.sx + self.sy * self.sy + self.sz * self.sz

    def is_valid(self, slack=NORM_SLACK) -> bool:
        return self.norm2() <= 1 + slack

    def as_tuple(self):
        return (self.sx, self.sy, self.sz)


@dataclass(frozen=True)
class SampleGrid:
    """Discrete-time lattice t_n = n dt with dt = sigma p / q.

    ``sigma`` is sqrt(radicand) (radicand 1 means unity).  ``with_pi`` builds
    oracle grids such as dt = 2*pi; these and any grid outside (pi, 2pi) are
    rejected while ``enforce_pseudorandom`` is set.
    """

    p: int
    q: int
    N: int
    radicand: int = 1
    with_pi: bool = False
    enforce_pseudorandom: bool = False

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"p={self.p} and q={self.q} are not coprime")
        if self.N < 0:
            raise ValueError("N must be non-negative")
        if self.enforce_pseudorandom and not self.is_pseudorandom():
            raise ValueError(f"dt = {self.dt} violates pi < dt < 2pi")

    @property
    def dt(self) -> Surd:
        return Surd(Fraction(self.p, self.q), self.radicand, self.with_pi)

    def time(self, n: int) -> Surd:
        return self.dt.scale(n)

    def is_pseudorandom(self) -> bool:
        ctx = with_precision(40)
        v = self.dt.to_hp(ctx)
        return bool(ctx.pi < v < 2 * ctx.pi)

    @classmethod
    def parse(cls, text: str, N: int, enforce_pseudorandom: bool = False) -> "SampleGrid":
        """Parse ``"7/2"``, ``"3.5"``, ``"sqrt(2)*3/2"`` or ``"2pi"`` style steps."""
        s = text.replace(" ", "").lower()
        d, with_pi = 1, False
        m = re.fullmatch(r"(.*?)\*?sqrt\((\d+)\)\*?(.*)", s)
        if m:
            d = int(m.group(2))
            s = (m.group(1) or "") + (m.group(3) or "")
        if s.endswith("pi"):
            with_pi = True
            s = s[:-2].rstrip("*")
        s = s or "1"
        r = Fraction(s)
        return cls(r.numerator, r.denominator, N, d, with_pi, enforce_pseudorandom)


def _params(params) -> ThermalParams:
    return params if isinstance(params, ThermalParams) else ThermalParams(params)


def evolve(s0: BlochState, t, params, ctx: PrecisionContext) -> BlochState:
    """Apply the affine Bloch map at time t to the initial state s0.

    Resonant case: S = diag(L1, L1, L3) S0 + (0, 0, L4).  With detuning the
    x-y block becomes the rotation [[L1, L2], [-L2, L1]].
    """
    params = _params(params)
    sx, sy, sz = (ctx.mpf(v) if not hasattr(v, "_mpf_") else v for v in s0.as_tuple())
    if params.resonant:
        v = evaluate(t, params, ctx)
        return BlochState(v.L1 * sx, v.L1 * sy, v.L3 * sz + v.L4)
    L1, L2, L3, L4 = eval_detuned(t, params, ctx)
    return BlochState(L1 * sx + L2 * sy, -L2 * sx + L1 * sy, L3 * sz + L4)


@dataclass(frozen=True)
class Viewport:
    """Rectangular (S_x, S_z) window; None bounds are open."""

    x_lo: float | None = None
    x_hi: float | None = None
    z_lo: float | None = None
    z_hi: float | None = None

    def mask(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        m = np.ones(x.shape, dtype=bool)
        if self.x_lo is not None:
            m &= x >= self.x_lo
        if self.x_hi is not None:
            m &= x <= self.x_hi
        if self.z_lo is not None:
            m &= z >= self.z_lo
        if self.z_hi is not None:
            m &= z <= self.z_hi
        return m

    def contains(self, x, z) -> bool:
        return bool(self.mask(float(x), float(z)))


def sample_trajectory(s0: BlochState, grid: SampleGrid, params, ctx: PrecisionContext,
                      window: Viewport | None = None) -> Iterator[tuple]:
    """Yield (t_n, state) for n = 0..N at full precision.

    Records are produced lazily so arbitrarily long grids stream without being
    held in memory.  With a ``window`` only states inside it are yielded.
    """
    for n in range(grid.N + 1):
        t = grid.time(n)
        st = evolve(s0, t, params, ctx)
        if window is None or window.contains(st.sx, st.sz):
            yield t, st


def sample_trajectory_fast(grid: SampleGrid, params, window: Viewport | None = None,
                           s0=(1.0, 0.0, 0.0), chunk: int = 1 << 13):
    """Double-precision chunks (n, sx, sy, sz) of a resonant trajectory.

    Uses the exactly reduced grid phases of :class:`~jcmbloch.fastpath.FastSeries`.
    """
    params = _params(params)
    if not params.resonant:
        raise ValueError("fast trajectories are resonant only")
    fs = FastSeries(float(params.beta))
    x0, y0, z0 = (float(v) for v in s0)
    for js, L1, L3, L4 in fs.grid(grid.dt, 0, grid.N + 1, chunk):
        sx, sy, sz = L1 * x0, L1 * y0, L3 * z0 + L4
        if window is not None:
            m = window.mask(sx, sz)
            js, sx, sy, sz = js[m], sx[m], sy[m], sz[m]
        yield js, sx, sy, sz


def _segment_hits(P: np.ndarray, i: int):
    """Indices j > i+1 whose segment P[j]P[j+1] crosses P[i]P[i+1]."""
    a, b = P[i], P[i + 1]
    c, d = P[i + 2:-1], P[i + 3:]
    if len(c) == 0:
        return np.array([], dtype=int), None, None
    r = b - a
    s = d - c
    den = r[0] * s[:, 1] - r[1] * s[:, 0]
    ca = c - a
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (ca[:, 0] * s[:, 1] - ca[:, 1] * s[:, 0]) / den
        v = (ca[:, 0] * r[1] - ca[:, 1] * r[0]) / den
    ok = (den != 0) & (u >= 0) & (u < 1) & (v >= 0) & (v < 1)
    idx = np.nonzero(ok)[0]
    return idx + i + 2, u[idx], v[idx]


def find_self_intersections(params, t_max, coarse_step="0.001", tol="1e-20",
                            ctx: PrecisionContext | None = None):
    """Self-crossings of the resonant (S_x, S_z) curve from S(0) = (1, 0, 0).

    A double-precision polyline at ``coarse_step`` is scanned for crossing
    segment pairs.  Each candidate is refined by bisection on the high
    precision chords (halving both parameter brackets and keeping the
    crossing sub-chord pair), then polished by Newton's method on
    S(t1) - S(t2) = 0.  Pairs with |S(t1) - S(t2)| < tol are reported once,
    as ((t1, t2), (sx, sz)).
    """
    params = _params(params)
    ctx = ctx or with_precision(50)
    h = float(Fraction(str(coarse_step)))
    tm = float(Fraction(str(t_max))) if not hasattr(t_max, "_mpf_") else float(t_max)
    tol = ctx.mpf(str(tol)) if not hasattr(tol, "_mpf_") else tol
    n = int(math.floor(tm / h))
    ts = np.arange(n + 1) * h
    fs = FastSeries(float(params.beta))
    L1, _, L4 = fs.at_times(ts)
    P = np.stack([L1, L4], axis=1)

    found = []
    for i in range(len(P) - 3):
        js, _, _ = _segment_hits(P, i)
        for j in js:
            res = _refine(params, ctx, ts[i], ts[i + 1], ts[j], ts[j + 1])
            if res is None:
                continue
            t1, t2, pt, resid = res
            if not resid < tol:
                continue
            if t2 > ctx.mpf(tm) or t1 < 0:
                continue
            if any(abs(t1 - a) < 1e-9 and abs(t2 - b) < 1e-9 for (a, b), _ in found):
                continue
            found.append(((t1, t2), pt))
    found.sort(key=lambda r: (r[0][0], r[0][1]))
    return found


def _pt(t, params, ctx):
    v = evaluate(t, params, ctx)
    return v.L1, v.L4


def _cross(a, b, c, d):
    """Parameters (u, v) of the crossing of chords ab and cd, or None."""
    r = (b[0] - a[0], b[1] - a[1])
    s = (d[0] - c[0], d[1] - c[1])
    den = r[0] * s[1] - r[1] * s[0]
    if den == 0:
        return None
    ca = (c[0] - a[0], c[1] - a[1])
    u = (ca[0] * s[1] - ca[1] * s[0]) / den
    v = (ca[0] * r[1] - ca[1] * r[0]) / den
    return u, v


def _refine(params, ctx, a0, a1, b0, b1, levels=30, newton=8):
    mp = ctx.mp
    a0, a1, b0, b1 = (ctx.mpf(repr(float(x))) for x in (a0, a1, b0, b1))
    pa = [_pt(a0, params, ctx), _pt(a1, params, ctx)]
    pb = [_pt(b0, params, ctx), _pt(b1, params, ctx)]
    for _ in range(levels):
        am, bm = (a0 + a1) / 2, (b0 + b1) / 2
        pam, pbm = _pt(am, params, ctx), _pt(bm, params, ctx)
        A = [(a0, am, pa[0], pam), (am, a1, pam, pa[1])]
        B = [(b0, bm, pb[0], pbm), (bm, b1, pbm, pb[1])]
        best = None
        for sa in A:
            for sb in B:
                uv = _cross(sa[2], sa[3], sb[2], sb[3])
                if uv is None:
                    continue
                u, v = uv
                # distance outside [0,1]^2, 0 for a true chord crossing
                out = max(0, -u, u - 1) + max(0, -v, v - 1)
                if best is None or out < best[0]:
                    best = (out, sa, sb)
        if best is None:
            return None
        _, sa, sb = best
        a0, a1, pa = sa[0], sa[1], [sa[2], sa[3]]
        b0, b1, pb = sb[0], sb[1], [sb[2], sb[3]]
    uv = _cross(pa[0], pa[1], pb[0], pb[1])
    if uv is None:
        return None
    t1 = a0 + uv[0] * (a1 - a0)
    t2 = b0 + uv[1] * (b1 - b0)
    for _ in range(newton):
        v1 = evaluate(t1, params, ctx, 1)
        v2 = evaluate(t2, params, ctx, 1)
        fx, fz = v1.L1 - v2.L1, v1.L4 - v2.L4
        j11, j12, j21, j22 = v1.L1_dot, -v2.L1_dot, v1.L4_dot, -v2.L4_dot
        det = j11 * j22 - j12 * j21
        if det == 0:
            break
        d1 = (fx * j22 - fz * j12) / det
        d2 = (j11 * fz - j21 * fx) / det
        t1, t2 = t1 - d1, t2 - d2
        if abs(d1) + abs(d2) < mp.mpf(10) ** (-ctx.digits + 5):
            break
    v1 = evaluate(t1, params, ctx)
    v2 = evaluate(t2, params, ctx)
    resid = mp.sqrt((v1.L1 - v2.L1) ** 2 + (v1.L4 - v2.L4) ** 2)
    return t1, t2, ((v1.L1 + v2.L1) / 2, (v1.L4 + v2.L4) / 2), resid
