"""Near-zeros of S_z = L4 on discrete grids and the (beta, S_x) scatter data.

A scan is two-phase: the double-precision fast path flags every grid index
whose |L4| lies within epsilon plus ten times its documented error bound,
and each flagged index is then re-evaluated at full precision with the exact
time n * dt.  Only confirmed indices are reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Iterator

import numpy as np

from .fastpath import FastSeries
from .precision import (
    PrecisionContext,
    Surd,
    as_argument,
    cos_sin_sqrt_table,
    required_digits,
    with_precision,
)
from .series import ThermalParams, evaluate, evaluate_from_table

N0 = Fraction("619.3")
C1 = Fraction("13.37")
EPS_HIGH = Fraction("7.5e-4")
N_LOW = 400_000_000
EPS0 = Fraction("1.875e-4")
BETA_MIN, BETA_MAX = Fraction(1, 2), Fraction(5)
DEFAULT_DT = Fraction(7, 2)


class ScheduleRangeError(ValueError):
    """beta outside [0.5, 5.0] without the override flag."""


@dataclass(frozen=True)
class SweepSchedule:
    beta: object
    N: int
    epsilon: float
    scale: float = 1.0


def _frac(x) -> Fraction:
    return Fraction(x.strip()) if isinstance(x, str) else Fraction(x)


def schedule(beta, scale=1, allow_out_of_range: bool = False) -> SweepSchedule:
    """Sample count and threshold of a zero-crossing sweep at ``beta``.

    For beta >= 1, N = floor(619.3 exp(13.37 / beta)) and eps = 7.5e-4; for
    0.5 <= beta < 1, N = 4e8 and eps = 1.875e-4 exp(ln 4 / beta).  A
    ``scale`` below one shrinks N and raises eps by the same factor, which
    keeps the expected hit count (proportional to eps * N) unchanged.
    """
    b = _frac(beta)
    s = _frac(scale)
    if not (0 < s <= 1):
        raise ValueError("scale must lie in (0, 1]")
    if not allow_out_of_range and not (BETA_MIN <= b <= BETA_MAX):
        raise ScheduleRangeError(f"beta={beta} outside [0.5, 5.0]")
    if b >= 1:
        N = math.floor(float(N0) * math.exp(float(C1) / float(b)))
        eps = float(EPS_HIGH)
    else:
        N = N_LOW
        eps = float(EPS0) * math.exp(math.log(4) / float(b))
    Ns = max(1, math.floor(N * s))
    return SweepSchedule(b, Ns, min(eps / float(s), 1.0), float(s))


@dataclass(frozen=True)
class HitRecord:
    beta: object
    n: int
    t: Surd
    sx: object
    sz: object


def _prefilter_range(fs: FastSeries, dt, j0: int, j1: int, thr: float, chunk: int):
    picks = []
    for js, L1, L3, L4 in fs.grid(dt, j0, j1, chunk):
        m = np.abs(L4) <= thr
        if m.any():
            picks.append(js[m].astype(np.int64))
    return picks


def prefilter(beta, dt, N: int, epsilon: float, chunk: int = 1 << 13,
              workers: int = 1) -> np.ndarray:
    """Grid indices n in 0..N with |L4(n dt)| <= eps + 10 * fast error bound.

    With ``workers`` > 1 the index range is split into contiguous shards
    evaluated in a thread pool; shards are merged in index order, so the
    result does not depend on the worker count.
    """
    fs = FastSeries(float(beta))
    thr = epsilon + 10 * fs.error_bound
    dt = as_argument(dt)
    if workers <= 1 or N < 4 * chunk:
        picks = _prefilter_range(fs, dt, 0, N + 1, thr, chunk)
    else:
        bounds = np.linspace(0, N + 1, workers + 1).astype(np.int64)
        with ThreadPoolExecutor(workers) as pool:
            parts = pool.map(lambda k: _prefilter_range(fs, dt, int(bounds[k]),
                                                        int(bounds[k + 1]), thr, chunk),
                             range(workers))
            picks = [p for part in parts for p in part]
    if not picks:
        return np.array([], dtype=np.int64)
    return np.concatenate(picks)


def scan(beta, sched: SweepSchedule | None = None, dt=DEFAULT_DT,
         ctx: PrecisionContext | None = None, workers: int = 1) -> list:
    """All n in 0..N with |L4(n dt)| <= eps, confirmed at full precision.

    Records come back in increasing n; n = 0 is always a hit since L4(0) = 0.
    """
    ctx = ctx or with_precision()
    sched = sched or schedule(beta)
    dt = as_argument(dt)
    params = ThermalParams(_frac(beta) if not hasattr(beta, "_mpf_") else beta)
    eps = ctx.mpf(repr(sched.epsilon))
    out = []
    for n in prefilter(beta, dt, sched.N, sched.epsilon, workers=workers):
        t = dt.scale(int(n))
        v = evaluate(t, params, ctx)
        if abs(v.L4) <= eps:
            out.append(HitRecord(params.beta, int(n), t, v.L1, v.L4))
    return out


def beta_grid(lo, hi, step) -> list:
    """lo, lo + step, ... up to and including hi, as exact rationals."""
    lo, hi, step = _frac(lo), _frac(hi), _frac(step)
    if step <= 0:
        raise ValueError("step must be positive")
    if hi < lo:
        return []
    k = int((hi - lo) / step)
    return [lo + i * step for i in range(k + 1)]


def scatter_sweep(beta_lo, beta_hi, step="0.025", dt=DEFAULT_DT, scale=1,
                  ctx: PrecisionContext | None = None, workers: int = 1,
                  allow_out_of_range: bool = False) -> Iterator[HitRecord]:
    """Stream the confirmed hits of every beta on the grid, in (beta, n) order."""
    ctx = ctx or with_precision()
    for b in beta_grid(beta_lo, beta_hi, step):
        sched = schedule(b, scale, allow_out_of_range)
        yield from scan(b, sched, dt, ctx, workers)


@dataclass(frozen=True)
class QPIRecord:
    beta: object
    q: int
    sx: object
    sz: object


def qpi_scan(q_set: Iterable[int], beta_lo, beta_hi, step="0.01",
             ctx: PrecisionContext | None = None) -> list:
    """(beta, q, S_x(q pi), S_z(q pi)) for every q and beta on the grid.

    The trigonometric table of t = q pi is reduced exactly once per q and
    reused for all beta.
    """
    qs = sorted(int(q) for q in q_set)
    betas = beta_grid(beta_lo, beta_hi, step)
    if not betas or not qs:
        return []
    digits = max(50, required_digits(max(max(qs), 1), 34))
    if ctx is None or ctx.digits < digits:
        ctx = with_precision(digits)
    n_top = max(ThermalParams(b).n_max(ctx) for b in betas) + 1
    rows = []
    tables = {q: cos_sin_sqrt_table(Surd(q, 1, True), n_top, ctx) for q in qs}
    for b in betas:
        params = ThermalParams(b)
        for q in qs:
            C, S = tables[q]
            v = evaluate_from_table(Surd(q, 1, True), C, S, params, ctx)
            rows.append(QPIRecord(b, q, v.L1, v.L4))
    return rows
