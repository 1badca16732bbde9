"""Thermal Jaynes-Cummings series L1, L3, L4 and the detuned propagator.

With b = exp(-beta) the resonant functions are

    L1(t) = (1-b) sum_{n>=0} cos(sqrt(n+1) t) cos(sqrt(n) t) b^n
    L3(t) = (1-b)/2 + (e^{2beta}-1)/(2e^beta) sum_{n>=1} cos(2 sqrt(n) t) b^n
    L4(t) = -(1-b)/2 + (e^beta-1)^2/(2e^beta) sum_{n>=1} cos(2 sqrt(n) t) b^n

Time is measured in units of 1/|g|.  Every partial sum is cut so that its
geometric tail is at most b^(n_max+1): L1 keeps n = 0..n_max and the
cos(2 sqrt(n) t) sums keep n = 1..n_max+1.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction

from .precision import (
    PrecisionContext,
    Surd,
    as_argument,
    cos_sin_sqrt_table,
    sqrt_int,
    with_precision,
)

DEFAULT_TOLERANCE = Fraction(1, 10**33)


def _exact_or_mpf(x):
    if isinstance(x, (int, float, str, Fraction)) and not isinstance(x, bool):
        return Fraction(x.strip()) if isinstance(x, str) else Fraction(x)
    return x


def truncation_index(beta, tol, ctx: PrecisionContext | None = None) -> int:
    """Smallest N >= 0 with exp(-(N+1) beta) <= tol.

    The comparison is made at high precision; a relative slack of
    10^-(digits-10) absorbs rounding when the bound is met with equality
    (e.g. tol = e^-10 at beta = 1).
    """
    ctx = ctx or with_precision(60)
    mp = ctx.mp
    b_ = ctx.mpf(_exact_or_mpf(beta))
    t_ = ctx.mpf(_exact_or_mpf(tol))
    if not b_ > 0:
        raise ValueError("beta must be positive")
    if not (0 < t_ < 1):
        raise ValueError("tol must lie in (0, 1)")
    x = -mp.log(t_) / b_
    slack = mp.mpf(10) ** (-(ctx.digits - 10)) * max(1, abs(x))
    n = int(mp.ceil(x - slack)) - 1
    return max(n, 0)


@functools.lru_cache(maxsize=4096)
def _cached_index(beta, tol) -> int:
    return truncation_index(beta, tol, with_precision(80))


@dataclass(frozen=True)
class TruncationPolicy:
    """Either a fixed number of retained terms or a tail tolerance."""

    fixed_terms: int | None = None
    tolerance: object = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.fixed_terms is not None and self.fixed_terms < 0:
            raise ValueError("fixed_terms must be non-negative")

    def n_max(self, beta, ctx: PrecisionContext | None = None) -> int:
        """Highest retained index of the L1 sum."""
        if self.fixed_terms is not None:
            return self.fixed_terms
        return _cached_index(beta, self.tolerance)


@dataclass(frozen=True)
class ThermalParams:
    """Inverse temperature, detuning, coupling and truncation policy.

    Exact inputs (int, str, Fraction, float) are kept as exact rationals.
    """

    beta: object
    delta_omega: object = 0
    g: object = 1
    trunc: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        beta = _exact_or_mpf(self.beta)
        if not beta > 0:
            raise ValueError("beta must be positive")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "delta_omega", _exact_or_mpf(self.delta_omega))
        object.__setattr__(self, "g", _exact_or_mpf(self.g))

    @property
    def resonant(self) -> bool:
        return self.delta_omega == 0

    def n_max(self, ctx: PrecisionContext | None = None) -> int:
        return self.trunc.n_max(self.beta, ctx)

    def bound(self, ctx: PrecisionContext):
        """Tail bound exp(-(n_max+1) beta) of the L sums."""
        return ctx.exp_neg(self.beta) ** (self.n_max(ctx) + 1)


@dataclass
class SeriesValues:
    """L1, L3, L4 and (optionally) their first and second time derivatives."""

    t: object
    n_max: int
    L1: object
    L3: object
    L4: object
    L1_dot: object = None
    L3_dot: object = None
    L4_dot: object = None
    L1_ddot: object = None
    L3_ddot: object = None
    L4_ddot: object = None
    bound: object = None


def _coerce(params) -> ThermalParams:
    if isinstance(params, ThermalParams):
        return params
    return ThermalParams(params)


def evaluate(t, params, ctx: PrecisionContext, order: int = 0) -> SeriesValues:
    """Evaluate the resonant series (and derivatives up to ``order``) at ``t``.

    All values share one trigonometric table cos/sin(sqrt(n) t), n = 0..n_max+1.
    """
    params = _coerce(params)
    if not params.resonant:
        raise ValueError("evaluate handles the resonant case; use eval_detuned")
    N = params.n_max(ctx)
    C, S = cos_sin_sqrt_table(t, N + 1, ctx)
    return evaluate_from_table(t, C, S, params, ctx, order)


def evaluate_from_table(t, C, S, params, ctx: PrecisionContext, order: int = 0) -> SeriesValues:
    """Series values from precomputed cos/sin(sqrt(n) t) tables.

    The tables must reach index n_max + 1; longer tables are fine, which lets
    one table serve a whole range of beta values at a fixed t.
    """
    params = _coerce(params)
    mp = ctx.mp
    N = params.n_max(ctx)
    if len(C) < N + 2:
        raise ValueError("trigonometric table too short for the truncation")
    b = ctx.exp_neg(params.beta)
    one = mp.mpf(1)
    w = one
    s1 = s1d = s1dd = mp.mpf(0)
    for n in range(N + 1):
        cc = C[n + 1] * C[n]
        s1 += cc * w
        if order >= 1:
            rn1 = sqrt_int(n + 1, ctx)
            rn = sqrt_int(n, ctx)
            s1d -= (rn1 * S[n + 1] * C[n] + rn * C[n + 1] * S[n]) * w
            if order >= 2:
                s1dd += (2 * rn * rn1 * S[n + 1] * S[n] - (2 * n + 1) * cc) * w
        w *= b
    w = b
    s3 = s3d = s3dd = mp.mpf(0)
    for n in range(1, N + 2):
        c2 = C[n] * C[n] - S[n] * S[n]
        s3 += c2 * w
        if order >= 1:
            s3d -= 4 * sqrt_int(n, ctx) * S[n] * C[n] * w
            if order >= 2:
                s3dd -= 4 * n * c2 * w
        w *= b
    f1 = one - b
    k3 = (one - b * b) / (2 * b)
    k4 = f1 * f1 / (2 * b)
    out = SeriesValues(
        t=t, n_max=N,
        L1=f1 * s1,
        L3=f1 / 2 + k3 * s3,
        L4=-f1 / 2 + k4 * s3,
        bound=b ** (N + 1),
    )
    if order >= 1:
        out.L1_dot, out.L3_dot, out.L4_dot = f1 * s1d, k3 * s3d, k4 * s3d
    if order >= 2:
        out.L1_ddot, out.L3_ddot, out.L4_ddot = f1 * s1dd, k3 * s3dd, k4 * s3dd
    return out


def eval_L1(t, params, ctx: PrecisionContext):
    """L1(t); error at most exp(-(n_max+1) beta)."""
    return evaluate(t, params, ctx).L1


def eval_L3(t, params, ctx: PrecisionContext):
    return evaluate(t, params, ctx).L3


def eval_L4(t, params, ctx: PrecisionContext):
    return evaluate(t, params, ctx).L4


def eval_L1_dot(t, params, ctx):
    """dL1/dt from the termwise differentiated series.

    The crude error majorant is (2 sqrt(n_max+1) + 1) exp(-(n_max+1) beta).
    """
    return evaluate(t, params, ctx, order=1).L1_dot


def eval_L3_dot(t, params, ctx):
    return evaluate(t, params, ctx, order=1).L3_dot


def eval_L4_dot(t, params, ctx):
    return evaluate(t, params, ctx, order=1).L4_dot


def eval_L1_ddot(t, params, ctx):
    """Second derivative; error majorant (2 sqrt(n_max+1) + 1)^2 exp(-(n_max+1) beta)."""
    return evaluate(t, params, ctx, order=2).L1_ddot


def eval_L3_ddot(t, params, ctx):
    return evaluate(t, params, ctx, order=2).L3_ddot


def eval_L4_ddot(t, params, ctx):
    return evaluate(t, params, ctx, order=2).L4_ddot


def derivative_bound(params, ctx: PrecisionContext, order: int = 1):
    """Documented majorant of the truncation error of the differentiated series."""
    N = _coerce(params).n_max(ctx)
    k = 2 * ctx.mp.sqrt(N + 1) + 1
    return k ** order * ctx.exp_neg(_coerce(params).beta) ** (N + 1)


def eval_detuned(t, params, ctx: PrecisionContext):
    """(L^(1), L^(2), L^(3), L^(4)) of the general Bloch map.

    Built from the propagator elements A_{00,00}, A_{11,00} and A_{01,01}
    with D(n) = (dw/2)^2 + g^2 n.  Where D(n) = 0 the ratio sin(t x)/x is
    replaced by its limit t.  The sums are cut like the resonant ones, so
    L^(1), L^(2) carry the tail bound b^(n_max+1) and L^(3), L^(4) at most
    (1+b) b^(n_max+1).
    """
    params = _coerce(params)
    mp = ctx.mp
    N = params.n_max(ctx)
    b = ctx.exp_neg(params.beta)
    dw = ctx.mpf(params.delta_omega)
    g2 = ctx.mpf(params.g) ** 2
    tt = ctx.mpf(t) if not isinstance(as_argument(t), Surd) else as_argument(t).to_hp(ctx)
    h2 = (dw / 2) ** 2
    one = mp.mpf(1)

    cs, sn_over, D = [], [], []
    for n in range(N + 2):
        d = h2 + g2 * n
        D.append(d)
        if d == 0:
            cs.append(one)
            sn_over.append(tt)
            continue
        r = mp.sqrt(d)
        with mp.extraprec(max(0, int(mp.log(abs(tt * r) + 1, 2)) + 10)):
            c, s = mp.cos(tt * r), mp.sin(tt * r)
        cs.append(+c)
        sn_over.append(s / r)

    A00 = A11 = mp.mpf(0)
    A01 = mp.mpc(0)
    w = one
    for n in range(N + 1):
        A00 += (h2 + g2 * (n + 1) * cs[n + 1] ** 2) / D[n + 1] * w
        u1 = mp.mpc(cs[n + 1], dw / 2 * sn_over[n + 1])
        u0 = mp.mpc(cs[n], dw / 2 * sn_over[n])
        A01 += u1 * u0 * w
        w *= b
    w = b
    for n in range(1, N + 2):
        A11 += g2 * n * (sn_over[n] ** 2) * w
        w *= b
    f1 = one - b
    A00, A11, A01 = f1 * A00, f1 * A11, f1 * A01
    return (A01.real, A01.imag, A00 - A11, A00 + A11 - 1)


def approx_low_temp(t, beta, ctx: PrecisionContext):
    """Low-temperature approximants, dropping terms of order exp(-2 beta).

    L1 ~ (1-b) cos t + b cos(sqrt2 t) cos t
    L3 ~ (1-b)/2 + cos(2t)/2
    L4 ~ -(1-b)/2 + (1-2b) cos(2t)/2
    """
    mp = ctx.mp
    b = ctx.exp_neg(_exact_or_mpf(beta))
    C, S = cos_sin_sqrt_table(t, 2, ctx)
    cos_t, cos_r2t = C[1], C[2]
    cos_2t = C[1] * C[1] - S[1] * S[1]
    one = mp.mpf(1)
    L1 = (one - b) * cos_t + b * cos_r2t * cos_t
    L3 = (one - b) / 2 + cos_2t / 2
    L4 = -(one - b) / 2 + (one - 2 * b) * cos_2t / 2
    return L1, L3, L4
