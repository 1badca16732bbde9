import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcmbloch.fastpath import FastSeries
from jcmbloch.precision import Surd, with_precision
from jcmbloch.series import (
    ThermalParams,
    TruncationPolicy,
    approx_low_temp,
    derivative_bound,
    eval_detuned,
    eval_L1,
    eval_L1_dot,
    eval_L4,
    eval_L4_dot,
    evaluate,
    truncation_index,
)

from oracles import detuned_direct, jcm_bloch_numpy, series_mpmath


def test_truncation_index_examples():
    assert truncation_index(Fraction(1, 2), Fraction("1.63e-33")) == 150
    assert truncation_index(5, Fraction("1.63e-33")) == 15
    c = with_precision(60)
    assert truncation_index(1, c.mp.exp(-10), c) == 9


@given(st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=100),
       st.integers(min_value=1, max_value=60))
@settings(max_examples=100, deadline=None)
def test_truncation_index_is_minimal(beta, k):
    tol = Fraction(1, 10 ** k)
    N = truncation_index(beta, tol)
    # exp(-(N+1) beta) <= tol < exp(-N beta), unless N is already 0
    assert (N + 1) * beta >= k * math.log(10) - 1e-9
    if N > 0:
        assert N * beta < k * math.log(10) + 1e-9


@pytest.mark.parametrize("beta", ["0.5", "1", "2", "5"])
def test_identities_at_zero(ctx, beta):
    p = ThermalParams(beta)
    v = evaluate(0, p, ctx, order=1)
    eps = ctx.mp.mpf(10) ** -30
    assert abs(v.L1 - 1) < eps and abs(v.L3 - 1) < eps and abs(v.L4) < eps
    assert v.L1_dot == 0 and v.L4_dot == 0


def test_values_match_plain_mpmath_summation(ctx):
    for beta in ("0.5", "1", "3"):
        p = ThermalParams(beta)
        for t in ("0.37", "12.5", "1000.25"):
            ref = series_mpmath(Fraction(t), Fraction(beta), 320)
            v = evaluate(t, p, ctx)
            for a, b in zip((v.L1, v.L3, v.L4), ref):
                assert abs(a - b) < ctx.mp.mpf(10) ** -32


def test_values_match_hamiltonian_oracle(ctx):
    for t in (0.5, 2.0, 7.25):
        o = jcm_bloch_numpy((1, 0, 0), t, 1.0)
        v = evaluate(Fraction(t), ThermalParams(1), ctx)
        assert abs(float(v.L1) - o[0]) < 1e-12
        assert abs(float(v.L4) - o[2]) < 1e-12


def test_l4_near_reported_crossing(ctx):
    # reported value -0.4840 at t = 1.644; see the self-intersection tests for the refined time
    assert abs(eval_L4("1.644", ThermalParams(1), ctx) - ctx.mpf("-0.4840")) < 2e-3


@given(st.fractions(min_value=0, max_value=1000, max_denominator=64),
       st.sampled_from(["0.5", "1", "2", "5"]))
@settings(max_examples=40, deadline=None)
def test_richardson_tail_bound(t, beta):
    c = with_precision(50)
    n = truncation_index(Fraction(beta), Fraction(1, 10**12))
    lo = ThermalParams(beta, trunc=TruncationPolicy(fixed_terms=n))
    hi = ThermalParams(beta, trunc=TruncationPolicy(fixed_terms=2 * n))
    d = abs(eval_L1(t, lo, c) - eval_L1(t, hi, c))
    assert d <= c.exp_neg(Fraction(beta)) ** (n + 1)


@given(st.fractions(min_value=0, max_value=10**4, max_denominator=1000),
       st.sampled_from(["0.5", "1", "4"]))
@settings(max_examples=50, deadline=None)
def test_bounded_by_one(t, beta):
    c = with_precision(40)
    v = evaluate(t, ThermalParams(beta), c)
    assert abs(v.L1) <= 1 and abs(v.L3) <= 1 and abs(v.L4) <= 1


def test_derivatives_against_central_differences(ctx):
    p = ThermalParams(1)
    h = ctx.mpf(Fraction(1, 10**10))
    t = ctx.mpf("0.5")
    fd = (eval_L1(t + h, p, ctx) - eval_L1(t - h, p, ctx)) / (2 * h)
    assert abs(eval_L1_dot(t, p, ctx) - fd) <= 1e-15
    for t0 in ("0.5", "2.25", "9.75"):
        t = ctx.mpf(t0)
        v = evaluate(t, p, ctx, order=2)
        vp, vm = evaluate(t + h, p, ctx, order=1), evaluate(t - h, p, ctx, order=1)
        for f, df, ddf in (("L1", "L1_dot", "L1_ddot"), ("L3", "L3_dot", "L3_ddot"),
                           ("L4", "L4_dot", "L4_ddot")):
            assert abs((getattr(vp, f) - getattr(vm, f)) / (2 * h) - getattr(v, df)) < 1e-15
            assert abs((getattr(vp, df) - getattr(vm, df)) / (2 * h) - getattr(v, ddf)) < 1e-15


def test_derivative_bound_is_crude_majorant(ctx):
    p = ThermalParams(1)
    assert derivative_bound(p, ctx, 2) > derivative_bound(p, ctx, 1) > p.bound(ctx)


def test_first_derivatives_vanish_at_zero(ctx):
    for beta in ("0.5", "2"):
        assert eval_L1_dot(0, ThermalParams(beta), ctx) == 0
        assert eval_L4_dot(0, ThermalParams(beta), ctx) == 0


def test_detuned_reduces_to_resonant(ctx):
    L1, L2, L3, L4 = eval_detuned("2.5", ThermalParams(1, 0), ctx)
    v = evaluate("2.5", ThermalParams(1), ctx)
    eps = ctx.mp.mpf(10) ** -30
    assert abs(L1 - v.L1) < eps and abs(L2) < eps and abs(L3 - v.L3) < eps and abs(L4 - v.L4) < eps


def test_detuned_identity_at_zero(ctx):
    L = eval_detuned(0, ThermalParams(1, "0.7"), ctx)
    eps = ctx.mp.mpf(10) ** -30
    assert abs(L[0] - 1) < eps and abs(L[1]) < eps and abs(L[2] - 1) < eps and abs(L[3]) < eps


def test_detuned_against_direct_summation(ctx):
    got = eval_detuned(1, ThermalParams(1, "0.5"), ctx)
    ref = detuned_direct(1, 1, "0.5", terms=30)
    # 30 terms leave a tail of order e^-30
    for a, b in zip(got, ref):
        assert abs(a - b) < 1e-12
    ref = detuned_direct(1, 1, "0.5", terms=120)
    for a, b in zip(got, ref):
        assert abs(a - b) < ctx.mp.mpf(10) ** -32


@pytest.mark.parametrize("dw", [0.5, -1.3])
def test_detuned_against_hamiltonian_oracle(ctx, dw):
    for t in (0.8, 3.1):
        L1, L2, L3, L4 = (float(x) for x in eval_detuned(Fraction(t), ThermalParams(1, Fraction(dw)), ctx))
        # S0 = (1, 0, 0) -> (L1, -L2, L4); S0 = (0, 1, 0) -> (L2, L1, L4)
        o = jcm_bloch_numpy((1, 0, 0), t, 1.0, dw)
        assert np.allclose(o, [L1, -L2, L4], atol=1e-12)
        o = jcm_bloch_numpy((0, 1, 0), t, 1.0, dw)
        assert np.allclose(o, [L2, L1, L4], atol=1e-12)


def test_low_temperature_approximants(ctx):
    b = ctx.exp_neg(4)
    L1, L3, L4 = approx_low_temp(0, 4, ctx)
    assert L1 == 1 and L3 == 1 - b / 2
    assert abs(L4 - (-(1 - b) / 2 + (1 - 2 * b) / 2)) < 1e-40
    rng = random.Random(7)
    for _ in range(100):
        t = Fraction(rng.randrange(0, 20_000), 1000)
        a = approx_low_temp(t, 4, ctx)[0]
        assert abs(a - eval_L1(t, ThermalParams(4), ctx)) <= 3 * b * b
    b5 = ctx.exp_neg(5)
    L1 = approx_low_temp(Surd(1, 1, True), 5, ctx)[0]
    assert abs(L1 - (-(1 - b5) - b5 * ctx.mp.cos(ctx.mp.sqrt(2) * ctx.pi))) < 1e-40


def test_no_exact_zero_of_l4_on_grid():
    # only t = 0 reaches |L4| <= 1e-33; the double path bounds its own error
    for beta in (0.5, 1.0):
        fs = FastSeries(beta)
        m = np.inf
        for js, _, _, L4 in fs.grid(Fraction(7, 2), 1, 1_000_001):
            m = min(m, float(np.min(np.abs(L4))))
        assert m > fs.error_bound + 1e-33
