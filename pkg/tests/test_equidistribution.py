import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcmbloch.bloch import SampleGrid
from jcmbloch.equidistribution import (
    histogram,
    ks_binned,
    scale_invariance_distance,
    sequence_mod,
    time_average_vs_phase_average,
    weyl_bound,
    weyl_sum,
    weyl_sum_direct,
)
from jcmbloch.precision import Surd, reduce_mod_2pi, with_precision

CTX = with_precision(50)


def test_weyl_degenerate_grid():
    w = weyl_sum(1, SampleGrid.parse("2pi", 100), CTX)
    assert w.degenerate and w.magnitude == 1


def test_weyl_zero_m_rejected():
    with pytest.raises(ValueError):
        weyl_sum(0, SampleGrid(7, 2, 10), CTX)


@pytest.mark.parametrize("N", [10**3, 10**6])
@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_weyl_closed_form_bound(m, N):
    g = SampleGrid(7, 2, N)
    w = weyl_sum(m, g, CTX)
    with mpmath.workdps(60):
        bound = 2 / ((N + 1) * abs(1 - mpmath.expj(mpmath.mpf(m) * 7 / 2)))
    assert w.magnitude <= bound
    assert abs(weyl_bound(m, g, CTX) - bound) < 1e-40


def test_weyl_closed_matches_direct():
    g = SampleGrid(7, 2, 1000)
    for m in (1, 3):
        d = weyl_sum_direct(m, g, CTX)
        # independent oracle: plain mpmath exponentials at raised precision
        with mpmath.workdps(80):
            ref = mpmath.fsum(mpmath.expj(mpmath.mpf(m * n) * 7 / 2) for n in range(1001)) / 1001
            assert abs(d - ref) < 1e-30
            assert abs(weyl_sum(m, g, CTX).magnitude - abs(ref)) < 1e-30


def test_sequence_mod_unrolled():
    vals = sequence_mod(SampleGrid(7, 2, 3), "2pi", ctx=CTX)
    pi = CTX.pi
    ref = [0, CTX.mpf("3.5"), 7 - 2 * pi, CTX.mpf("10.5") - 2 * pi]
    assert all(abs(a - b) < 1e-45 for a, b in zip(vals, ref))


def test_sequence_mod_arithmetic_progression():
    vals = sequence_mod(SampleGrid(1, 20, 126), "2pi", ctx=CTX)
    assert all(a < b for a, b in zip(vals[:126], vals[1:126]))
    assert vals[126] < vals[125]


def test_sequence_mod_with_sqrt_multiplier():
    (v,) = sequence_mod(SampleGrid(7, 2, 0), "2pi", 2, CTX)
    assert v == 0
    # n = 2 * 33461 on dt = 7/2 is the single step 234227
    got = sequence_mod(SampleGrid(234227, 1, 1), "2pi", 2, CTX)[1]
    assert abs(got - reduce_mod_2pi(Surd(234227, 2), CTX)) < 1e-45
    with mpmath.workdps(120):
        ref = mpmath.fmod(234227 * mpmath.sqrt(2), 2 * mpmath.pi)
        assert abs(got - ref) < 1e-45


@given(st.integers(min_value=1, max_value=40), st.sampled_from(["pi", "2pi"]))
@settings(max_examples=20, deadline=None)
def test_sequence_mod_range(N, modulus):
    vals = sequence_mod(SampleGrid(9, 2, N), modulus, 3, CTX)
    span = CTX.pi * (1 if modulus == "pi" else 2)
    assert all(0 <= v < span for v in vals)


def test_histogram_examples():
    h = histogram([Fraction(1, 10), Fraction(1, 10), Fraction(3, 10)], 0, Fraction(2, 5), Fraction(1, 5))
    assert list(h.counts) == [2, 1] and h.total == 3
    h = histogram([], 0, 1, Fraction(1, 4))
    assert list(h.counts) == [0, 0, 0, 0]
    u = [Fraction(k, 10_000) for k in range(10_000)]
    h = histogram(u, 0, 1, Fraction(1, 10))
    assert list(h.counts) == [1000] * 10


@given(st.lists(st.floats(min_value=-2, max_value=2), max_size=200))
@settings(max_examples=50, deadline=None)
def test_histogram_conservation(xs):
    h = histogram(np.array(xs, dtype=float), -1.0, 1.0, 0.25)
    assert int(h.counts.sum()) == h.total == len(xs) - h.overflow


def test_ks_properties():
    assert scale_invariance_distance("fluorescence", "7/2", "7/2", 1000, 1) == 0.0
    a = scale_invariance_distance("fluorescence", "7/2", "9/2", 20_000, 1)
    b = scale_invariance_distance("fluorescence", "9/2", "7/2", 20_000, 1)
    assert a == b and 0 <= a <= 1
    x = np.random.default_rng(0).random(500)
    assert ks_binned(x, x) == 0
    with pytest.raises(ValueError):
        scale_invariance_distance("g", "7/2", "1/20", 100, 1)


def test_time_average_against_antiderivative():
    beta, T = 1, 1000.0
    b = math.exp(-beta)
    r2 = math.sqrt(2)
    exact = ((1 - b) * math.sin(T)
             + b / 2 * (math.sin((r2 + 1) * T) / (r2 + 1) + math.sin((r2 - 1) * T) / (r2 - 1))) / T
    res = time_average_vs_phase_average(beta, T)
    assert res.phase_average == 0
    assert abs(res.time_average - exact) < 1e-9
    assert abs(res.time_average) <= 4 / T
    later = time_average_vs_phase_average(beta, 2 * T).time_average
    assert abs(later) * 1.8 <= abs(res.time_average)
