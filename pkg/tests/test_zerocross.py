from fractions import Fraction

import numpy as np
import pytest

from jcmbloch.fastpath import FastSeries
from jcmbloch.precision import with_precision
from jcmbloch.series import ThermalParams, eval_L4
from jcmbloch.zerocross import (
    ScheduleRangeError,
    beta_grid,
    prefilter,
    qpi_scan,
    scan,
    scatter_sweep,
    schedule,
)

CTX = with_precision(50)


def test_schedule_examples():
    s = schedule(5)
    assert s.N == 8978 and s.epsilon == 7.5e-4
    assert schedule(1).N == 396_659_904
    s = schedule("0.5")
    assert s.N == 400_000_000 and abs(s.epsilon - 3.0e-3) < 1e-15


def test_schedule_monotone():
    Ns = [schedule(b).N for b in beta_grid(1, 5, "0.05")]
    assert all(a > b for a, b in zip(Ns, Ns[1:]))
    eps = [schedule(b).epsilon for b in beta_grid("0.5", "0.99", "0.01")]
    assert all(a > b for a, b in zip(eps, eps[1:]))


def test_schedule_range_and_scale():
    with pytest.raises(ScheduleRangeError):
        schedule(6)
    assert schedule(6, allow_out_of_range=True).N > 0
    s = schedule(1, scale=Fraction(1, 100))
    assert s.N == 3_966_599 and abs(s.epsilon - 0.075) < 1e-15
    with pytest.raises(ValueError):
        schedule(1, scale=2)


@pytest.fixture(scope="module")
def hits5():
    return scan(5, ctx=CTX)


def test_scan_contains_origin(hits5):
    h = hits5[0]
    assert h.n == 0 and abs(h.sz) < 1e-30
    assert abs(h.sx - 1) < 1e-30


def test_scan_beta5_properties(hits5):
    eps = CTX.mpf("7.5e-4")
    assert len(hits5) >= 3
    assert all(abs(h.sx) >= 0.9 for h in hits5)
    assert all(abs(h.sz) <= eps for h in hits5)
    assert [h.n for h in hits5] == sorted(h.n for h in hits5)
    for h in hits5[:5]:
        assert abs(eval_L4(Fraction(7, 2) * h.n, ThermalParams(5), CTX) - h.sz) < 1e-40


def test_prefilter_deterministic_under_threads():
    a = prefilter(2, Fraction(7, 2), 200_000, 7.5e-4, workers=1)
    b = prefilter(2, Fraction(7, 2), 200_000, 7.5e-4, workers=4)
    assert np.array_equal(a, b)


@pytest.mark.slow
def test_prefilter_soundness_audit():
    # fast and full precision agree within the bound across a 10^5 subrange
    # (every 7th index), so no true hit can fall outside the widened threshold
    beta, eps = 5, 7.5e-4
    fs = FastSeries(beta)
    thr = eps + 10 * fs.error_bound
    p = ThermalParams(beta)
    lo = 3_000_000
    (js, _, _, L4f), = list(fs.grid(Fraction(7, 2), lo, lo + 100_000, chunk=100_000))
    worst = 0.0
    for j, f in zip(js[::7], L4f[::7]):
        hp = float(eval_L4(Fraction(7, 2) * int(j), p, CTX))
        worst = max(worst, abs(hp - f))
        if abs(hp) <= eps:
            assert abs(f) <= thr
    assert worst <= fs.error_bound


def test_sweep_top_band():
    recs = list(scatter_sweep("4.9", "5.0", ctx=CTX))
    assert recs and all(abs(r.sx) >= 0.9 for r in recs)
    keys = [(r.beta, r.n) for r in recs]
    assert keys == sorted(keys)


def test_empty_sweep():
    assert list(scatter_sweep(5, 4, ctx=CTX)) == []
    assert beta_grid(2, 1, "0.1") == []


def test_qpi_scan():
    rows = qpi_scan([0, 19601], 2, 2, ctx=CTX)
    assert [r.q for r in rows] == [0, 19601]
    assert abs(rows[0].sx - 1) < 1e-30
    assert abs(rows[1].sz) < 0.0035
    assert qpi_scan([], 1, 2) == []
