import random
from fractions import Fraction

import pytest

from jcmbloch.fluid import (
    SingularTimeError,
    coefficients,
    curl,
    density,
    divergence,
    external_force,
    flow_sample,
    force_potential,
    potential_phi,
    vector_laplacian,
    velocity,
    xz_vector_grid,
)
from jcmbloch.precision import with_precision
from jcmbloch.series import ThermalParams, evaluate

CTX = with_precision(50)
MP = CTX.mp
H = MP.mpf(10) ** -8
P = ThermalParams(1)


def samples(k, seed):
    """Random (t, pos) with t away from zeros of L1 and L3 and |pos| <= 1."""
    rng = random.Random(seed)
    out = []
    while len(out) < k:
        t = CTX.mpf(Fraction(rng.randrange(1, 20000), 1000))
        v = evaluate(t, P, CTX)
        if abs(v.L1) < 0.05 or abs(v.L3) < 0.05:
            continue
        pos = [CTX.mpf(Fraction(rng.randrange(-577, 578), 1000)) for _ in range(3)]
        out.append((t, pos))
    return out


def shifted(pos, i, d):
    q = list(pos)
    q[i] += d
    return q


def grad(f, pos):
    return [(f(shifted(pos, i, H)) - f(shifted(pos, i, -H))) / (2 * H) for i in range(3)]


def jac(t, pos):
    return [[(velocity(t, shifted(pos, j, H), P, CTX)[i]
              - velocity(t, shifted(pos, j, -H), P, CTX)[i]) / (2 * H) for j in range(3)]
            for i in range(3)]


def test_zero_fields_at_t0():
    pos = (CTX.mpf("0.3"), CTX.mpf("-0.2"), CTX.mpf("0.5"))
    assert all(c == 0 for c in velocity(0, pos, P, CTX))
    assert divergence(0, P, CTX) == 0
    assert potential_phi(0, pos, P, CTX) == 0
    assert abs(density(0, "2.5", P, CTX) - CTX.mpf("2.5")) < 1e-30


def test_divergence_nonzero_and_matches_fd():
    assert abs(divergence(1, P, CTX)) > 1e-3
    for t, pos in samples(5, 1):
        J = jac(t, pos)
        assert abs(J[0][0] + J[1][1] + J[2][2] - divergence(t, P, CTX)) <= 1e-12


def test_potential_gradient_is_velocity():
    for t, pos in samples(10, 2):
        g = grad(lambda q: potential_phi(t, q, P, CTX), pos)
        assert max(abs(a - b) for a, b in zip(g, velocity(t, pos, P, CTX))) <= 1e-12
    assert potential_phi("1.3", (0, 0, 0), P, CTX) == 0


def test_force_potential_gradient():
    for t, pos in samples(10, 3):
        g = grad(lambda q: force_potential(t, q, P, CTX), pos)
        assert max(abs(-a - b) for a, b in zip(g, external_force(t, pos, P, CTX))) <= 1e-12


def test_force_at_origin():
    c = coefficients("1.3", P, CTX)
    K = external_force(c, (0, 0, 0), P, CTX)
    assert K[0] == 0 and K[1] == 0 and K[2] == -c.k3 * c.L4 + c.L4_ddot


def test_curl_vanishes():
    for t, pos in samples(20, 4):
        J = jac(t, pos)
        num = (J[2][1] - J[1][2], J[0][2] - J[2][0], J[1][0] - J[0][1])
        assert max(abs(c) for c in num) <= 1e-12
        assert all(c == 0 for c in curl(t, P, CTX))


def test_laplacian_vanishes():
    for t, pos in samples(10, 5):
        v0 = velocity(t, pos, P, CTX)
        lap = [sum((velocity(t, shifted(pos, j, H), P, CTX)[i]
                    + velocity(t, shifted(pos, j, -H), P, CTX)[i] - 2 * v0[i]) / H ** 2
                   for j in range(3)) for i in range(3)]
        assert max(abs(c) for c in lap) <= 1e-10
        assert all(c == 0 for c in vector_laplacian(t, pos, P, CTX))


def test_continuity_equation():
    for t, _ in samples(5, 6):
        drho = (density(t + H, 1, P, CTX) - density(t - H, 1, P, CTX)) / (2 * H)
        assert abs(drho + density(t, 1, P, CTX) * divergence(t, P, CTX)) <= 1e-10


def test_density_position_independent():
    s = [flow_sample("2.2", pos, P, CTX).rho for pos in ((0, 0, 0), (0.5, 0, 0), (0, 0.1, -0.7))]
    assert s[0] == s[1] == s[2]


def test_navier_stokes_residual():
    for t, pos in samples(5, 7):
        v = velocity(t, pos, P, CTX)
        dv = [(a - b) / (2 * H) for a, b in
              zip(velocity(t + H, pos, P, CTX), velocity(t - H, pos, P, CTX))]
        J = jac(t, pos)
        adv = [sum(v[j] * J[i][j] for j in range(3)) for i in range(3)]
        K = external_force(t, pos, P, CTX)
        assert max(abs(dv[i] + adv[i] - K[i]) for i in range(3)) <= 1e-10


def test_singular_time_refused():
    # L1 changes sign between 1.5 and 1.8 at beta = 1; locate the zero
    t = MP.findroot(lambda s: evaluate(s, P, CTX).L1, (CTX.mpf("1.5"), CTX.mpf("1.8")),
                    solver="anderson")
    with pytest.raises(SingularTimeError):
        velocity(t, (0, 0, 0), P, CTX)


def test_lagrangian_tracking_on_pole_free_interval():
    # [0, 0.8] contains no zero of L1 or L3
    ctx = with_precision(40)
    h = ctx.mpf("0.001")
    x = [ctx.mpf(1), ctx.mpf(0), ctx.mpf(0)]
    t = ctx.mpf(0)
    for _ in range(800):
        k1 = velocity(t, x, P, ctx)
        k2 = velocity(t + h / 2, [a + h / 2 * b for a, b in zip(x, k1)], P, ctx)
        k3 = velocity(t + h / 2, [a + h / 2 * b for a, b in zip(x, k2)], P, ctx)
        k4 = velocity(t + h, [a + h * b for a, b in zip(x, k3)], P, ctx)
        x = [a + h / 6 * (p + 2 * q + 2 * r + s) for a, p, q, r, s in zip(x, k1, k2, k3, k4)]
        t += h
    v = evaluate(t, P, ctx)
    assert max(abs(x[0] - v.L1), abs(x[1]), abs(x[2] - v.L4)) <= 1e-6


def test_vector_grid_is_normalised():
    rows = xz_vector_grid("1.3", P, CTX, n=11)
    assert rows and all(r[0] ** 2 + r[1] ** 2 <= 1 for r in rows)
    assert abs(max(MP.sqrt(r[2] ** 2 + r[3] ** 2) for r in rows) - 1) < 1e-40
