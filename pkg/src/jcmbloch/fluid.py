"""Fictitious compressible fluid carried by the Bloch map.

Every initial point x0 of the unit ball moves as x(t) = D(t) x0 + (0, 0, L4)
with D = diag(L1, L1, L3).  Inverting this Lagrangian map gives an Eulerian
velocity field

    v = (a1 x, a1 y, a3 (z - L4) + L4'),   a1 = L1'/L1, a3 = L3'/L3,

which is a gradient (no vorticity), has position independent divergence and
density rho0 / (L1^2 L3), and satisfies dv/dt + (v.grad) v = K with the
external force K built the same way from second derivatives.

The inversion breaks down where L1 or L3 vanishes; every field refuses such
times with :class:`SingularTimeError` instead of regularising.
"""
from __future__ import annotations

from dataclasses import dataclass

from .precision import PrecisionContext
from .series import ThermalParams, evaluate

SINGULAR_THRESHOLD = 1e-20


class SingularTimeError(ArithmeticError):
    """|L1(t)| or |L3(t)| is below the singular threshold."""


def _params(params) -> ThermalParams:
    return params if isinstance(params, ThermalParams) else ThermalParams(params)


@dataclass(frozen=True)
class FlowCoefficients:
    """Time-only coefficients shared by every field at one instant."""

    t: object
    L1: object
    L3: object
    L4: object
    a1: object   # L1'/L1
    a3: object   # L3'/L3
    L4_dot: object
    k1: object   # L1''/L1
    k3: object   # L3''/L3
    L4_ddot: object


def coefficients(t, params, ctx: PrecisionContext) -> FlowCoefficients:
    v = evaluate(t, _params(params), ctx, order=2)
    if abs(v.L1) < SINGULAR_THRESHOLD or abs(v.L3) < SINGULAR_THRESHOLD:
        raise SingularTimeError(
            f"Lagrangian map is not invertible at t={t}: L1={v.L1}, L3={v.L3}")
    return FlowCoefficients(
        t=t, L1=v.L1, L3=v.L3, L4=v.L4,
        a1=v.L1_dot / v.L1, a3=v.L3_dot / v.L3, L4_dot=v.L4_dot,
        k1=v.L1_ddot / v.L1, k3=v.L3_ddot / v.L3, L4_ddot=v.L4_ddot,
    )


def _coef(t, params, ctx):
    return t if isinstance(t, FlowCoefficients) else coefficients(t, params, ctx)


def _pos(pos, ctx):
    return tuple(p if hasattr(p, "_mpf_") else ctx.mpf(p) for p in pos)


def velocity(t, pos, params, ctx: PrecisionContext):
    """Eulerian velocity at position ``pos`` = (x, y, z).

    ``t`` may also be a precomputed :class:`FlowCoefficients`.
    """
    c = _coef(t, params, ctx)
    x, y, z = _pos(pos, ctx)
    return (c.a1 * x, c.a1 * y, c.a3 * (z - c.L4) + c.L4_dot)


def divergence(t, params, ctx: PrecisionContext):
    """div v = 2 L1'/L1 + L3'/L3, the same at every position."""
    c = _coef(t, params, ctx)
    return 2 * c.a1 + c.a3


def velocity_gradient(t, params, ctx: PrecisionContext):
    """Jacobian dv_i/dx_j; it is diagonal, diag(a1, a1, a3)."""
    c = _coef(t, params, ctx)
    z = ctx.mp.mpf(0)
    return ((c.a1, z, z), (z, c.a1, z), (z, z, c.a3))


def curl(t, params, ctx: PrecisionContext):
    """Vorticity from the analytic Jacobian (identically zero)."""
    J = velocity_gradient(t, params, ctx)
    return (J[2][1] - J[1][2], J[0][2] - J[2][0], J[1][0] - J[0][1])


def vector_laplacian(t, pos, params, ctx: PrecisionContext):
    """Laplacian of v; v is affine in position so every component vanishes."""
    _coef(t, params, ctx)
    z = ctx.mp.mpf(0)
    return (z, z, z)


def potential_phi(t, pos, params, ctx: PrecisionContext):
    """Velocity potential with grad(phi) = v."""
    c = _coef(t, params, ctx)
    x, y, z = _pos(pos, ctx)
    return c.a1 * (x * x + y * y) / 2 + c.a3 * (z * z / 2 - z * c.L4) + c.L4_dot * z


def density(t, rho0, params, ctx: PrecisionContext):
    """rho0 / (L1^2 L3); position independent."""
    c = _coef(t, params, ctx)
    r0 = rho0 if hasattr(rho0, "_mpf_") else ctx.mpf(rho0)
    return r0 / (c.L1 * c.L1 * c.L3)


def external_force(t, pos, params, ctx: PrecisionContext):
    """K = (k1 x, k1 y, k3 (z - L4) + L4'')."""
    c = _coef(t, params, ctx)
    x, y, z = _pos(pos, ctx)
    return (c.k1 * x, c.k1 * y, c.k3 * (z - c.L4) + c.L4_ddot)


def force_potential(t, pos, params, ctx: PrecisionContext):
    """Scalar K_pot with -grad(K_pot) = K."""
    c = _coef(t, params, ctx)
    x, y, z = _pos(pos, ctx)
    return -(c.k1 * (x * x + y * y) / 2 + c.k3 * (z * z / 2 - z * c.L4) + c.L4_ddot * z)


@dataclass(frozen=True)
class FlowSample:
    t: object
    x: object
    y: object
    z: object
    v: tuple
    rho: object
    K_vec: tuple
    phi: object
    K_pot: object


def flow_sample(t, pos, params, ctx: PrecisionContext, rho0=1) -> FlowSample:
    c = coefficients(t, params, ctx)
    x, y, z = _pos(pos, ctx)
    return FlowSample(
        t=t, x=x, y=y, z=z,
        v=velocity(c, pos, params, ctx),
        rho=density(c, rho0, params, ctx),
        K_vec=external_force(c, pos, params, ctx),
        phi=potential_phi(c, pos, params, ctx),
        K_pot=force_potential(c, pos, params, ctx),
    )


def xz_vector_grid(t, params, ctx: PrecisionContext, n: int = 21, field: str = "velocity"):
    """Arrows on the unit disc of the xz-plane, scaled to the largest arrow.

    Returns rows (x, z, u, w) with (u, w) divided by the maximum arrow length
    so only relative magnitudes are kept.
    """
    c = coefficients(t, params, ctx)
    fn = velocity if field == "velocity" else external_force
    rows = []
    for i in range(n):
        for j in range(n):
            x = -1 + 2 * ctx.mpf(i) / (n - 1)
            z = -1 + 2 * ctx.mpf(j) / (n - 1)
            if x * x + z * z > 1:
                continue
            u, _, w = fn(c, (x, 0, z), params, ctx)
            rows.append([x, z, u, w])
    m = max((ctx.mp.sqrt(r[2] ** 2 + r[3] ** 2) for r in rows), default=0)
    if m > 0:
        for r in rows:
            r[2] /= m
            r[3] /= m
    return [tuple(r) for r in rows]
