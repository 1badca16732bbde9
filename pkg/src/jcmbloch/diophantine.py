"""Continued fractions of quadratic irrationals and the candidate sets M, M~.

Everything that decides an inequality is done with integers: partial
quotients come from the classical (P + sqrt(D)) / Q recurrence and the
approximation certificates bracket ``q b sqrt(d)`` between consecutive
integer square roots, refining until the comparison is decided.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .precision import (
    PrecisionContext,
    Surd,
    cos_hp,
    required_digits,
    with_precision,
)


class DegenerateAlphaError(ValueError):
    """The number is rational, so it has no infinite continued fraction."""


def _squarefree(d: int) -> tuple[int, int]:
    """Return (s, r) with d = s^2 r and r square-free."""
    s, r, p = 1, d, 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            s *= p
        p += 1
    return s, r


@dataclass(frozen=True)
class QuadraticIrrational:
    """The number (a + b sqrt(d)) / c with d square-free and c > 0."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        a, b, c, d = int(self.a), int(self.b), int(self.c), int(self.d)
        if c == 0:
            raise ValueError("c must be nonzero")
        if d < 0:
            raise ValueError("d must be non-negative")
        s, d = _squarefree(d) if d > 0 else (0, 1)
        b *= s
        if d == 1:
            a, b = a + b, 0
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        for k, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, k, v)

    @classmethod
    def sqrt_over(cls, d: int, k: int = 1) -> "QuadraticIrrational":
        """sqrt(d) / k."""
        return cls(0, 1, k, d)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise DegenerateAlphaError("number is irrational")
        return Fraction(self.a, self.c)

    def to_hp(self, ctx: PrecisionContext):
        mp = ctx.mp
        return (mp.mpf(self.a) + self.b * mp.sqrt(self.d)) / self.c

    def __float__(self):
        return (self.a + self.b * math.sqrt(self.d)) / self.c

    def __str__(self):
        if self.is_rational:
            return str(Fraction(self.a, self.c))
        num = f"sqrt({self.d})" if self.b == 1 else f"{self.b}*sqrt({self.d})"
        if self.a:
            num = f"({self.a}+{num})"
        return num if self.c == 1 else f"{num}/{self.c}"


@dataclass(frozen=True)
class CFExpansion:
    """Partial quotients with the detected pre-period and period."""

    terms: list
    preperiod: list
    period: list


def _surd_state(alpha: QuadraticIrrational):
    """(P, D, Q) with alpha = (P + sqrt(D)) / Q and Q | D - P^2."""
    a, b, c, d = alpha.a, alpha.b, alpha.c, alpha.d
    if b > 0:
        P, D, Q = a, b * b * d, c
    else:
        P, D, Q = -a, b * b * d, -c
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    return P, D, Q


def continued_fraction(alpha: QuadraticIrrational, n_terms: int) -> CFExpansion:
    """First ``n_terms`` partial quotients of a quadratic irrational, exactly.

    Raises
    ------
    DegenerateAlphaError
        If ``alpha`` is rational.
    """
    if alpha.is_rational:
        raise DegenerateAlphaError(f"{alpha} is rational")
    P, D, Q = _surd_state(alpha)
    s = math.isqrt(D)
    terms, seen = [], {}
    preperiod, period = None, None
    while True:
        if period is None:
            if (P, Q) in seen:
                start = seen[(P, Q)]
                preperiod, period = terms[:start], terms[start:]
            else:
                seen[(P, Q)] = len(terms)
        if period is not None and len(terms) >= n_terms:
            break
        a = (P + s) // Q if Q > 0 else (P + s + 1) // Q
        terms.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return CFExpansion(terms[:n_terms], preperiod, period)


def partial_quotients(alpha: QuadraticIrrational, n_terms: int) -> list:
    return continued_fraction(alpha, n_terms).terms


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int
    a_prefix: tuple

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


def convergents(alpha: QuadraticIrrational, up_to_index: int) -> list:
    """Convergents chi(0..up_to_index) from p_n = a_n p_{n-1} + p_{n-2}."""
    a = partial_quotients(alpha, up_to_index + 1)
    out = []
    p0, p1, q0, q1 = 1, a[0], 0, 1
    out.append(Convergent(0, p1, q1, tuple(a[:1])))
    for n in range(1, up_to_index + 1):
        p0, p1 = p1, a[n] * p1 + p0
        q0, q1 = q1, a[n] * q1 + q0
        out.append(Convergent(n, p1, q1, tuple(a[: n + 1])))
    return out


def convergent(alpha: QuadraticIrrational, index: int) -> Convergent:
    return convergents(alpha, index)[index]


def _abs_diff_less(alpha, p: int, q: int, bound: Fraction, strict: bool = True) -> bool:
    """Exact test of |alpha - p/q| < bound (or <= when strict is False)."""
    if isinstance(alpha, Fraction):
        e = abs(alpha - Fraction(p, q))
        return e < bound if strict else e <= bound
    a, b, c, d = alpha.a, alpha.b, alpha.c, alpha.d
    # |b q sqrt(d) + (a q - p c)| compared with bound * c * q
    v = a * q - p * c
    R = bound * c * q
    sq = b * b * q * q * d
    sign = 1 if b * q >= 0 else -1
    K = 64
    while True:
        F = math.isqrt(sq << (2 * K))
        lo = Fraction(F, 1 << K)
        hi = Fraction(F + 1, 1 << K)
        if sign < 0:
            lo, hi = -hi, -lo
        lo_e, hi_e = lo + v, hi + v
        mag_lo = 0 if lo_e <= 0 <= hi_e else min(abs(lo_e), abs(hi_e))
        mag_hi = max(abs(lo_e), abs(hi_e))
        if mag_hi < R or (not strict and mag_hi <= R):
            return True
        if mag_lo > R or (strict and mag_lo >= R):
            return False
        K *= 2
        if K > 1 << 14:
            raise ArithmeticError("comparison undecided")


def _as_alpha(alpha):
    if isinstance(alpha, QuadraticIrrational):
        return alpha.as_fraction() if alpha.is_rational else alpha
    if isinstance(alpha, (int, Fraction)):
        return Fraction(alpha)
    return alpha


@dataclass(frozen=True)
class Quality:
    err: object
    passes_q2: bool
    passes_next_quotient: bool


def quality(alpha: QuadraticIrrational, conv, ctx: PrecisionContext | None = None) -> Quality:
    """|alpha - p/q| with the 1/q^2 and 1/(a_{n+1} q^2) certificates.

    ``conv`` is a :class:`Convergent` or a plain ``(p, q)`` pair.  The error
    is evaluated at ``required_digits(q, 34)`` digits; the booleans are
    decided exactly.
    """
    if isinstance(conv, Convergent):
        p, q, n = conv.p, conv.q, conv.index
    else:
        p, q = conv
        n = None
    digits = max(50, required_digits(q * q, 34))
    if ctx is None or ctx.digits < digits:
        ctx = with_precision(digits)
    mp = ctx.mp
    err = abs(alpha.to_hp(ctx) - mp.mpf(p) / q)
    q2 = _abs_diff_less(alpha, p, q, Fraction(1, q * q))
    nxt = False
    if n is None:
        for c in convergents(alpha, 2 * q.bit_length() + 4):
            if (c.p, c.q) == (p, q):
                n = c.index
                break
    if n is not None:
        a_next = partial_quotients(alpha, n + 2)[n + 1]
        nxt = _abs_diff_less(alpha, p, q, Fraction(1, a_next * q * q), strict=False)
    return Quality(err, q2, nxt)


def dirichlet_admissible(alpha, p: int, q: int, Q: int) -> bool:
    """|alpha - p/q| <= 1/(q Q), decided exactly for rational or quadratic alpha."""
    alpha = _as_alpha(alpha)
    if hasattr(alpha, "_mpf_"):
        mp = alpha.context
        return abs(alpha - mp.mpf(p) / q) <= mp.mpf(1) / (q * Q)
    return _abs_diff_less(alpha, p, q, Fraction(1, q * Q), strict=False)


def dirichlet_search(alpha, Q: int, ctx: PrecisionContext | None = None) -> tuple[int, int]:
    """Brute-force pigeonhole oracle: the smallest q in 1..Q-1 with a p such
    that |alpha - p/q| <= 1/(q Q).

    The first hit is automatically in lowest terms.  ``alpha`` may be a
    QuadraticIrrational, an exact rational or an mpf.
    """
    if Q <= 1:
        raise ValueError("Q must exceed 1")
    alpha = _as_alpha(alpha)
    af = float(alpha)
    for q in range(1, Q):
        base = math.floor(q * af + 0.5)
        # the float guess can be off by one near half-integers
        for p in (base, base - 1, base + 1):
            if abs(q * af - p) > 1.0 / Q + 1e-9 * q:
                continue
            if dirichlet_admissible(alpha, p, q, Q):
                return p, q
    raise ArithmeticError("no admissible pair found")


def delta_bound(epsilon, ctx: PrecisionContext | None = None):
    """|arccos(1 - 4 eps)| for 0 < eps <= 1/2."""
    ctx = ctx or with_precision()
    e = epsilon if hasattr(epsilon, "_mpf_") else ctx.mpf(
        Fraction(epsilon) if not isinstance(epsilon, str) else epsilon)
    if not (0 < e <= ctx.mpf(Fraction(1, 2))):
        raise ValueError("epsilon must lie in (0, 1/2]")
    return abs(ctx.mp.acos(1 - 4 * e))


ALPHA_LABELS = {1: "sqrt2", 2: "1/sqrt2", 3: "sqrt2/3", 4: "1/(2sqrt2)"}


def sqrt2_over(k: int) -> QuadraticIrrational:
    return QuadraticIrrational.sqrt_over(2, k)


def candidate_convergents(k_list=(1, 2, 3, 4), min_index: int = 12,
                          denominator_digit_cap: int = 15):
    """Convergents of sqrt(2)/k from ``min_index`` while q has at most the cap in digits."""
    out = []
    for k in k_list:
        alpha = sqrt2_over(k)
        n = min_index
        cs = convergents(alpha, min_index + 8)
        while True:
            if n >= len(cs):
                cs = convergents(alpha, 2 * len(cs))
            c = cs[n]
            if len(str(c.q)) > denominator_digit_cap:
                break
            out.append((k, c))
            n += 1
    return out


def build_candidate_set(k_list=(1, 2, 3, 4), min_index: int = 12,
                        denominator_digit_cap: int = 15) -> list:
    """Sorted set M = {0} plus the denominators of the selected convergents."""
    qs = {0}
    for _, c in candidate_convergents(k_list, min_index, denominator_digit_cap):
        qs.add(c.q)
    return sorted(qs)


def third_order_deficit(q: int, beta, ctx: PrecisionContext):
    """1 - f~(b, q pi) with f~ the normalised three-term cosine average.

    f~(b, t) = (b cos 2t + b^2 cos(2 sqrt2 t) + b^3 cos(2 sqrt3 t)) / (b + b^2 + b^3).
    At t = q pi the first cosine is exactly 1; the others are reduced exactly.
    """
    b = ctx.exp_neg(beta)
    c2 = cos_hp(Surd(2 * q, 2, True), ctx)
    c3 = cos_hp(Surd(2 * q, 3, True), ctx)
    return (b * b * (1 - c2) + b ** 3 * (1 - c3)) / (b + b * b + b ** 3)


def third_order_filter(M, beta=Fraction(2), threshold=Fraction(2, 1000),
                       ctx: PrecisionContext | None = None) -> list:
    """{q in M : 1 - f~(e^-beta, q pi) < threshold}, in increasing order.

    The comparison is made as ``<=``: the deficit is irrational for every
    q > 0, so equality can only happen at the exact zero of q = 0, which is
    thereby kept even for ``threshold = 0``.
    """
    M = sorted(M)
    digits = required_digits(max(max(M), 1), 34)
    if ctx is None or ctx.digits < digits:
        ctx = with_precision(max(digits, 50))
    thr = threshold if hasattr(threshold, "_mpf_") else ctx.mpf(
        Fraction(threshold) if not isinstance(threshold, str) else threshold)
    beta = Fraction(beta) if isinstance(beta, (int, float)) else beta
    return [q for q in M if third_order_deficit(q, beta, ctx) <= thr]
