"""Arbitrary-precision real arithmetic for the thermal series.

Every high-precision number is an ``mpf`` owned by the ``mpmath`` context held
inside a :class:`PrecisionContext`.  Time arguments that are known exactly
(rationals, rational multiples of a square root, optionally times pi) are
carried as :class:`Surd` values so that reduction modulo 2*pi can be done in
integer arithmetic instead of by floating subtraction.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath

MIN_DIGITS = 34
DEFAULT_DIGITS = 50
# digits that must survive argument reduction
REDUCED_DIGITS = 34
_GUARD_BITS = 40


class ConfigurationError(ValueError):
    """Invalid precision or parameter configuration."""


class InsufficientPrecisionError(ArithmeticError):
    """The magnitude of an argument consumes the context's digit budget.

    The caller should rebuild the context with more digits, see
    :func:`required_digits`.
    """


class PrecisionContext:
    """Working precision plus cached constants.

    Parameters
    ----------
    digits : int
        Significant decimal digits, at least 34.

    Notes
    -----
    The context is immutable apart from the square-root cache, which is
    guarded by a lock.  The underlying ``mpmath`` context temporarily raises
    its precision inside some operations, so a single context must not be
    used from several threads at once; give each worker its own context.
    """

    def __init__(self, digits: int = DEFAULT_DIGITS):
        if not isinstance(digits, int) or isinstance(digits, bool):
            raise ConfigurationError(f"digits must be an integer, got {digits!r}")
        if digits < MIN_DIGITS:
            raise ConfigurationError(
                f"digits={digits} is below the working floor of {MIN_DIGITS}")
        self._digits = digits
        self.mp = mpmath.MPContext()
        self.mp.dps = digits
        self._pi = +self.mp.pi
        self._sqrt_cache: dict[int, object] = {}
        self._lock = threading.Lock()
        self._exp_cache: dict[object, object] = {}

    @property
    def digits(self) -> int:
        return self._digits

    @property
    def prec(self) -> int:
        """Binary precision in bits."""
        return self.mp.prec

    @property
    def pi(self):
        return self._pi

    @property
    def sqrt_cache(self) -> dict:
        return dict(self._sqrt_cache)

    def mpf(self, x):
        """Convert ``x`` to an ``mpf`` of this context, exactly when possible."""
        if isinstance(x, Surd):
            return x.to_hp(self)
        if isinstance(x, Fraction):
            return self.mp.mpf(x.numerator) / x.denominator
        if isinstance(x, str):
            f = Fraction(x.strip())
            return self.mp.mpf(f.numerator) / f.denominator
        return self.mp.mpf(x)

    def exp_neg(self, beta):
        """``exp(-beta)`` computed once per distinct beta and cached."""
        key = beta if isinstance(beta, (int, Fraction)) else repr(beta)
        val = self._exp_cache.get(key)
        if val is None:
            val = self.mp.exp(-self.mpf(beta))
            with self._lock:
                self._exp_cache[key] = val
        return val

    def __repr__(self):
        return f"PrecisionContext(digits={self._digits})"


def with_precision(digits: int = DEFAULT_DIGITS) -> PrecisionContext:
    """Build a context with ``digits`` significant decimal digits.

    Raises
    ------
    ConfigurationError
        If ``digits`` is below 34.
    """
    return PrecisionContext(digits)


def _isqrt_scaled(n: int, bits: int) -> int:
    """floor(sqrt(n) * 2**bits)."""
    return math.isqrt(n << (2 * bits))


def sqrt_int(n: int, ctx: PrecisionContext):
    """Square root of a non-negative integer, correct to the context precision.

    Perfect squares are returned exactly.  The value is computed by integer
    Newton iteration (``math.isqrt``) on ``n`` scaled by a power of four and
    cached in the context.
    """
    if n < 0:
        raise ValueError("sqrt_int needs n >= 0")
    cached = ctx._sqrt_cache.get(n)
    if cached is not None:
        return cached
    r = math.isqrt(n)
    if r * r == n:
        val = ctx.mp.mpf(r)
    else:
        bits = ctx.prec + _GUARD_BITS
        val = ctx.mp.ldexp(ctx.mp.mpf(_isqrt_scaled(n, bits)), -bits)
        val = +val
    with ctx._lock:
        ctx._sqrt_cache[n] = val
    return val


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


@dataclass(frozen=True)
class Surd:
    """The exact real ``coeff * sqrt(radicand) * (pi if with_pi else 1)``.

    Perfect-square radicands are folded into the coefficient, so the
    representation is canonical enough for exact-zero detection.
    """

    coeff: Fraction
    radicand: int = 1
    with_pi: bool = False

    def __post_init__(self):
        c = _as_fraction(self.coeff)
        d = int(self.radicand)
        if d < 0:
            raise ValueError("radicand must be non-negative")
        r = math.isqrt(d)
        if r * r == d:
            c, d = c * r, 1
        if c == 0:
            d = 1
        object.__setattr__(self, "coeff", c)
        object.__setattr__(self, "radicand", d)
        object.__setattr__(self, "with_pi", bool(self.with_pi))

    def scale(self, k) -> "Surd":
        return Surd(self.coeff * _as_fraction(k), self.radicand, self.with_pi)

    def times_sqrt(self, n: int) -> "Surd":
        return Surd(self.coeff, self.radicand * n, self.with_pi)

    @property
    def is_zero(self) -> bool:
        return self.coeff == 0

    @property
    def is_rational_turns(self) -> bool:
        """True when the value divided by 2*pi is rational."""
        return self.with_pi and self.radicand == 1

    def to_hp(self, ctx: PrecisionContext):
        mp = ctx.mp
        v = mp.mpf(self.coeff.numerator) / self.coeff.denominator
        if self.radicand != 1:
            v = v * sqrt_int(self.radicand, ctx)
        if self.with_pi:
            v = v * ctx.pi
        return v

    def __float__(self):
        v = float(self.coeff) * math.sqrt(self.radicand)
        return v * math.pi if self.with_pi else v

    def __str__(self):
        s = str(self.coeff)
        if self.radicand != 1:
            s += f"*sqrt({self.radicand})"
        if self.with_pi:
            s += "*pi"
        return s


def as_argument(x):
    """Normalise a time-like argument.

    Exact inputs (int, Fraction, decimal or ``p/q`` strings, floats taken at
    their exact binary value, :class:`Surd`) become a :class:`Surd`; ``mpf``
    values are returned unchanged and follow the inexact path.
    """
    if isinstance(x, Surd):
        return x
    if isinstance(x, (int, Fraction, float, str)) and not isinstance(x, bool):
        return Surd(_as_fraction(x))
    return x


def _int_digits(v: float) -> int:
    v = abs(v)
    if v < 1:
        return 0
    return int(math.floor(math.log10(v))) + 1


def _check_budget(magnitude: float, ctx: PrecisionContext):
    used = _int_digits(magnitude)
    if ctx.digits - used < REDUCED_DIGITS:
        raise InsufficientPrecisionError(
            f"argument of magnitude ~1e{used} leaves {ctx.digits - used} digits "
            f"after reduction at {ctx.digits} digits; need {REDUCED_DIGITS}")


def _turns_surd(x: Surd, ctx: PrecisionContext, bits: int):
    """Fractional part of x/(2*pi): an exact Fraction or an mpf."""
    a, b = x.coeff.numerator, x.coeff.denominator
    if x.with_pi:
        if x.radicand == 1:
            u = x.coeff / 2
            return u - math.floor(u)
        F = math.isqrt(a * a * x.radicand << (2 * bits)) // (2 * b)
        f = F if a >= 0 else -F - 1
        f &= (1 << bits) - 1
        return ctx.mp.ldexp(ctx.mp.mpf(f), -bits)
    if a == 0:
        return Fraction(0)
    mag = abs(float(x.coeff)) * math.sqrt(x.radicand)
    extra = max(0, int(math.log2(mag + 1)) + 2)
    mp = ctx.mp
    with mp.workprec(bits + extra):
        y = mp.mpf(a) / b
        if x.radicand != 1:
            y = y * mp.sqrt(x.radicand)
        y = y / (2 * mp.pi)
        fr = y - mp.floor(y)
    return fr


def _turns_mpf(x, ctx: PrecisionContext, bits: int):
    mp = ctx.mp
    _check_budget(float(abs(x)), ctx)
    extra = max(0, int(mp.log(abs(x) + 1, 2)) + 2)
    with mp.workprec(bits + extra):
        y = x / (2 * mp.pi)
        fr = y - mp.floor(y)
    return fr


def turns(x, ctx: PrecisionContext):
    """Fractional part of ``x / (2*pi)`` in [0, 1).

    Returns a ``Fraction`` when the result is exactly rational, otherwise an
    ``mpf`` at context precision plus guard bits.
    """
    x = as_argument(x)
    bits = ctx.prec + _GUARD_BITS
    if isinstance(x, Surd):
        return _turns_surd(x, ctx, bits)
    return _turns_mpf(x, ctx, bits)


def reduce_mod_2pi(x, ctx: PrecisionContext):
    """Reduce ``x`` into [0, 2*pi).

    Exact arguments are reduced in integer arithmetic (with pi) or at a
    working precision raised by the integer-part size of ``x`` (without pi),
    so they never exhaust the budget.  Plain ``mpf`` inputs are bounded by
    their own precision and raise :class:`InsufficientPrecisionError` when
    fewer than 34 digits would survive.
    """
    fr = turns(x, ctx)
    if isinstance(fr, Fraction):
        return 2 * ctx.pi * (ctx.mp.mpf(fr.numerator) / fr.denominator)
    r = +(2 * ctx.pi * fr)
    if r >= 2 * ctx.pi:
        r = ctx.mp.mpf(0)
    return r


_EXACT_QUARTERS = {
    Fraction(0): (1, 0),
    Fraction(1, 4): (0, 1),
    Fraction(1, 2): (-1, 0),
    Fraction(3, 4): (0, -1),
}


def _cos_sin_from_turns(fr, ctx: PrecisionContext):
    mp = ctx.mp
    if isinstance(fr, Fraction):
        if fr in _EXACT_QUARTERS:
            c, s = _EXACT_QUARTERS[fr]
            return mp.mpf(c), mp.mpf(s)
        fr = mp.mpf(fr.numerator) / fr.denominator
    with mp.extraprec(_GUARD_BITS):
        z = 2 * fr
        c, s = mp.cospi(z), mp.sinpi(z)
    return +c, +s


def cos_sin_hp(x, ctx: PrecisionContext):
    """(cos x, sin x) after exact reduction."""
    return _cos_sin_from_turns(turns(x, ctx), ctx)


def cos_hp(x, ctx: PrecisionContext):
    """cos x after exact reduction; exactly 1 when x is an integer multiple of 2*pi."""
    return cos_sin_hp(x, ctx)[0]


def sin_hp(x, ctx: PrecisionContext):
    """sin x after exact reduction."""
    return cos_sin_hp(x, ctx)[1]


def cos_sin_sqrt_table(t, n_max: int, ctx: PrecisionContext):
    """Tables ``cos(sqrt(n) t)`` and ``sin(sqrt(n) t)`` for n = 0..n_max.

    This is the workhorse of the thermal series.  For a rational ``t`` the
    argument ``sqrt(n) t`` is formed at a precision raised by the bit length
    of ``t sqrt(n_max)`` so the reduced phase keeps full context accuracy.
    Arguments containing pi are reduced exactly in integers.
    """
    mp = ctx.mp
    x = as_argument(t)
    bits = ctx.prec + _GUARD_BITS
    C = [mp.mpf(1)]
    S = [mp.mpf(0)]
    if n_max <= 0:
        return C[: n_max + 1], S[: n_max + 1]
    if isinstance(x, Surd) and (x.with_pi or x.is_zero):
        for n in range(1, n_max + 1):
            c, s = _cos_sin_from_turns(_turns_surd(x.times_sqrt(n), ctx, bits), ctx)
            C.append(c)
            S.append(s)
        return C, S
    if isinstance(x, Surd):
        mag = abs(float(x.coeff)) * math.sqrt(x.radicand * n_max)
    else:
        mag = float(abs(x)) * math.sqrt(n_max)
        _check_budget(mag, ctx)
    extra = max(0, int(math.log2(mag + 1)) + 2)
    with mp.workprec(bits + extra):
        if isinstance(x, Surd):
            base = mp.mpf(x.coeff.numerator) / x.coeff.denominator
            if x.radicand != 1:
                base = base * mp.sqrt(x.radicand)
        else:
            base = mp.mpf(x)
        base = base / (2 * mp.pi)
        frs = []
        for n in range(1, n_max + 1):
            y = base * mp.sqrt(n)
            frs.append(y - mp.floor(y))
    for fr in frs:
        c, s = _cos_sin_from_turns(fr, ctx)
        C.append(c)
        S.append(s)
    return C, S


def required_digits(q_max: int, target: int) -> int:
    """Digits needed to keep ``target`` fractional digits for arguments up to ``q_max``.

    Returns ``len(str(q_max)) + target + 2`` (two guard digits).
    """
    q_max = int(q_max)
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    if target < 1:
        raise ValueError("target must be positive")
    return len(str(q_max)) + int(target) + 2


def to_decimal(x, ctx: PrecisionContext, sig: int | None = None) -> str:
    """Decimal string of ``x``.

    With ``sig=None`` enough digits are written for an exact round trip
    through :func:`from_decimal` at the same context.
    """
    mp = ctx.mp
    if sig is None:
        return mpmath.libmp.to_str(mp.mpf(x)._mpf_, mpmath.libmp.repr_dps(ctx.prec))
    return mpmath.libmp.to_str(mp.mpf(x)._mpf_, sig)


def from_decimal(s: str, ctx: PrecisionContext):
    return ctx.mp.mpf(s)
