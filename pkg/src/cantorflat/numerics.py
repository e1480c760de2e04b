"""Exact rationals and error-bounded high-precision reals.

Rationals are ``gmpy2.mpq``. A :class:`BoundedReal` is a midpoint-radius
interval whose midpoint is an exact rational (dyadic once rounded) and
whose radius is an exact rational upper bound on the distance to the true
value. Transcendentals go through MPFR, which rounds correctly, so the
bounds below are rigorous.
"""

from __future__ import annotations

import decimal
import math
from fractions import Fraction
from numbers import Rational as _RationalABC

import gmpy2
from gmpy2 import mpq, mpz

from .errors import DomainError, ParameterError

DEFAULT_BITS = 128
MIN_BITS = 16
# error radii are rounded up to this many mantissa bits to keep them small
_ERR_BITS = 40
_GUARD = 8

ZERO = mpq(0)
ONE = mpq(1)

_mpq_type = type(ZERO)
_mpz_type = type(mpz(0))


def as_rational(x) -> mpq:
    """Coerce ``x`` to an exact ``mpq``.

    Accepts ints, ``mpq``/``mpz``, :class:`fractions.Fraction` and strings
    such as ``"7/88"`` or ``"0.05"``. Floats are refused: every quantity in
    this package must be exact.
    """
    if isinstance(x, _mpq_type):
        return x
    if isinstance(x, (int, _mpz_type)) and not isinstance(x, bool):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        try:
            f = Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"not an exact rational: {x!r}") from exc
        return mpq(f.numerator, f.denominator)
    if isinstance(x, _RationalABC):
        return mpq(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def rational_str(q) -> str:
    q = as_rational(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(s: str) -> mpq:
    return as_rational(s)


def _round_dyadic(q: mpq, bits: int) -> mpq:
    """Nearest dyadic rational to ``q`` with about ``bits`` mantissa bits."""
    n, d = q.numerator, q.denominator
    if n == 0:
        return q
    neg = n < 0
    if neg:
        n = -n
    shift = bits + 1 - (n.bit_length() - d.bit_length())
    if shift >= 0:
        m = ((n << shift) * 2 + d) // (2 * d)
        v = mpq(m, mpz(1) << shift)
    else:
        dd = d << (-shift)
        m = (2 * n + dd) // (2 * dd)
        v = mpq(m << (-shift), 1)
    return -v if neg else v


def _ceil_err(e: mpq) -> mpq:
    """Round a nonnegative error radius up to a short dyadic."""
    n, d = e.numerator, e.denominator
    if n == 0:
        return e
    if d & (d - 1) == 0 and n.bit_length() <= _ERR_BITS:
        return e
    shift = _ERR_BITS - (n.bit_length() - d.bit_length())
    if shift >= 0:
        m = -((-(n << shift)) // d)
        return mpq(m, mpz(1) << shift)
    dd = d << (-shift)
    m = -((-n) // dd)
    return mpq(m << (-shift), 1)


def _finish(exact: mpq, err: mpq, bits: int) -> "BoundedReal":
    n, d = exact.numerator, exact.denominator
    if n.bit_length() + d.bit_length() > 2 * bits:
        v = _round_dyadic(exact, bits)
        err = err + abs(v - exact)
    else:
        v = exact
    return BoundedReal._trusted(v, _ceil_err(err) if err else err, bits)


class BoundedReal:
    """A real number known to lie in ``[value - error, value + error]``."""

    __slots__ = ("value", "error", "precision_bits")

    def __init__(self, value, error=ZERO, precision_bits: int = DEFAULT_BITS):
        self.value = as_rational(value)
        self.error = as_rational(error)
        if self.error < 0:
            raise ParameterError("error bound must be nonnegative")
        self.precision_bits = int(precision_bits)

    @classmethod
    def _trusted(cls, value: mpq, error: mpq, bits: int) -> "BoundedReal":
        # skips coercion and checks; callers pass an mpq pair with error >= 0
        out = object.__new__(cls)
        out.value = value
        out.error = error
        out.precision_bits = bits
        return out

    @classmethod
    def exact(cls, q, precision_bits: int = DEFAULT_BITS) -> "BoundedReal":
        return cls(as_rational(q), ZERO, precision_bits)

    @property
    def lo(self) -> mpq:
        return self.value - self.error

    @property
    def hi(self) -> mpq:
        return self.value + self.error

    @property
    def is_exact(self) -> bool:
        return self.error == 0

    def contains(self, q) -> bool:
        q = as_rational(q)
        return self.lo <= q <= self.hi

    def overlaps(self, other) -> bool:
        other = _lift(other, self.precision_bits)
        return self.lo <= other.hi and other.lo <= self.hi

    def certainly_lt(self, other) -> bool:
        other = _lift(other, self.precision_bits)
        return self.hi < other.lo

    def certainly_gt(self, other) -> bool:
        other = _lift(other, self.precision_bits)
        return self.lo > other.hi

    def certainly_positive(self) -> bool:
        return self.lo > 0

    def with_bits(self, bits: int) -> "BoundedReal":
        return BoundedReal(self.value, self.error, bits)

    # arithmetic

    def __neg__(self):
        return BoundedReal(-self.value, self.error, self.precision_bits)

    def __abs__(self):
        return BoundedReal(abs(self.value), self.error, self.precision_bits)

    def __add__(self, other):
        if isinstance(other, BoundedReal):
            bits = max(self.precision_bits, other.precision_bits)
            return _finish(self.value + other.value, self.error + other.error, bits)
        try:
            q = as_rational(other)
        except TypeError:
            return NotImplemented
        return _finish(self.value + q, self.error, self.precision_bits)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, BoundedReal):
            bits = max(self.precision_bits, other.precision_bits)
            return _finish(self.value - other.value, self.error + other.error, bits)
        try:
            q = as_rational(other)
        except TypeError:
            return NotImplemented
        return _finish(self.value - q, self.error, self.precision_bits)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, BoundedReal):
            bits = max(self.precision_bits, other.precision_bits)
            err = (abs(self.value) * other.error + abs(other.value) * self.error
                   + self.error * other.error)
            return _finish(self.value * other.value, err, bits)
        try:
            q = as_rational(other)
        except TypeError:
            return NotImplemented
        return _finish(self.value * q, self.error * abs(q), self.precision_bits)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, BoundedReal):
            try:
                other = BoundedReal(as_rational(other), ZERO, self.precision_bits)
            except TypeError:
                return NotImplemented
        if abs(other.value) <= other.error:
            raise DomainError("division by an interval containing zero")
        bits = max(self.precision_bits, other.precision_bits)
        q = self.value / other.value
        err = (self.error + abs(q) * other.error) / (abs(other.value) - other.error)
        return _finish(q, err, bits)

    def __rtruediv__(self, other):
        return BoundedReal(as_rational(other), ZERO, self.precision_bits) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = BoundedReal(ONE, ZERO, self.precision_bits)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"BoundedReal({float(self.value):.17g} ± {float(self.error):.3g}, bits={self.precision_bits})"

    def decimal_str(self) -> str:
        digits = math.ceil(self.precision_bits * 0.302) + 1
        with decimal.localcontext() as ctx:
            ctx.prec = digits
            ctx.rounding = decimal.ROUND_HALF_EVEN
            out = decimal.Decimal(int(self.value.numerator)) / decimal.Decimal(int(self.value.denominator))
        return str(out)

    def to_json(self) -> dict:
        return {"value": self.decimal_str(), "error": rational_str(self.error)}

    @classmethod
    def from_json(cls, obj: dict, precision_bits: int = DEFAULT_BITS) -> "BoundedReal":
        # the decimal string is a rounded midpoint; widen by its last digit
        value = as_rational(obj["value"])
        err = as_rational(obj["error"])
        exp10 = decimal.Decimal(obj["value"]).as_tuple().exponent
        half_ulp = mpq(1, 2) * mpq(10) ** int(exp10)
        return cls(value, err + half_ulp, precision_bits)


def _lift(x, bits) -> BoundedReal:
    if isinstance(x, BoundedReal):
        return x
    return BoundedReal(as_rational(x), ZERO, bits)


def _to_mpfr(q: mpq, prec: int):
    with gmpy2.context(precision=prec, round=gmpy2.RoundToNearest):
        m = gmpy2.mpfr(q)
    return m, abs(mpq(m) - q)


def ln(x, bits: int = DEFAULT_BITS) -> BoundedReal:
    """Natural logarithm with a rigorous error bound."""
    x = _lift(x, bits)
    if x.lo <= 0:
        raise DomainError("logarithm of a non-positive value")
    p = bits + _GUARD
    m, conv = _to_mpfr(x.value, p)
    with gmpy2.context(precision=p, round=gmpy2.RoundToNearest):
        y = mpq(gmpy2.log(m))
    t = x.error + conv
    floor_arg = mpq(m) - t
    if floor_arg <= 0:
        raise DomainError("logarithm argument interval reaches zero")
    err = abs(y) / (mpz(1) << (p - 1)) + t / floor_arg
    return BoundedReal(y, _ceil_err(err), bits)


def exp(x, bits: int = DEFAULT_BITS) -> BoundedReal:
    """Exponential with a rigorous error bound."""
    x = _lift(x, bits)
    p = bits + _GUARD
    m, conv = _to_mpfr(x.value, p)
    t = x.error + conv
    if t >= 1:
        raise DomainError("exponent interval too wide for a useful bound")
    with gmpy2.context(precision=p, round=gmpy2.RoundToNearest):
        y = mpq(gmpy2.exp(m))
    rel = ONE / (mpz(1) << (p - 1))
    err = abs(y) * rel + abs(y) * (1 + rel) * t / (1 - t)
    return BoundedReal(y, _ceil_err(err), bits)


def pow_rat(base, exponent, precision_bits: int = DEFAULT_BITS) -> BoundedReal:
    """``base ** exponent`` for a positive rational base and rational exponent.

    Integer exponents are computed exactly. Otherwise the result is
    ``exp(exponent * ln(base))`` with relative error at most
    ``2**(1 - precision_bits)``.
    """
    base = as_rational(base)
    exponent = as_rational(exponent)
    if precision_bits < MIN_BITS:
        raise ParameterError(f"precision_bits must be >= {MIN_BITS}")
    if base <= 0:
        raise DomainError("pow_rat requires a positive base")
    if exponent.denominator == 1:
        return BoundedReal(base ** int(exponent), ZERO, precision_bits)
    scale = abs(float(exponent)) * abs(math.log(float(base))) if base.numerator.bit_length() < 1000 else 1e300
    wp = precision_bits + 16 + max(0, int(scale + 1).bit_length())
    arg = ln(base, wp) * exponent
    out = exp(arg, wp)
    return BoundedReal(out.value, out.error, precision_bits)


def log_ratio(numer, denom_base, precision_bits: int = DEFAULT_BITS) -> BoundedReal:
    """``log(numer) / log(denom_base)`` with a conservative error bound."""
    numer = as_rational(numer)
    denom_base = as_rational(denom_base)
    if numer <= 0 or denom_base <= 1:
        raise DomainError("log_ratio needs numer > 0 and base > 1")
    wp = precision_bits + _GUARD
    out = ln(numer, wp) / ln(denom_base, wp)
    return BoundedReal(out.value, out.error, precision_bits)
