from fractions import Fraction

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorflat.errors import DomainError, ParameterError
from cantorflat.numerics import (BoundedReal, as_rational, exp, ln, log_ratio, parse_rational, pow_rat,
                                 rational_str)

# frozen values from mpmath at 320 bits
POW_1_242_23_22 = "0.0032198036629387634201149781533788"
LOG3_88_21 = "1.3042038501970881322796334506777"


def _close(br, text, tol):
    return abs(br.value - mpq(Fraction(text))) <= tol + br.error


def test_as_rational_accepts_exact_inputs():
    assert as_rational("7/88") == mpq(7, 88)
    assert as_rational("0.05") == mpq(1, 20)
    assert as_rational(Fraction(3, 4)) == mpq(3, 4)
    assert as_rational(5) == 5
    assert rational_str(mpq(6, 8)) == "3/4"
    assert parse_rational(" 1/22 ") == mpq(1, 22)


def test_as_rational_refuses_floats_and_garbage():
    with pytest.raises(TypeError):
        as_rational(0.5)
    with pytest.raises(ParameterError):
        as_rational("one half")


def test_pow_rat_matches_oracle():
    v = pow_rat(mpq(1, 242), mpq(23, 22), 128)
    assert v.error < mpq(1, 2**120)
    assert _close(v, POW_1_242_23_22, mpq(1, 10**30))


def test_pow_rat_integer_exponent_is_exact():
    v = pow_rat(mpq(2, 3), 5)
    assert v.is_exact and v.value == mpq(32, 243)


def test_pow_rat_errors():
    with pytest.raises(DomainError):
        pow_rat(0, mpq(1, 2))
    with pytest.raises(DomainError):
        pow_rat(-1, mpq(1, 2))
    with pytest.raises(ParameterError):
        pow_rat(2, mpq(1, 2), 8)


def test_log_ratio_matches_oracle():
    v = log_ratio(mpq(88, 21), 3, 128)
    assert _close(v, LOG3_88_21, mpq(1, 10**30))


def test_division_by_interval_containing_zero():
    with pytest.raises(DomainError):
        BoundedReal(mpq(1)) / BoundedReal(mpq(0), mpq(1, 10))


def test_decimal_and_json_round_trip():
    v = ln(mpq(3), 128)
    back = BoundedReal.from_json(v.to_json())
    assert back.contains(v.value)
    assert back.error >= v.error
    assert v.decimal_str().startswith("1.0986122886681096913952452369225")


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=Fraction(1, 1000), max_value=1000),
       st.fractions(min_value=Fraction(1, 1000), max_value=1000))
def test_arithmetic_encloses_exact_result(a, b):
    x = BoundedReal(mpq(a), mpq(0), 64)
    y = BoundedReal(mpq(b), mpq(0), 64)
    qa, qb = mpq(a), mpq(b)
    assert (x + y).contains(qa + qb)
    assert (x - y).contains(qa - qb)
    assert (x * y).contains(qa * qb)
    assert (x / y).contains(qa / qb)


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**6))
def test_ln_exp_enclose_oracle(q):
    v = ln(mpq(q), 96)
    ref = mpmath.log(mpmath.mpf(q.numerator) / q.denominator)
    assert abs(mpmath.mpf(v.value.numerator) / v.value.denominator - ref) <= mpmath.mpf(v.error.numerator) / v.error.denominator
    w = exp(mpq(q.numerator % 50, q.denominator), 96)
    ref = mpmath.exp(mpmath.mpf(q.numerator % 50) / q.denominator)
    assert abs(mpmath.mpf(w.value.numerator) / w.value.denominator - ref) <= mpmath.mpf(w.error.numerator) / w.error.denominator


def test_certain_comparisons():
    a = BoundedReal(mpq(1), mpq(1, 100))
    b = BoundedReal(mpq(2), mpq(1, 100))
    assert a.certainly_lt(b) and b.certainly_gt(a)
    assert not a.certainly_lt(BoundedReal(mpq(1), mpq(0)))
    assert a.overlaps(BoundedReal(mpq(101, 100)))


def test_trivial_powers_and_logs():
    assert pow_rat(mpq(1, 4), 2).value == mpq(1, 16) and pow_rat(mpq(1, 4), 2).error == 0
    one = pow_rat(mpq(7, 3), 0)
    assert one.value == 1 and one.error == 0
    assert log_ratio(4, 2, 64).contains(2)
    assert log_ratio(1, mpq(5, 2), 64).contains(0)


@pytest.mark.parametrize("base,expo", [(mpq(1, 242), mpq(23, 22)), (mpq(7, 3), mpq(1, 3)), (mpq(5), mpq(-2, 7))])
def test_more_bits_never_widen(base, expo):
    errs = [pow_rat(base, expo, b).error for b in (32, 64, 128, 256)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))
