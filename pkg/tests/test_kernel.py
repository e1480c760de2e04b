import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorflat.errors import DomainError, ParameterError
from cantorflat.kernel import compute_K, make_kernel, phi_derivative, phi_eval, poly_deriv, poly_eval

# sup |phi^(k)| from the oracle: 10/sqrt(3) for k=2; grid-sampled maxima for k=3, 4
K2_ORACLE = mpmath.mpf(10) / mpmath.sqrt(3)
K4_ORACLE = mpmath.mpf("622.5327")


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_flat_endpoints_and_boundary_values(k):
    kern = make_kernel(k)
    assert phi_eval(kern, 0) == 1 and phi_eval(kern, 1) == 0
    for j in range(1, k + 1):
        assert phi_derivative(kern, j, 0) == 0
        assert phi_derivative(kern, j, 1) == 0
    # order k + 1 is the first non-vanishing one
    assert phi_derivative(kern, k + 1, 0) != 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_normalizer(k):
    from math import factorial
    assert make_kernel(k).normalizer == mpq(factorial(k) ** 2, factorial(2 * k + 1))


def test_K_values():
    assert compute_K(make_kernel(1)) == mpq(3, 2)
    k2 = compute_K(make_kernel(2))
    assert abs(mpmath.mpf(float(k2)) - K2_ORACLE) < 1e-9
    assert k2 >= mpq(5773502691896257, 10**15)
    assert compute_K(make_kernel(3)) == mpq(105, 2)
    assert abs(float(compute_K(make_kernel(4))) - float(K4_ORACLE)) < 1e-3


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_K_dominates_dense_grid(k):
    kern = make_kernel(k)
    dk = poly_deriv(kern.poly_coeffs, k)
    assert max(abs(poly_eval(dk, mpq(i, 2000))) for i in range(2001)) <= kern.K_bound


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.fractions(min_value=0, max_value=1), st.fractions(min_value=0, max_value=1))
def test_phi_monotone_decreasing(k, a, b):
    kern = make_kernel(k)
    lo, hi = sorted((mpq(a), mpq(b)))
    assert phi_eval(kern, lo) >= phi_eval(kern, hi)
    assert 0 <= phi_eval(kern, hi) <= 1


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.fractions(min_value=0, max_value=1))
def test_phi_symmetry(k, t):
    kern = make_kernel(k)
    assert phi_eval(kern, mpq(t)) + phi_eval(kern, 1 - mpq(t)) == 1


def test_errors():
    with pytest.raises(ParameterError):
        make_kernel(0)
    with pytest.raises(DomainError):
        phi_eval(make_kernel(1), mpq(3, 2))
    with pytest.raises(ParameterError):
        phi_derivative(make_kernel(1), 0, mpq(1, 2))


def test_kernel_is_cached():
    assert make_kernel(2) is make_kernel(2)


def test_k1_polynomial_and_derivative():
    kern = make_kernel(1)
    assert kern.poly_coeffs == (1, 0, -3, 2)
    assert kern.normalizer == mpq(1, 6)
    assert phi_eval(kern, mpq(1, 2)) == mpq(1, 2)
    for x in (mpq(0), mpq(1, 3), mpq(1, 2), mpq(5, 7)):
        assert phi_derivative(kern, 1, x) == -6 * x * (1 - x)
    assert phi_derivative(kern, 1, mpq(1, 2)) == mpq(-3, 2)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_K_dominates_midpoint(k):
    kern = make_kernel(k)
    assert kern.K_bound >= abs(phi_derivative(kern, k, mpq(1, 2)))
