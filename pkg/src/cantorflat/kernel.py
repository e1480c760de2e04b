"""The polynomial link kernel.

``phi(x) = 1 - B(x) / B(1)`` where ``B(x)`` is the incomplete integral of
``t**k * (1 - t)**k``. It falls strictly from 1 to 0 on [0, 1] and its
first ``k`` derivatives vanish at both ends. Everything here is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

from gmpy2 import mpq

from .errors import DomainError, ParameterError
from .numerics import as_rational, rational_str

# bisection stops once the bracket is narrower than this
ROOT_WIDTH = mpq(1, 2**40)


def poly_eval(coeffs, x):
    """Horner evaluation; ``coeffs[i]`` multiplies ``x**i``."""
    acc = mpq(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_deriv(coeffs, j=1):
    out = list(coeffs)
    for _ in range(j):
        out = [i * out[i] for i in range(1, len(out))]
    return out or [mpq(0)]


@dataclass(frozen=True)
class PhiKernel:
    k: int
    normalizer: mpq
    poly_coeffs: tuple
    K_bound: mpq

    @property
    def degree(self) -> int:
        return 2 * self.k + 1

    def __call__(self, x):
        return phi_eval(self, x)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "normalizer": rational_str(self.normalizer),
            "coefficients": [rational_str(c) for c in self.poly_coeffs],
            "K_bound": rational_str(self.K_bound),
        }


_KERNELS: dict[int, PhiKernel] = {}


def _phi_coeffs(k: int) -> tuple[mpq, list[mpq]]:
    # t^k (1-t)^k = sum_i C(k,i) (-1)^i t^(k+i); integrate term by term
    normalizer = mpq(factorial(k) ** 2, factorial(2 * k + 1))
    coeffs = [mpq(0)] * (2 * k + 2)
    coeffs[0] = mpq(1)
    for i in range(k + 1):
        term = mpq((-1) ** i * comb(k, i), k + i + 1)
        coeffs[k + i + 1] -= term / normalizer
    return normalizer, coeffs


def make_kernel(k: int) -> PhiKernel:
    """Build (or fetch) the kernel flat to order ``k``."""
    if not isinstance(k, int) or k < 1:
        raise ParameterError("kernel order k must be a positive integer")
    cached = _KERNELS.get(k)
    if cached is not None:
        return cached
    normalizer, coeffs = _phi_coeffs(k)
    bound = _sup_abs_derivative(coeffs, k)
    kern = PhiKernel(k, normalizer, tuple(coeffs), bound)
    _KERNELS[k] = kern
    return kern


def phi_eval(kernel: PhiKernel, x) -> mpq:
    x = as_rational(x)
    if x < 0 or x > 1:
        raise DomainError("phi is defined on [0, 1] only")
    return poly_eval(kernel.poly_coeffs, x)


def phi_derivative(kernel: PhiKernel, j: int, x) -> mpq:
    if j < 1:
        raise ParameterError("derivative order must be >= 1")
    if j > kernel.degree:
        return mpq(0)
    x = as_rational(x)
    if x < 0 or x > 1:
        raise DomainError("phi is defined on [0, 1] only")
    return poly_eval(poly_deriv(kernel.poly_coeffs, j), x)


def _isolate_roots(coeffs):
    """Brackets ``[(lo, hi), ...]`` around the sign changes of a polynomial on [0, 1].

    An exact zero at a grid or bisection point is returned as ``(x, x)``.
    """
    degree = len(coeffs) - 1
    grid = 64 * max(degree, 1)
    # the grid always contains 1/2 so symmetric kernels hit their centre exactly
    pts = [mpq(i, 2 * grid) for i in range(2 * grid + 1)]
    vals = [poly_eval(coeffs, p) for p in pts]
    brackets = []
    for i in range(1, len(pts) - 1):
        if vals[i] == 0:
            brackets.append((pts[i], pts[i]))
    for i in range(len(pts) - 1):
        lo, hi = pts[i], pts[i + 1]
        vlo, vhi = vals[i], vals[i + 1]
        if vlo == 0 or vhi == 0 or (vlo > 0) == (vhi > 0):
            continue
        while hi - lo > ROOT_WIDTH:
            mid = (lo + hi) / 2
            vm = poly_eval(coeffs, mid)
            if vm == 0:
                lo = hi = mid
                break
            if (vm > 0) == (vlo > 0):
                lo, vlo = mid, vm
            else:
                hi = mid
        brackets.append((lo, hi))
    return brackets


def _sup_abs_derivative(coeffs, k: int) -> mpq:
    """Certified rational upper bound for max |phi^(k)| on [0, 1]."""
    g = poly_deriv(coeffs, k)
    gp = poly_deriv(g, 1)
    # |g'| <= sum |coeffs| on [0, 1]; only used to pad non-degenerate brackets
    lipschitz = sum(abs(c) for c in poly_deriv(g, 1))
    best = max(abs(poly_eval(g, mpq(0))), abs(poly_eval(g, mpq(1))))
    brackets = _isolate_roots(gp)
    if len(brackets) < len(gp) - 1:
        # the critical-point polynomial is a rescaled Legendre polynomial,
        # so all of its roots are simple and interior
        raise ArithmeticError("root isolation missed a critical point")
    for lo, hi in brackets:
        edge = max(abs(poly_eval(g, lo)), abs(poly_eval(g, hi)))
        best = max(best, edge + (hi - lo) * lipschitz)
    return best


def compute_K(kernel: PhiKernel) -> mpq:
    return kernel.K_bound
