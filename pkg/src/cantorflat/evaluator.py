"""Evaluation of the constructed function on [-2, 2].

On [0, 1] the function follows the rectangle tree: inside a gap it is the
kernel curve joining the two adjacent corners, and at points of the Cantor
set it is the limit of the nested rectangles' y-intervals. Outside [0, 1]
it is continued by ``-(-x)**(k+1)`` on the left and ``1 + (x-1)**(k+1)``
on the right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional

from gmpy2 import mpq

from . import geometry
from .errors import DomainError, ParameterError
from .geometry import ROW_TRANSITION, WITHIN_ROW, ConstructionParams, GapSegment
from .kernel import make_kernel, poly_eval
from .numerics import ZERO, BoundedReal, _finish, as_rational

GAP = "gap"
CANTOR = "cantor"
OUTSIDE_LEFT = "outside-left"
OUTSIDE_RIGHT = "outside-right"

X_MIN = mpq(-2)
X_MAX = mpq(2)
# hard stop for the descent; a_n shrinks geometrically so tolerances this
# deep are far below any sensible request
MAX_GENERATION = 4096


@dataclass
class EvalResult:
    x: mpq
    value: BoundedReal
    depth_used: int
    classification: str
    # child indices j = (m-1)*r + (p-1) along the descent; see ``address``
    path: tuple = ()
    gap_index: Optional[int] = None
    gap_kind: Optional[str] = None
    params: Optional[ConstructionParams] = field(default=None, repr=False, compare=False)

    @property
    def address(self) -> tuple:
        """Address of the deepest rectangle containing x (the gap's parent for gaps)."""
        out = []
        for i, j in enumerate(self.path):
            m, p = divmod(j, geometry.branching(self.params, i + 2)[0])
            out.append((m + 1, p + 1))
        return tuple(out)

    @property
    def gap(self) -> Optional[GapSegment]:
        if self.classification != GAP:
            return None
        return geometry.gaps_of(self.params, self.address)[self.gap_index]

    def csv_row(self) -> list[str]:
        label = self.classification
        if label == GAP:
            label = f"gap:{self.depth_used}:{self.gap_kind}"
        return [
            f"{self.x.numerator}/{self.x.denominator}",
            self.value.decimal_str(),
            f"{float(self.value.error):.6e}",
            label,
            str(self.depth_used),
        ]


def _outside(params, x):
    bits = params.precision_bits
    e = params.k + 1
    if x < 0:
        return BoundedReal(-((-x) ** e), ZERO, bits), OUTSIDE_LEFT
    return BoundedReal(1 + (x - 1) ** e, ZERO, bits), OUTSIDE_RIGHT


def evaluate(params: ConstructionParams, x, tol) -> EvalResult:
    """f(x) with total error at most ``tol`` plus arithmetic error."""
    x = as_rational(x)
    tol = as_rational(tol)
    if tol <= 0:
        raise ParameterError("tolerance must be positive")
    if x < X_MIN or x > X_MAX:
        raise DomainError("f is defined on [-2, 2]")
    if x < 0 or x > 1:
        value, label = _outside(params, x)
        return EvalResult(x, value, 0, label, params=params)

    bits = params.precision_bits
    coeffs = make_kernel(params.k).poly_coeffs
    u = x  # offset of x inside the current rectangle
    ymid = ZERO
    yerr = ZERO
    path = []  # child indices j chosen so far
    n = 1
    c, a_v, a_e, a_hi = _fast_level(params, 1)[:4]
    while True:
        # corners of the current rectangle are exact points of the graph
        if not u:
            return EvalResult(x, _finish(ymid, yerr, bits), n, CANTOR, tuple(path), params=params)
        if u == c:
            return EvalResult(x, _finish(ymid + a_v, yerr + a_e, bits), n, CANTOR,
                              tuple(path), params=params)
        if a_hi < tol or n >= MAX_GENERATION:
            half = a_v / 2
            return EvalResult(x, _finish(ymid + half, yerr + half + a_e, bits),
                              n, CANTOR, tuple(path), params=params)
        c, a_v, a_e, a_hi, d, step, r, last, p_v, p_e, offsets, rows_v, rows_e = _fast_level(params, n + 1)
        j = int(u // step)
        if j > last:
            j = last
        if j:
            u = u - offsets[j]
        m, p = divmod(j, r)
        if m:
            ymid = ymid + rows_v[m]
            yerr = yerr + rows_e[m]
        if u > c:
            ph = poly_eval(coeffs, (u - c) / d)
            if p < r - 1:
                mid = ymid + a_v * ph
                err = yerr + a_e * ph
                kind = WITHIN_ROW
            else:
                mid = ymid + p_v * (1 - ph) + a_v * ph
                err = yerr + p_e * (1 - ph) + a_e * ph
                kind = ROW_TRANSITION
            return EvalResult(x, _finish(mid, err, bits), n + 1, GAP, tuple(path), j, kind, params)
        path.append(j)
        n += 1


def _fast_level(params: ConstructionParams, n: int) -> tuple:
    """Flat tuple of generation-n quantities for the evaluation loop."""
    key = ("fast", n)
    hit = params._cache.get(key)
    if hit is not None:
        return hit
    g = geometry.metrics(params, n)
    if n == 1:
        out = (g.c, g.a.value, g.a.error, g.a.value + g.a.error)
    else:
        # multiples of the child step and of the row pitch, indexed by j and m
        out = (g.c, g.a.value, g.a.error, g.a.value + g.a.error, g.d, g.step, g.r, g.r * g.s - 1,
               g.pitch.value, g.pitch.error,
               [j * g.step for j in range(g.r * g.s)],
               [m * g.pitch.value for m in range(g.s)],
               [m * g.pitch.error for m in range(g.s)])
    params._cache[key] = out
    return out


def evaluate_grid(params: ConstructionParams, x_lo, x_hi, count: int, tol) -> list[tuple[mpq, EvalResult]]:
    x_lo = as_rational(x_lo)
    x_hi = as_rational(x_hi)
    if not x_lo < x_hi:
        raise ParameterError("grid needs x_lo < x_hi")
    if count < 2:
        raise ParameterError("grid needs at least two points")
    step = (x_hi - x_lo) / (count - 1)
    xs = [x_lo + i * step for i in range(count)]
    return [(x, evaluate(params, x, tol)) for x in xs]


def kth_diff(params: ConstructionParams, x, h, order: int) -> BoundedReal:
    """Forward difference quotient ``Delta_h^order f(x) / h**order``."""
    x = as_rational(x)
    h = as_rational(h)
    if h <= 0:
        raise ParameterError("step h must be positive")
    if not (1 <= order <= params.k):
        raise ParameterError(f"order must lie in 1..k = 1..{params.k}")
    if x < X_MIN or x + order * h > X_MAX:
        raise DomainError("finite-difference stencil leaves [-2, 2]")
    tol = h ** (order + 2)
    acc = BoundedReal(ZERO, ZERO, params.precision_bits)
    for i in range(order + 1):
        coef = (-1) ** (order - i) * comb(order, i)
        acc = acc + evaluate(params, x + i * h, tol).value * coef
    return acc / (h ** order)


DEFAULT_H_SCHEDULE = tuple(mpq(1, 2**j) for j in range(4, 13))


@dataclass
class FlatnessReport:
    point: mpq
    address: tuple
    h_schedule: tuple
    # order -> list of |difference quotient| upper bounds, one per h
    magnitudes: dict

    def decays(self, order: int, ratio=mpq(1, 1)) -> bool:
        """Smallest-h magnitude is below ``ratio`` times the largest-h one and tends down."""
        mags = self.magnitudes[order]
        return mags[-1] < ratio * mags[0] and mags[-1] <= max(mags[len(mags) // 2:])

    def envelope_monotone(self, order: int) -> bool:
        """The tail maxima ``max_{h' <= h} |D(h')|`` never increase as h shrinks."""
        mags = self.magnitudes[order]
        tail = [max(mags[i:]) for i in range(len(mags))]
        return all(b <= a for a, b in zip(tail, tail[1:]))

    def to_json(self) -> dict:
        return {
            "point": f"{self.point.numerator}/{self.point.denominator}",
            "address": [list(pair) for pair in self.address],
            "h": [f"{h.numerator}/{h.denominator}" for h in self.h_schedule],
            "magnitudes": {str(o): [float(v) for v in vals] for o, vals in self.magnitudes.items()},
        }


def point_of_address(params: ConstructionParams, addr, anchor: str = "left") -> mpq:
    """A point of A under ``addr``: the left (or right) end of its rectangle."""
    rect = geometry.rect_of(params, addr)
    if anchor == "left":
        return rect.x0
    if anchor == "right":
        return rect.x1
    raise ParameterError("anchor must be 'left' or 'right'")


def flatness_probe(params: ConstructionParams, addr, orders=None, h_schedule=DEFAULT_H_SCHEDULE,
                   anchor: str = "left") -> FlatnessReport:
    orders = tuple(orders) if orders is not None else tuple(range(1, params.k + 1))
    h_schedule = tuple(as_rational(h) for h in h_schedule)
    x = point_of_address(params, addr, anchor)
    mags = {}
    for order in orders:
        vals = []
        for h in h_schedule:
            if x + order * h > X_MAX:
                raise DomainError("probe stencil leaves [-2, 2]")
            d = kth_diff(params, x, h, order)
            vals.append(abs(d.value) + d.error)
        mags[order] = vals
    return FlatnessReport(x, tuple(addr), h_schedule, mags)
