"""The Cantor sets A (critical set), D (critical values) and the level sets A_y.

Covers are the natural ones coming from the rectangle tree: A by the
x-projections of generation-n rectangles, D by their y-projections, and
A_y by the x-projections of rectangles whose row index agrees with the
row address of y at every level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from gmpy2 import mpq

from . import geometry
from .errors import AddressError, ParameterError, UnsupportedError
from .geometry import ConstructionParams, branching, metrics
from .numerics import ZERO, BoundedReal, as_rational, ln, log_ratio, rational_str

TARGET_A = "A"
TARGET_D = "D"
TARGET_LEVEL = "level-set"
TARGET_LEVEL_TIGHT = "level-set-tight"

YES, NO, UNRESOLVED = "yes", "no", "unresolved"


def _endpoint_json(e):
    if isinstance(e, BoundedReal):
        return e.to_json()
    return rational_str(e)


@dataclass
class CoverSet:
    generation: int
    intervals: list  # sorted (lo, hi) pairs, mpq or BoundedReal endpoints
    target: str
    row_address: Optional[tuple] = None

    def __len__(self):
        return len(self.intervals)

    def lengths(self) -> list:
        return [hi - lo for lo, hi in self.intervals]

    def to_json(self) -> dict:
        out = {
            "target": self.target,
            "generation": self.generation,
            "count": len(self.intervals),
            "intervals": [[_endpoint_json(lo), _endpoint_json(hi)] for lo, hi in self.intervals],
        }
        if self.row_address is not None:
            out["row_address"] = list(self.row_address)
        return out


def lam(params: ConstructionParams) -> mpq:
    """The level-set shrink ratio (r-1)/(rs-1); independent of eps."""
    return mpq(params.r - 1, params.r * params.s - 1)


def cover_A(params: ConstructionParams, n: int) -> CoverSet:
    if n < 1:
        raise ParameterError("generation must be >= 1")
    g = metrics(params, n)
    xs = [ZERO]
    for level in range(2, n + 1):
        lv = metrics(params, level)
        offsets = [j * lv.step for j in range(lv.r * lv.s)]
        xs = [x + o for x in xs for o in offsets]
    return CoverSet(n, [(x, x + g.c) for x in xs], TARGET_A)


def cover_D(params: ConstructionParams, n: int) -> CoverSet:
    if n < 1:
        raise ParameterError("generation must be >= 1")
    g = metrics(params, n)
    bits = params.precision_bits
    ys = [BoundedReal(ZERO, ZERO, bits)]
    for level in range(2, n + 1):
        lv = metrics(params, level)
        offsets = [lv.pitch * m for m in range(lv.s)]
        ys = [y + o if m else y for y in ys for m, o in enumerate(offsets)]
    return CoverSet(n, [(y, y + g.a) for y in ys], TARGET_D)


def _check_rows(params, row_addr):
    rows = tuple(int(m) for m in row_addr)
    for i, m in enumerate(rows):
        sn = branching(params, i + 2)[1]
        if not 1 <= m <= sn:
            raise AddressError(f"row address entry {i} = {m} outside 1..{sn}")
    return rows


def cover_level_set(params: ConstructionParams, row_addr: Sequence[int], tight: bool = False,
                    generation: Optional[int] = None) -> CoverSet:
    """Cover of A_y for the y of D whose row indices start with ``row_addr``.

    The raw generation-n cover uses the first ``n - 1`` row indices and has
    ``r**(n-1)`` intervals of length ``c_n``. The tight cover shrinks each
    to length ``lambda * c_n`` starting at ``inf(A_y & T1)``, where rows not
    listed in ``row_addr`` are taken to be the bottom row.
    """
    rows = _check_rows(params, row_addr)
    n = len(rows) + 1 if generation is None else int(generation)
    if n < 1 or n - 1 > len(rows):
        raise ParameterError(f"generation {n} needs at least {n - 1} row indices")
    g = metrics(params, n)
    xs = [ZERO]
    for level in range(2, n + 1):
        lv = metrics(params, level)
        base = (rows[level - 2] - 1) * lv.r
        offsets = [(base + p) * lv.step for p in range(lv.r)]
        xs = [x + o for x in xs for o in offsets]
    if not tight:
        return CoverSet(n, [(x, x + g.c) for x in xs], TARGET_LEVEL, rows)
    if not params.is_constant:
        raise UnsupportedError("tight level-set covers need a constant schedule")
    shift = ZERO
    for level in range(n + 1, len(rows) + 2):
        lv = metrics(params, level)
        shift += (rows[level - 2] - 1) * lv.r * lv.step
    width = lam(params) * g.c
    return CoverSet(n, [(x + shift, x + shift + width) for x in xs], TARGET_LEVEL_TIGHT, rows)


@dataclass(frozen=True)
class YInterval:
    y0: BoundedReal
    height: BoundedReal
    generation: int

    @property
    def y1(self) -> BoundedReal:
        return self.y0 + self.height


def point_of_row_address(params: ConstructionParams, row_addr, depth: int) -> YInterval:
    """Depth-``depth`` interval of the nest converging to the y in D with this address."""
    rows = _check_rows(params, row_addr)
    if depth < 1 or depth - 1 > len(rows):
        raise ParameterError(f"depth {depth} needs at least {depth - 1} row indices")
    bits = params.precision_bits
    y0 = BoundedReal(ZERO, ZERO, bits)
    for level in range(2, depth + 1):
        m = rows[level - 2]
        if m > 1:
            y0 = y0 + metrics(params, level).pitch * (m - 1)
    return YInterval(y0, metrics(params, depth).a, depth)


def membership(params: ConstructionParams, point, target: str, depth: int) -> str:
    """Decide membership of a point in A or D as far as ``depth`` generations allow.

    Rationals get ``"no"`` when they provably sit in a gap and
    ``"unresolved"`` otherwise. A rectangle address (for A) or row address
    (for D) names a point of the set itself and gets ``"yes"``.
    """
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    if isinstance(point, (tuple, list)):
        if target == TARGET_A:
            geometry.check_address(params, point)
        elif target == TARGET_D:
            _check_rows(params, point)
        else:
            raise ParameterError(f"unknown target {target!r}")
        return YES
    q = as_rational(point)
    if q < 0 or q > 1:
        return NO
    if target == TARGET_A:
        loc = geometry.locate(params, q, depth)
        return NO if loc.kind == "gap" else UNRESOLVED
    if target != TARGET_D:
        raise ParameterError(f"unknown target {target!r}")
    bits = params.precision_bits
    y0 = BoundedReal(ZERO, ZERO, bits)
    for level in range(2, depth + 1):
        lv = metrics(params, level)
        nxt = None
        for m in range(lv.s):
            bottom = y0 + lv.pitch * m if m else y0
            top = bottom + lv.a
            if bottom.hi <= q <= top.lo:
                nxt = bottom
                break
            if m < lv.s - 1:
                following = y0 + lv.pitch * (m + 1)
                if top.hi < q < following.lo:
                    return NO
        if nxt is None:
            return UNRESOLVED
        y0 = nxt
    return UNRESOLVED


@dataclass
class DimensionReport:
    params: ConstructionParams
    alpha: BoundedReal
    beta: BoundedReal
    lam: mpq
    dim_A: BoundedReal
    boxcount_alpha: BoundedReal
    boxcount_beta: BoundedReal
    upper_bound: BoundedReal  # (1 - alpha) / k
    margin: BoundedReal  # upper_bound - beta
    alpha_limit: BoundedReal  # alpha as eps -> 0
    beta_limit: BoundedReal  # beta as eps -> 0, equals (1 - alpha_limit) / k
    boxcount_range: tuple = (3, 8)
    provenance: dict = field(default_factory=lambda: {
        "alpha": "closed form",
        "beta": "closed form",
        "lambda": "closed form",
        "dim_A": "derived by the same cover-counting argument; not a stated result",
        "boxcount": "consecutive-scale slopes of the natural covers",
    })

    @property
    def upper_bound_check(self) -> bool:
        return self.margin.certainly_positive()

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "alpha": self.alpha.to_json(),
            "beta": self.beta.to_json(),
            "lambda": rational_str(self.lam),
            "dim_A": self.dim_A.to_json(),
            "boxcount_alpha": self.boxcount_alpha.to_json(),
            "boxcount_beta": self.boxcount_beta.to_json(),
            "boxcount_generations": list(self.boxcount_range),
            "upper_bound": self.upper_bound.to_json(),
            "upper_bound_check": {"passed": self.upper_bound_check, "margin": self.margin.to_json()},
            "alpha_limit": self.alpha_limit.to_json(),
            "beta_limit": self.beta_limit.to_json(),
            "provenance": self.provenance,
        }


def _require_constant(params):
    if not params.is_constant:
        raise UnsupportedError("closed-form dimensions are only defined for a constant schedule")


def closed_form_dimensions(params: ConstructionParams, n_lo: int = 3, n_hi: int = 8) -> DimensionReport:
    _require_constant(params)
    bits = params.precision_bits
    k, r, s = params.k, params.r, params.s
    ratio = mpq(r * s) / (1 - params.eps)
    alpha = log_ratio(r, ratio, bits)
    beta = log_ratio(s, ratio, bits) / (k + params.eps)
    dim_a = log_ratio(r * s, ratio, bits)
    upper = (1 - alpha) / k
    alpha_lim = log_ratio(r, r * s, bits)
    beta_lim = log_ratio(s, r * s, bits) / k
    return DimensionReport(
        params=params,
        alpha=alpha,
        beta=beta,
        lam=lam(params),
        dim_A=dim_a,
        boxcount_alpha=estimate_dimension(params, TARGET_LEVEL, n_lo, n_hi),
        boxcount_beta=estimate_dimension(params, TARGET_D, n_lo, n_hi),
        upper_bound=upper,
        margin=upper - beta,
        alpha_limit=alpha_lim,
        beta_limit=beta_lim,
        boxcount_range=(n_lo, n_hi),
    )


def box_count(cover: CoverSet, scale) -> int:
    """Number of half-open grid boxes ``[j*scale, (j+1)*scale)`` meeting the cover.

    Intervals are treated as half-open too, so a single interval of length
    L starting on a grid line meets exactly ``ceil(L / scale)`` boxes.
    """
    scale = as_rational(scale)
    if scale <= 0:
        raise ParameterError("scale must be positive")
    ranges = []
    for lo, hi in cover.intervals:
        lo = lo.value if isinstance(lo, BoundedReal) else lo
        hi = hi.value if isinstance(hi, BoundedReal) else hi
        first = int(lo // scale)
        if hi > lo:
            last = -int((-hi) // scale) - 1  # ceil(hi / scale) - 1
        else:
            last = first
        ranges.append((first, max(first, last)))
    ranges.sort()
    total = 0
    cur_lo = cur_hi = None
    for a, b in ranges:
        if cur_hi is None or a > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo + 1
            cur_lo, cur_hi = a, b
        else:
            cur_hi = max(cur_hi, b)
    if cur_hi is not None:
        total += cur_hi - cur_lo + 1
    return total


def natural_count(params: ConstructionParams, target: str, n: int) -> int:
    """Number of intervals in the generation-n natural cover of ``target``."""
    count = 1
    for level in range(2, n + 1):
        rn, sn = branching(params, level)
        count *= {TARGET_A: rn * sn, TARGET_D: sn, TARGET_LEVEL: rn}[target]
    return count


def _log_length(params: ConstructionParams, target: str, n: int, bits: int) -> BoundedReal:
    g = metrics(params, n)
    if target == TARGET_D:
        return ln(g.a, bits)
    if target == TARGET_LEVEL and params.is_constant:
        return ln(lam(params) * g.c, bits)
    return ln(g.c, bits)


def _check_target(target):
    if target not in (TARGET_A, TARGET_D, TARGET_LEVEL):
        raise ParameterError(f"unknown target {target!r}; expected A, D or level-set")


def consecutive_slopes(params: ConstructionParams, target: str, n_lo: int, n_hi: int,
                       bits: Optional[int] = None) -> list[BoundedReal]:
    """``log(N_{n+1}/N_n) / log(len_n/len_{n+1})`` for n = n_lo .. n_hi-1."""
    _check_target(target)
    if not (2 <= n_lo < n_hi):
        raise ParameterError("need 2 <= n_lo < n_hi")
    bits = bits or params.precision_bits
    logs = [_log_length(params, target, n, bits) for n in range(n_lo, n_hi + 1)]
    out = []
    for i, n in enumerate(range(n_lo, n_hi)):
        ratio = mpq(natural_count(params, target, n + 1), natural_count(params, target, n))
        out.append(ln(ratio, bits) / (logs[i] - logs[i + 1]))
    return out


def estimate_dimension(params: ConstructionParams, target: str, n_lo: int, n_hi: int) -> BoundedReal:
    """Box-counting slope of the natural covers between generations n_lo and n_hi."""
    _check_target(target)
    if not (2 <= n_lo < n_hi):
        raise ParameterError("need 2 <= n_lo < n_hi")
    bits = params.precision_bits
    ratio = mpq(natural_count(params, target, n_hi), natural_count(params, target, n_lo))
    return ln(ratio, bits) / (_log_length(params, target, n_lo, bits) - _log_length(params, target, n_hi, bits))


def least_squares_dimension(params: ConstructionParams, target: str, n_lo: int, n_hi: int) -> float:
    """Least-squares slope of log N against -log(length); meant for scheduled constructions."""
    _check_target(target)
    if not (2 <= n_lo < n_hi):
        raise ParameterError("need 2 <= n_lo < n_hi")
    bits = params.precision_bits
    xs = [-float(_log_length(params, target, n, bits).value) for n in range(n_lo, n_hi + 1)]
    ys = [math.log(natural_count(params, target, n)) for n in range(n_lo, n_hi + 1)]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / sxx


def extreme_limits(k: int, sizes: Sequence[int], bits: int = 128) -> list[dict]:
    """Eps -> 0 limits at the two extremes of the parameter range.

    With r = 2 and growing s the value-set dimension tends to 1/k; with
    s = 2 and growing r the level-set dimension tends to 1.
    """
    out = []
    for m in sizes:
        out.append({
            "size": m,
            "beta_limit_r2": log_ratio(m, 2 * m, bits) / k,
            "alpha_limit_s2": log_ratio(m, 2 * m, bits),
        })
    return out
