"""Nested-rectangle layout.

Generation 1 is the unit square. Every generation-(n-1) rectangle holds
``s_n`` rows of ``r_n`` congruent generation-n rectangles of width ``c_n``
and height ``a_n``. Children are spaced horizontally by ``d_n`` in
traversal order (row by row, bottom to top) and rows are separated
vertically by ``b_n``. The first row sits at the bottom left of the parent
and the last at the top right.

x-coordinates are exact rationals; y-coordinates are :class:`BoundedReal`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from gmpy2 import mpq

from .errors import AddressError, DegenerateError, DomainError, ParameterError
from .numerics import (
    DEFAULT_BITS,
    MIN_BITS,
    ONE,
    ZERO,
    BoundedReal,
    as_rational,
    pow_rat,
    rational_str,
)

WITHIN_ROW = "within-row"
ROW_TRANSITION = "row-transition"

# Test hook: called on freshly computed metrics before they are cached.
# Fault-injection tests use it to corrupt b_n; leave as None otherwise.
METRICS_HOOK: Optional[Callable[["GenerationMetrics"], "GenerationMetrics"]] = None


def eps_upper_bound(r: int, s: int) -> mpq:
    return min(mpq(1, 2), mpq(1, r * s - 1))


def _check_level(k, r, s, eps, where=""):
    if not isinstance(r, int) or not isinstance(s, int) or r < 2 or s < 2:
        raise ParameterError(f"r and s must be integers >= 2{where}")
    bound = eps_upper_bound(r, s)
    if not (0 < eps < bound):
        raise ParameterError(
            f"eps must satisfy 0 < eps < min(1/2, 1/(rs-1)) = {rational_str(bound)}"
            f" for r={r}, s={s}{where}; got {rational_str(eps)}"
        )


@dataclass(frozen=True)
class ConstructionParams:
    """Construction parameters ``(k, r, s, eps)``.

    ``schedule`` optionally overrides ``(r, s, eps)`` generation by
    generation: ``schedule[i]`` governs generation ``i + 2``. Generations
    past the end of the schedule fall back to the constants.
    """

    k: int = 1
    r: int = 4
    s: int = 3
    eps: mpq = mpq(1, 22)
    schedule: tuple = ()
    precision_bits: int = DEFAULT_BITS
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ParameterError("k must be an integer >= 1")
        if self.precision_bits < MIN_BITS:
            raise ParameterError(f"precision_bits must be >= {MIN_BITS}")
        eps = as_rational(self.eps)
        object.__setattr__(self, "eps", eps)
        _check_level(self.k, self.r, self.s, eps)
        sched = []
        for i, entry in enumerate(self.schedule):
            rn, sn, en = entry
            en = as_rational(en)
            _check_level(self.k, rn, sn, en, where=f" (schedule entry for generation {i + 2})")
            sched.append((int(rn), int(sn), en))
        object.__setattr__(self, "schedule", tuple(sched))

    @property
    def is_constant(self) -> bool:
        return all(entry == (self.r, self.s, self.eps) for entry in self.schedule)

    def level(self, n: int) -> tuple[int, int, mpq]:
        """``(r_n, s_n, eps_n)`` for generation ``n >= 2``."""
        if n - 2 < len(self.schedule):
            return self.schedule[n - 2]
        return self.r, self.s, self.eps

    def with_bits(self, bits: int) -> "ConstructionParams":
        return ConstructionParams(self.k, self.r, self.s, self.eps, self.schedule, bits)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "r": self.r,
            "s": self.s,
            "eps": rational_str(self.eps),
            "schedule": [[rn, sn, rational_str(en)] for rn, sn, en in self.schedule],
            "precision_bits": self.precision_bits,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConstructionParams":
        return cls(
            k=int(obj["k"]),
            r=int(obj["r"]),
            s=int(obj["s"]),
            eps=as_rational(obj["eps"]),
            schedule=tuple((int(a), int(b), as_rational(e)) for a, b, e in obj.get("schedule", ())),
            precision_bits=int(obj.get("precision_bits", DEFAULT_BITS)),
        )


@dataclass(frozen=True)
class GenerationMetrics:
    n: int
    c: mpq
    d: Optional[mpq]
    a: BoundedReal
    b: Optional[BoundedReal]
    # derived spacing: step = c + d between child x-starts, pitch = a + b between rows
    step: Optional[mpq] = None
    pitch: Optional[BoundedReal] = None
    r: int = 1
    s: int = 1

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "c": rational_str(self.c),
            "d": None if self.d is None else rational_str(self.d),
            "a": self.a.to_json(),
            "b": None if self.b is None else self.b.to_json(),
        }


def _raw_metrics(params: ConstructionParams, n: int) -> GenerationMetrics:
    cache = params._cache
    key = ("metrics", n)
    hit = cache.get(key)
    if hit is not None:
        return hit
    bits = params.precision_bits
    if n == 1:
        out = GenerationMetrics(1, ONE, None, BoundedReal(ONE, ZERO, bits), None)
    else:
        prev = _raw_metrics(params, n - 1)
        rn, sn, en = params.level(n)
        c = (1 - en) * prev.c / (rn * sn)
        d = en * prev.c / (rn * sn - 1)
        a = pow_rat(d, params.k + en, bits)
        pitch = (prev.a - a) / (sn - 1)
        b = pitch - a
        out = GenerationMetrics(n, c, d, a, b, c + d, pitch, rn, sn)
    if METRICS_HOOK is not None:
        out = METRICS_HOOK(out)
    cache[key] = out
    return out


def metrics(params: ConstructionParams, n: int) -> GenerationMetrics:
    """Scale quadruple ``(c_n, d_n, a_n, b_n)`` for generation ``n``."""
    if not isinstance(n, int) or n < 1:
        raise ParameterError("generation index must be an integer >= 1")
    checked = params._cache.get("checked", 1)
    for g in range(checked + 1, n + 1):
        m = _raw_metrics(params, g)
        if not m.b.certainly_positive():
            raise DegenerateError(f"row gap b_{g} is not certainly positive ({m.b!r})")
        params._cache["checked"] = g
    return _raw_metrics(params, n)


def branching(params: ConstructionParams, n: int) -> tuple[int, int]:
    """``(r_n, s_n)`` used to split generation ``n - 1`` into generation ``n``."""
    rn, sn, _ = params.level(n)
    return rn, sn


@dataclass(frozen=True)
class Rect:
    x0: mpq
    width: mpq
    y0: BoundedReal
    height: BoundedReal
    address: tuple = ()

    @property
    def generation(self) -> int:
        return len(self.address) + 1

    @property
    def x1(self) -> mpq:
        return self.x0 + self.width

    @property
    def y1(self) -> BoundedReal:
        return self.y0 + self.height

    def to_json(self) -> dict:
        return {
            "address": [list(pair) for pair in self.address],
            "x0": rational_str(self.x0),
            "width": rational_str(self.width),
            "y0": self.y0.to_json(),
            "height": self.height.to_json(),
        }


@dataclass(frozen=True)
class GapSegment:
    x_start: mpq
    x_end: mpq
    y_start: BoundedReal
    y_end: BoundedReal
    generation: int
    kind: str
    parent: tuple = ()
    index: int = 0  # position among the parent's rs - 1 gaps

    @property
    def width(self) -> mpq:
        return self.x_end - self.x_start

    @property
    def rise(self) -> BoundedReal:
        return self.y_end - self.y_start

    def to_json(self) -> dict:
        return {
            "parent": [list(pair) for pair in self.parent],
            "index": self.index,
            "generation": self.generation,
            "kind": self.kind,
            "x_start": rational_str(self.x_start),
            "x_end": rational_str(self.x_end),
            "y_start": self.y_start.to_json(),
            "y_end": self.y_end.to_json(),
        }


def check_address(params: ConstructionParams, addr) -> tuple:
    addr = tuple((int(m), int(p)) for m, p in addr)
    for i, (m, p) in enumerate(addr):
        rn, sn = branching(params, i + 2)
        if not (1 <= m <= sn and 1 <= p <= rn):
            raise AddressError(
                f"address entry {i} = ({m}, {p}) outside rows 1..{sn}, columns 1..{rn}"
            )
    return addr


def rect_of(params: ConstructionParams, addr) -> Rect:
    addr = check_address(params, addr)
    bits = params.precision_bits
    x0 = ZERO
    y0 = BoundedReal(ZERO, ZERO, bits)
    metrics(params, len(addr) + 1)
    for i, (m, p) in enumerate(addr):
        g = _raw_metrics(params, i + 2)
        x0 = x0 + ((m - 1) * g.r + (p - 1)) * g.step
        if m > 1:
            y0 = y0 + g.pitch * (m - 1)
    last = _raw_metrics(params, len(addr) + 1)
    return Rect(x0, last.c, y0, last.a, addr)


def children_of(params: ConstructionParams, rect: Rect) -> list[Rect]:
    n = rect.generation + 1
    g = metrics(params, n)
    out = []
    for m in range(1, g.s + 1):
        y0 = rect.y0 + g.pitch * (m - 1) if m > 1 else rect.y0
        for p in range(1, g.r + 1):
            x0 = rect.x0 + ((m - 1) * g.r + (p - 1)) * g.step
            out.append(Rect(x0, g.c, y0, g.a, rect.address + ((m, p),)))
    return out


def iter_rects(params: ConstructionParams, n: int) -> Iterator[Rect]:
    """All generation-``n`` rectangles in left-to-right order."""
    if n < 1:
        raise ParameterError("generation index must be an integer >= 1")
    metrics(params, n)

    def walk(rect):
        if rect.generation == n:
            yield rect
            return
        for child in children_of(params, rect):
            yield from walk(child)

    yield from walk(rect_of(params, ()))


def gaps_of(params: ConstructionParams, addr) -> list[GapSegment]:
    """The ``r*s - 1`` gaps between consecutive children of ``addr``."""
    parent = rect_of(params, addr)
    return _gaps_of_rect(params, parent)


def _gaps_of_rect(params: ConstructionParams, parent: Rect) -> list[GapSegment]:
    n = parent.generation + 1
    g = metrics(params, n)
    rn, sn = g.r, g.s
    out = []
    for j in range(rn * sn - 1):
        m, p = divmod(j, rn)
        x_start = parent.x0 + j * g.step + g.c
        x_end = parent.x0 + (j + 1) * g.step
        row_y0 = parent.y0 + g.pitch * m if m else parent.y0
        if p < rn - 1:
            y_start = row_y0 + g.a
            y_end = row_y0
            kind = WITHIN_ROW
        else:
            y_start = row_y0 + g.a
            y_end = parent.y0 + g.pitch * (m + 1)
            kind = ROW_TRANSITION
        out.append(GapSegment(x_start, x_end, y_start, y_end, n, kind, parent.address, j))
    return out


@dataclass(frozen=True)
class Location:
    """Where an abscissa in [0, 1] falls.

    ``kind`` is ``"gap"`` (with ``gap`` set) or ``"unresolved"`` (the point
    lies in the x-interval of the rectangle at ``address`` and is a
    potential member of A).
    """

    kind: str
    address: tuple
    gap: Optional[GapSegment] = None

    @property
    def generation(self) -> int:
        if self.gap is not None:
            return self.gap.generation
        return len(self.address) + 1


def _descend(params: ConstructionParams, n: int, offset: mpq):
    """Child index and offset inside it for an offset within a parent of generation n-1.

    Returns ``(j, within, in_gap)``; when ``in_gap`` the point lies strictly
    inside the gap following child ``j``.
    """
    g = _raw_metrics(params, n)
    j = int(offset // g.step)
    last = g.r * g.s - 1
    if j > last:
        j = last
    within = offset - j * g.step
    return j, within, within > g.c


def locate(params: ConstructionParams, x, max_depth: int) -> Location:
    x = as_rational(x)
    if x < 0 or x > 1:
        raise DomainError("locate expects 0 <= x <= 1")
    if max_depth < 1:
        raise ParameterError("max_depth must be >= 1")
    metrics(params, max_depth)
    addr = ()
    x0 = ZERO
    for n in range(2, max_depth + 1):
        j, within, in_gap = _descend(params, n, x - x0)
        g = _raw_metrics(params, n)
        if in_gap:
            parent = rect_of(params, addr)
            return Location("gap", addr, _gaps_of_rect(params, parent)[j])
        m, p = divmod(j, g.r)
        addr = addr + ((m + 1, p + 1),)
        x0 = x0 + j * g.step
    return Location("unresolved", addr)


@dataclass
class ValidationReport:
    depth: int
    checks: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c["passed"]]

    @property
    def passed(self) -> bool:
        return not self.failures

    def add(self, name, n, passed, detail=""):
        self.checks.append({"check": name, "generation": n, "passed": bool(passed), "detail": detail})

    def to_json(self) -> dict:
        return {"depth": self.depth, "passed": self.passed, "checks": self.checks}


def validate(params: ConstructionParams, depth: int) -> ValidationReport:
    """Check the layout identities for every generation up to ``depth``."""
    if depth < 2:
        raise ParameterError("validation depth must be >= 2")
    rep = ValidationReport(depth)
    for n in range(2, depth + 1):
        try:
            prev = _raw_metrics(params, n - 1)
            g = _raw_metrics(params, n)
        except Exception as exc:  # report, never abort
            rep.add("metrics", n, False, f"{type(exc).__name__}: {exc}")
            break
        rs = g.r * g.s
        rep.add("width-telescoping", n, rs * g.c + (rs - 1) * g.d == prev.c)
        lhs = g.a * g.s + g.b * (g.s - 1)
        rep.add("height-telescoping", n, lhs.overlaps(prev.a),
                f"|lhs - a_(n-1)| <= {float(abs(lhs.value - prev.a.value)):.3g}")
        rep.add("row-gap-positive", n, g.b.certainly_positive(), repr(g.b))
        for parent_addr in _sample_parents(params, n):
            try:
                parent = rect_of(params, parent_addr)
                kids = children_of(params, parent)
            except Exception as exc:
                rep.add("children", n, False, f"{type(exc).__name__}: {exc}")
                continue
            tag = "parent " + ",".join(f"{m}{p}" for m, p in parent_addr) if parent_addr else "root"
            ok = all(a.x1 < b.x0 and b.x0 - a.x1 == g.d for a, b in zip(kids, kids[1:]))
            ok = ok and kids[0].x0 == parent.x0 and kids[-1].x1 == parent.x1
            rep.add("x-disjoint", n, ok, tag)
            rows = [kids[i * g.r:(i + 1) * g.r] for i in range(g.s)]
            same = all(rc.y0.value == row[0].y0.value and rc.y0.error == row[0].y0.error
                       for row in rows for rc in row)
            rep.add("row-y-identical", n, same, tag)
            apart = all(lo[0].y1.certainly_lt(hi[0].y0) for lo, hi in zip(rows, rows[1:]))
            corners = (kids[0].y0.overlaps(parent.y0) and kids[-1].y1.overlaps(parent.y1))
            rep.add("row-y-disjoint", n, apart and corners, tag)
    return rep


def _sample_parents(params, n):
    """First and last generation-(n-1) parents, plus one in the middle."""
    depth = n - 2
    first = tuple((1, 1) for _ in range(depth))
    last = tuple(branching(params, i + 2)[::-1] for i in range(depth))
    mid = tuple(((branching(params, i + 2)[1] + 1) // 2, (branching(params, i + 2)[0] + 1) // 2)
                for i in range(depth))
    seen = []
    for a in (first, mid, last):
        if a not in seen:
            seen.append(a)
    return seen


def geometry_dump(params: ConstructionParams, depth: int) -> dict:
    """JSON-ready inventory of metrics, rectangles and gaps up to ``depth``."""
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    metrics(params, depth)
    gens = []
    for n in range(1, depth + 1):
        rects = list(iter_rects(params, n))
        gaps = []
        if n >= 2:
            for parent in iter_rects(params, n - 1):
                gaps.extend(_gaps_of_rect(params, parent))
        gens.append({
            "generation": n,
            "rectangles": [rc.to_json() for rc in rects],
            "gaps": [gp.to_json() for gp in gaps],
        })
    return {
        "params": params.to_json(),
        "depth": depth,
        "metrics": [_raw_metrics(params, n).to_json() for n in range(1, depth + 1)],
        "generations": gens,
    }
