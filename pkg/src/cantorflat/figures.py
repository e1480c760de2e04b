"""Static SVG figures of the rectangle layout and of single links.

Drawing coordinates live in a group whose transform flips the y-axis, so
every ``x``/``y`` attribute inside it is in mathematical orientation (origin
bottom left) on the unit square.
"""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

from gmpy2 import mpq

from . import geometry
from .errors import ParameterError
from .evaluator import evaluate
from .geometry import ROW_TRANSITION, WITHIN_ROW, ConstructionParams
from .kernel import make_kernel, poly_eval

SIZE = 800
MARGIN = 20
# vertical gap / rectangle height ratio of the exaggerated display layout
DISPLAY_GAP = 0.6
LINK_SAMPLES = 64


def _fmt(v) -> str:
    return format(float(v), ".9g")


def _addr_attr(addr) -> str:
    return ".".join(f"{m}{p}" if m < 10 and p < 10 else f"{m}-{p}" for m, p in addr) or "root"


class _Layout:
    """Display coordinates for rectangles: true scale or exaggerated heights."""

    def __init__(self, params: ConstructionParams, exaggerate: bool):
        self.params = params
        self.exaggerate = exaggerate

    def level(self, n):
        g = geometry.metrics(self.params, n)
        if not self.exaggerate:
            return float(g.a.value), float(g.pitch.value)
        a = 1.0
        for lv in range(2, n + 1):
            sn = geometry.branching(self.params, lv)[1]
            a = a / (sn + (sn - 1) * DISPLAY_GAP)
        return a, a * (1 + DISPLAY_GAP)

    def rect(self, addr):
        y = 0.0
        for i, (m, _) in enumerate(addr):
            _, pitch = self.level(i + 2)
            y += (m - 1) * pitch
        rect = geometry.rect_of(self.params, addr)
        height = self.level(len(addr) + 1)[0] if addr else 1.0
        return float(rect.x0), y, float(rect.width), height


def _svg_open(width, height, title):
    inner_w = width - 2 * MARGIN
    inner_h = height - 2 * MARGIN
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{title}</title>",
        f'<g id="plot" transform="matrix({inner_w} 0 0 {-inner_h} {MARGIN} {height - MARGIN})">',
    ]


def _polyline(points, cls, extra=""):
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return (f'<polyline class="{cls}" points="{pts}" fill="none" stroke="black" '
            f'stroke-width="1.5" vector-effect="non-scaling-stroke"{extra}/>')


def render_rectangles(params: ConstructionParams, depth: int, exaggerate: bool = True) -> str:
    """Rectangles of generations 2..depth plus the graph on every gap up to depth."""
    if depth < 2:
        raise ParameterError("rectangle figures need depth >= 2")
    geometry.metrics(params, depth)
    lay = _Layout(params, exaggerate)
    kern = make_kernel(params.k).poly_coeffs
    out = _svg_open(SIZE, SIZE, f"generations 2..{depth}, r={params.r}, s={params.s}")
    out.append('<path class="frame" d="M0 0 H1 V1 H0 Z" fill="none" stroke="black" '
               'stroke-width="1" vector-effect="non-scaling-stroke"/>')
    for n in range(2, depth + 1):
        for rect in geometry.iter_rects(params, n):
            x, y, w, h = lay.rect(rect.address)
            out.append(
                f'<rect class="gen-{n}" data-generation="{n}" data-address={quoteattr(_addr_attr(rect.address))} '
                f'x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
                f'fill="none" stroke="gray" stroke-width="1" vector-effect="non-scaling-stroke"/>'
            )
    for n in range(2, depth + 1):
        a_disp, pitch_disp = lay.level(n)
        for parent in geometry.iter_rects(params, n - 1):
            px, py, _, _ = lay.rect(parent.address)
            for gap in geometry._gaps_of_rect(params, parent):
                m = gap.index // geometry.branching(params, n)[0]
                row_y = py + m * pitch_disp
                y_start = row_y + a_disp
                y_end = row_y if gap.kind == WITHIN_ROW else py + (m + 1) * pitch_disp
                x0, x1 = gap.x_start, gap.x_end
                pts = []
                for i in range(LINK_SAMPLES + 1):
                    t = mpq(i, LINK_SAMPLES)
                    ph = float(poly_eval(kern, t))
                    pts.append((x0 + (x1 - x0) * t, y_end + (y_start - y_end) * ph))
                out.append(_polyline(pts, f"link gen-{n}",
                                     f' data-kind="{gap.kind}" data-generation="{n}"'))
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def parse_gap_selector(text: str) -> tuple[tuple, int]:
    """``"11.23:4"`` -> parent address ((1,1),(2,3)) and gap index 4; ``":0"`` is the root."""
    try:
        addr_part, idx_part = text.split(":")
        index = int(idx_part)
        addr = []
        for item in filter(None, addr_part.split(".")):
            if "-" in item:
                m, p = item.split("-")
            else:
                m, p = item[0], item[1:]
            addr.append((int(m), int(p)))
    except ValueError as exc:
        raise ParameterError(f"malformed gap selector {text!r}; expected e.g. '11.23:4' or ':0'") from exc
    return tuple(addr), index


def default_gap(params: ConstructionParams, kind: str) -> tuple[tuple, int]:
    if kind == WITHIN_ROW:
        return (), 0
    if kind == ROW_TRANSITION:
        return (), geometry.branching(params, 2)[0] - 1
    raise ParameterError(f"unknown link kind {kind!r}")


def render_link(params: ConstructionParams, parent, index: int) -> str:
    """One link between two consecutive rectangles, zoomed to fit (true f values)."""
    gaps = geometry.gaps_of(params, parent)
    if not 0 <= index < len(gaps):
        raise ParameterError(f"gap index must lie in 0..{len(gaps) - 1}")
    gap = gaps[index]
    prect = geometry.rect_of(params, parent)
    kids = geometry.children_of(params, prect)
    left, right = kids[index], kids[index + 1]
    xs = [left.x0, right.x1]
    ys = [left.y0.value, left.y1.value, right.y0.value, right.y1.value]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)

    def nx(x):
        return (x - xmin) / (xmax - xmin)

    def ny(y):
        return (y - ymin) / (ymax - ymin)

    out = _svg_open(SIZE, SIZE // 2, f"{gap.kind} link, generation {gap.generation}")
    for cls, rc in (("link-rect left", left), ("link-rect right", right)):
        out.append(
            f'<rect class="{cls}" data-address={quoteattr(_addr_attr(rc.address))} '
            f'x="{_fmt(nx(rc.x0))}" y="{_fmt(ny(rc.y0.value))}" width="{_fmt(rc.width / (xmax - xmin))}" '
            f'height="{_fmt(rc.height.value / (ymax - ymin))}" fill="none" stroke="gray" '
            f'stroke-width="1" vector-effect="non-scaling-stroke"/>'
        )
    tol = gap.width * mpq(1, 10**6)
    pts = []
    for i in range(LINK_SAMPLES + 1):
        x = gap.x_start + gap.width * mpq(i, LINK_SAMPLES)
        y = evaluate(params, x, tol).value.value
        pts.append((nx(x), ny(y)))
    out.append(_polyline(pts, "link", f' data-kind="{gap.kind}" data-generation="{gap.generation}"'))
    for cls, (x, y) in (("corner start", (gap.x_start, gap.y_start.value)),
                        ("corner end", (gap.x_end, gap.y_end.value))):
        out.append(f'<circle class="{cls}" cx="{_fmt(nx(x))}" cy="{_fmt(ny(y))}" r="0.006" fill="black"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
