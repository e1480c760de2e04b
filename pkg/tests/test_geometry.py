import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorflat import geometry
from cantorflat.errors import AddressError, DegenerateError, ParameterError
from cantorflat.geometry import (ROW_TRANSITION, WITHIN_ROW, ConstructionParams, gaps_of, iter_rects, locate,
                                 metrics, rect_of, validate)

A2_ORACLE = mpmath.mpf("0.0032198036629387634201149781533788")


def test_first_generation(default_params):
    g = metrics(default_params, 1)
    assert g.c == 1 and g.a.value == 1 and g.a.error == 0


def test_second_generation(default_params):
    g = metrics(default_params, 2)
    assert g.c == mpq(7, 88)
    assert g.d == mpq(1, 242)
    assert abs(mpmath.mpf(float(g.a.value)) - A2_ORACLE) < 1e-15
    assert g.a.error < mpq(1, 2**120)


def test_root_and_corner_rects(default_params):
    root = rect_of(default_params, ())
    assert (root.x0, root.width, root.y0.value, root.height.value) == (0, 1, 0, 1)
    first = rect_of(default_params, [(1, 1)])
    assert first.x0 == 0 and first.y0.value == 0
    last = rect_of(default_params, [(3, 4)])
    assert last.x1 == 1 and last.y1.contains(1)
    deep = rect_of(default_params, [(3, 4)] * 5)
    assert deep.x1 == 1 and deep.y1.contains(1)


def test_gaps_under_root(default_params):
    gaps = gaps_of(default_params, ())
    assert len(gaps) == 11
    assert gaps[0].x_start == mpq(7, 88) and gaps[0].x_end == mpq(7, 88) + mpq(1, 242)
    assert gaps[0].kind == WITHIN_ROW
    g = metrics(default_params, 2)
    assert gaps[3].kind == ROW_TRANSITION
    assert gaps[3].rise.overlaps(g.b)
    assert [gp.kind for gp in gaps].count(ROW_TRANSITION) == 2
    for gp in gaps:
        assert gp.width == g.d
        if gp.kind == WITHIN_ROW:
            assert (gp.y_start - gp.y_end).overlaps(g.a)


def test_locate_examples(default_params):
    loc = locate(default_params, 0, 5)
    assert loc.kind == "unresolved" and loc.address == ((1, 1),) * 4
    loc = locate(default_params, mpq(7, 88) + mpq(1, 484), 5)
    assert loc.kind == "gap" and loc.gap.generation == 2
    loc = locate(default_params, 1, 5)
    assert loc.kind == "unresolved" and loc.address == ((3, 4),) * 4


def test_validate_default_depth_six(default_params):
    rep = validate(default_params, 6)
    assert rep.passed, rep.failures


@pytest.mark.parametrize("r,s,eps", [(4, 3, mpq(1, 11)), (2, 2, mpq(1, 2)), (2, 2, mpq(0)), (1, 3, mpq(1, 10))])
def test_invalid_params_rejected(r, s, eps):
    with pytest.raises(ParameterError, match="eps|r|s"):
        ConstructionParams(1, r, s, eps)


def test_small_valid():
    assert validate(ConstructionParams(1, 2, 2, mpq(1, 4)), 6).passed


def test_address_errors(default_params):
    with pytest.raises(AddressError):
        rect_of(default_params, [(4, 1)])
    with pytest.raises(AddressError):
        rect_of(default_params, [(1, 5)])


def test_rect_count_and_order(small_params):
    rects = list(iter_rects(small_params, 4))
    assert len(rects) == 4 ** 3
    assert all(a.x1 < b.x0 for a, b in zip(rects, rects[1:]))


def test_schedule_governs_generations():
    p = ConstructionParams(1, 4, 3, mpq(1, 22), schedule=((2, 2, mpq(1, 10)), (3, 2, mpq(1, 20))))
    assert geometry.branching(p, 2) == (2, 2)
    assert geometry.branching(p, 3) == (3, 2)
    assert geometry.branching(p, 4) == (4, 3)
    assert len(gaps_of(p, ())) == 3
    assert validate(p, 5).passed
    assert not p.is_constant


def test_fault_hook_makes_metrics_degenerate():
    def hook(m):
        if m.n >= 2:
            return geometry.GenerationMetrics(m.n, m.c, m.d, m.a, -m.b, m.step, m.a - m.b, m.r, m.s)
        return m
    geometry.METRICS_HOOK = hook
    p = ConstructionParams(1, 4, 3, mpq(1, 22))
    with pytest.raises(DegenerateError):
        metrics(p, 3)
    assert not validate(p, 3).passed


def test_params_json_round_trip():
    p = ConstructionParams(2, 5, 2, mpq(1, 100), schedule=((2, 2, mpq(1, 4)),))
    assert ConstructionParams.from_json(p.to_json()) == p


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(2, 6), st.integers(2, 5), st.integers(3, 400))
def test_telescoping_property(k, r, s, q):
    eps = mpq(1, q)
    if not eps < min(mpq(1, 2), mpq(1, r * s - 1)):
        return
    p = ConstructionParams(k, r, s, eps, precision_bits=96)
    for n in range(2, 6):
        g, prev = metrics(p, n), metrics(p, n - 1)
        assert r * s * g.c + (r * s - 1) * g.d == prev.c
        assert (g.a * s + g.b * (s - 1)).overlaps(prev.a)
        assert g.b.certainly_positive()


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=0, max_value=1))
def test_locate_is_consistent(x):
    p = ConstructionParams(1, 4, 3, mpq(1, 22))
    x = mpq(x)
    loc = locate(p, x, 6)
    if loc.kind == "gap":
        assert loc.gap.x_start < x < loc.gap.x_end
    else:
        rc = rect_of(p, loc.address)
        assert rc.x0 <= x <= rc.x1
