"""Invariant suite run by ``cantorflat verify``.

Every check is isolated: an exception inside one check marks that check as
failed and the suite moves on. Closed-form checks are skipped for scheduled
parameters.
"""

from __future__ import annotations

import random
from typing import Optional

from gmpy2 import mpq

from . import cantor, geometry
from .evaluator import evaluate
from .geometry import ConstructionParams
from .kernel import make_kernel, phi_derivative, poly_deriv, poly_eval

PASS = "pass"
FAIL = "fail"
SKIP = "skip"


class _Suite:
    def __init__(self):
        self.checks = []

    def run(self, name, fn, *args):
        try:
            out = fn(*args)
        except Exception as exc:
            self.checks.append({"name": name, "status": FAIL, "detail": f"{type(exc).__name__}: {exc}"})
            return
        if out is None:
            self.checks.append({"name": name, "status": SKIP, "detail": "needs a constant schedule"})
            return
        ok, detail = out
        self.checks.append({"name": name, "status": PASS if ok else FAIL, "detail": detail})


def _geometry(params, depth):
    rep = geometry.validate(params, max(depth, 2))
    bad = [f"{c['check']}@{c['generation']}" for c in rep.failures]
    return rep.passed, f"{len(rep.checks)} checks" + (f"; failed: {', '.join(bad[:5])}" if bad else "")


def _kernel_flat(params, depth):
    kern = make_kernel(params.k)
    ok = all(phi_derivative(kern, j, x) == 0 for j in range(1, params.k + 1) for x in (0, 1))
    ok = ok and poly_eval(kern.poly_coeffs, 0) == 1 and poly_eval(kern.poly_coeffs, 1) == 0
    # the certified sup must dominate the k-th derivative at a few sample points
    dk = poly_deriv(kern.poly_coeffs, params.k)
    ok = ok and all(abs(poly_eval(dk, mpq(i, 16))) <= kern.K_bound for i in range(17))
    return ok, f"K = {float(kern.K_bound):.12g}"


def _endpoints(params, depth):
    n_max = min(depth, 3)
    count = 0
    for n in range(2, n_max + 1):
        for parent in geometry.iter_rects(params, n - 1):
            for gap in geometry._gaps_of_rect(params, parent):
                tol = geometry.metrics(params, n + 2).a.value
                v0 = evaluate(params, gap.x_start, tol).value
                v1 = evaluate(params, gap.x_end, tol).value
                if not (v0.overlaps(gap.y_start) and v1.overlaps(gap.y_end)):
                    return False, f"gap {gap.index} under {parent.address} misses its corners"
                count += 1
    return True, f"{count} gaps up to generation {n_max}"


def _rect_containment(params, depth, seed):
    rng = random.Random(seed)
    n = min(depth, 5)
    tol = geometry.metrics(params, n + 1).a.value
    for _ in range(100):
        addr = tuple((rng.randint(1, geometry.branching(params, i + 2)[1]),
                      rng.randint(1, geometry.branching(params, i + 2)[0])) for i in range(n - 1))
        rect = geometry.rect_of(params, addr)
        x = rect.x0 + rect.width * mpq(rng.randint(0, 1000), 1000)
        v = evaluate(params, x, tol).value
        if v.certainly_lt(rect.y0) or v.certainly_gt(rect.y1):
            return False, f"f({x}) escapes rectangle {addr}"
    return True, f"100 samples at generation {n}"


def _extensions(params, depth):
    xs = [mpq(-2) + mpq(i, 8) for i in range(17)] + [1 + mpq(i, 8) for i in range(9)]
    vals = [evaluate(params, x, mpq(1, 2**20)).value.value for x in xs[:17]]
    right = [evaluate(params, x, mpq(1, 2**20)).value.value for x in xs[17:]]
    ok = all(a < b for a, b in zip(vals, vals[1:])) and all(a < b for a, b in zip(right, right[1:]))
    ok = ok and vals[-1] == 0 and right[0] == 1
    return ok, "monotone continuation on [-2, 0] and [1, 2]"


def _lambda(params, depth):
    if not params.is_constant:
        return None
    lam = cantor.lam(params)
    for n in range(2, depth + 1):
        g = geometry.metrics(params, n)
        prev = geometry.metrics(params, n - 1)
        if (params.r - 1) * (g.c + g.d) + lam * g.c != lam * prev.c:
            return False, f"identity fails at generation {n}"
    return True, f"lambda = {lam}"


def _nesting(params, depth):
    n_max = min(depth, 4)
    for n in range(2, n_max + 1):
        outer = cantor.cover_A(params, n - 1).intervals
        inner = cantor.cover_A(params, n).intervals
        per = len(inner) // len(outer)
        for i, (lo, hi) in enumerate(inner):
            plo, phi = outer[i // per]
            if lo < plo or hi > phi:
                return False, f"A cover of generation {n} leaves its parent"
        outer_d = cantor.cover_D(params, n - 1).intervals
        inner_d = cantor.cover_D(params, n).intervals
        per = len(inner_d) // len(outer_d)
        for i, (lo, hi) in enumerate(inner_d):
            plo, phi = outer_d[i // per]
            if lo.certainly_lt(plo) or hi.certainly_gt(phi):
                return False, f"D cover of generation {n} leaves its parent"
    return True, f"covers nested up to generation {n_max}"


def _level_containment(params, depth, seed):
    rng = random.Random(seed + 1)
    n = min(depth, 4)
    rows = tuple(rng.randint(1, geometry.branching(params, i + 2)[1]) for i in range(n - 1))
    cover = cantor.cover_level_set(params, rows)
    yint = cantor.point_of_row_address(params, rows, n)
    tol = geometry.metrics(params, n + 1).a.value
    for lo, hi in cover.intervals:
        for _ in range(5):
            x = lo + (hi - lo) * mpq(rng.randint(0, 997), 997)
            v = evaluate(params, x, tol).value
            if v.certainly_lt(yint.y0) or v.certainly_gt(yint.y1):
                return False, f"f({x}) leaves the row band of {rows}"
    return True, f"{5 * len(cover)} samples, rows {list(rows)}"


def _closed_forms(params, depth):
    if not params.is_constant:
        return None
    rep = cantor.closed_form_dimensions(params, 3, max(depth, 4))
    tol = mpq(1, 10**10)
    ok = (abs(rep.boxcount_alpha.value - rep.alpha.value) < tol
          and abs(rep.boxcount_beta.value - rep.beta.value) < tol)
    return ok, f"alpha = {rep.alpha.decimal_str()[:14]}, beta = {rep.beta.decimal_str()[:14]}"


def _upper_bound(params, depth):
    if not params.is_constant:
        return None
    rep = cantor.closed_form_dimensions(params, 3, 4)
    return rep.upper_bound_check, f"margin = {float(rep.margin.value):.6g}"


def _round_trip(params, depth, geometry_json):
    other = ConstructionParams.from_json(geometry_json["params"])
    d = int(geometry_json["depth"])
    fresh = geometry.geometry_dump(other, d)
    ok = fresh["metrics"] == geometry_json["metrics"] and fresh["generations"] == geometry_json["generations"]
    return ok, f"depth {d} inventory {'matches' if ok else 'differs'}"


def run_suite(params: ConstructionParams, depth: int, seed: int = 0,
              geometry_json: Optional[dict] = None) -> dict:
    """Run every invariant check and return a JSON-ready report."""
    suite = _Suite()
    suite.run("geometry", _geometry, params, depth)
    suite.run("kernel-flatness", _kernel_flat, params, depth)
    suite.run("gap-endpoints", _endpoints, params, depth)
    suite.run("rectangle-containment", _rect_containment, params, depth, seed)
    suite.run("extensions", _extensions, params, depth)
    suite.run("lambda-identity", _lambda, params, depth)
    suite.run("cover-nesting", _nesting, params, depth)
    suite.run("level-set-containment", _level_containment, params, depth, seed)
    suite.run("closed-form-dimensions", _closed_forms, params, depth)
    suite.run("upper-bound", _upper_bound, params, depth)
    if geometry_json is not None:
        suite.run("geometry-round-trip", _round_trip, params, depth, geometry_json)
    passed = all(c["status"] != FAIL for c in suite.checks)
    return {"params": params.to_json(), "depth": depth, "passed": passed, "checks": suite.checks}
