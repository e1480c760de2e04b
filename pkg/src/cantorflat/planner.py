"""Parameter planning: pick (r, s, eps) for a target level-set dimension.

Given ``alpha`` and slack ``eta`` the planner finds integers r, s with
``alpha < log r / log(rs) < alpha + eta`` and then halves eps until the
construction's level-set dimension stays above ``alpha`` and its value-set
dimension is within ``eta`` of the sharp bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from gmpy2 import mpq

from .errors import CertificationError, NoPlanError, ParameterError
from .geometry import ConstructionParams, eps_upper_bound
from .numerics import DEFAULT_BITS, BoundedReal, as_rational, log_ratio, rational_str

MAX_HALVINGS = 256


@dataclass(frozen=True)
class PlanRequest:
    k: int
    alpha_target: mpq
    eta: mpq
    max_s: int = 64
    max_r: int = 4096
    precision_bits: int = DEFAULT_BITS

    def __post_init__(self):
        object.__setattr__(self, "alpha_target", as_rational(self.alpha_target))
        object.__setattr__(self, "eta", as_rational(self.eta))
        if not isinstance(self.k, int) or self.k < 1:
            raise ParameterError("k must be an integer >= 1")
        if not 0 < self.alpha_target < 1:
            raise ParameterError("alpha_target must lie in (0, 1)")
        if self.eta <= 0:
            raise ParameterError("eta must be positive")
        if self.max_s < 2 or self.max_r < 2:
            raise ParameterError("search limits must be >= 2")


@dataclass
class Certificate:
    params: ConstructionParams
    alpha_target: mpq
    eta: mpq
    # name -> (lhs, rhs, margin) with margin = lhs - rhs
    inequalities: dict

    @property
    def holds(self) -> bool:
        return all(m.certainly_positive() for _, _, m in self.inequalities.values())

    def failed(self) -> list[str]:
        return [name for name, (_, _, m) in self.inequalities.items() if not m.certainly_positive()]

    def to_json(self) -> dict:
        return {
            "alpha_target": rational_str(self.alpha_target),
            "eta": rational_str(self.eta),
            "holds": self.holds,
            "inequalities": {
                name: {"lhs": lhs.to_json(), "rhs": rhs.to_json(), "margin": m.to_json(),
                       "positive": m.certainly_positive()}
                for name, (lhs, rhs, m) in self.inequalities.items()
            },
        }


@dataclass
class PlanResult:
    params: ConstructionParams
    achieved_alpha: BoundedReal
    achieved_beta: BoundedReal
    certificate: Certificate

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "achieved_alpha": self.achieved_alpha.to_json(),
            "achieved_beta": self.achieved_beta.to_json(),
            "certificate": self.certificate.to_json(),
        }


def alpha_rs(r: int, s: int, bits: int = DEFAULT_BITS) -> BoundedReal:
    """log r / log(rs), the eps -> 0 level-set dimension."""
    return log_ratio(r, r * s, bits)


def _dimensions(r, s, eps, k, bits):
    ratio = mpq(r * s) / (1 - eps)
    alpha = log_ratio(r, ratio, bits)
    beta = log_ratio(s, ratio, bits) / (k + eps)
    return alpha, beta


def _inequalities(r, s, eps, k, alpha_target, eta, bits) -> dict:
    a_rs = alpha_rs(r, s, bits)
    alpha, beta = _dimensions(r, s, eps, k, bits)
    beta_floor = (1 - a_rs) / k - eta
    target_floor = BoundedReal.exact((1 - alpha_target) / k - eta, bits)
    upper = BoundedReal.exact(alpha_target + eta, bits)
    lower = BoundedReal.exact(alpha_target, bits)
    return {
        # alpha + eta > alpha(r, s)
        "window_upper": (upper, a_rs, upper - a_rs),
        # alpha(r, s) > alpha
        "window_lower": (a_rs, lower, a_rs - lower),
        # beta > (1 - alpha(r, s))/k - eta
        "beta_near_limit": (beta, beta_floor, beta - beta_floor),
        # level-set dimension at this eps still exceeds alpha
        "alpha_retained": (alpha, lower, alpha - lower),
        # beta > (1 - alpha)/k - eta
        "beta_vs_target": (beta, target_floor, beta - target_floor),
    }


def _rs_candidates(req: PlanRequest):
    """(r, s) pairs with alpha(r, s) inside the window, smallest s first.

    alpha(r, s) > alpha exactly when r > s**(alpha/(1-alpha)), so for each s
    the admissible r nearest that threshold is its floor plus one.
    """
    a = req.alpha_target
    bits = req.precision_bits
    expo = a / (1 - a)
    for s in range(2, req.max_s + 1):
        # r* = s**expo; float guess refined by exact checks below
        guess = int(float(s) ** float(expo))
        r = max(2, guess - 2)
        while r <= req.max_r and not alpha_rs(r, s, bits).certainly_gt(a):
            r += 1
        if r > req.max_r:
            yield None, None
            continue
        a_rs = alpha_rs(r, s, bits)
        if a_rs.certainly_lt(a + req.eta):
            yield (r, s), None
        else:
            yield None, (r, s, a_rs)


def _first_dyadic_below(bound: mpq) -> mpq:
    """Largest 1/2**j strictly below ``bound``."""
    eps = mpq(1, 2)
    while eps >= bound:
        eps /= 2
    return eps


def certify(params: ConstructionParams, alpha_target, eta, bits: Optional[int] = None) -> Certificate:
    """Recompute every planning inequality at doubled precision."""
    if not params.is_constant:
        raise ParameterError("certification needs a constant schedule")
    alpha_target = as_rational(alpha_target)
    eta = as_rational(eta)
    bits = bits or 2 * params.precision_bits
    ineq = _inequalities(params.r, params.s, params.eps, params.k, alpha_target, eta, bits)
    cert = Certificate(params, alpha_target, eta, ineq)
    if not cert.holds:
        raise CertificationError(f"certificate fails: {', '.join(cert.failed())}", cert)
    return cert


def plan(req: PlanRequest) -> PlanResult:
    bits = req.precision_bits
    near_miss = None
    best_alpha = None
    for pair, miss in _rs_candidates(req):
        if pair is None:
            if miss is not None and (best_alpha is None or miss[2].value < best_alpha):
                best_alpha = miss[2].value
                near_miss = {"r": miss[0], "s": miss[1], "alpha_rs": float(best_alpha),
                             "reason": "smallest alpha(r,s) above the target found, but not below alpha + eta"}
            continue
        r, s = pair
        eps = _first_dyadic_below(eps_upper_bound(r, s))
        for _ in range(MAX_HALVINGS):
            ineq = _inequalities(r, s, eps, req.k, req.alpha_target, req.eta, bits)
            if all(m.certainly_positive() for _, _, m in ineq.values()):
                params = ConstructionParams(req.k, r, s, eps, precision_bits=bits)
                cert = certify(params, req.alpha_target, req.eta)
                alpha, beta = _dimensions(r, s, eps, req.k, bits)
                return PlanResult(params, alpha, beta, cert)
            eps /= 2
        near_miss = {"s": s, "r": r, "reason": "eps halving limit reached"}
    raise NoPlanError(
        f"no (r, s) with s <= {req.max_s}, r <= {req.max_r} puts alpha(r,s) in "
        f"({float(req.alpha_target)}, {float(req.alpha_target + req.eta)})",
        near_miss,
    )
