"""Energy, winding numbers, endomorphism energy and the pairwise inequality chain."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import algebra as alg
from .algebra import FourierElement
from .errors import HypothesisError, InvalidEndomorphismError, UnitarityError

PI2 = math.pi**2
PAIR_BOUND_SCALAR = 3.0 - math.sqrt(5.0)
PAIR_ENERGY_BOUND = 2.0 * PAIR_BOUND_SCALAR * PI2
ENDO_ENERGY_BOUND = 4.0 * PAIR_BOUND_SCALAR * PI2

DEFECT_GATE = 1e-6
SLACK_TOL = 1e-6
TRACE_UV_TOL = 1e-8
COMMUTATION_TOL = 1e-6
LAMBDA_ONE_TOL = 1e-9


def energy(u: FourierElement) -> float:
    """``2 pi^2 sum (m^2 + n^2) |a[m, n]|^2``."""
    w = alg.laplacian_weights(u.bandwidth)
    return 0.5 * float(np.sum(w * (u.coeffs.real**2 + u.coeffs.imag**2)))


def energy_trace_form(u: FourierElement) -> float:
    """``1/2 tr(d1(u)* d1(u) + d2(u)* d2(u))`` evaluated with the twisted product."""
    total = 0j
    for j in (1, 2):
        d = alg.derivation(u, j)
        total += alg.trace(alg.multiply(alg.adjoint(d), d))
    return 0.5 * total.real


def class_floor(m: int, n: int) -> float:
    """Minimal energy in the class of ``U^m V^n``: ``2 pi^2 (m^2 + n^2)``."""
    return 2.0 * PI2 * (m * m + n * n)


def winding(u: FourierElement, j: int, defect_tol: float = DEFECT_GATE) -> complex:
    """``tr(u* delta_j(u)) / (2 pi i)``; about ``m`` (j=1) or ``n`` (j=2) on the class of U^m V^n.

    Raises ``UnitarityError`` when ``||u*u - 1||_2 > defect_tol``.
    """
    defect = alg.unitarity_defect(u)
    if defect > defect_tol:
        raise UnitarityError(f"unitarity defect {defect:.3g} exceeds {defect_tol:g}; winding is meaningless")
    # tr(u* d) = <d, u>; the inner-product form avoids the phase roundoff of the twisted product
    return alg.inner(alg.derivation(u, j), u) / (2j * math.pi)


def windings(u: FourierElement, defect_tol: float = DEFECT_GATE) -> tuple[float, float]:
    """Real parts of both winding numbers."""
    return winding(u, 1, defect_tol).real, winding(u, 2, defect_tol).real


def winding_class(u: FourierElement, defect_tol: float = DEFECT_GATE) -> tuple[int, int]:
    w1, w2 = windings(u, defect_tol)
    return round(w1), round(w2)


def poincare_gap(u: FourierElement) -> tuple[float, float]:
    """``((2 pi)^2 ||u - tr(u)||_2^2, 2 E(u))``; the first never exceeds the second."""
    centered = u - alg.trace(u)
    lhs = (2.0 * math.pi) ** 2 * alg.hs_norm(centered) ** 2
    return lhs, 2.0 * energy(u)


# -- endomorphisms -------------------------------------------------------------------

@dataclass(frozen=True)
class Endomorphism:
    """``phi(U) = mu U^a V^b``, ``phi(V) = nu U^c V^d`` for exponents ``((a, b), (c, d))``."""

    exponents: tuple[tuple[int, int], tuple[int, int]]
    theta: float
    phases: tuple[complex, complex] = (1.0, 1.0)

    def __post_init__(self):
        (a, b), (c, d) = self.exponents
        object.__setattr__(self, "exponents", ((int(a), int(b)), (int(c), int(d))))
        object.__setattr__(self, "phases", (complex(self.phases[0]), complex(self.phases[1])))

    @property
    def determinant(self) -> int:
        (a, b), (c, d) = self.exponents
        return a * d - b * c

    @property
    def max_exponent(self) -> int:
        return max(abs(x) for row in self.exponents for x in row)

    def validate(self) -> None:
        for ph in self.phases:
            if abs(abs(ph) - 1.0) > 1e-14:
                raise InvalidEndomorphismError(f"phase {ph!r} is not unit modulus")
        if not is_valid_exponent_matrix(self.exponents, self.theta):
            raise InvalidEndomorphismError(
                f"exponent matrix {self.exponents} does not preserve UV = e^(2 pi i theta) VU "
                f"at theta={self.theta!r} (needs theta*(det - 1) integral)"
            )


def is_valid_exponent_matrix(exponents, theta: float, tol: float = 1e-9) -> bool:
    """``phi(U) phi(V) = e^{2 pi i theta (ad - bc)} phi(V) phi(U)``, so ``theta (ad - bc - 1)`` must be an integer."""
    (a, b), (c, d) = exponents
    x = theta * (a * d - b * c - 1)
    return abs(x - round(x)) <= tol


def apply_endo(phi: Endomorphism, on: Literal["U", "V"], policy=None) -> FourierElement:
    phi.validate()
    if on not in ("U", "V"):
        raise ValueError(f"endomorphism is applied to 'U' or 'V', got {on!r}")
    if policy is None:
        policy = alg.TruncationPolicy(bandwidth=max(1, phi.max_exponent))
    row = 0 if on == "U" else 1
    m, n = phi.exponents[row]
    return alg.monomial(phi.theta, m, n, phi.phases[row], policy)


def endo_energy(phi: Endomorphism) -> float:
    """``2 E(phi(U)) + 2 E(phi(V))``."""
    return 2.0 * energy(apply_endo(phi, "U")) + 2.0 * energy(apply_endo(phi, "V"))


# -- inequality chain for commuting-up-to-scalar pairs ----------------------------

@dataclass(frozen=True)
class Slack:
    """One inequality ``lhs <= rhs``; violated only if ``lhs - rhs > tol``."""

    name: str
    lhs: float
    rhs: float
    tol: float = SLACK_TOL

    @property
    def excess(self) -> float:
        return self.lhs - self.rhs

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return bool(self.excess <= self.tol)

    def as_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "excess": self.excess, "tol": self.tol, "ok": self.ok}


@dataclass
class LemmaReport:
    t: float
    s: float
    w: float
    lam: complex
    energy_u: float
    energy_v: float
    tr_uv_abs: float
    tr_u_abs2: float
    tr_v_abs2: float
    case: str
    slacks: list[Slack] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(sl.ok for sl in self.slacks)

    @property
    def min_slack(self) -> float:
        return min(sl.slack for sl in self.slacks)

    def as_dict(self) -> dict:
        return {
            "t": self.t, "s": self.s, "w": self.w,
            "lambda": [self.lam.real, self.lam.imag],
            "energy_u": self.energy_u, "energy_v": self.energy_v,
            "tr_uv_abs": self.tr_uv_abs, "tr_u_abs2": self.tr_u_abs2, "tr_v_abs2": self.tr_v_abs2,
            "case": self.case, "ok": self.ok,
            "slacks": [sl.as_dict() for sl in self.slacks],
        }


def commutation_scalar(u: FourierElement, v: FourierElement) -> tuple[complex, float]:
    """``lambda = tr(uv (vu)*)`` and the residual ``||uv (vu)* - lambda||_2``."""
    uv = alg.multiply(u, v)
    vu = alg.multiply(v, u)
    r = alg.multiply(uv, alg.adjoint(vu))
    lam = alg.trace(r)
    return lam, alg.hs_norm(r - lam)


def lemma_chain(u: FourierElement, v: FourierElement,
                defect_tol: float = DEFECT_GATE, slack_tol: float = SLACK_TOL) -> LemmaReport:
    """Evaluate every step of the chain ending in ``E(u) + E(v) >= 2 (3 - sqrt 5) pi^2``.

    ``u`` and ``v`` must be (approximately) unitary with ``uv = lambda vu``,
    ``lambda != 1``; otherwise ``HypothesisError``.
    """
    for name, x in (("u", u), ("v", v)):
        defect = alg.unitarity_defect(x)
        if defect > defect_tol:
            raise HypothesisError(f"{name} is not unitary (defect {defect:.3g})")
    lam, residual = commutation_scalar(u, v)
    if residual > COMMUTATION_TOL:
        raise HypothesisError(f"uv is not a scalar multiple of vu (residual {residual:.3g})")
    if abs(abs(lam) - 1.0) > LAMBDA_ONE_TOL:
        raise HypothesisError(f"|lambda| = {abs(lam):.12g} is not 1")
    if abs(lam - 1.0) <= LAMBDA_ONE_TOL:
        raise HypothesisError("lambda = 1: u and v commute")

    e_u, e_v = energy(u), energy(v)
    t_u, t_v = e_u / (2 * PI2), e_v / (2 * PI2)
    tr_u, tr_v = alg.trace(u), alg.trace(v)
    tr_uv = alg.trace_product(u, v)
    cu = u - tr_u
    cv = v - tr_v
    cross_u = alg.trace_product(cu, v)   # tr((u - tr u) v) = -tr(u) tr(v)
    cross_v = alg.trace_product(u, cv)   # tr(u (v - tr v)) = -tr(u) tr(v)
    prod_abs2 = abs(tr_u * tr_v) ** 2
    norm_cu, norm_cv = alg.hs_norm(cu), alg.hs_norm(cv)

    def sl(name, lhs, rhs, tol=slack_tol):
        return Slack(name, float(lhs), float(rhs), tol)

    slacks = [
        sl("trace_uv_vanishes", abs(tr_uv), 0.0, TRACE_UV_TOL),
        sl("trace_identity", abs(-tr_u * tr_v - cross_u), 0.0),
        sl("poincare_u", (2 * math.pi) ** 2 * norm_cu**2, 2 * e_u),
        sl("poincare_v", (2 * math.pi) ** 2 * norm_cv**2, 2 * e_v),
        sl("trace_lower_u", 1.0 - t_u, abs(tr_u) ** 2),
        sl("trace_lower_v", 1.0 - t_v, abs(tr_v) ** 2),
        sl("cauchy_schwarz_u", abs(cross_u), norm_cu),
        sl("cauchy_schwarz_v", abs(cross_v), norm_cv),
        sl("cross_bound_u", abs(cross_u), math.sqrt(t_u)),
        sl("cross_bound_v", abs(cross_v), math.sqrt(t_v)),
    ]

    # order so that s >= t
    t, s = sorted((t_u, t_v))
    w = t + s
    slacks.append(sl("product_upper", prod_abs2, t))
    if t < 1.0 and s < 1.0:
        case = "main"
        slacks += [
            sl("product_lower", (1 - t) * (1 - s), prod_abs2),
            sl("product_chain", (1 - t) * (1 - s), t),
            sl("reduced_form", 1 - w, t * (1 - s)),
            sl("symmetrized", t * (1 - s), t * (1 - w / 2)),
            sl("w_recursion", (1 - w) / (1 - w / 2) + w / 2, w),
            sl("quadratic", w * w - 6 * w + 4, 0.0),
        ]
    else:
        case = "trivial"
    slacks += [
        sl("scalar_bound", PAIR_BOUND_SCALAR, w),
        sl("energy_bound", PAIR_ENERGY_BOUND, e_u + e_v),
    ]
    return LemmaReport(
        t=t, s=s, w=w, lam=lam, energy_u=e_u, energy_v=e_v,
        tr_uv_abs=abs(tr_uv), tr_u_abs2=abs(tr_u) ** 2, tr_v_abs2=abs(tr_v) ** 2,
        case=case, slacks=slacks,
    )
