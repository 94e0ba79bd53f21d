"""Energy-decreasing retraction flow on the approximate unitary group.

Each step computes the skew part ``G`` of ``u* (Delta u)`` (``Delta`` the
Laplacian), moves to ``u exp(-step G)`` and halves the step while the energy
would increase.  Every ``reunitarize_every`` steps one Newton-Schulz sweep
pulls ``u`` back to the unitary group.

Around a critical point the mode ``(k, l)`` of the tangent direction contracts
by ``1 - step * 4 pi^2 (k^2 + l^2)`` per step, so the step must stay below
``2 / (4 pi^2 ((B + |m|)^2 + (B + |n|)^2))`` for the class ``(m, n)`` on a
window of bandwidth ``B``.  The default step is 0.95 of that limit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import algebra as alg
from .algebra import FourierElement
from .energy import DEFECT_GATE, class_floor
from .errors import UnitarityError

STATUSES = ("converged", "max_iters", "aborted_spill", "aborted_defect", "stalled")
MONOTONE_TOL = 1e-12
# empirical Newton-Schulz constant: defect_after <= NS_QUADRATIC_CONSTANT * defect_before**2
# for Gaussian-decay perturbations with defect <= 0.1 (observed worst case about 1.33;
# the scalar recursion gives 3/4)
NS_QUADRATIC_CONSTANT = 1.5


@dataclass(frozen=True)
class FlowConfig:
    step_size: float | None = None
    max_iters: int = 50_000
    grad_tol: float = 1e-8
    reunitarize_every: int = 10
    exp_terms: int = 12
    seed: int = 0
    max_halvings: int = 20
    # coefficients below chop_tol * max|coeff| are roundoff; zeroing them keeps products sparse
    chop_tol: float = 1e-15
    spill_limit: float = 1e-6
    defect_limit: float = DEFECT_GATE

    def __post_init__(self):
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.max_iters < 0 or self.reunitarize_every < 1 or self.exp_terms < 1:
            raise ValueError("max_iters >= 0, reunitarize_every >= 1 and exp_terms >= 1 required")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FlowRecord:
    iter: int
    energy: float
    grad_norm: float
    winding1: float
    winding2: float
    unitarity_defect: float
    spill_mass: float
    step: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FlowTrace:
    records: list[FlowRecord]
    status: str
    iterations: int
    step_size: float
    start_class: tuple[int, int]
    final: FourierElement
    config: FlowConfig = field(default_factory=FlowConfig)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def final_energy(self) -> float:
        return self.records[-1].energy

    @property
    def final_grad_norm(self) -> float:
        return self.records[-1].grad_norm

    @property
    def floor(self) -> float:
        return class_floor(*self.start_class)

    @property
    def winding_drift(self) -> float:
        w1, w2 = self.records[0].winding1, self.records[0].winding2
        return max(max(abs(r.winding1 - w1), abs(r.winding2 - w2)) for r in self.records)

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    def summary(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.iterations,
            "step_size": self.step_size,
            "start_class": list(self.start_class),
            "floor": self.floor,
            "final_energy": self.final_energy,
            "final_grad_norm": self.final_grad_norm,
            "winding_drift": self.winding_drift,
            "distance_to_minimizer": distance_to_monomial_line(self.final, *self.start_class),
        }


def stability_limit(bandwidth: int, m: int = 0, n: int = 0) -> float:
    """Largest stable step for the class ``(m, n)``: ``2 / (4 pi^2 ((B+|m|)^2 + (B+|n|)^2))``."""
    scale = 4 * math.pi**2 * ((bandwidth + abs(m)) ** 2 + (bandwidth + abs(n)) ** 2)
    return 2.0 / scale


def default_step(bandwidth: int, m: int = 0, n: int = 0) -> float:
    return 0.95 * stability_limit(bandwidth, m, n)


# -- array-level helpers -----------------------------------------------------------

def _skew_grad(u: np.ndarray, theta: float, B: int, chop_tol: float = 0.0) -> np.ndarray:
    lap_u = u * alg.laplacian_weights(B)
    y, _ = alg._twisted_product(alg._adjoint(u, theta, B), lap_u, theta, B)
    if chop_tol:
        y = alg._chop(y, chop_tol)
    return 0.5 * (y - alg._adjoint(y, theta, B))


def _retract(u: np.ndarray, s: np.ndarray, theta: float, B: int, terms: int, tol: float):
    """``u exp(s)`` accumulated as ``sum u s^k / k!``; stops when a term falls below ``tol``."""
    out = u.copy()
    term = u
    spill_sq = 0.0
    for k in range(1, terms + 1):
        term, sq = alg._twisted_product(term, s, theta, B)
        term /= k
        spill_sq += sq
        out += term
        if np.linalg.norm(term) <= tol:
            break
    return out, spill_sq


def _energy(u: np.ndarray, B: int) -> float:
    return 0.5 * float(np.sum(alg.laplacian_weights(B) * (u.real**2 + u.imag**2)))


def _windings(u: np.ndarray, B: int) -> tuple[float, float]:
    # tr(u* delta_j u) / 2 pi i = sum m |u[m,n]|^2 (resp. n)
    m, n = alg.mode_indices(B)
    mass = u.real**2 + u.imag**2
    return float(np.sum(m * mass)), float(np.sum(n * mass))


def _gram_defect(u: np.ndarray, theta: float, B: int):
    gram, _ = alg._twisted_product(alg._adjoint(u, theta, B), u, theta, B)
    diff = gram.copy()
    diff[B, B] -= 1.0
    return gram, float(np.linalg.norm(diff))


def _ns_sweep(u: np.ndarray, gram: np.ndarray, theta: float, B: int):
    factor = -0.5 * gram
    factor[B, B] += 1.5
    return alg._twisted_product(u, factor, theta, B)


# -- public operations --------------------------------------------------------------

def riemannian_grad(u: FourierElement, defect_tol: float = DEFECT_GATE) -> FourierElement:
    """``u skew(u* Delta u)``, the energy gradient projected to the unitary tangent space."""
    defect = alg.unitarity_defect(u)
    if defect > defect_tol:
        raise UnitarityError(f"unitarity defect {defect:.3g} exceeds {defect_tol:g}")
    g = _skew_grad(u.coeffs, u.theta, u.bandwidth)
    return alg.multiply(u, u._like(g, 0.0))


def energy_slope_check(u: FourierElement, x: FourierElement, h: float = 1e-4,
                       terms: int = 20) -> tuple[float, float]:
    """``(analytic, central difference)`` slopes of ``t -> E(u exp(t x))`` at 0 for skew ``x``.

    The analytic slope is ``Re <grad E(u), u x>``; along ``x = -u* grad`` it is ``-||grad||_2^2``.
    """
    grad = riemannian_grad(u)
    analytic = alg.inner(grad, alg.multiply(u, x)).real
    plus = alg.multiply(u, alg.exp_skew(x * h, terms))
    minus = alg.multiply(u, alg.exp_skew(x * (-h), terms))
    numeric = (_energy(plus.coeffs, u.bandwidth) - _energy(minus.coeffs, u.bandwidth)) / (2 * h)
    return float(analytic), float(numeric)


def unitarize(u: FourierElement, sweeps: int = 1) -> FourierElement:
    """Newton-Schulz sweeps ``u <- u (3 - u* u) / 2``; needs ``||u*u - 1||_2 <= 0.5``."""
    B, theta = u.bandwidth, u.theta
    coeffs = u.coeffs
    gram, defect = _gram_defect(coeffs, theta, B)
    if defect > 0.5:
        raise UnitarityError(f"unitarity defect {defect:.3g} > 0.5; restart from a closer element")
    spill = u.spill_mass
    for i in range(sweeps):
        if i:
            gram, _ = _gram_defect(coeffs, theta, B)
        coeffs, sq = _ns_sweep(coeffs, gram, theta, B)
        spill += math.sqrt(sq)
    return u._like(coeffs, spill)


def distance_to_monomial_line(u: FourierElement, m: int, n: int) -> float:
    """``||u - c U^m V^n||_2`` with ``c`` the unit-modulus phase of ``u``'s ``(m, n)`` coefficient."""
    c = u.coeff(m, n)
    if abs(c) == 0.0:
        return math.hypot(alg.hs_norm(u), 1.0)
    c = c / abs(c)
    return alg.hs_norm(u - alg.monomial(u.theta, m, n, c, u.policy))


def flow(u0: FourierElement, config: FlowConfig | None = None) -> FlowTrace:
    """Run the retraction flow from ``u0`` until the gradient norm drops below ``grad_tol``."""
    config = config or FlowConfig()
    theta, B = u0.theta, u0.bandwidth
    u = u0.coeffs.copy()
    spill = u0.spill_mass

    gram, defect = _gram_defect(u, theta, B)
    if defect > 0.5:
        raise UnitarityError(f"initial unitarity defect {defect:.3g} > 0.5; rejecting rather than repairing")
    sweeps = 0
    while defect > min(config.defect_limit, 1e-13) and sweeps < 8:
        u, sq = _ns_sweep(u, gram, theta, B)
        spill += math.sqrt(sq)
        gram, defect = _gram_defect(u, theta, B)
        sweeps += 1

    w1, w2 = _windings(u, B)
    start_class = (round(w1), round(w2))
    step0 = config.step_size or default_step(B, *start_class)
    u = alg._chop(u, config.chop_tol)
    E = _energy(u, B)

    records = [FlowRecord(0, E, math.nan, w1, w2, defect, spill, step0)]
    status = "max_iters"
    it = 0
    grad_norm = math.nan
    step = step0
    while True:
        g = _skew_grad(u, theta, B, config.chop_tol)
        grad_norm = float(np.linalg.norm(g))
        if it == 0:
            records[0] = FlowRecord(0, E, grad_norm, w1, w2, defect, spill, step0)
        if grad_norm <= config.grad_tol:
            status = "converged"
            break
        if it >= config.max_iters:
            status = "max_iters"
            break

        step = step0
        tol = 1e-18 * max(1.0, float(np.abs(u).max()))
        for _ in range(config.max_halvings + 1):
            cand, sq = _retract(u, -step * g, theta, B, config.exp_terms, tol)
            cand = alg._chop(cand, config.chop_tol)
            E_new = _energy(cand, B)
            if E_new <= E + MONOTONE_TOL:
                break
            step *= 0.5
        else:
            status = "stalled"
            break
        u, E = cand, E_new
        spill += math.sqrt(sq)
        it += 1

        if it % config.reunitarize_every == 0:
            gram, defect = _gram_defect(u, theta, B)
            w1, w2 = _windings(u, B)
            records.append(FlowRecord(it, E, grad_norm, w1, w2, defect, spill, step))
            if defect > config.defect_limit:
                status = "aborted_defect"
                break
            u, sq = _ns_sweep(u, gram, theta, B)
            u = alg._chop(u, config.chop_tol)
            spill += math.sqrt(sq)
            E = _energy(u, B)
        if spill > config.spill_limit * float(np.linalg.norm(u)):
            status = "aborted_spill"
            break

    _, defect = _gram_defect(u, theta, B)
    w1, w2 = _windings(u, B)
    last = FlowRecord(it, E, grad_norm, w1, w2, defect, spill, step)
    if records[-1].iter == it:
        records[-1] = last
    else:
        records.append(last)
    final = u0._like(u, spill)
    return FlowTrace(records=records, status=status, iterations=it, step_size=step0,
                     start_class=start_class, final=final, config=config)
