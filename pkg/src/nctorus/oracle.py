"""Clock and shift matrices: an exact finite model of the algebra at theta = p/q.

The q x q clock ``C = diag(1, w, ..., w^{q-1})`` (``w = e^{2 pi i p/q}``) plays U and
the cyclic shift ``S e_k = e_{k+1}`` plays V, so ``CS = w SC``.  Sending
``U^m V^n`` to ``C^m S^n`` is a *-homomorphism, which makes it an independent
check of the phase conventions used by ``nctorus.algebra``.  The derivations have
no finite-dimensional counterpart and are not represented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import algebra as alg
from .algebra import FourierElement

DEFAULT_Q_LIST = (5, 8, 13)
FAILURE_THRESHOLD = 1e-10


@dataclass(frozen=True, eq=False)
class MatrixRep:
    q: int
    p: int
    entries: np.ndarray

    def __matmul__(self, other: "MatrixRep") -> "MatrixRep":
        return MatrixRep(self.q, self.p, self.entries @ other.entries)

    def adjoint(self) -> "MatrixRep":
        return MatrixRep(self.q, self.p, self.entries.conj().T)

    def normalized_trace(self) -> complex:
        return complex(np.trace(self.entries)) / self.q


def _check_q(q: int) -> None:
    if int(q) != q or q < 2:
        raise ValueError(f"q must be an integer >= 2, got {q!r}")


def _root_powers(q: int, p: int, exponent: int) -> np.ndarray:
    # w^{j * exponent} with the exponent reduced mod q before exponentiating
    j = np.arange(q)
    return np.exp(2j * math.pi * ((p * exponent * j) % q) / q)


def clock(q: int, p: int = 1) -> MatrixRep:
    _check_q(q)
    return MatrixRep(q, p, np.diag(_root_powers(q, p, 1)))


def shift(q: int) -> MatrixRep:
    _check_q(q)
    return MatrixRep(q, 0, np.roll(np.eye(q, dtype=np.complex128), 1, axis=0))


def represent(a: FourierElement, q: int, p: int) -> MatrixRep:
    """``sum a[m, n] C^m S^n``; requires ``a.theta == p / q`` exactly."""
    _check_q(q)
    if a.theta != p / q:
        raise ValueError(f"element theta {a.theta!r} is not p/q = {p}/{q}")
    out = np.zeros((q, q), dtype=np.complex128)
    rows = np.arange(q)
    for m, n in a.support():
        # (C^m S^n)[j, k] = w^{j m} when j = k + n (mod q)
        col = (rows - n) % q
        out[rows, col] += a.coeff(m, n) * _root_powers(q, p, m)
    return MatrixRep(q, p, out)


def default_p(q: int) -> int:
    """A numerator coprime to q near 0.382 q, so theta = p/q is far from 0 and 1/2."""
    p = max(1, round(0.382 * q))
    while math.gcd(p, q) != 1:
        p += 1
    return p


@dataclass
class OracleResult:
    q: int
    p: int
    trials: int
    max_product_dev: float = 0.0
    max_adjoint_dev: float = 0.0
    max_trace_dev: float = 0.0

    @property
    def max_dev(self) -> float:
        return max(self.max_product_dev, self.max_adjoint_dev, self.max_trace_dev)

    @property
    def passed(self) -> bool:
        return self.max_dev <= FAILURE_THRESHOLD


@dataclass
class CertReport:
    seed: int
    trials: int
    results: list[OracleResult] = field(default_factory=list)

    @property
    def max_product_dev(self) -> float:
        return max((r.max_product_dev for r in self.results), default=0.0)

    @property
    def max_adjoint_dev(self) -> float:
        return max((r.max_adjoint_dev for r in self.results), default=0.0)

    @property
    def max_trace_dev(self) -> float:
        return max((r.max_trace_dev for r in self.results), default=0.0)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def certify_pair(a: FourierElement, b: FourierElement, q: int, p: int) -> tuple[float, float, float]:
    """Deviations (product, adjoint, trace) between the algebra and its matrix image."""
    ra, rb = represent(a, q, p), represent(b, q, p)
    prod = represent(alg.multiply(a, b), q, p)
    product_dev = float(np.abs(prod.entries - (ra @ rb).entries).max())
    adjoint_dev = float(np.abs(represent(alg.adjoint(a), q, p).entries - ra.adjoint().entries).max())
    trace_dev = max(
        abs(alg.trace(a) - ra.normalized_trace()),
        abs(alg.trace(alg.multiply(a, b)) - prod.normalized_trace()),
    )
    return product_dev, adjoint_dev, float(trace_dev)


def oracle_certify(q_list=DEFAULT_Q_LIST, trials: int = 50, seed: int = 0,
                   p_list=None) -> CertReport:
    """Compare product, adjoint and trace against clock/shift matrices.

    Random elements have support ``|m|, |n| <= (q-1)//2`` on a window of twice
    that size, so products are never clipped and every product mode stays
    strictly inside ``|m|, |n| < q`` where the normalized trace is faithful.
    """
    report = CertReport(seed=seed, trials=trials)
    seeds = np.random.SeedSequence(seed).spawn(len(q_list))
    for i, q in enumerate(q_list):
        if q < 5:
            raise ValueError(f"certification needs q >= 5, got {q}")
        p = default_p(q) if p_list is None else p_list[i]
        theta = p / q
        radius = (q - 1) // 2
        policy = alg.TruncationPolicy(bandwidth=2 * radius)
        rng = np.random.default_rng(seeds[i])
        res = OracleResult(q=q, p=p, trials=trials)
        for _ in range(trials):
            a = alg.random_element(theta, policy, radius=radius, seed=rng)
            b = alg.random_element(theta, policy, radius=radius, seed=rng)
            dp, da, dt = certify_pair(a, b, q, p)
            res.max_product_dev = max(res.max_product_dev, dp)
            res.max_adjoint_dev = max(res.max_adjoint_dev, da)
            res.max_trace_dev = max(res.max_trace_dev, dt)
        report.results.append(res)
    return report
