"""Truncated twisted Fourier model of the smooth noncommutative torus.

An element is a finite sum ``sum a[m, n] U^m V^n`` with ``UV = e^{2 pi i theta} VU``.
Coefficients live densely on the window ``|m|, |n| <= B``; the array entry
``coeffs[m + B, n + B]`` holds ``a[m, n]``.

Phase conventions (certified against clock/shift matrices in ``nctorus.oracle``)::

    (ab)[m, n] = sum_{k,l} a[k, l] b[m-k, n-l] exp(-2 pi i theta l (m-k))
    (a*)[m, n] = conj(a[-m, -n]) exp(-2 pi i theta m n)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    BandwidthMismatchError,
    OutOfBandError,
    StepTooLargeError,
    ThetaMismatchError,
)

TWO_PI = 2.0 * math.pi
DEFAULT_BANDWIDTH = 16
DEFAULT_EXP_TERMS = 16


class ClipMode(str, enum.Enum):
    HARD_CLIP = "hard_clip"
    TRACK_SPILL = "track_spill"


@dataclass(frozen=True)
class TruncationPolicy:
    """Window size and what happens to coefficients pushed outside it.

    ``spill_mass`` accumulates (additively, so it is an upper bound on the
    l2 error) the l2 mass discarded by products when ``clip_mode`` is
    ``track_spill``.
    """

    bandwidth: int = DEFAULT_BANDWIDTH
    clip_mode: ClipMode = ClipMode.TRACK_SPILL
    spill_mass: float = 0.0

    def __post_init__(self):
        if int(self.bandwidth) != self.bandwidth or self.bandwidth < 1:
            raise ValueError(f"bandwidth must be a positive integer, got {self.bandwidth!r}")
        object.__setattr__(self, "bandwidth", int(self.bandwidth))
        object.__setattr__(self, "clip_mode", ClipMode(self.clip_mode))
        if not (self.spill_mass >= 0.0 and math.isfinite(self.spill_mass)):
            raise ValueError(f"spill_mass must be finite and nonnegative, got {self.spill_mass!r}")

    @property
    def size(self) -> int:
        return 2 * self.bandwidth + 1

    def with_spill(self, spill_mass: float) -> "TruncationPolicy":
        if self.clip_mode is ClipMode.HARD_CLIP:
            spill_mass = 0.0
        return replace(self, spill_mass=float(spill_mass))


@dataclass(frozen=True, eq=False)
class FourierElement:
    """Immutable element of the truncated algebra.

    Arithmetic operators: ``+``, ``-``, scalar ``*`` and ``/``; ``a @ b`` and
    ``a * b`` (both elements) are the twisted product.
    """

    theta: float
    coeffs: np.ndarray
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.complex128)
        size = self.policy.size
        if arr.shape != (size, size):
            raise OutOfBandError(
                f"coefficient array has shape {arr.shape}, window needs {(size, size)}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "coeffs", arr)

    @property
    def bandwidth(self) -> int:
        return self.policy.bandwidth

    @property
    def spill_mass(self) -> float:
        return self.policy.spill_mass

    def coeff(self, m: int, n: int) -> complex:
        """The Fourier coefficient ``a[m, n]`` (zero outside the window)."""
        B = self.bandwidth
        if abs(m) > B or abs(n) > B:
            return 0j
        return complex(self.coeffs[m + B, n + B])

    def support(self) -> list[tuple[int, int]]:
        B = self.bandwidth
        rows, cols = np.nonzero(self.coeffs)
        return [(int(r) - B, int(c) - B) for r, c in zip(rows, cols)]

    def _like(self, coeffs, spill=None) -> "FourierElement":
        spill = self.policy.spill_mass if spill is None else spill
        return FourierElement(self.theta, coeffs, self.policy.with_spill(spill))

    # -- operators -----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, FourierElement):
            _check_compatible(self, other)
            return self._like(self.coeffs + other.coeffs, self.spill_mass + other.spill_mass)
        if np.isscalar(other):
            return self + scalar(self.theta, other, self.policy)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coeffs)

    def __sub__(self, other):
        if isinstance(other, FourierElement) or np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FourierElement):
            return multiply(self, other)
        if np.isscalar(other):
            return self._like(self.coeffs * other, abs(other) * self.spill_mass)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / other)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, FourierElement):
            return multiply(self, other)
        return NotImplemented

    def __repr__(self):
        nz = np.count_nonzero(self.coeffs)
        return (
            f"FourierElement(theta={self.theta!r}, bandwidth={self.bandwidth}, "
            f"nonzero={nz}, hs_norm={hs_norm(self):.6g})"
        )


def _check_compatible(a: FourierElement, b: FourierElement) -> None:
    if a.theta != b.theta:
        raise ThetaMismatchError(f"theta mismatch: {a.theta!r} != {b.theta!r}")
    if a.bandwidth != b.bandwidth:
        raise BandwidthMismatchError(f"bandwidth mismatch: {a.bandwidth} != {b.bandwidth}")


def _policy(policy: TruncationPolicy | int | None) -> TruncationPolicy:
    if policy is None:
        return TruncationPolicy()
    if isinstance(policy, TruncationPolicy):
        return policy
    return TruncationPolicy(bandwidth=policy)


# -- cached tables -------------------------------------------------------------

@lru_cache(maxsize=64)
def twist_table(theta: float, bandwidth: int) -> np.ndarray:
    """``T[l + B, k + B] = exp(-2 pi i theta l k)`` for ``|l|, |k| <= B``."""
    idx = np.arange(-bandwidth, bandwidth + 1)
    table = np.exp(-1j * TWO_PI * theta * np.outer(idx, idx))
    table.flags.writeable = False
    return table


@lru_cache(maxsize=16)
def mode_indices(bandwidth: int) -> tuple[np.ndarray, np.ndarray]:
    """Broadcastable ``(m, n)`` index grids for the window."""
    idx = np.arange(-bandwidth, bandwidth + 1, dtype=float)
    m, n = idx[:, None], idx[None, :]
    m.flags.writeable = False
    n.flags.writeable = False
    return m, n


@lru_cache(maxsize=16)
def laplacian_weights(bandwidth: int) -> np.ndarray:
    """``4 pi^2 (m^2 + n^2)`` on the window."""
    m, n = mode_indices(bandwidth)
    w = (TWO_PI**2) * (m**2 + n**2)
    w.flags.writeable = False
    return w


# -- array kernels (shared with the flow's inner loop) --------------------------

def _support_box(x: np.ndarray):
    rows = np.flatnonzero(x.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(x.any(axis=0))
    return rows[0], rows[-1] + 1, cols[0], cols[-1] + 1


def _twisted_product(a: np.ndarray, b: np.ndarray, theta: float, B: int):
    """Twisted convolution clipped to the window.

    Only the bounding boxes of the nonzero coefficients take part, so sparse
    operands are cheap; the result is exact (no thresholding).
    Returns ``(window_coeffs, discarded_l2_mass_squared)``.
    """
    size = 2 * B + 1
    out = np.zeros((size, size), dtype=np.complex128)
    box_a = _support_box(a)
    box_b = _support_box(b)
    if box_a is None or box_b is None:
        return out, 0.0
    r0, r1, c0, c1 = box_a
    s0, s1, t0, t1 = box_b
    A = a[r0:r1, c0:c1]
    Bb = b[s0:s1, t0:t1]
    Ka, La = A.shape
    Kb, Lb = Bb.shape

    # weight b's U-exponent m' by the phase of moving V^l past U^{m'}
    phase = twist_table(theta, B)[c0:c1, s0:s1]
    b_tw = Bb[None, :, :] * phase[:, :, None]

    # Toeplitz T[l, i, j] = A[i - j, l] turns the m-convolution into a batched matmul
    padded = np.zeros((La, Ka + 2 * (Kb - 1)), dtype=np.complex128)
    padded[:, Kb - 1:Kb - 1 + Ka] = A.T
    toeplitz = np.ascontiguousarray(sliding_window_view(padded, Kb, axis=1)[:, :, ::-1])
    partial = toeplitz @ b_tw  # (La, Ka + Kb - 1, Lb)

    Fm, Fn = Ka + Kb - 1, La + Lb - 1
    full = np.zeros((Fm, Fn), dtype=np.complex128)
    for l in range(La):
        full[:, l:l + Lb] += partial[l]

    # full[i, j] is the coefficient at (m0 + i, n0 + j)
    m0 = (r0 - B) + (s0 - B)
    n0 = (c0 - B) + (t0 - B)
    i0, i1 = max(0, -B - m0), min(Fm, B - m0 + 1)
    j0, j1 = max(0, -B - n0), min(Fn, B - n0 + 1)
    spill_sq = 0.0
    if i0 < i1 and j0 < j1:
        inside = full[i0:i1, j0:j1]
        out[m0 + i0 + B:m0 + i1 + B, n0 + j0 + B:n0 + j1 + B] = inside
        if i0 > 0 or j0 > 0 or i1 < Fm or j1 < Fn:
            spill_sq = max(0.0, float(np.vdot(full, full).real - np.vdot(inside, inside).real))
    else:
        spill_sq = float(np.vdot(full, full).real)
    return out, spill_sq


def _adjoint(a: np.ndarray, theta: float, B: int) -> np.ndarray:
    return np.conj(a[::-1, ::-1]) * twist_table(theta, B)


def _trace_product(a: np.ndarray, b: np.ndarray, theta: float, B: int) -> complex:
    # (ab)[0, 0] = sum_{k,l} a[k,l] b[-k,-l] exp(+2 pi i theta k l)
    return complex(np.sum(a * b[::-1, ::-1] * np.conj(twist_table(theta, B))))


def _chop(x: np.ndarray, rel_tol: float) -> np.ndarray:
    mag = np.abs(x)
    peak = mag.max()
    if peak == 0.0 or rel_tol <= 0.0:
        return x
    return np.where(mag > rel_tol * peak, x, 0.0)


# -- constructors ---------------------------------------------------------------

def zero(theta: float, policy: TruncationPolicy | int | None = None) -> FourierElement:
    p = _policy(policy)
    return FourierElement(theta, np.zeros((p.size, p.size), dtype=np.complex128), p)


def monomial(theta: float, m: int, n: int, scale: complex = 1.0,
             policy: TruncationPolicy | int | None = None) -> FourierElement:
    """``scale * U^m V^n``."""
    p = _policy(policy)
    B = p.bandwidth
    if abs(m) > B or abs(n) > B:
        raise OutOfBandError(f"mode ({m}, {n}) outside window |m|, |n| <= {B}")
    coeffs = np.zeros((p.size, p.size), dtype=np.complex128)
    coeffs[m + B, n + B] = scale
    return FourierElement(theta, coeffs, p)


def identity(theta: float, policy: TruncationPolicy | int | None = None) -> FourierElement:
    return monomial(theta, 0, 0, 1.0, policy)


def scalar(theta: float, value: complex, policy: TruncationPolicy | int | None = None) -> FourierElement:
    return monomial(theta, 0, 0, value, policy)


def from_entries(theta: float, entries, policy: TruncationPolicy | int | None = None) -> FourierElement:
    """Build from ``(m, n, coefficient)`` triples; repeated modes are summed."""
    p = _policy(policy)
    B = p.bandwidth
    coeffs = np.zeros((p.size, p.size), dtype=np.complex128)
    for m, n, c in entries:
        if int(m) != m or int(n) != n:
            raise ValueError(f"mode indices must be integers, got ({m}, {n})")
        m, n = int(m), int(n)
        if abs(m) > B or abs(n) > B:
            raise OutOfBandError(f"mode ({m}, {n}) outside window |m|, |n| <= {B}")
        coeffs[m + B, n + B] += c
    return FourierElement(theta, coeffs, p)


# -- algebra operations -------------------------------------------------------

def multiply(a: FourierElement, b: FourierElement) -> FourierElement:
    """Twisted product ``ab``; out-of-window modes are clipped per ``a.policy``."""
    _check_compatible(a, b)
    coeffs, spill_sq = _twisted_product(a.coeffs, b.coeffs, a.theta, a.bandwidth)
    spill = a.spill_mass + b.spill_mass + math.sqrt(spill_sq)
    return a._like(coeffs, spill)


def adjoint(a: FourierElement) -> FourierElement:
    return a._like(_adjoint(a.coeffs, a.theta, a.bandwidth))


def trace(a: FourierElement) -> complex:
    """Canonical trace: the ``(0, 0)`` coefficient."""
    B = a.bandwidth
    return complex(a.coeffs[B, B])


def trace_product(a: FourierElement, b: FourierElement) -> complex:
    """``trace(multiply(a, b))`` without forming the product."""
    _check_compatible(a, b)
    return _trace_product(a.coeffs, b.coeffs, a.theta, a.bandwidth)


def inner(a: FourierElement, b: FourierElement) -> complex:
    """GNS inner product ``<a, b> = tr(b* a) = sum a[m,n] conj(b[m,n])``."""
    _check_compatible(a, b)
    return complex(np.vdot(b.coeffs, a.coeffs))


def hs_norm(a: FourierElement) -> float:
    return float(np.linalg.norm(a.coeffs))


def derivation(a: FourierElement, j: int) -> FourierElement:
    """``delta_1`` scales mode ``(m, n)`` by ``2 pi i m``; ``delta_2`` by ``2 pi i n``."""
    if j not in (1, 2):
        raise ValueError(f"derivation index must be 1 or 2, got {j!r}")
    m, n = mode_indices(a.bandwidth)
    weight = m if j == 1 else n
    return a._like(a.coeffs * (1j * TWO_PI) * weight)


def laplacian(a: FourierElement) -> FourierElement:
    """``-(delta_1^2 + delta_2^2)``: mode ``(m, n)`` scaled by ``4 pi^2 (m^2 + n^2)``."""
    return a._like(a.coeffs * laplacian_weights(a.bandwidth))


def unitarity_defect(u: FourierElement) -> float:
    """``||u* u - 1||_2``."""
    B = u.bandwidth
    prod, _ = _twisted_product(_adjoint(u.coeffs, u.theta, B), u.coeffs, u.theta, B)
    prod[B, B] -= 1.0
    return float(np.linalg.norm(prod))


def chop(a: FourierElement, rel_tol: float) -> FourierElement:
    """Zero coefficients below ``rel_tol`` times the largest coefficient modulus."""
    return a._like(_chop(a.coeffs, rel_tol))


def skew_part(a: FourierElement) -> FourierElement:
    return (a - adjoint(a)) * 0.5


def exp_remainder_bound(norm: float, terms: int) -> float:
    """Heuristic size of the first omitted series term, ``norm^(terms+1)/(terms+1)!``."""
    return norm ** (terms + 1) / math.factorial(terms + 1)


def exp_skew(s: FourierElement, terms: int = DEFAULT_EXP_TERMS, tol: float = 0.0) -> FourierElement:
    """Truncated exponential ``sum_{k<=terms} s^k / k!`` of a skew-adjoint element.

    With ``tol > 0`` the series stops once a term's l2 norm drops below ``tol``.
    Raises ``StepTooLargeError`` if ``s`` is not skew-adjoint (1e-10) or
    ``||s||_2 > 1``; rescale the argument (smaller step) instead.
    """
    norm = hs_norm(s)
    if norm > 1.0:
        raise StepTooLargeError(f"||s||_2 = {norm:.3g} > 1; use a smaller step size")
    skew_err = hs_norm(adjoint(s) + s)
    if skew_err > 1e-10:
        raise StepTooLargeError(f"argument is not skew-adjoint (||s* + s||_2 = {skew_err:.3g})")
    B = s.bandwidth
    result = np.zeros_like(s.coeffs)
    result[B, B] = 1.0
    term = result.copy()
    spill_sq = 0.0
    for k in range(1, terms + 1):
        term, sq = _twisted_product(term, s.coeffs, s.theta, B)
        term /= k
        spill_sq += sq
        result += term
        if tol > 0.0 and np.linalg.norm(term) < tol:
            break
    return s._like(result, s.spill_mass + math.sqrt(spill_sq))


# -- random generators --------------------------------------------------------

def _half_lattice(radius: int):
    for m in range(0, radius + 1):
        for n in range(-radius, radius + 1):
            if m > 0 or n > 0:
                yield m, n


def random_selfadjoint(theta: float, bandwidth: int | TruncationPolicy = DEFAULT_BANDWIDTH,
                       decay: float = 0.5, seed=None, radius: int | None = None) -> FourierElement:
    """Random ``h = h*`` with Gaussian coefficients damped by ``exp(-decay (m^2 + n^2))``.

    Independent draws fill a half-lattice; the mirrored modes are fixed by
    ``h[-m,-n] = conj(h[m,n]) exp(-2 pi i theta m n)`` so the adjoint is exact.
    Deterministic for a given ``seed`` (int or ``numpy.random.Generator``).
    """
    if not decay > 0:
        raise ValueError(f"decay must be positive, got {decay!r}")
    p = _policy(bandwidth)
    B = p.bandwidth
    radius = B if radius is None else min(int(radius), B)
    rng = np.random.default_rng(seed)
    phase = twist_table(theta, B)
    coeffs = np.zeros((p.size, p.size), dtype=np.complex128)
    coeffs[B, B] = rng.normal()
    for m, n in _half_lattice(radius):
        g = complex(rng.normal(), rng.normal()) * math.exp(-decay * (m * m + n * n)) / math.sqrt(2.0)
        coeffs[m + B, n + B] = g
        coeffs[-m + B, -n + B] = g.conjugate() * phase[m + B, n + B]
    return FourierElement(theta, coeffs, p)


def random_element(theta: float, bandwidth: int | TruncationPolicy = DEFAULT_BANDWIDTH,
                   radius: int | None = None, decay: float = 0.0, seed=None) -> FourierElement:
    """Random element, complex Gaussian coefficients on ``|m|, |n| <= radius``."""
    p = _policy(bandwidth)
    B = p.bandwidth
    radius = B if radius is None else min(int(radius), B)
    rng = np.random.default_rng(seed)
    side = 2 * radius + 1
    g = (rng.normal(size=(side, side)) + 1j * rng.normal(size=(side, side))) / math.sqrt(2.0)
    if decay:
        idx = np.arange(-radius, radius + 1)
        g = g * np.exp(-decay * (idx[:, None] ** 2 + idx[None, :] ** 2))
    coeffs = np.zeros((p.size, p.size), dtype=np.complex128)
    coeffs[B - radius:B + radius + 1, B - radius:B + radius + 1] = g
    return FourierElement(theta, coeffs, p)


def random_unitary(theta: float, bandwidth: int | TruncationPolicy = DEFAULT_BANDWIDTH,
                   size: float = 0.2, decay: float = 0.5, seed=None,
                   terms: int = DEFAULT_EXP_TERMS) -> FourierElement:
    """``exp(i h)`` for a random self-adjoint ``h`` rescaled to ``||h||_2 = size``."""
    h = random_selfadjoint(theta, bandwidth, decay, seed)
    norm = hs_norm(h)
    h = h * (size / norm) if norm > 0 else h
    return exp_skew(h * 1j, terms)
