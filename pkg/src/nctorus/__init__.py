"""Numerics on the truncated noncommutative torus: twisted products, energy, flows and bound checks."""

from .algebra import (
    ClipMode,
    FourierElement,
    TruncationPolicy,
    adjoint,
    derivation,
    exp_skew,
    from_entries,
    hs_norm,
    identity,
    inner,
    laplacian,
    monomial,
    multiply,
    random_element,
    random_selfadjoint,
    random_unitary,
    trace,
    unitarity_defect,
)
from .energy import Endomorphism, endo_energy, energy, lemma_chain, winding, windings
from .flow import FlowConfig, FlowTrace, flow, riemannian_grad, unitarize
from .oracle import clock, oracle_certify, represent, shift
from .verify import scalar_region_min, verify_endo_bound, verify_lemma, verify_theorem

__version__ = "0.1.0"

__all__ = [
    "ClipMode", "FourierElement", "TruncationPolicy", "adjoint", "derivation", "exp_skew",
    "from_entries", "hs_norm", "identity", "inner", "laplacian", "monomial", "multiply",
    "random_element", "random_selfadjoint", "random_unitary", "trace", "unitarity_defect",
    "Endomorphism", "endo_energy", "energy", "lemma_chain", "winding", "windings",
    "FlowConfig", "FlowTrace", "flow", "riemannian_grad", "unitarize",
    "clock", "oracle_certify", "represent", "shift",
    "scalar_region_min", "verify_endo_bound", "verify_lemma", "verify_theorem",
]
