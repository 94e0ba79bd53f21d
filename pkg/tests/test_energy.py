import math

import numpy as np
import pytest

import nctorus.algebra as alg
from nctorus.energy import (
    ENDO_ENERGY_BOUND,
    PAIR_ENERGY_BOUND,
    Endomorphism,
    apply_endo,
    class_floor,
    commutation_scalar,
    endo_energy,
    energy,
    energy_trace_form,
    is_valid_exponent_matrix,
    lemma_chain,
    poincare_gap,
    winding,
    windings,
)
from nctorus.errors import HypothesisError, InvalidEndomorphismError, UnitarityError

PI2 = math.pi**2
THETA = 0.3


def test_monomial_energy():
    assert energy(alg.monomial(THETA, 1, 1, 1.0, 4)) == pytest.approx(4 * PI2, abs=1e-12)
    assert energy(alg.identity(THETA, 4)) == 0.0
    for m in range(-8, 9):
        for n in range(-8, 9):
            assert abs(energy(alg.monomial(THETA, m, n, 1.0, 8)) - class_floor(m, n)) <= 1e-10


def test_energy_scaling():
    u = alg.random_element(THETA, 8, radius=4, seed=0)
    assert energy(u * 3) == pytest.approx(9 * energy(u), rel=1e-14)
    assert energy(u * np.exp(0.7j)) == pytest.approx(energy(u), rel=1e-14)


def test_trace_form_agrees():
    rng = np.random.default_rng(1)
    for bw in (8, 16):
        for _ in range(200):
            a = alg.random_element(rng.uniform(), bw, radius=bw // 2, decay=0.1, seed=rng)
            e = energy(a)
            assert abs(energy_trace_form(a) - e) <= 1e-11 * max(1.0, e)


def test_windings_of_monomials():
    for m, n in [(1, 0), (0, 1), (2, -3), (-1, 4)]:
        x = alg.monomial(THETA, m, n, 1.0, 8)
        assert winding(x, 1) == m
        assert winding(x, 2) == n
    assert windings(alg.identity(THETA, 4)) == (0.0, 0.0)


def test_winding_of_perturbed_unitary():
    w = alg.random_unitary(THETA, 16, 0.2, seed=2)
    u = alg.multiply(alg.monomial(THETA, 2, -1, 1.0, 16), w)
    w1, w2 = windings(u)
    assert abs(w1 - 2) < 1e-3 and abs(w2 + 1) < 1e-3
    w1b, w2b = windings(u * np.exp(1.1j))
    assert abs(w1b - w1) < 1e-12 and abs(w2b - w2) < 1e-12


def test_winding_gate():
    with pytest.raises(UnitarityError):
        winding(alg.monomial(THETA, 1, 0, 1.1, 4), 1)


def test_poincare_examples():
    assert poincare_gap(alg.identity(THETA, 4)) == (0.0, 0.0)
    lhs, rhs = poincare_gap(alg.monomial(THETA, 1, 0, 1.0, 4))
    assert lhs == pytest.approx(4 * PI2) and rhs == pytest.approx(4 * PI2)
    a = alg.random_element(THETA, 8, radius=4, seed=3)
    coeffs = a.coeffs.copy()
    coeffs[3:6, 3:6] = 0  # drop modes with m^2 + n^2 <= 2
    coeffs[4 + 4, 4 + 6] = 0
    b = alg.FourierElement(THETA, coeffs, a.policy)
    b = b - alg.trace(b)
    b_only_high = alg.FourierElement(THETA, np.where(_norm_sq(8) >= 4, b.coeffs, 0), b.policy)
    lhs, rhs = poincare_gap(b_only_high)
    assert rhs >= 4 * lhs


def _norm_sq(bw):
    m, n = alg.mode_indices(bw)
    return m**2 + n**2


def test_poincare_random():
    rng = np.random.default_rng(4)
    for _ in range(200):
        lhs, rhs = poincare_gap(alg.random_element(THETA, 8, radius=6, seed=rng))
        assert lhs <= rhs + 1e-11


# -- endomorphisms ----------------------------------------------------------------

def test_endo_energy_examples():
    assert endo_energy(Endomorphism(((1, 0), (0, 1)), THETA)) == pytest.approx(8 * PI2)
    phi = Endomorphism(((1, 1), (0, 1)), THETA)
    assert endo_energy(phi) == pytest.approx(12 * PI2)
    assert apply_endo(phi, "U").coeff(1, 1) == 1


def test_endo_validity():
    assert not is_valid_exponent_matrix(((0, 0), (0, 0)), THETA)
    assert not is_valid_exponent_matrix(((2, 0), (0, 1)), THETA)
    assert is_valid_exponent_matrix(((1, 0), (0, 3)), 0.5)
    assert not is_valid_exponent_matrix(((2, 0), (0, 2)), 0.5)
    with pytest.raises(InvalidEndomorphismError):
        endo_energy(Endomorphism(((2, 0), (0, 1)), THETA))
    with pytest.raises(InvalidEndomorphismError):
        Endomorphism(((1, 0), (0, 1)), THETA, phases=(1.1, 1)).validate()
    with pytest.raises(ValueError):
        apply_endo(Endomorphism(((1, 0), (0, 1)), THETA), "W")


def test_endo_bound_on_valid_matrices():
    phi = Endomorphism(((2, 1), (1, 1)), THETA, phases=(np.exp(0.4j), -1))
    assert endo_energy(phi) >= ENDO_ENERGY_BOUND


# -- inequality chain -----------------------------------------------------------------

def test_lemma_on_generators():
    u, v = alg.monomial(THETA, 1, 0, 1.0, 8), alg.monomial(THETA, 0, 1, 1.0, 8)
    rep = lemma_chain(u, v)
    assert rep.ok
    assert rep.t == pytest.approx(1.0) and rep.s == pytest.approx(1.0) and rep.w == pytest.approx(2.0)
    assert rep.lam == pytest.approx(np.exp(2j * math.pi * THETA))
    assert rep.tr_uv_abs == 0.0
    scalar = [sl for sl in rep.slacks if sl.name == "scalar_bound"][0]
    assert scalar.slack == pytest.approx(2 - (3 - math.sqrt(5)))
    assert rep.energy_u + rep.energy_v >= PAIR_ENERGY_BOUND


def test_lemma_on_conjugated_pair():
    from nctorus.flow import unitarize

    w = unitarize(alg.random_unitary(THETA, 16, 0.2, seed=5), 2)
    ws = alg.adjoint(w)
    u = alg.multiply(alg.multiply(w, alg.monomial(THETA, 1, 0, 1.0, 16)), ws)
    v = alg.multiply(alg.multiply(w, alg.monomial(THETA, 0, 1, 1.0, 16)), ws)
    lam, residual = commutation_scalar(u, v)
    assert lam == pytest.approx(np.exp(2j * math.pi * THETA), abs=1e-9)
    assert residual < 1e-9
    rep = lemma_chain(u, v)
    assert rep.ok, [sl.as_dict() for sl in rep.slacks if not sl.ok]


def test_lemma_hypotheses():
    u = alg.monomial(THETA, 1, 0, 1.0, 8)
    with pytest.raises(HypothesisError):
        lemma_chain(u, u)  # lambda = 1
    with pytest.raises(HypothesisError):
        lemma_chain(u * 1.1, alg.monomial(THETA, 0, 1, 1.0, 8))
    with pytest.raises(HypothesisError):
        lemma_chain(u, u + alg.monomial(THETA, 0, 1, 1.0, 8))


def test_slack_serialization():
    theta = 0.7071067811
    rep = lemma_chain(alg.monomial(theta, 2, 0, 1.0, 4), alg.monomial(theta, 0, 1, 1.0, 4))
    assert rep.lam == pytest.approx(np.exp(4j * math.pi * theta))
    d = rep.as_dict()
    assert d["ok"] and d["case"] == "trivial"
    assert {s["name"] for s in d["slacks"]} >= {"trace_uv_vanishes", "energy_bound", "scalar_bound"}
