import math

import numpy as np
import pytest

import nctorus.algebra as alg
from nctorus.energy import class_floor, energy
from nctorus.errors import UnitarityError
from nctorus.flow import (
    MONOTONE_TOL,
    NS_QUADRATIC_CONSTANT,
    FlowConfig,
    default_step,
    distance_to_monomial_line,
    energy_slope_check,
    flow,
    riemannian_grad,
    stability_limit,
    unitarize,
)
from nctorus.verify import perturbed_unitary

THETA = 0.3


def unit_skew(theta, bw, rng):
    h = alg.random_selfadjoint(theta, bw, 0.5, rng)
    return h * (1j / alg.hs_norm(h))


# -- gradient --------------------------------------------------------------------

@pytest.mark.parametrize("m,n", [(0, 0), (1, 0), (1, 1), (-2, 3)])
def test_grad_vanishes_at_monomials(m, n):
    g = riemannian_grad(alg.monomial(THETA, m, n, np.exp(0.3j), 8))
    assert alg.hs_norm(g) <= 1e-12


def test_grad_matches_finite_differences():
    rng = np.random.default_rng(0)
    u = unitarize(perturbed_unitary(THETA, 1, 0, 16, 0.3, rng), 3)
    for _ in range(5):
        analytic, numeric = energy_slope_check(u, unit_skew(THETA, 16, rng))
        assert abs(analytic - numeric) <= 1e-5 * abs(analytic)


def test_descent_slope_is_minus_grad_norm_squared():
    rng = np.random.default_rng(1)
    u = unitarize(perturbed_unitary(THETA, 1, 1, 16, 0.2, rng), 3)
    g = riemannian_grad(u)
    x = alg.multiply(alg.adjoint(u), g) * (-1.0)
    scale = alg.hs_norm(x)
    analytic, numeric = energy_slope_check(u, x / scale)
    expected = -alg.hs_norm(g) ** 2 / scale
    assert analytic == pytest.approx(expected, rel=1e-9)
    assert numeric == pytest.approx(expected, rel=1e-5)
    assert numeric < 0


def test_grad_gate():
    with pytest.raises(UnitarityError):
        riemannian_grad(alg.monomial(THETA, 1, 0, 1.2, 4))


# -- Newton-Schulz ----------------------------------------------------------------

def test_unitarize_fixed_point():
    u = alg.monomial(THETA, 2, 1, np.exp(1j), 8)
    assert np.abs(unitarize(u).coeffs - u.coeffs).max() <= 1e-12


def test_unitarize_scaled_generator():
    u = unitarize(alg.monomial(THETA, 1, 0, 1.1, 4), 5)
    assert alg.unitarity_defect(u) < 1e-8


def test_unitarize_rejects_far_elements():
    with pytest.raises(UnitarityError):
        unitarize(alg.monomial(THETA, 1, 0, 2.0, 4))


def test_newton_schulz_is_quadratic():
    rng = np.random.default_rng(2)
    for _ in range(100):
        w = alg.random_unitary(THETA, 16, 0.3, 0.5, rng)
        e = alg.random_element(THETA, 16, radius=3, decay=0.5, seed=rng)
        u = w + alg.multiply(w, e) * (rng.uniform(1e-3, 0.1) / alg.hs_norm(e))
        before = alg.unitarity_defect(u)
        if before > 0.1:
            continue
        after = alg.unitarity_defect(unitarize(u))
        assert after < before
        assert after <= NS_QUADRATIC_CONSTANT * before**2


# -- flow ---------------------------------------------------------------------------

def test_step_limits():
    assert stability_limit(16, 1, 1) == pytest.approx(2 / (4 * math.pi**2 * 2 * 17**2))
    assert default_step(16, 1, 1) < stability_limit(16, 1, 1)


def test_flow_from_critical_point():
    trace = flow(alg.monomial(THETA, 1, 1, 1.0, 16))
    assert trace.status == "converged" and trace.iterations == 0
    assert trace.final_energy == pytest.approx(4 * math.pi**2, abs=1e-12)


def test_flow_class_one_zero():
    u0 = perturbed_unitary(THETA, 1, 0, 16, 0.1, seed=3)
    trace = flow(u0)
    assert trace.converged
    assert trace.start_class == (1, 0)
    assert abs(trace.final_energy - 2 * math.pi**2) <= 1e-4
    assert trace.winding_drift <= 1e-3
    assert distance_to_monomial_line(trace.final, 1, 0) <= 1e-3
    energies = trace.energies()
    assert np.all(np.diff(energies) <= 1e-9)
    assert all(r.unitarity_defect <= trace.config.defect_limit for r in trace.records)


def test_flow_trivial_class():
    u0 = alg.random_unitary(THETA, 16, 0.2, seed=4)
    trace = flow(u0)
    assert trace.converged and trace.start_class == (0, 0)
    assert trace.final_energy <= 1e-4
    c = trace.final.coeff(0, 0)
    assert abs(abs(c) - 1) <= 1e-3


def test_flow_max_iters_and_records():
    u0 = perturbed_unitary(THETA, 1, 1, 16, 0.2, seed=5)
    trace = flow(u0, FlowConfig(max_iters=25))
    assert trace.status == "max_iters" and trace.iterations == 25
    assert [r.iter for r in trace.records] == [0, 10, 20, 25]
    assert trace.final_energy <= energy(u0) + MONOTONE_TOL
    assert trace.final_energy >= class_floor(1, 1) - 1e-6


def test_flow_too_large_step_backtracks():
    u0 = perturbed_unitary(THETA, 1, 0, 16, 0.1, seed=6)
    trace = flow(u0, FlowConfig(step_size=1e-3, max_iters=50))
    assert np.all(np.diff(trace.energies()) <= 1e-9)


def test_flow_rejects_far_start():
    with pytest.raises(UnitarityError):
        flow(alg.monomial(THETA, 1, 0, 2.0, 16))


def test_flow_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(step_size=-1.0)
    with pytest.raises(ValueError):
        FlowConfig(reunitarize_every=0)
