import cmath
import math

import numpy as np
import pytest

import nctorus.algebra as alg
from nctorus.oracle import (
    certify_pair,
    clock,
    default_p,
    oracle_certify,
    represent,
    shift,
)


def test_two_by_two():
    c, s = clock(2, 1), shift(2)
    assert np.allclose(c.entries, np.diag([1, -1]))
    assert np.allclose(s.entries, [[0, 1], [1, 0]])
    assert np.allclose((c @ s).entries, -(s @ c).entries)


@pytest.mark.parametrize("q,p", [(5, 2), (8, 3), (13, 5), (7, 1)])
def test_commutation(q, p):
    c, s = clock(q, p), shift(q)
    omega = cmath.exp(2j * math.pi * p / q)
    assert np.abs((c @ s).entries - omega * (s @ c).entries).max() < 1e-14


def test_small_q_rejected():
    with pytest.raises(ValueError):
        clock(1)
    with pytest.raises(ValueError):
        shift(1)


def test_represent_needs_matching_theta():
    with pytest.raises(ValueError):
        represent(alg.monomial(0.3, 1, 0, 1.0, 4), 5, 2)


def test_generators_map_to_clock_and_shift():
    theta = 2 / 5
    u = represent(alg.monomial(theta, 1, 0, 1.0, 4), 5, 2)
    v = represent(alg.monomial(theta, 0, 1, 1.0, 4), 5, 2)
    assert np.allclose(u.entries, clock(5, 2).entries)
    assert np.allclose(v.entries, shift(5).entries)
    # VU = e^{-2 pi i theta} UV, read off coefficient (1, 1)
    assert np.allclose((v @ u).entries, cmath.exp(-2j * math.pi * theta) * (u @ v).entries)


def test_identity_has_zero_deviation():
    one = alg.identity(3 / 8, 3)
    assert certify_pair(one, one, 8, 3) == (0.0, 0.0, 0.0)


def test_monomial_traces_exact_in_range():
    theta = 3 / 8
    for m in range(-7, 8):
        for n in range(-7, 8):
            rep = represent(alg.monomial(theta, m, n, 1.0, 7), 8, 3)
            assert abs(rep.normalized_trace() - (m == 0 and n == 0)) < 1e-14


def test_default_p():
    assert [default_p(q) for q in (5, 8, 13)] == [2, 3, 5]


def test_certification():
    report = oracle_certify((5, 8, 13), trials=50, seed=0)
    assert report.passed
    assert max(report.max_product_dev, report.max_adjoint_dev, report.max_trace_dev) <= 1e-10
    assert [r.q for r in report.results] == [5, 8, 13]


def test_certification_deterministic():
    a = oracle_certify((5,), trials=5, seed=3)
    b = oracle_certify((5,), trials=5, seed=3)
    assert a.max_product_dev == b.max_product_dev
