"""Harnesses reproducing the three quantitative results, plus a scalar brute-force oracle."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import algebra as alg
from .energy import (
    ENDO_ENERGY_BOUND,
    PAIR_BOUND_SCALAR,
    PAIR_ENERGY_BOUND,
    Endomorphism,
    LemmaReport,
    Slack,
    class_floor,
    endo_energy,
    energy,
    is_valid_exponent_matrix,
    lemma_chain,
    windings,
)
from .errors import HypothesisError
from .flow import FlowConfig, distance_to_monomial_line, flow
from .parallel import pmap
from .reports import SummaryReport

log = logging.getLogger(__name__)

FLOOR_TOL = 1e-6
FINAL_ENERGY_TOL = 1e-4
WINDING_DRIFT_TOL = 1e-3
DISTANCE_TOL = 1e-3
MIN_CONVERGED_FRACTION = 0.95
ENDO_TOL = 1e-9
MONOMIAL_FAMILY_NOTE = (
    "endomorphism search is restricted to the exponent-matrix family "
    "phi(U) = mu U^a V^b, phi(V) = nu U^c V^d"
)


# -- scalar oracle -------------------------------------------------------------------

def scalar_region_min(grid_step: float = 1e-3) -> tuple[float, tuple[float, float]]:
    """Brute-force ``min t + s`` over ``{0 <= t <= s <= 1, (1 - t)(1 - s) <= t}``."""
    if not 0 < grid_step <= 1e-2:
        raise ValueError(f"grid_step must lie in (0, 1e-2], got {grid_step!r}")
    n = int(round(1.0 / grid_step))
    grid = np.linspace(0.0, 1.0, n + 1)
    t = grid[:, None]
    s = grid[None, :]
    feasible = (t <= s) & ((1 - t) * (1 - s) <= t)
    w = np.where(feasible, t + s, np.inf)
    i, j = np.unravel_index(np.argmin(w), w.shape)
    return float(w[i, j]), (float(grid[i]), float(grid[j]))


def scalar_report(grid_step: float = 1e-3) -> SummaryReport:
    w_min, (t, s) = scalar_region_min(grid_step)
    exact = PAIR_BOUND_SCALAR
    tol = 2 * grid_step
    slacks = [
        Slack("w_min_vs_exact", abs(w_min - exact), 0.0, tol),
        Slack("argmin_t", abs(t - exact / 2), 0.0, tol),
        Slack("argmin_s", abs(s - exact / 2), 0.0, tol),
        Slack("lower_bound", exact, w_min, 1e-12),
    ]
    return SummaryReport(
        kind="scalar",
        config={"grid_step": grid_step},
        slacks=slacks,
        stats={"w_min": w_min, "argmin": [t, s], "exact": exact},
    )


# -- minimizers in a K1 class ------------------------------------------------------

@dataclass(frozen=True)
class _TheoremTrial:
    theta: float
    m: int
    n: int
    bandwidth: int
    h_range: tuple[float, float]
    config: FlowConfig
    seed: np.random.SeedSequence
    index: int


def perturbed_unitary(theta: float, m: int, n: int, bandwidth: int, h_norm: float,
                      seed=None, decay: float = 0.5) -> alg.FourierElement:
    """``U^m V^n exp(i h)`` with ``h = h*`` random, ``||h||_2 = h_norm``."""
    mono = alg.monomial(theta, m, n, 1.0, bandwidth)
    return alg.multiply(mono, alg.random_unitary(theta, bandwidth, h_norm, decay, seed))


def _run_theorem_trial(job: _TheoremTrial) -> dict:
    rng = np.random.default_rng(job.seed)
    lo, hi = job.h_range
    h_norm = float(rng.uniform(lo, hi))
    u = perturbed_unitary(job.theta, job.m, job.n, job.bandwidth, h_norm, rng)
    pre_energy = energy(u)
    pre_w = windings(u)
    trace = flow(u, job.config)
    return {
        "trial": job.index,
        "h_norm": h_norm,
        "pre_energy": pre_energy,
        "pre_winding1": pre_w[0],
        "pre_winding2": pre_w[1],
        "status": trace.status,
        "iterations": trace.iterations,
        "final_energy": trace.final_energy,
        "final_grad_norm": trace.final_grad_norm,
        "winding_drift": trace.winding_drift,
        "distance": distance_to_monomial_line(trace.final, job.m, job.n),
    }


def verify_theorem(theta: float, m: int, n: int, trials: int = 100,
                   flow_config: FlowConfig | None = None, seed: int = 0,
                   bandwidth: int = alg.DEFAULT_BANDWIDTH, h_max: float = 0.2,
                   h_min: float | None = None, workers: int | None = None) -> SummaryReport:
    """Perturb ``U^m V^n``, check the energy floor, flow back down and compare with the floor."""
    if abs(m) > bandwidth / 2 or abs(n) > bandwidth / 2:
        raise ValueError(f"class ({m}, {n}) needs bandwidth >= {2 * max(abs(m), abs(n))}")
    config = flow_config or FlowConfig()
    h_min = 0.5 * h_max if h_min is None else h_min
    seeds = np.random.SeedSequence(seed).spawn(trials)
    jobs = [_TheoremTrial(theta, m, n, bandwidth, (h_min, h_max), config, seeds[i], i)
            for i in range(trials)]
    rows = pmap(_run_theorem_trial, jobs, workers)

    floor = class_floor(m, n)
    slacks = []
    for r in rows:
        i = r["trial"]
        slacks.append(Slack(f"pre_floor[{i}]", floor, r["pre_energy"], FLOOR_TOL))
        slacks.append(Slack(f"pre_winding[{i}]",
                            max(abs(r["pre_winding1"] - m), abs(r["pre_winding2"] - n)), 0.0,
                            WINDING_DRIFT_TOL))
        slacks.append(Slack(f"final_floor[{i}]", floor, r["final_energy"], FLOOR_TOL))
        slacks.append(Slack(f"winding_drift[{i}]", r["winding_drift"], 0.0, WINDING_DRIFT_TOL))
        if r["status"] == "converged":
            slacks.append(Slack(f"final_energy[{i}]", abs(r["final_energy"] - floor), 0.0,
                                FINAL_ENERGY_TOL))
            slacks.append(Slack(f"distance[{i}]", r["distance"], 0.0, DISTANCE_TOL))
    converged = sum(r["status"] == "converged" for r in rows)
    needed = math.ceil(MIN_CONVERGED_FRACTION * trials)
    slacks.append(Slack("converged_runs", float(needed), float(converged), 0.0))

    pre = [r["pre_energy"] for r in rows]
    return SummaryReport(
        kind="theorem",
        config={"theta": theta, "class": [m, n], "trials": trials, "seed": seed,
                "bandwidth": bandwidth, "h_range": [h_min, h_max], "flow": config.to_dict()},
        slacks=slacks,
        rows=rows,
        stats={
            "floor": floor,
            "converged": converged,
            "min_pre_energy": min(pre, default=math.nan),
            "max_final_energy_error": max((abs(r["final_energy"] - floor) for r in rows), default=0.0),
            "max_winding_drift": max((r["winding_drift"] for r in rows), default=0.0),
            "max_distance": max((r["distance"] for r in rows), default=0.0),
            "max_iterations": max((r["iterations"] for r in rows), default=0),
        },
    )


# -- pairwise bound -------------------------------------------------------------------

def lemma_exponent_pairs(theta: float, exponent_range: int = 2, tol: float = 1e-6):
    """Exponent quadruples ``(a, b, c, d)`` with ``e^{2 pi i theta (ad - bc)} != 1``."""
    r = range(-exponent_range, exponent_range + 1)
    out = []
    for a, b, c, d in itertools.product(r, repeat=4):
        x = theta * (a * d - b * c)
        if abs(x - round(x)) > tol:
            out.append((a, b, c, d))
    return out


def lemma_pair(theta: float, exps, bandwidth: int, rng, conjugate: bool,
               h_size: float = 0.2) -> tuple[alg.FourierElement, alg.FourierElement]:
    a, b, c, d = exps
    mu, nu = np.exp(2j * math.pi * rng.uniform(size=2))
    u = alg.monomial(theta, a, b, complex(mu), bandwidth)
    v = alg.monomial(theta, c, d, complex(nu), bandwidth)
    if conjugate:
        from .flow import unitarize

        w = unitarize(alg.random_unitary(theta, bandwidth, h_size, 0.5, rng), 1)
        ws = alg.adjoint(w)
        u = alg.multiply(alg.multiply(w, u), ws)
        v = alg.multiply(alg.multiply(w, v), ws)
    return u, v


def verify_lemma(theta: float, trials: int = 100, seed: int = 0,
                 bandwidth: int = alg.DEFAULT_BANDWIDTH, exponent_range: int = 2,
                 h_size: float = 0.2) -> list[LemmaReport]:
    """Evaluate the inequality chain on monomial pairs (even trials) and conjugated pairs (odd)."""
    candidates = lemma_exponent_pairs(theta, exponent_range)
    if not candidates:
        raise ValueError(f"no exponent pair with lambda != 1 at theta={theta!r}")
    rng = np.random.default_rng(seed)
    reports = []
    for i in range(trials):
        exps = candidates[rng.integers(len(candidates))]
        u, v = lemma_pair(theta, exps, bandwidth, rng, conjugate=bool(i % 2), h_size=h_size)
        try:
            rep = lemma_chain(u, v)
        except HypothesisError as exc:
            log.warning("skipping pair %s (trial %d): %s", exps, i, exc)
            continue
        reports.append(rep)
    return reports


def lemma_summary(theta: float, reports: list[LemmaReport], config: dict) -> SummaryReport:
    slacks = []
    rows = []
    for i, rep in enumerate(reports):
        for sl in rep.slacks:
            slacks.append(Slack(f"{sl.name}[{i}]", sl.lhs, sl.rhs, sl.tol))
        rows.append({"pair": i, "t": rep.t, "s": rep.s, "w": rep.w, "case": rep.case,
                     "lambda_re": rep.lam.real, "lambda_im": rep.lam.imag,
                     "energy_sum": rep.energy_u + rep.energy_v, "tr_uv_abs": rep.tr_uv_abs,
                     "min_slack": rep.min_slack})
    return SummaryReport(
        kind="lemma",
        config={"theta": theta, **config},
        slacks=slacks,
        rows=rows,
        stats={
            "pairs": len(reports),
            "main_case_pairs": sum(r.case == "main" for r in reports),
            "min_w": min((r.w for r in reports), default=math.nan),
            "min_energy_sum": min((r.energy_u + r.energy_v for r in reports), default=math.nan),
            "bound_w": PAIR_BOUND_SCALAR,
            "bound_energy": PAIR_ENERGY_BOUND,
            "max_lambda_modulus_error": max((abs(abs(r.lam) - 1) for r in reports), default=0.0),
        },
        notes=["attainability of the bound by unitary pairs is not asserted; min_w is observed only"],
    )


# -- endomorphism bound ---------------------------------------------------------------

def verify_endo_bound(theta: float, exponent_bound: int = 3) -> SummaryReport:
    """Enumerate valid exponent matrices and check ``L(phi) >= 4 (3 - sqrt 5) pi^2``."""
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta!r}")
    r = range(-exponent_bound, exponent_bound + 1)
    rows, slacks = [], []
    for a, b, c, d in itertools.product(r, repeat=4):
        exps = ((a, b), (c, d))
        if not is_valid_exponent_matrix(exps, theta):
            continue
        value = endo_energy(Endomorphism(exps, theta))
        name = f"L[{a},{b};{c},{d}]"
        rows.append({"a": a, "b": b, "c": c, "d": d, "det": a * d - b * c, "L": value})
        slacks.append(Slack(name, ENDO_ENERGY_BOUND, value, ENDO_TOL))
    family_min = min((row["L"] for row in rows), default=math.nan)
    return SummaryReport(
        kind="endo",
        config={"theta": theta, "exponent_bound": exponent_bound},
        slacks=slacks,
        rows=rows,
        stats={"valid_matrices": len(rows), "family_min": family_min, "bound": ENDO_ENERGY_BOUND},
        notes=[MONOMIAL_FAMILY_NOTE],
    )
