"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 for configuration or IO errors.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__
from . import algebra as alg
from . import io as nio
from .energy import energy, windings
from .errors import TorusError, UnitarityError
from .flow import FlowConfig, flow
from .oracle import DEFAULT_Q_LIST, FAILURE_THRESHOLD, oracle_certify
from .parallel import worker_count
from .verify import (
    lemma_summary,
    perturbed_unitary,
    scalar_report,
    verify_endo_bound,
    verify_lemma,
    verify_theorem,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
log = logging.getLogger("nctorus")


class ConfigError(ValueError):
    """Bad flags or input files; mapped to exit code 2."""


def parse_theta(text: str) -> float:
    """Decimal string to the nearest double; ``p/q`` fractions are also accepted."""
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"theta must be finite, got {text!r}")
    return value


@dataclass
class RunConfig:
    command: str
    theta: float | None = None
    bandwidth: int | None = alg.DEFAULT_BANDWIDTH
    seed: int = 0
    params: dict = field(default_factory=dict)

    def validate(self, classes=(), endo: bool = False) -> "RunConfig":
        if self.bandwidth is not None and self.bandwidth < 1:
            raise ConfigError(f"bandwidth must be positive, got {self.bandwidth}")
        if endo and not (self.theta is not None and 0 < self.theta < 1):
            raise ConfigError(f"endomorphism bound needs 0 < theta < 1, got {self.theta!r}")
        for m, n in classes:
            if self.bandwidth is None or self.bandwidth < 2 * max(abs(m), abs(n)):
                raise ConfigError(f"class ({m}, {n}) needs bandwidth >= {2 * max(abs(m), abs(n))}, "
                                  f"got {self.bandwidth}")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.theta is not None:
            d["theta_text"] = nio.fmt_theta(self.theta)
        d["threads"] = worker_count()
        return d


# -- output helpers --------------------------------------------------------------

def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _emit(report: dict, out: str | None) -> None:
    if out:
        json_path, csv_path = nio.save_report(out, report)
        print(f"report written to {json_path}" + (f" (rows in {csv_path})" if csv_path else ""))


def _print_failures(failures: list[str], limit: int = 20) -> None:
    for name in failures[:limit]:
        print(f"  failed: {name}")
    if len(failures) > limit:
        print(f"  ... and {len(failures) - limit} more")


def _flow_config(args) -> FlowConfig:
    return FlowConfig(step_size=args.step, max_iters=args.max_iters, grad_tol=args.grad_tol,
                      reunitarize_every=args.reunitarize_every, seed=args.seed)


# -- commands --------------------------------------------------------------------

def cmd_energy(args) -> int:
    if not args.monomial and not args.file:
        raise ConfigError("give at least one --monomial M N or --file PATH")
    cfg = RunConfig("energy", args.theta, args.bandwidth, 0,
                    {"monomials": args.monomial or [], "files": args.file or []})
    cfg.validate(classes=[tuple(mn) for mn in args.monomial or []])

    items = []
    for m, n in args.monomial or []:
        items.append((f"U^{m} V^{n}", alg.monomial(args.theta, m, n, 1.0, args.bandwidth)))
    for path in args.file or []:
        try:
            a = nio.load_element(path, args.theta, args.bandwidth_explicit)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read element file {path}: {exc}") from exc
        items.append((str(path), a))

    rows = []
    for label, a in items:
        defect = alg.unitarity_defect(a)
        try:
            w1, w2 = windings(a)
        except UnitarityError:
            w1 = w2 = None
        e = energy(a)
        rows.append({"element": label, "energy": e, "winding1": w1, "winding2": w2,
                     "unitarity_defect": defect})
        wtxt = "n/a (not unitary)" if w1 is None else f"({w1:.6f}, {w2:.6f})"
        print(f"{label}: energy {e:.10f}  winding {wtxt}  defect {defect:.3e}")
    _emit({"kind": "energy", "passed": True, "config": cfg.to_dict(), "slacks": [], "rows": rows},
          args.out)
    return EXIT_OK


def cmd_flow(args) -> int:
    m, n = args.klass
    cfg = RunConfig("flow", args.theta, args.bandwidth, args.seed,
                    {"class": [m, n], "h_norm": args.h})
    cfg.validate(classes=[(m, n)])
    config = _flow_config(args)
    if args.file:
        try:
            u0 = nio.load_element(args.file, args.theta, args.bandwidth_explicit)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read element file {args.file}: {exc}") from exc
        cfg.params = {"file": args.file}
    else:
        u0 = perturbed_unitary(args.theta, m, n, args.bandwidth, args.h, args.seed)
    try:
        trace = flow(u0, config)
    except UnitarityError as exc:
        raise ConfigError(str(exc)) from exc
    s = trace.summary()
    print(f"status {s['status']} after {s['iterations']} iterations (step {s['step_size']:.4g})")
    print(f"energy {s['final_energy']:.10f}  floor {s['floor']:.10f}  class {tuple(s['start_class'])}")
    print(f"grad norm {s['final_grad_norm']:.3e}  winding drift {s['winding_drift']:.3e}  "
          f"distance to monomial line {s['distance_to_minimizer']:.3e}")
    if args.out:
        print(f"trace written to {nio.save_trace(args.out, trace, cfg.to_dict())}")
    if args.save_final:
        nio.save_element(args.save_final, trace.final)
    print(_verdict(trace.converged))
    return EXIT_OK if trace.converged else EXIT_FAIL


def _finish(report: dict, args, headline: str) -> int:
    ok = bool(report["passed"])
    print(headline)
    _print_failures(report.get("failures", []))
    _emit(report, args.out)
    print(_verdict(ok))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_scalar(args) -> int:
    rep = scalar_report(args.grid)
    rep.config = {**RunConfig("verify scalar", bandwidth=None).to_dict(), **rep.config}
    st = rep.stats
    return _finish(rep.to_dict(), args,
                   f"w_min {st['w_min']:.4f} at (t, s) = ({st['argmin'][0]:.4f}, {st['argmin'][1]:.4f}); "
                   f"exact {st['exact']:.10f}")


def cmd_verify_oracle(args) -> int:
    q_list = tuple(args.q) if args.q else DEFAULT_Q_LIST
    cfg = RunConfig("verify oracle", None, None, args.seed, {"q": list(q_list), "trials": args.trials})
    try:
        cert = oracle_certify(q_list, args.trials, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = []
    for r in cert.results:
        rows.append({"q": r.q, "p": r.p, "theta": nio.fmt_theta(r.p / r.q), "trials": r.trials,
                     "max_product_dev": r.max_product_dev, "max_adjoint_dev": r.max_adjoint_dev,
                     "max_trace_dev": r.max_trace_dev, "passed": r.passed})
        print(f"q={r.q} p={r.p}: product {r.max_product_dev:.2e}  adjoint {r.max_adjoint_dev:.2e}  "
              f"trace {r.max_trace_dev:.2e}  {_verdict(r.passed)}")
    report = {
        "kind": "oracle", "passed": cert.passed, "config": cfg.to_dict(),
        "stats": {"max_product_dev": cert.max_product_dev, "max_adjoint_dev": cert.max_adjoint_dev,
                  "max_trace_dev": cert.max_trace_dev, "threshold": FAILURE_THRESHOLD},
        "failures": [f"q={r['q']}" for r in rows if not r["passed"]],
        "slacks": [{"name": f"max_dev[q={r['q']}]",
                    "lhs": max(r["max_product_dev"], r["max_adjoint_dev"], r["max_trace_dev"]),
                    "rhs": FAILURE_THRESHOLD, "ok": r["passed"]} for r in rows],
        "rows": rows,
    }
    dev = max(cert.max_product_dev, cert.max_adjoint_dev, cert.max_trace_dev)
    return _finish(report, args, f"max deviation {dev:.3e} (threshold {FAILURE_THRESHOLD:g})")


def cmd_verify_endo(args) -> int:
    cfg = RunConfig("verify endo", args.theta, None, 0, {"exponent_bound": args.bound})
    cfg.validate(endo=True)
    rep = verify_endo_bound(args.theta, args.bound)
    rep.config = {**cfg.to_dict(), **rep.config}
    st = rep.stats
    return _finish(rep.to_dict(), args,
                   f"{st['valid_matrices']} valid exponent matrices; minimum L = {st['family_min']:.4f} "
                   f"(bound {st['bound']:.4f}); {rep.notes[0]}")


def cmd_verify_lemma(args) -> int:
    cfg = RunConfig("verify lemma", args.theta, args.bandwidth, args.seed, {"trials": args.trials})
    cfg.validate()
    try:
        reports = verify_lemma(args.theta, args.trials, args.seed, args.bandwidth)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rep = lemma_summary(args.theta, reports, cfg.to_dict())
    st = rep.stats
    return _finish(rep.to_dict(), args,
                   f"{st['pairs']} pairs; min t + s = {st['min_w']:.6f} (bound {st['bound_w']:.6f}); "
                   f"min E(u) + E(v) = {st['min_energy_sum']:.6f} (bound {st['bound_energy']:.6f})")


def _theorem_line(st: dict, trials: int) -> str:
    return (f"{st['converged']}/{trials} converged; floor {st['floor']:.6f}; "
            f"min pre-flow energy {st['min_pre_energy']:.6f}; "
            f"max |E_final - floor| {st['max_final_energy_error']:.2e}; "
            f"max drift {st['max_winding_drift']:.2e}; max distance {st['max_distance']:.2e}")


def cmd_verify_theorem(args) -> int:
    m, n = args.klass
    cfg = RunConfig("verify theorem", args.theta, args.bandwidth, args.seed,
                    {"class": [m, n], "trials": args.trials, "h_max": args.h})
    cfg.validate(classes=[(m, n)])
    rep = verify_theorem(args.theta, m, n, args.trials, _flow_config(args), args.seed,
                         args.bandwidth, args.h)
    rep.config = {**cfg.to_dict(), **rep.config}
    return _finish(rep.to_dict(), args, _theorem_line(rep.stats, args.trials))


def cmd_sweep(args) -> int:
    thetas = args.theta or [0.3]
    classes = [tuple(c) for c in args.klass] if args.klass else [(1, 1)]
    seeds = args.seed or [0]
    cfg = RunConfig("sweep", None, args.bandwidth, 0,
                    {"thetas": [nio.fmt_theta(t) for t in thetas], "classes": [list(c) for c in classes],
                     "seeds": seeds, "trials": args.trials, "h_max": args.h})
    cfg.validate(classes=classes)
    rows, failures, slacks = [], [], []
    for theta, (m, n), seed in itertools.product(thetas, classes, seeds):
        rep = verify_theorem(theta, m, n, args.trials, _flow_config(args), seed, args.bandwidth, args.h)
        cell = f"theta={nio.fmt_theta(theta)} class=({m},{n}) seed={seed}"
        print(f"{cell}: {_theorem_line(rep.stats, args.trials)}  {_verdict(rep.passed)}")
        rows.append({"theta": nio.fmt_theta(theta), "m": m, "n": n, "seed": seed,
                     "passed": rep.passed, **{k: v for k, v in rep.stats.items()}})
        failures += [f"{cell}: {sl.name}" for sl in rep.failures]
        slacks += [{**sl.as_dict(), "name": f"{cell}: {sl.name}"} for sl in rep.slacks]
    report = {"kind": "sweep", "passed": not failures, "config": cfg.to_dict(),
              "failures": failures, "slacks": slacks, "rows": rows}
    return _finish(report, args, f"{len(rows)} sweep cells")


# -- parser ----------------------------------------------------------------------

def _add_flow_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("flow settings")
    g.add_argument("--step", type=float, default=None,
                   help="step size (default: 0.95 of the stability limit for the class)")
    g.add_argument("--max-iters", type=int, default=50_000)
    g.add_argument("--grad-tol", type=float, default=1e-8)
    g.add_argument("--reunitarize-every", type=int, default=10)
    g.add_argument("--h", type=float, default=0.2, help="perturbation size ||h||_2 (upper end for harnesses)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report (JSON, plus CSV twin for tables) or trace here")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nctorus", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def theta_flag(p, required=True, default=None):
        p.add_argument("--theta", type=parse_theta, required=required, default=default,
                       help="rotation parameter, decimal or p/q")

    def bandwidth_flag(p):
        p.add_argument("--bandwidth", type=int, default=None,
                       help=f"window half-width (default {alg.DEFAULT_BANDWIDTH})")

    p = sub.add_parser("energy", parents=[common], help="energy, windings and defect of elements")
    theta_flag(p)
    bandwidth_flag(p)
    p.add_argument("--monomial", nargs=2, type=int, action="append", metavar=("M", "N"))
    p.add_argument("--file", action="append", help="element JSON {theta, bandwidth, entries}")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("flow", parents=[common], help="run the energy flow from a perturbed monomial or a file")
    theta_flag(p)
    bandwidth_flag(p)
    p.add_argument("--class", dest="klass", nargs=2, type=int, default=[1, 1], metavar=("M", "N"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--file", help="start element JSON instead of a random perturbation")
    p.add_argument("--save-final", help="write the final element as JSON")
    _add_flow_flags(p)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("verify", help="verification harnesses")
    vsub = p.add_subparsers(dest="which", required=True)

    v = vsub.add_parser("theorem", parents=[common], help="minimizers in a winding class")
    theta_flag(v, False, 0.3)
    bandwidth_flag(v)
    v.add_argument("--class", dest="klass", nargs=2, type=int, default=[1, 1], metavar=("M", "N"))
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    _add_flow_flags(v)
    v.set_defaults(func=cmd_verify_theorem)

    v = vsub.add_parser("lemma", parents=[common], help="pairwise bound on commuting-up-to-scalar unitaries")
    theta_flag(v, False, 0.3)
    bandwidth_flag(v)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify_lemma)

    v = vsub.add_parser("endo", parents=[common], help="endomorphism energy bound over exponent matrices")
    theta_flag(v, False, 0.3)
    v.add_argument("--bound", type=int, default=3, help="largest |exponent| enumerated")
    v.set_defaults(func=cmd_verify_endo)

    v = vsub.add_parser("oracle", parents=[common], help="certify the algebra against clock and shift matrices")
    v.add_argument("--q", type=int, action="append", help="denominator (repeatable; default 5 8 13)")
    v.add_argument("--trials", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify_oracle)

    v = vsub.add_parser("scalar", parents=[common], help="grid scan of the final scalar optimization")
    v.add_argument("--grid", type=float, default=1e-3)
    v.set_defaults(func=cmd_verify_scalar)

    p = sub.add_parser("sweep", parents=[common], help="theorem harness over theta x class x seed")
    p.add_argument("--theta", type=parse_theta, action="append")
    bandwidth_flag(p)
    p.add_argument("--class", dest="klass", nargs=2, type=int, action="append", metavar=("M", "N"))
    p.add_argument("--seed", type=int, action="append")
    p.add_argument("--trials", type=int, default=10)
    _add_flow_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if hasattr(args, "bandwidth"):
        args.bandwidth_explicit = args.bandwidth
        if args.bandwidth is None:
            args.bandwidth = alg.DEFAULT_BANDWIDTH
    try:
        worker_count()
        return args.func(args)
    except (ConfigError, TorusError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
