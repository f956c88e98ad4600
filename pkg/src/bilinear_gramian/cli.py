"""Command line front end.

Exit codes: 0 success, 2 invalid input, 3 existence/convergence or
singular Gramian, 4 input cap undefined (negative discriminant), 5 energy
inequality violated although the cap held, 6 combinatorial budget exceeded.
"""

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import energy, gramian, io, networks, selection
from .errors import BilinearError, InputError
from .numerics import PSD_RTOL

log = logging.getLogger("bilinear_gramian")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_CONTRADICTION = 5


@dataclass
class RunConfig:
    tol: float = gramian.SERIES_TOL
    max_order: int = gramian.SERIES_MAX_ORDER
    psd_tol: float = PSD_RTOL
    fmt: str = "json"
    output: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if not (self.tol > 0 and self.psd_tol > 0 and self.max_order > 0):
            raise InputError("tolerances and max-order must be positive")


def _emit(text, cfg):
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gramian(args, cfg):
    sysm = io.load_system(args.system)
    res = gramian.compute_gramian(sysm, args.method, max_order=cfg.max_order, tol=cfg.tol)
    _emit(io.dumps(res.to_dict()), cfg)
    return EXIT_OK


def cmd_metrics(args, cfg):
    sysm = io.load_system(args.system)
    res = gramian.compute_gramian(sysm, args.method, max_order=cfg.max_order, tol=cfg.tol)
    out = selection.all_metrics(res.W)
    if out["log_det"] is None:
        out.pop("log_det")
        out.pop("det")
        _emit(io.dumps(out), cfg)
        log.error("Gramian is singular; determinant omitted")
        return EXIT_NUMERIC
    _emit(io.dumps(out), cfg)
    return EXIT_OK


def cmd_bound(args, cfg):
    sysm = io.load_system(args.system)
    W = gramian.gramian_vec_solve(sysm).W
    bound = energy.input_cap(sysm, W)
    if not bound.input_cap > 0:
        log.warning(
            "input cap is nonpositive (lambda_max(G) = %.6g); the energy bound does not apply",
            bound.G_lambda_max,
        )
    _emit(io.dumps(bound.to_dict(emit_psi=args.emit_psi)), cfg)
    return EXIT_OK


def cmd_simulate(args, cfg):
    sysm = io.load_system(args.system)
    W = gramian.gramian_vec_solve(sysm).W
    try:
        cap = energy.input_cap(sysm, W).input_cap
    except BilinearError as exc:
        log.warning("input cap unavailable: %s", exc)
        cap = -math.inf
    if args.inputs:
        U = io.read_inputs_csv(args.inputs, sysm.m)
    elif args.random is not None:
        if not (cap > 0 and math.isfinite(cap)):
            raise InputError("--random needs a finite positive input cap")
        rng = np.random.default_rng(cfg.seed)
        U = rng.uniform(-cap, cap, size=(args.random, sysm.m))
    else:
        raise InputError("one of --inputs or --random is required")
    report = energy.verify_energy_inequality(sysm, U, W, cap=cap)
    _emit(io.to_csv(["k", "energy", "bound", "slack"], report.rows()), cfg)
    if not report.cap_satisfied:
        log.warning("inputs exceed the cap %.6g (max |u| = %.6g); bound not guaranteed", cap, report.max_abs_input)
    if args.check_bound and report.cap_satisfied and not report.inequality_held:
        log.error("energy inequality violated with the cap satisfied")
        return EXIT_CONTRADICTION
    return EXIT_OK


def cmd_select(args, cfg):
    lib = io.load_library(args.library)
    kind = selection.MetricKind.parse(args.metric)
    if args.method == "greedy":
        sel = selection.greedy_select(lib, args.m, kind)
    else:
        sel = selection.exhaustive_select(lib, args.m, kind, budget=args.budget)
    subsets = [(s,) for s in range(lib.size) if s not in sel.excluded]
    if len(sel.S) > 1:
        subsets.append(sel.S)
    sel.table = selection.metrics_table(lib, subsets)
    if cfg.fmt == "csv":
        rows = [(" ".join(map(str, r["S"])), r["trace"], r["lambda_min"], r["log_det"], r["det"]) for r in sel.table]
        _emit(io.to_csv(["S", "trace", "lambda_min", "log_det", "det"], rows), cfg)
    else:
        _emit(io.dumps(sel.to_dict()), cfg)
    return EXIT_OK


def cmd_sweep(args, cfg):
    kind = networks.FamilyKind(args.family)
    if kind is networks.FamilyKind.LINE_SELFLOOP:
        fam = networks.NetworkFamily(
            kind,
            coupling=0.25 if args.coupling is None else args.coupling,
            m=args.m,
            trace_budget=args.trace_budget,
            placement=args.placement,
        )
    else:
        fam = networks.NetworkFamily(
            kind, coupling=0.05 if args.coupling is None else args.coupling, m=1,
            trace_budget=0.0, placement="first_nodes",
        )
    records = networks.dtc_sweep(fam, args.n_from, args.n_to)
    if cfg.fmt == "json":
        _emit(io.dumps([r.to_dict() for r in records]), cfg)
    else:
        rows = [(r.n, r.lambda_min_bilinear, r.lambda_min_linear, r.theorem8_bound, r.assumptions_hold) for r in records]
        _emit(io.to_csv(["n", "lambda_min_bilinear", "lambda_min_linear", "theorem8_bound", "assumptions_hold"], rows), cfg)
    return EXIT_OK


def cmd_expand(args, cfg):
    sysm = io.load_system(args.system)
    _emit(io.dumps(networks.expand_to_linear(sysm).to_dict()), cfg)
    return EXIT_OK


def cmd_witness(args, cfg):
    if args.f == 0 or not args.w > 0:
        raise InputError("need f != 0 and w > 0")
    wit = energy.unbounded_ratio_witness(args.a, args.f, args.w)
    _emit(io.dumps(wit.to_dict()), cfg)
    return EXIT_OK if wit.verified else EXIT_NUMERIC


def build_parser():
    p = argparse.ArgumentParser(prog="bilinear-gramian", description="Reachability Gramians of bilinear networks")
    p.add_argument("--format", dest="fmt", choices=["json", "csv"], default=None)
    p.add_argument("--output", "-o", default=None, help="write results here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=gramian.SERIES_TOL, help="series truncation tolerance")
    p.add_argument("--max-order", type=int, default=gramian.SERIES_MAX_ORDER)
    p.add_argument("--psd-tol", type=float, default=PSD_RTOL)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gramian", help="reachability Gramian of a system")
    s.add_argument("--system", required=True)
    s.add_argument("--method", choices=["vec", "vec_solve", "series"], default="vec")
    s.set_defaults(func=cmd_gramian)

    s = sub.add_parser("metrics", help="trace, lambda_min and det of the Gramian")
    s.add_argument("--system", required=True)
    s.add_argument("--method", choices=["vec", "vec_solve", "series"], default="vec")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("bound", help="input cap under which energy >= x^T W^-1 x")
    s.add_argument("--system", required=True)
    s.add_argument("--emit-psi", action="store_true")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("simulate", help="simulate from the origin and report energy vs bound")
    s.add_argument("--system", required=True)
    s.add_argument("--inputs", help="CSV with header u1,...,um")
    s.add_argument("--random", type=int, metavar="K", help="K uniform random inputs inside the cap")
    s.add_argument("--check-bound", action="store_true")
    s.set_defaults(func=cmd_simulate, default_fmt="csv")

    s = sub.add_parser("select", help="choose m actuators from a library")
    s.add_argument("--library", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--metric", choices=["trace", "lmin", "logdet"], default="trace")
    s.add_argument("--method", choices=["greedy", "exhaustive"], default="greedy")
    s.add_argument("--budget", type=int, default=selection.EXHAUSTIVE_BUDGET)
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("sweep", help="lambda_min scaling over a network family")
    s.add_argument("--family", choices=["line-selfloop", "line-subdiag"], required=True)
    s.add_argument("--n-from", type=int, required=True)
    s.add_argument("--n-to", type=int, required=True)
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--trace-budget", type=float, default=0.9)
    s.add_argument("--coupling", type=float, default=None)
    s.add_argument("--placement", choices=["optimal_exhaustive", "first_nodes"], default="optimal_exhaustive")
    s.set_defaults(func=cmd_sweep, default_fmt="csv")

    s = sub.add_parser("expand", help="linear system with one canonical input per nonzero of F")
    s.add_argument("--system", required=True)
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("witness", help="two-step scalar inputs with energy/|x_f|^2 < 1/w")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--f", type=float, required=True)
    s.add_argument("--w", type=float, required=True)
    s.set_defaults(func=cmd_witness)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = RunConfig(
            tol=args.tol, max_order=args.max_order, psd_tol=args.psd_tol,
            fmt=args.fmt or getattr(args, "default_fmt", "json"), output=args.output, seed=args.seed,
        )
        return args.func(args, cfg)
    except BilinearError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
