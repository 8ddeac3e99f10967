"""Command-line interface.

Subcommands expose the library as batch operations with JSON/CSV output:
``sld`` (quantum Fisher information), ``optimal`` (closed-form optimal
designs), ``optimize`` (vertex-direction solver), ``efficiency``
(design-by-criterion comparison), ``curves`` (efficiency curves along a
Bloch direction) and ``certify`` (equivalence-theorem optimality gap).

Exit codes: 0 success, 2 input or domain error, 3 solver did not
converge, 4 certificate failed. Reports that write delimited output
accept ``--plot`` to render the same data as a figure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .criteria import Criterion, criterion_value
from .errors import QdoeError
from .fisher import DesignMeasure, fisher_matrix_design, sld_fisher, sld_operators
from .qubit import (
    a_optimal,
    c_optimal,
    d_optimal,
    e_optimal,
    efficiency_curves,
    equivalence_certificate,
    gamma_optimal,
    scalar_optimal,
    standard_tomography,
)
from .solver import CandidateSet, SolveOptions, compare_designs, fedorov_wynn

OK = 0
INPUT_ERROR = 2
NO_CONVERGENCE = 3
CERTIFICATE_FAILED = 4


def _parse_theta(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",") if v != ""])


def _write_output(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _parse_candidates(text: str) -> CandidateSet:
    token = text.strip()
    lowered = token.lower()
    if lowered == "pauli":
        return CandidateSet.pauli_pvms()
    if lowered.startswith("sld-grid:"):
        return CandidateSet.sld_sphere_grid(int(token.split(":", 1)[1]))
    if lowered.startswith("random:"):
        parts = token.split(":")[1:]
        count = int(parts[0])
        seed = int(parts[1]) if len(parts) > 1 else 0
        return CandidateSet.random_projective(count, seed)
    path = Path(token)
    if path.exists():
        payload = json.loads(path.read_text())
        if isinstance(payload, dict):
            payload = payload["povms"]
        return CandidateSet.explicit([serialize.povm_from_json(p) for p in payload])
    raise QdoeError(f"unknown candidate set {text!r}")


def _load_design(token: str, model, theta) -> tuple[str, DesignMeasure]:
    """A design from a builtin token (A, D, E, ST) or a JSON file path."""
    key = token.strip()
    upper = key.upper()
    if upper == "ST":
        return "ST", standard_tomography()
    if upper in ("A", "D", "E"):
        maker = {"A": a_optimal, "D": d_optimal, "E": e_optimal}[upper]
        return upper, maker(model, theta).design
    path = Path(key)
    if path.exists():
        return path.stem, serialize.design_from_json(json.loads(path.read_text()))
    raise QdoeError(f"unknown design {token!r}")


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--model",
        required=True,
        help="bloch3 | phase_amplitude | bloch_sub:AXES | model JSON path",
    )
    parser.add_argument("--theta", required=True, help="comma-separated parameter values")


def _add_output_args(parser: argparse.ArgumentParser, formats=("json",)) -> None:
    parser.add_argument("--output", default=None, help="output path (default stdout)")
    parser.add_argument("--format", default=formats[0], choices=formats)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdoe", description="optimal measurement design for quantum-state estimation"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sld", help="SLD operators and quantum Fisher information")
    _add_model_args(p)
    _add_output_args(p)
    p.set_defaults(handler=cmd_sld)

    p = sub.add_parser("optimal", help="closed-form optimal design for a criterion")
    _add_model_args(p)
    p.add_argument("--criterion", required=True, help="A | D | LogD | E | gamma:G | c:V")
    _add_output_args(p)
    p.set_defaults(handler=cmd_optimal)

    p = sub.add_parser("optimize", help="vertex-direction solver over candidates")
    _add_model_args(p)
    p.add_argument("--criterion", required=True, help="A | A:W.json | D | LogD")
    p.add_argument(
        "--candidates",
        default="sld-grid:2000",
        help="sld-grid:N | pauli | random:N[:SEED] | POVM-list JSON path",
    )
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--step-rule", default="line-search", choices=["line-search", "harmonic"])
    p.add_argument("--prune-tol", type=float, default=1e-8)
    p.add_argument("--support-cap", type=int, default=None)
    _add_output_args(p)
    p.set_defaults(handler=cmd_optimize)

    p = sub.add_parser("efficiency", help="compare designs under several criteria")
    _add_model_args(p)
    p.add_argument(
        "--design",
        action="append",
        required=True,
        dest="designs",
        help="A | D | E | ST | design JSON path (repeatable)",
    )
    p.add_argument(
        "--criterion",
        action="append",
        required=True,
        dest="criteria",
        help="criterion syntax (repeatable)",
    )
    p.add_argument("--plot", default=None, help="also render a figure to this path")
    _add_output_args(p, formats=("csv", "json"))
    p.set_defaults(handler=cmd_efficiency)

    p = sub.add_parser("curves", help="efficiency curves along a Bloch direction")
    p.add_argument("--direction", required=True, help="polar,azimuth in radians")
    p.add_argument("--criterion", required=True)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--plot", default=None, help="also render a figure to this path")
    _add_output_args(p, formats=("csv", "json"))
    p.set_defaults(handler=cmd_curves)

    p = sub.add_parser("certify", help="equivalence-theorem optimality certificate")
    _add_model_args(p)
    p.add_argument("--design", required=True, help="A | D | E | ST | design JSON path")
    p.add_argument("--criterion", required=True, help="D | A | A:W.json")
    p.add_argument("--tol", type=float, default=1e-6)
    _add_output_args(p)
    p.set_defaults(handler=cmd_certify)

    return parser


def cmd_sld(args) -> int:
    model = serialize.parse_model(args.model)
    theta = _parse_theta(args.theta)
    info = sld_fisher(model, theta)
    operators = sld_operators(model, theta)
    payload = {
        "sld_fisher": serialize.fisher_to_json(info),
        "sld_operators": [serialize.matrix_to_json(op) for op in operators],
    }
    _write_output(serialize.dumps(payload), args.output)
    return OK


def cmd_optimal(args) -> int:
    model = serialize.parse_model(args.model)
    theta = _parse_theta(args.theta)
    crit = serialize.parse_criterion(args.criterion)
    if crit.kind == "C":
        povm, value = c_optimal(model, theta, crit.direction)
        info = None
        from .criteria import feasibility_contains
        from .fisher import fisher_matrix_povm

        info = fisher_matrix_povm(model, theta, povm)
        payload = {
            "criterion": serialize.criterion_to_json(crit),
            "value": value,
            "povm": serialize.povm_to_json(povm),
            "feasible": feasibility_contains(info, crit.direction),
        }
        _write_output(serialize.dumps(payload), args.output)
        return OK
    if model.n_params == 1:
        povm, value = scalar_optimal(model, theta)
        payload = {
            "criterion": serialize.criterion_to_json(crit),
            "sld_fisher_value": value,
            "povm": serialize.povm_to_json(povm),
        }
        _write_output(serialize.dumps(payload), args.output)
        return OK
    if crit.kind == "A" and crit.weight is None:
        result = a_optimal(model, theta)
    elif crit.kind == "D":
        result = d_optimal(model, theta)
    elif crit.kind == "LogD":
        result = d_optimal(model, theta)
        result.value = criterion_value(crit, result.fisher)
        result.criterion = crit
    elif crit.kind == "E":
        result = e_optimal(model, theta)
    elif crit.kind == "Gamma":
        result = gamma_optimal(model, theta, crit.exponent)
    else:
        raise QdoeError(f"no closed-form optimal design for criterion {args.criterion!r}")
    _write_output(serialize.dumps(serialize.optimal_result_to_json(result)), args.output)
    return OK


def cmd_optimize(args) -> int:
    model = serialize.parse_model(args.model)
    theta = _parse_theta(args.theta)
    crit = serialize.parse_criterion(args.criterion)
    candidates = _parse_candidates(args.candidates)
    options = SolveOptions(
        max_iters=args.max_iters,
        tol=args.tol,
        step_rule=args.step_rule,
        prune_tol=args.prune_tol,
        support_cap=args.support_cap,
    )
    report = fedorov_wynn(model, theta, crit, candidates, options)
    _write_output(serialize.dumps(serialize.solve_report_to_json(report)), args.output)
    return OK if report.converged else NO_CONVERGENCE


def cmd_efficiency(args) -> int:
    model = serialize.parse_model(args.model)
    theta = _parse_theta(args.theta)
    named = [_load_design(token, model, theta) for token in args.designs]
    criteria = [serialize.parse_criterion(token) for token in args.criteria]
    report = compare_designs(model, theta, named, criteria)
    if args.format == "json":
        text = serialize.dumps(serialize.efficiency_report_to_json(report))
    else:
        text = serialize.efficiency_report_to_csv(report)
    _write_output(text, args.output)
    if args.plot:
        from .plots import render_efficiency_report

        render_efficiency_report(report, args.plot)
    return OK


def cmd_curves(args) -> int:
    parts = _parse_theta(args.direction)
    if parts.shape != (2,):
        raise QdoeError("direction must be polar,azimuth")
    crit = serialize.parse_criterion(args.criterion)
    rows = efficiency_curves((parts[0], parts[1]), crit, args.grid)
    if args.format == "json":
        text = serialize.dumps(
            {"columns": ["r2", "eta_A", "eta_D", "eta_E", "eta_ST"],
             "rows": [[float(v) for v in row] for row in rows]}
        )
    else:
        text = serialize.curves_to_csv(rows)
    _write_output(text, args.output)
    if args.plot:
        from .plots import render_curves

        render_curves(rows, serialize.criterion_to_string(crit), args.plot)
    return OK


def cmd_certify(args) -> int:
    model = serialize.parse_model(args.model)
    theta = _parse_theta(args.theta)
    crit = serialize.parse_criterion(args.criterion)
    _, design = _load_design(args.design, model, theta)
    gap = equivalence_certificate(model, theta, design, crit)
    value = criterion_value(crit, fisher_matrix_design(model, theta, design))
    optimal = bool(gap <= args.tol)
    payload = {"gap": gap, "tol": args.tol, "optimal": optimal, "value": value}
    _write_output(serialize.dumps(payload), args.output)
    return OK if optimal else CERTIFICATE_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except QdoeError as exc:
        error = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stderr.write(serialize.dumps(error))
        return INPUT_ERROR
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        error = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stderr.write(serialize.dumps(error))
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
