"""``postdisc`` command line: check, construct, simulate, decompose.

Exit codes: 0 success / distinguishable, 1 proven not distinguishable (or a
simulated perfect model that failed), 2 invalid input, 3 unknown.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io
from .construct import DISTINGUISHABLE, NOT_DISTINGUISHABLE, certify_pair
from .core import DEFAULT_TOL
from .decomp import Infeasible, brute_force_membership, decompose_general, membership_2x2
from .simulate import MeasurementModel, run_protocol, theoretical_success_rate

EXIT_OK = 0
EXIT_NOT = 1
EXIT_INVALID = 2
EXIT_UNKNOWN = 3

_VERDICT_EXIT = {DISTINGUISHABLE: EXIT_OK, NOT_DISTINGUISHABLE: EXIT_NOT}


def default_tol():
    env = os.environ.get("POSTDISC_TOL")
    if env is None:
        return DEFAULT_TOL
    try:
        return float(env)
    except ValueError:
        raise io.ParseError(f"POSTDISC_TOL: not a number: {env!r}") from None


def fmt(arr):
    arr = np.asarray(arr)
    kind = "complex_kind" if np.iscomplexobj(arr) else "float_kind"
    return np.array2string(arr, formatter={kind: lambda x: f"{x:.6g}"})


def _report(command, verdict, exit_code, reason="", problem=None):
    doc = {
        "version": io.REPORT_VERSION,
        "command": command,
        "verdict": verdict,
        "exit_code": exit_code,
        "reason": reason,
        "stages": {},
    }
    if problem is not None:
        doc["problem"] = problem
    return doc


def _factorization_stage(fact, stage):
    return {
        "stage": stage,
        "method": fact.method,
        "A": io.encode_real(fact.A),
        "B": io.encode_real(fact.B),
        "residual": fact.residual,
    }


def _infeasible_stage(res, stage):
    return {
        "stage": stage,
        "reason": res.reason,
        "proven": res.proven,
        "criterion": res.criterion,
        "best_residual": res.best_residual,
        "attempts": res.attempts,
    }


def certificate_report(command, cert, problem_doc=None, full=True):
    code = _VERDICT_EXIT.get(cert.verdict, EXIT_UNKNOWN)
    doc = _report(command, cert.verdict, code, cert.reason, problem_doc)
    st = doc["stages"]
    st["overlaps"] = {
        "stage": "overlap_data",
        "P": io.encode_real(cert.overlaps.P),
        "theta": io.encode_real(cert.overlaps.theta),
    }
    if cert.criterion is not None:
        st["criterion"] = {
            "stage": "membership_2x2",
            "value": cert.criterion,
            "in_closure": cert.criterion >= 1 - DEFAULT_TOL,
        }
    ob, db = cert.overlap_bound, cert.dimension_bound
    st["necessary"] = {
        "stage": "necessary_conditions",
        "min_overlap": ob.min_overlap,
        "overlap_bound": ob.bound,
        "overlap_ok": ob.satisfied,
        "all_nonzero": db.all_nonzero,
        "dimension_bound": db.bound,
        "dim": db.dim,
        "span_dim": db.span_dim,
        "dimension_ok": db.satisfied,
    }
    if cert.factorization is not None:
        st["factorization"] = _factorization_stage(cert.factorization, "decompose")
    if cert.infeasible is not None:
        st["infeasible"] = _infeasible_stage(cert.infeasible, "decompose")
    if full and cert.standard_pair is not None:
        st["standard_pair"] = {
            "stage": "standard_pair_from_factorization",
            "alpha": io.encode_complex(cert.standard_pair.alpha),
            "beta": io.encode_complex(cert.standard_pair.beta),
        }
        st["isometry"] = {
            "stage": "isometry_from_gram",
            "matrix": io.encode_complex(cert.isometry.matrix),
            "domain": io.encode_complex(cert.isometry.domain),
        }
        st["table"] = io.encode_table(cert.table, "table_from_isometry")
        st["verification"] = {
            "stage": "check_perfect_conditions",
            "ok": cert.perfect.ok,
            "sums_a": io.encode_real(cert.perfect.sums_a),
            "sums_b": io.encode_real(cert.perfect.sums_b),
            "kernel_max": cert.perfect.kernel_max,
        }
    return doc


def _emit(doc, as_json, lines, out=None):
    if as_json:
        print(json.dumps(doc))
    else:
        for line in lines:
            print(line)
    if out:
        with open(out, "w") as fh:
            json.dump(doc, fh)


def _load_problem(path):
    doc = io.load_json(path)
    return doc, io.parse_problem(doc, str(path))


def _certificate_lines(cert):
    lines = [f"verdict: {cert.verdict}"]
    if cert.reason:
        lines.append(f"reason: {cert.reason}")
    if cert.criterion is not None:
        lines.append(f"criterion: {cert.criterion:.6g}")
    lines.append("P =\n" + fmt(cert.overlaps.P))
    if cert.factorization is not None:
        lines.append(f"residual: {cert.factorization.residual:.6g}")
    return lines


def cmd_check(args):
    doc, problem = _load_problem(args.input)
    cert = certify_pair(problem.pair, args.tol)
    report = certificate_report("check", cert, full=False)
    _emit(report, args.json, _certificate_lines(cert))
    return report["exit_code"]


def cmd_construct(args):
    doc, problem = _load_problem(args.input)
    cert = certify_pair(problem.pair, args.tol)
    report = certificate_report("construct", cert, problem_doc=doc)
    lines = _certificate_lines(cert)
    if cert.table is not None:
        f = cert.factorization
        lines += ["A =\n" + fmt(f.A), "B =\n" + fmt(f.B)]
        n, m = cert.table.shape
        for a in range(n):
            for b in range(m):
                lines.append(f"M[{a},{b}] =\n" + fmt(cert.table.operators[a, b]))
    _emit(report, args.json, lines, args.out)
    return report["exit_code"]


def _model_source(path):
    doc = io.load_json(path)
    if isinstance(doc, dict) and doc.get("version") == io.REPORT_VERSION:
        if "problem" not in doc or "table" not in doc.get("stages", {}):
            raise io.ParseError(f"{path}: report carries no measurement table")
        problem = io.parse_problem(doc["problem"], f"{path}:problem")
        table = io.decode_table(doc["stages"]["table"], f"{path}:stages.table")
        return doc["problem"], problem, MeasurementModel.from_table(table)
    problem = io.parse_problem(doc, str(path))
    model = problem.model()
    if model is None:
        raise io.ParseError(f"{path}: no measurement model (need 'povm' and 'post')")
    return doc, problem, model


def cmd_simulate(args):
    doc, problem, model = _model_source(args.input)
    try:
        theory = theoretical_success_rate(problem.pair, model, problem.priors)
        stats = run_protocol(problem.pair, model, args.trials, args.seed, problem.priors, args.threads)
    except ValueError as exc:
        raise io.ParseError(str(exc)) from None
    perfect = abs(theory - 1) <= 1e-10
    rate = stats.empirical_rate
    code = EXIT_NOT if perfect and rate is not None and rate != 1.0 else EXIT_OK
    report = _report("simulate", "simulated", code, problem=doc)
    report["stages"]["simulation"] = {
        "stage": "run_protocol",
        "trials": stats.trials,
        "successes": stats.successes,
        "empirical_rate": rate,
        "theoretical_rate": theory,
        "seed": stats.seed,
        "attempts": stats.attempts.tolist(),
        "per_cell": stats.per_cell.tolist(),
    }
    lines = [
        f"trials: {stats.trials}",
        f"successes: {stats.successes}",
        "empirical rate: " + ("n/a" if rate is None else f"{rate:.6g}"),
        f"theoretical rate: {theory:.6g}",
        f"seed: {stats.seed}",
    ]
    _emit(report, args.json, lines, args.out)
    return code


def _parse_matrix(text):
    stripped = text.strip()
    if stripped.startswith("["):
        doc = io.loads(stripped, "<inline>")
    else:
        doc = io.load_json(text)
    if isinstance(doc, dict):
        doc = doc.get("P")
    P = io.decode_real(doc, "P", 2)
    if P.size == 0 or P.min() < 0 or P.max() > 1:
        raise io.ParseError("P: entries must lie in [0, 1]")
    return P


def cmd_decompose(args):
    P = _parse_matrix(args.matrix)
    res = decompose_general(P, args.tol, seed=args.seed)
    lines = []
    if isinstance(res, Infeasible):
        code = EXIT_NOT if res.proven else EXIT_UNKNOWN
        verdict = "infeasible" if res.proven else "no_factorization_found"
        report = _report("decompose", verdict, code, res.reason)
        report["stages"]["infeasible"] = _infeasible_stage(res, "decompose")
        lines.append(f"{verdict}: {res.reason}")
    else:
        code = EXIT_OK
        report = _report("decompose", "feasible", code)
        report["stages"]["factorization"] = _factorization_stage(res, "decompose")
        lines += ["A =\n" + fmt(res.A), "B =\n" + fmt(res.B), f"residual: {res.residual:.6g}"]
    if P.shape == (2, 2):
        mem = membership_2x2(P, args.tol)
        report["stages"]["criterion"] = {
            "stage": "membership_2x2",
            "value": mem.criterion_value,
            "in_closure": mem.in_closure,
        }
        lines.append(f"criterion: {mem.criterion_value:.6g}")
    if args.grid_oracle:
        try:
            inside = brute_force_membership(P, args.grid_oracle)
        except ValueError as exc:
            raise io.ParseError(f"--grid-oracle: {exc}") from None
        found = not isinstance(res, Infeasible)
        agrees = inside == found
        report["stages"]["oracle"] = {
            "stage": "brute_force_membership",
            "grid_steps": args.grid_oracle,
            "in_closure": inside,
            "agrees": agrees,
        }
        lines.append(f"grid oracle ({args.grid_oracle} steps): {'inside' if inside else 'outside'}"
                     + ("" if agrees else "  ** DISAGREES WITH SOLVER **"))
    report["exit_code"] = code
    _emit(report, args.json, lines)
    return code


def build_parser():
    parser = argparse.ArgumentParser(
        prog="postdisc",
        description="Perfect identification of pure states with a late subensemble label.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=None,
                       help="validity tolerance (default: $POSTDISC_TOL or 1e-9)")
        p.add_argument("--json", action="store_true", help="print the full report as JSON")

    p = sub.add_parser("check", help="decide distinguishability of a problem file")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("construct", help="build factorization, embedding and measurement table")
    p.add_argument("input")
    p.add_argument("--out", help="write the report here")
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("simulate", help="Monte-Carlo run of a measurement model")
    p.add_argument("input", help="problem file with povm+post, or a construct report")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="write the report here")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decompose", help="factor a matrix as right- times left-stochastic")
    p.add_argument("matrix", help="inline JSON matrix or path to a JSON file")
    p.add_argument("--grid-oracle", type=int, nargs="?", const=256, default=0, metavar="STEPS",
                   help="cross-check with the brute-force grid test")
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        if args.tol is None:
            args.tol = default_tol()
        if getattr(args, "trials", 0) < 0:
            raise io.ParseError("--trials must be nonnegative")
        return args.func(args)
    except io.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
