"""Command-line entry point: ``homfinsler <command> <spec.json> [options]``.

Every command prints a short summary and, with ``--out``, writes a JSON
report ``{command, toolkit_version, inputs_digest, payload, wall_time_s}``.
Exit codes: 0 success, 1 a check failed, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .document import SpecDocument, parse_spec
from .errors import FinslerError
from .geodesic import (
    Source,
    corollary_equivalence_check,
    criterion_residual,
    default_tolerance,
    find_geodesic_vectors,
    go_coverage,
    invariance_residuals,
    theorem_x_check,
)
from .lie import check_structure
from .metric import shen_check
from .oracle import OracleScheme, audit_closed_forms

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2

SOURCES = [s.value for s in Source]


def _vector_arg(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homfinsler", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("spec", type=Path, help="spec document (JSON)")
        p.add_argument("--out", type=Path, help="write the JSON report here")
        return p

    add("validate", "check structure constants, split and metric invariance")

    p = add("shen", "evaluate Shen's condition on a grid")
    p.add_argument("--b", type=float, help="length of beta (default: |X| from the document)")
    p.add_argument("--grid", type=int, default=1001, help="grid points (default: 1001)")

    p = add("audit", "compare the closed-form tensor with the Hessian oracle")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--scheme", choices=["dual", "central"])
    p.add_argument("--step", type=float, help="central-difference step")

    p = add("check-vector", "evaluate the geodesic criterion at one vector")
    p.add_argument("--y", type=_vector_arg, required=True, help="coordinates, e.g. 1,0,0 (use --y=-1,0,0 for a leading minus)")
    p.add_argument("--source", choices=SOURCES)
    p.add_argument("--tol", type=float)

    p = add("search", "search for geodesic vectors from random seeds")
    p.add_argument("--seeds", type=int, default=16)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--source", choices=SOURCES)

    p = add("go-check", "estimate how many m-directions are covered by geodesic vectors")
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--source", choices=SOURCES)

    p = add("equivalence", "compare Riemannian and Finsler geodesic status")
    p.add_argument("--y", type=_vector_arg, help="also run the orthogonality corollary at this vector")
    p.add_argument("--tol", type=float)
    p.add_argument("--hypothesis-tol", type=float)
    return parser


def _digest(spec_bytes: bytes, args: argparse.Namespace) -> str:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("spec", "out")}
    h = hashlib.sha256()
    h.update(spec_bytes)
    h.update(json.dumps(flags, sort_keys=True, default=str).encode())
    return h.hexdigest()


def _scheme(doc: SpecDocument, args) -> OracleScheme:
    method = getattr(args, "scheme", None) or doc.options.get("oracle", "dual")
    step = getattr(args, "step", None)
    if step is None and method == doc.options.get("oracle", "dual"):
        step = doc.options.get("oracle_step")
    # an explicit --step with the dual scheme is rejected by OracleScheme
    return OracleScheme(method, step)


def _tol(doc: SpecDocument, args) -> float | None:
    return args.tol if args.tol is not None else doc.criterion_tol


def _seed(doc: SpecDocument, args) -> int:
    return args.seed if args.seed is not None else doc.seed


def cmd_validate(doc, args):
    report = check_structure(doc.algebra, doc.split, doc.jacobi_tol)
    skew, drift = invariance_residuals(doc.space)
    inv_ok = skew <= doc.jacobi_tol and drift <= doc.jacobi_tol
    payload = {
        "dim": doc.algebra.dim,
        "labels": list(doc.algebra.labels),
        "h": [i + 1 for i in doc.split.h_indices],
        "m": [i + 1 for i in doc.split.m_indices],
        "structure": report.to_dict(),
        "metric": {
            "kind": doc.metric.kind.value,
            "b": doc.metric.b,
            "inner_product_ad_h_skew_residual": skew,
            "x_ad_h_residual": drift,
            "invariance_pass": inv_ok,
        },
        "pass": report.passed and inv_ok,
    }
    lines = [
        f"algebra dim {doc.algebra.dim}, dim h = {len(doc.split.h_indices)}, dim m = {len(doc.split.m_indices)}",
        f"jacobi residual {report.jacobi_residual:.3e}, [h,h] {report.subalgebra_residual:.3e}, "
        f"[h,m] {report.reductive_residual:.3e}",
        f"ad(h)-invariance: inner product {skew:.3e}, X {drift:.3e}",
        "PASS" if payload["pass"] else "FAIL",
    ]
    return payload, lines, EXIT_OK if payload["pass"] else EXIT_CHECK_FAILED


def cmd_shen(doc, args):
    b = doc.metric.b if args.b is None else args.b
    report = shen_check(doc.metric, b, args.grid)
    payload = {"kind": doc.metric.kind.value, **report.to_dict()}
    lines = [
        f"{doc.metric.kind.value}: b = {b}, s in [{report.interval[0]:.6g}, {report.interval[1]:.6g}]",
        f"min E = {report.min_value:.6e} at s = {report.argmin:.6g}",
        "PASS" if report.passed else "FAIL",
    ]
    return payload, lines, EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_audit(doc, args):
    scheme = _scheme(doc, args)
    report = audit_closed_forms(doc.metric, args.samples, _seed(doc, args), scheme)
    payload = report.to_dict()
    payload["source"] = Source.CLOSED_FORM.value
    payload["reference_source"] = Source.ORACLE.value
    lines = [
        f"{report.kind}: {report.samples} samples, oracle {scheme.method.value}",
        f"max abs discrepancy {report.max_abs_discrepancy:.3e}, max rel {report.max_rel_discrepancy:.3e}",
        f"worst sample #{report.worst.index}",
    ]
    return payload, lines, EXIT_OK


def cmd_check_vector(doc, args):
    space = doc.space
    y = space.algebra.vector(args.y)
    res = criterion_residual(space, y, args.source, _scheme(doc, args))
    tol = _tol(doc, args)
    tol = default_tolerance(res.source) if tol is None else tol
    geodesic = res.norm <= tol * res.scale
    payload = {
        "y": [float(v) for v in y],
        "residual": res.to_dict(),
        "tol": tol,
        "geodesic": geodesic,
    }
    lines = [
        "residual (" + res.source.value + "): " + ", ".join(f"{v:.6g}" for v in res.values),
        f"norm {res.norm:.6g}, threshold {tol * res.scale:.3e}",
        "geodesic" if geodesic else "not geodesic",
    ]
    return payload, lines, EXIT_OK


def cmd_search(doc, args):
    res = find_geodesic_vectors(doc.space, args.seeds, _seed(doc, args), _tol(doc, args), args.source,
                                _scheme(doc, args))
    payload = res.to_dict()
    lines = [
        f"{sum(c.converged for c in res.candidates)}/{len(res.candidates)} seeds converged "
        f"(tol {res.tol:.1e}, source {res.source.value}); {res.n_distinct} distinct",
    ]
    for y in res.solutions[:10]:
        lines.append("  " + ", ".join(f"{v:+.6f}" for v in y))
    return payload, lines, EXIT_OK


def cmd_go_check(doc, args):
    rep = go_coverage(doc.space, args.directions, _seed(doc, args), _tol(doc, args), args.source,
                      _scheme(doc, args))
    payload = rep.to_dict()
    lines = [f"covered {rep.directions_covered}/{rep.directions_sampled} directions "
             f"(ratio {rep.coverage_ratio:.4f}, source {rep.source.value})"]
    return payload, lines, EXIT_OK


def cmd_equivalence(doc, args):
    space = doc.space
    tol = _tol(doc, args)
    scheme = _scheme(doc, args)
    payload = {}
    lines = []
    ok = True
    if space.metric.alpha(space.metric.x) == 0.0:
        payload["x_theorem"] = {"status": "not applicable", "reason": "X = 0"}
        lines.append("X-theorem: not applicable (X = 0)")
    else:
        rep = theorem_x_check(space, tol, scheme=scheme)
        d = rep.to_dict()
        d["pass"] = rep.riemannian_geodesic == rep.finsler_geodesic
        ok &= d["pass"]
        payload["x_theorem"] = d
        lines.append(f"X-theorem: riemannian {rep.riemannian_geodesic}, finsler {rep.finsler_geodesic} -> "
                     + ("agree" if d["pass"] else "DISAGREE"))
    if args.y is not None:
        rep = corollary_equivalence_check(space, args.y, tol, args.hypothesis_tol, scheme=scheme)
        payload["corollary"] = rep.to_dict()
        if rep.applicable:
            ok &= bool(rep.equivalence_respected)
            lines.append(f"corollary: riemannian {rep.riemannian_geodesic}, finsler {rep.finsler_geodesic} -> "
                         + ("agree" if rep.equivalence_respected else "DISAGREE"))
        else:
            lines.append(f"corollary: not applicable (<X,[y,.]_m> up to {rep.hypothesis_residual:.3g})")
    payload["pass"] = ok
    return payload, lines, EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {
    "validate": cmd_validate,
    "shen": cmd_shen,
    "audit": cmd_audit,
    "check-vector": cmd_check_vector,
    "search": cmd_search,
    "go-check": cmd_go_check,
    "equivalence": cmd_equivalence,
}


def run_command(argv=None, stdout=None, stderr=None) -> tuple[int, dict | None]:
    """Parse ``argv``, run the command and return ``(exit code, report)``."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    start = time.perf_counter()
    try:
        spec_bytes = args.spec.read_bytes() if args.spec.is_file() else b""
        doc = parse_spec(args.spec)
        payload, lines, code = COMMANDS[args.command](doc, args)
    except FinslerError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT_ERROR, None
    report = {
        "command": args.command,
        "toolkit_version": __version__,
        "inputs_digest": _digest(spec_bytes, args),
        "payload": payload,
        "wall_time_s": time.perf_counter() - start,
    }
    for line in lines:
        print(line, file=stdout)
    if args.out is not None:
        try:
            args.out.write_text(json.dumps(report, indent=2, default=_json_default) + "\n")
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=stderr)
            return EXIT_INPUT_ERROR, report
    return code, report


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def main(argv=None) -> int:
    code, _ = run_command(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
