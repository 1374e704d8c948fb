"""Command-line entry point: affinity-dim {certify,bracket,solve,discretize,trace-table}."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from typing import Sequence

import mpmath

from .certify import (
    bracket_dimension,
    check_contraction,
    check_eventual_positivity,
    check_multicone,
)
from .config import ConfigError, ProblemConfig, load_config
from .discretize import SOLVE_TOL, solve_dimension_discretized
from .errors import (
    AffinityDimError,
    DimensionMismatch,
    DominanceUnverified,
    NoPositiveSignPattern,
    NoRootFound,
    PrecisionInsufficient,
    SecantDiverged,
)
from .fredholm import coefficients
from .report import FORMATS, ReportDocument, render
from .solver import agreeing_digits, decimal_string, solve_report
from .traces import build_engine

log = logging.getLogger("affdim")

EXIT_OK = 0
EXIT_CERTIFICATION = 2
EXIT_NO_ROOT = 3
EXIT_PRECISION = 4
EXIT_INPUT = 5


def _certificates(cfg: ProblemConfig, ks: Sequence[int]):
    d = cfg.dimension
    out = []
    for j in ks:
        if not 1 <= j <= d:
            continue
        mc = cfg.multicone_for(j)
        if mc is not None:
            cert = check_multicone(cfg.matrices, j, mc)
        else:
            cert = check_eventual_positivity(cfg.matrices, j, cfg.positivity_depth)
        out.append(cert)
    return out


def _contraction_summary(cfg: ProblemConfig, doc: ReportDocument) -> None:
    contracting = check_contraction(cfg.matrices, cfg.gram)
    doc.summary["contraction"] = "verified" if contracting else "not verified"
    if not contracting:
        norm = "the supplied Gram norm" if cfg.gram is not None else "the Euclidean norm"
        doc.notes.append(f"warning: some matrix is not a strict contraction in {norm}")


def cmd_certify(cfg: ProblemConfig, args) -> tuple[ReportDocument, int]:
    k = cfg.k
    ks = [k, k + 1] if k is not None else list(range(1, cfg.dimension + 1))
    doc = ReportDocument("certify", columns=("k", "certificate", "detail"))
    certs = _certificates(cfg, ks)
    for cert in certs:
        doc.rows.append({"k": cert.k, "certificate": cert.describe(), "detail": cert.details[-1] if cert.details else ""})
    _contraction_summary(cfg, doc)
    ok = all(c.ok for c in certs)
    doc.summary["result"] = "all certificates verified" if ok else "certification failed"
    return doc, EXIT_OK if ok else EXIT_CERTIFICATION


def _bracket_rows(cfg: ProblemConfig, ks: Sequence[int], prec: int):
    rows = []
    for k in ks:
        row = {"k": k, "rho_k": None, "rho_k_plus_1": None, "bracket_holds": False, "sign_pattern": None}
        try:
            b = bracket_dimension(cfg.matrices, k, cfg.sign_pattern, prec)
        except NoPositiveSignPattern as exc:
            row["error"] = str(exc)
        else:
            row.update(
                rho_k=mpmath.nstr(b.rho_k, 35),
                rho_k_plus_1=mpmath.nstr(b.rho_k_plus_1, 35),
                bracket_holds=b.bracket_holds,
                sign_pattern=" ".join("+" if e > 0 else "-" for e in b.sign_pattern),
            )
        rows.append(row)
    return rows


def cmd_bracket(cfg: ProblemConfig, args) -> tuple[ReportDocument, int]:
    ks = [cfg.k] if cfg.k is not None else list(range(cfg.dimension))
    doc = ReportDocument("bracket", columns=("k", "rho_k", "rho_k_plus_1", "bracket_holds", "sign_pattern"))
    doc.rows = _bracket_rows(cfg, ks, cfg.precision_bits or 256)
    for row in doc.rows:
        if "error" in row:
            doc.notes.append(f"k={row['k']}: {row.pop('error')}")
    holding = [r["k"] for r in doc.rows if r["bracket_holds"]]
    if holding:
        doc.summary["result"] = f"dimension lies in ({holding[0]}, {holding[0] + 1})"
        return doc, EXIT_OK
    doc.summary["result"] = "no bracket verified"
    return doc, EXIT_NO_ROOT


def _resolve_k(cfg: ProblemConfig) -> int | None:
    if cfg.k is not None:
        return cfg.k
    for row in _bracket_rows(cfg, range(cfg.dimension), cfg.precision_bits or 256):
        if row["bracket_holds"]:
            return row["k"]
    return None


def cmd_solve(cfg: ProblemConfig, args) -> tuple[ReportDocument, int]:
    doc = ReportDocument("solve", columns=("n", "s_n", "cpu_seconds"))
    k = _resolve_k(cfg)
    if k is None:
        doc.summary["result"] = "no k with a verified bracket; pass --k"
        return doc, EXIT_NO_ROOT
    doc.summary["k"] = k
    certs = []
    if args.no_certify:
        doc.summary["certified"] = "no (skipped by --no-certify)"
    else:
        certs = _certificates(cfg, [k, k + 1])
        doc.summary["certified"] = ", ".join(c.describe() for c in certs)
        if not all(c.ok for c in certs):
            doc.summary["result"] = "certification failed; rerun with --no-certify to override"
            return doc, EXIT_CERTIFICATION
        _contraction_summary(cfg, doc)
    start = time.perf_counter()
    report = solve_report(
        cfg.matrices, k, cfg.n_min, cfg.n_max, cfg.precision_bits,
        mpmath.mpf(cfg.tolerance), cfg.reduction_mode, args.threads, certificates=certs,
    )
    doc.summary["wall_seconds"] = round(time.perf_counter() - start, 3)
    doc.metadata["precision_bits"] = report.precision_bits
    doc.metadata["reduction_mode"] = report.reduction_mode
    failures = []
    for row in report.rows:
        if row.s_n is None:
            failures.append(row.error_type)
            doc.notes.append(f"n={row.n} omitted: {row.error_type}: {row.error}")
            continue
        doc.rows.append({
            "n": row.n,
            "s_n": decimal_string(row.s_n, 40),
            "stable_digits": row.stable_digits,
            "iterations": row.iterations,
            "cpu_seconds": round(row.cpu_seconds, 3),
        })
    if doc.rows:
        return doc, EXIT_OK
    doc.summary["result"] = "no approximation could be computed"
    return doc, EXIT_PRECISION if "PrecisionInsufficient" in failures else EXIT_NO_ROOT


def _mesh_ladder(mesh_max: int) -> list[int]:
    ladder, m = [], 2
    while m < mesh_max:
        ladder.append(m)
        m *= 2
    ladder.append(mesh_max)
    return ladder


def cmd_discretize(cfg: ProblemConfig, args) -> tuple[ReportDocument, int]:
    if cfg.dimension != 2:
        raise DimensionMismatch("the discretization is only implemented for 2x2 matrices")
    doc = ReportDocument("discretize", columns=("mesh", "estimate", "cpu_seconds"), non_rigorous=True)
    tol = max(float(cfg.tolerance), SOLVE_TOL)
    previous = None
    for m in _mesh_ladder(cfg.mesh_size):
        t0 = time.process_time()
        s = solve_dimension_discretized(cfg.matrices, m, tol)
        est = f"{s:.8f}"
        doc.rows.append({
            "mesh": m,
            "estimate": est,
            "stable_digits": agreeing_digits(mpmath.mpf(est), previous, 8),
            "cpu_seconds": round(time.process_time() - t0, 3),
            "non_rigorous": True,
        })
        previous = mpmath.mpf(est)
    doc.notes.append("collocation estimates carry no error bound")
    return doc, EXIT_OK


def cmd_trace_table(cfg: ProblemConfig, args) -> tuple[ReportDocument, int]:
    k = _resolve_k(cfg)
    if k is None:
        raise DimensionMismatch("no k with a verified bracket; pass --k")
    engine = build_engine(cfg.matrices, k, cfg.n_max, cfg.precision_bits, cfg.reduction_mode, args.threads)
    with mpmath.workprec(engine.prec):
        s = mpmath.mpf(args.s) if args.s is not None else k + mpmath.mpf(1) / 2
    table = engine.table(s)
    series = coefficients(table)
    doc = ReportDocument("trace-table", columns=("n", "t_n", "a_n"))
    doc.summary.update(k=k, s=mpmath.nstr(s, 20), a_0=mpmath.nstr(series.coeffs[0], 5))
    doc.metadata["precision_bits"] = engine.prec
    for n in range(1, cfg.n_max + 1):
        row = {"n": n, "t_n": mpmath.nstr(table.values[n - 1], 30), "a_n": mpmath.nstr(series.coeffs[n], 30)}
        if series.precision_limited[n]:
            row["precision_limited"] = True
            doc.notes.append(f"a_{n} suffers heavy cancellation at {engine.prec} bits")
        doc.rows.append(row)
    return doc, EXIT_OK


COMMANDS = {
    "certify": cmd_certify,
    "bracket": cmd_bracket,
    "solve": cmd_solve,
    "discretize": cmd_discretize,
    "trace-table": cmd_trace_table,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affinity-dim",
        description="Rigorous high-precision approximation of the affinity dimension of a tuple of matrices.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON problem configuration")
    parser.add_argument("--n", type=int, help="largest word length (n_max)")
    parser.add_argument("--n-min", type=int, help="smallest word length reported by solve")
    parser.add_argument("--k", type=int, help="integer part of the dimension (auto-detected if omitted)")
    parser.add_argument("--precision", type=int, help="working precision in bits")
    parser.add_argument("--tol", help="secant tolerance, e.g. 1e-40")
    parser.add_argument("--mesh", type=int, help="largest mesh size for discretize")
    parser.add_argument("--s", help="exponent for trace-table (default k + 1/2)")
    parser.add_argument("--threads", type=int, default=1, help="worker processes for the trace computation")
    parser.add_argument("--format", choices=FORMATS, default="text")
    parser.add_argument("--no-certify", action="store_true", help="skip the multipositivity certificates")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config).with_overrides(
            n_max=args.n, n_min=args.n_min, k=args.k, precision_bits=args.precision,
            tolerance=args.tol, mesh_size=args.mesh,
        )
        if cfg.n_min > cfg.n_max:
            cfg = cfg.with_overrides(n_min=1)
        doc, code = COMMANDS[args.command](cfg, args)
    except PrecisionInsufficient as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except DominanceUnverified as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except (NoRootFound, SecantDiverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_ROOT
    except (ConfigError, ValueError, AffinityDimError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.write(render(doc, args.format))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
