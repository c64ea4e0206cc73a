"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 a certificate check exceeded its tolerance.
"""
from __future__ import annotations

import argparse
import csv
from fractions import Fraction
import json
import re
import sys
import time

import numpy as np

from . import selftest
from .closed_form import k_support_dual_norm, k_support_norm, robustness_value
from .core import canonicalize
from .document import (coherence_document, dumps, entanglement_document, value_document,
                       verify_document)
from .entanglement import entanglement_robustness, schmidt_decompose
from .errors import CertificationError, ValidationError
from .primal import certify

EXIT_OK, EXIT_INVALID, EXIT_GAP = 0, 2, 3

def parse_scalar(token: str, exact: bool = False):
    """Read ``0.5``, ``3/5``, ``1e-3``, ``0.3+0.4i`` or ``-2j``."""
    tok = token.strip().replace(" ", "")
    if not tok:
        raise ValidationError("empty entry")
    if exact:
        try:
            return Fraction(tok)
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"exact mode needs rational entries, got {token!r}") from None
    try:
        return float(tok)
    except ValueError:
        pass
    if "/" in tok:
        try:
            return float(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"cannot parse {token!r}") from None
    if tok.endswith("i"):
        tok = tok[:-1] + "j"
        if tok in ("j", "+j", "-j"):
            tok = tok.replace("j", "1j")
    try:
        return complex(tok)
    except ValueError:
        raise ValidationError(f"cannot parse {token!r} as a number") from None


def parse_vector(text: str, exact: bool = False):
    tokens = [t for t in re.split(r"[,\s;]+", text.strip()) if t]
    if not tokens:
        raise ValidationError("no vector entries given")
    values = [parse_scalar(t, exact) for t in tokens]
    if exact:
        return values
    if any(isinstance(v, complex) for v in values):
        return np.array(values, dtype=complex)
    return np.array(values, dtype=float)


def read_matrix(path: str):
    with open(path, newline="") as fh:
        rows = [[parse_scalar(c) for c in row if c.strip()] for row in csv.reader(fh)]
    rows = [r for r in rows if r]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValidationError(f"{path}: matrix rows must be non-empty and of equal length")
    cplx = any(isinstance(x, complex) for r in rows for x in r)
    return np.array(rows, dtype=complex if cplx else float)


def _vector_arg(args):
    if args.vector_file:
        with open(args.vector_file) as fh:
            return parse_vector(fh.read(), args.exact)
    if args.vector is None:
        raise ValidationError("give --vector or --vector-file")
    return parse_vector(args.vector, args.exact)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return f"{x} (~{float(x):.17g})"
    return repr(float(x))


def cmd_value(args, out):
    raw = _vector_arg(args)
    state = canonicalize(raw, args.tolerance_norm, exact=args.exact)
    rv = robustness_value(state, args.k)
    if args.json:
        out.write(dumps(value_document(rv, args.k, raw, args.exact)))
    else:
        out.write(f"value: {_fmt(rv.value)}\nbranch_ell: {rv.branch.ell}\n")
    return EXIT_OK


def cmd_certify(args, out):
    raw = _vector_arg(args)
    t0 = time.perf_counter()
    state = canonicalize(raw, args.tolerance_norm, exact=args.exact)
    cert = certify(state, args.k, args.tolerance, raise_on_gap=False)
    timings = {"certify_seconds": time.perf_counter() - t0} if args.timings else None
    if args.json:
        out.write(dumps(coherence_document(cert, raw, timings)))
    else:
        out.write(f"value: {_fmt(cert.value.value)}\nbranch_ell: {cert.value.branch.ell}\n"
                  f"dual: {cert.dual.kind}, objective {_fmt(cert.dual.objective)}, "
                  f"max submatrix eigenvalue {cert.dual_report.max_submatrix_eig:.17g}\n"
                  f"primal: {len(cert.primal.weights)} atoms, slack trace {_fmt(cert.primal.s)}\n")
        for name, gap in cert.gaps.items():
            out.write(f"  {name:<17} {gap:.3e}\n")
        if cert.near_boundary:
            out.write("note: state lies within 1e-9 of a branch boundary\n")
        out.write(f"status: {'certified' if cert.certified else 'gap'}\n")
        if timings:
            out.write(f"time: {timings['certify_seconds']:.4f} s\n")
    return EXIT_OK if cert.certified else EXIT_GAP


def cmd_entangle(args, out):
    M = read_matrix(args.matrix)
    t0 = time.perf_counter()
    schmidt = schmidt_decompose(M, args.truncation, args.tolerance_norm)
    ecert = entanglement_robustness(schmidt, args.k, args.tolerance)
    timings = {"entangle_seconds": time.perf_counter() - t0} if args.timings else None
    doc = entanglement_document(ecert, M, schmidt, args.tolerance, timings)
    if args.json:
        out.write(dumps(doc))
    else:
        coeffs = ", ".join(f"{c:.12g}" for c in schmidt.coefficients)
        out.write(f"value: {ecert.value:.17g}\ngamma_norm: {ecert.gamma_norm:.17g}\n"
                  f"schmidt coefficients: {coeffs}\nstatus: {doc['status']}\n")
    return EXIT_OK if doc["status"] == "certified" else EXIT_GAP


def cmd_norm(args, out):
    raw = np.asarray(_vector_arg(args) if not args.exact else [float(x) for x in _vector_arg(args)])
    out.write(f"k_support_norm: {k_support_norm(raw, args.k):.17g}\n"
              f"dual_norm: {k_support_dual_norm(raw, args.k):.17g}\n")
    return EXIT_OK


def cmd_verify(args, out):
    text = sys.stdin.read() if args.document == "-" else open(args.document).read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not a JSON document: {exc}") from None
    report = verify_document(doc, args.tolerance)
    for name, gap in report["checks"].items():
        out.write(f"  {name:<20} {gap:.3e}\n")
    out.write(f"status: {report['status']}\n")
    return EXIT_OK if report["status"] == "certified" else EXIT_GAP


def cmd_selftest(args, out):
    results = selftest.run(seed=args.seed, size=args.size, workers=args.workers)
    out.write(selftest.format_table(results) + "\n")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_GAP


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kcoherence",
        description="Robustness of k-coherence and Schmidt-rank-k entanglement of pure states.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, vector=True, k=True):
        if vector:
            p.add_argument("--vector", help="comma-separated amplitudes, e.g. 0.6,0.8i or 3/5,4/5")
            p.add_argument("--vector-file", help="CSV file with the amplitudes")
            p.add_argument("--exact", action="store_true",
                           help="rational arithmetic (real rational unit vectors, n <= 8)")
        if k:
            p.add_argument("--k", type=int, required=True)
        p.add_argument("--tolerance", type=float, default=1e-8)
        p.add_argument("--tolerance-norm", type=float, default=1e-9,
                       help="allowed deviation of the input norm from 1")
        p.add_argument("--json", action="store_true")
        p.add_argument("--timings", action="store_true", help="report wall-clock timings")

    common(sub.add_parser("value", help="closed-form robustness only"))
    common(sub.add_parser("certify", help="value with dual and primal certificates"))
    p = sub.add_parser("entangle", help="Schmidt-rank-k entanglement of a bipartite pure state")
    p.add_argument("--matrix", required=True, help="CSV amplitude matrix, one row per left index")
    p.add_argument("--truncation", type=float, default=1e-12)
    common(p, vector=False)
    common(sub.add_parser("norm", help="k-support norm and its dual"))
    p = sub.add_parser("verify", help="re-check a JSON certificate document")
    p.add_argument("document", help="path, or - for stdin")
    p.add_argument("--tolerance", type=float, default=None)
    p = sub.add_parser("selftest", help="run the randomized property suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=float, default=1.0, help="scale factor for sample counts")
    p.add_argument("--workers", type=int, default=1)
    return parser


COMMANDS = {"value": cmd_value, "certify": cmd_certify, "entangle": cmd_entangle,
            "norm": cmd_norm, "verify": cmd_verify, "selftest": cmd_selftest}


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_GAP


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
