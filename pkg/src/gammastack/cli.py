"""Command-line driver: validate | stack | quantize | admissibilize.

Exit codes: 0 success, 1 mathematical failure (nonzero residual or invalid
axioms), 2 input error.  All reports and certificates are deterministic
byte for byte for identical inputs.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from gammastack.liealg import classical_yang_baxter, validate_gamma_lba, wedge2_apply, _add_into
from gammastack.problemfile import ProblemParseError, build_que_data, parse_problem
from gammastack.quantum import (
    QuantumError,
    admissibilize,
    quantize_stack,
    validate_que_data,
)
from gammastack.stack import StackBuildError, verify_stack


def data_path(name: str) -> Path:
    """Path of a bundled problem file."""
    return Path(resources.files("gammastack").joinpath("data", name))


def _load(path_str: str):
    path = Path(path_str)
    if not path.exists():
        bundled = data_path(path_str)
        if bundled.exists():
            path = bundled
        else:
            print(f"error: no such file: {path_str}", file=sys.stderr)
            raise SystemExit(2)
    try:
        return parse_problem(path.read_text(encoding="utf-8"))
    except ProblemParseError as exc:
        print(f"error: {path_str}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    problem = _load(args.file)
    issues = [str(i) for i in validate_gamma_lba(problem.G)]
    if problem.r is not None:
        cybe = classical_yang_baxter(problem.G.lba, problem.r)
        if cybe:
            issues.append("rmatrix: classical Yang-Baxter equation fails")
        for g in problem.G.group.elements():
            fg = wedge2_apply(problem.G.theta[g], problem.r)
            for key, c in problem.r.items():
                _add_into(fg, key, -c)
            diff = dict(fg)
            for key, c in problem.G.f[g].items():
                _add_into(diff, key, -c)
            if diff:
                issues.append(
                    f"rmatrix: twist map differs from theta^2(r) - r at {problem.G.group.labels[g]}"
                )
    if problem.quantum is not None:
        try:
            data = build_que_data(problem)
            issues.extend(validate_que_data(data))
        except (QuantumError, ValueError) as exc:
            issues.append(f"quantum data: {exc}")
    if issues:
        for msg in sorted(issues):
            print(f"INVALID {msg}")
        return 1
    print("valid")
    return 0


def cmd_stack(args) -> int:
    problem = _load(args.file)
    bad = validate_gamma_lba(problem.G)
    if bad:
        print(f"INVALID {bad[0]}", file=sys.stderr)
        return 1
    n = args.degree if args.degree is not None else problem.degree
    try:
        cert = verify_stack(problem.G, n, threads=args.threads, seed=args.seed)
    except StackBuildError as exc:
        print(f"stack construction failed: {exc}", file=sys.stderr)
        return 1
    _emit(cert.to_json(problem.G.lba.labels), args.out)
    return 0 if cert.ok else 1


def cmd_quantize(args) -> int:
    problem = _load(args.file)
    if problem.quantum is None:
        print("error: problem file carries no quantum data", file=sys.stderr)
        return 2
    try:
        data = build_que_data(problem, M=args.hbar, D=args.pbw)
    except (QuantumError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.threads > 1:
        # admissibilization per group element is independent; warm the caches
        # in parallel, then run the deterministic certificate assembly
        ctx = data.ctx
        with ThreadPoolExecutor(max_workers=args.threads) as ex:
            list(ex.map(lambda g: admissibilize(ctx, data.F[g]), ctx.G.group.elements()))
    cert = quantize_stack(data)
    _emit(cert.to_json(problem.G.lba.labels), args.out)
    return 0 if cert.ok else 1


def cmd_admissibilize(args) -> int:
    problem = _load(args.file)
    if problem.quantum is None:
        print("error: problem file carries no quantum data", file=sys.stderr)
        return 2
    try:
        data = build_que_data(problem, M=args.hbar, D=args.pbw)
    except (QuantumError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    glabels = problem.G.group.labels
    if args.target not in glabels:
        print(f"error: unknown group element {args.target!r}", file=sys.stderr)
        return 2
    g = glabels.index(args.target)
    try:
        b, fprime = admissibilize(data.ctx, data.F[g])
    except QuantumError as exc:
        print(f"admissibilization failed: {exc}", file=sys.stderr)
        return 1
    labels = problem.G.lba.labels
    lines = [
        f"gauge element b[{args.target}] = {b.format(labels)}",
        f"admissible twist F'[{args.target}] = {fprime.format(labels)}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gammastack",
        description="Exact certificates for group Lie bialgebra stacks and their quantizations",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized spot checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a problem file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("stack", help="build and verify the Poisson-Hopf stack certificate")
    p.add_argument("file")
    p.add_argument("--degree", "-N", type=int, default=None, help="truncation degree")
    p.add_argument("--out", default=None, help="certificate output path (default stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(fn=cmd_stack)

    p = sub.add_parser("quantize", help="build and verify the quantum stack certificate")
    p.add_argument("file")
    p.add_argument("--hbar", type=int, default=None, help="hbar truncation order")
    p.add_argument("--pbw", type=int, default=None, help="PBW degree bound")
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(fn=cmd_quantize)

    p = sub.add_parser("admissibilize", help="gauge one twist into admissible form")
    p.add_argument("file")
    p.add_argument("--target", required=True, help="group element label of F_{e,target}")
    p.add_argument("--hbar", type=int, default=None)
    p.add_argument("--pbw", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_admissibilize)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
