"""Command-line front end.

Exit codes: 0 ok, 1 hypothesis violation, 2 degenerate (square-diagonalizable
only) regime, 3 I/O or format error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import formats
from .canonical import apply_canonical
from .decomposition import DEGENERATE, decompose
from .errors import AnticanonError, FormatError, IllConditionedWarning, InvalidSpec
from .family import (
    Diagonalizability,
    anticommutation_residual,
    check_linear_independence,
    check_squared_commutes,
    classify_family,
    has_square_zero_member,
)
from .numerics import TolerancePolicy
from .oracle import ScrambleSpec, build_family, scramble

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_DEGENERATE = 2
EXIT_FORMAT = 3


def _policy(args) -> TolerancePolicy:
    if getattr(args, "tol", None) is None:
        return TolerancePolicy()
    return TolerancePolicy.from_rel_zero(args.tol)


def check_family(fam, base: TolerancePolicy) -> tuple[int, dict]:
    """Run the hypothesis checks; returns (exit code, JSON-ready summary)."""
    tol = fam.tolerance(base)
    ac = anticommutation_residual(fam, tol)
    ac_max = float(ac.max(initial=0.0))
    classes = classify_family(fam, tol)
    anti = ac_max <= tol.rel_zero
    sq = check_squared_commutes(fam, tol) if anti else None
    sq_zero = has_square_zero_member(fam, tol)
    indep = check_linear_independence(fam, tol)
    messages = []
    code = EXIT_OK
    if not anti:
        messages.append(f"family is not anti-commuting (max residual {ac_max:.3e})")
        code = EXIT_VIOLATION
    if any(c.kind is Diagonalizability.UNSUPPORTED for c in classes):
        messages.append("some operator is neither diagonalizable nor square-diagonalizable")
        code = EXIT_VIOLATION
    if anti and sq is not None and sq > tol.rel_zero:
        messages.append(f"squared family fails to commute (residual {sq:.3e})")
        code = EXIT_VIOLATION
    if anti and not sq_zero and not indep:
        messages.append("anti-commuting family without square-zero members is linearly dependent")
        code = EXIT_VIOLATION
    if code == EXIT_OK and any(c.kind is Diagonalizability.SQUARE_DIAGONALIZABLE_ONLY for c in classes):
        messages.append("square-diagonalizable-only members present: degenerate regime")
        code = EXIT_DEGENERATE
    summary = {
        "n": fam.n,
        "N": fam.N,
        "field_mode": fam.field_mode,
        "anticommutation_max": ac_max,
        "anticommuting": anti,
        "squared_commutation": sq,
        "linearly_independent": indep,
        "square_zero_member": sq_zero,
        "operators": [
            {
                "name": lab,
                "class": c.kind.value,
                "condition": c.condition,
                "kernel_gap": c.kernel_gap,
                "kernel_dim": c.kernel_dim,
            }
            for lab, c in zip(fam.labels, classes)
        ],
        "exit": code,
        "messages": messages,
    }
    return code, summary


def _print_check(summary: dict) -> None:
    print(
        f"n={summary['n']} N={summary['N']} field={summary['field_mode']} "
        f"anti-commutation residual={summary['anticommutation_max']:.3e}"
    )
    for op in summary["operators"]:
        print(f"  {op['name']:<8} {op['class']:<25} kernel_gap={op['kernel_gap']} cond={op['condition']:.3g}")
    print(f"  linearly independent: {summary['linearly_independent']}")
    for m in summary["messages"]:
        print(f"  {m}")


def cmd_check(args) -> int:
    fam = formats.load_family(args.input)
    code, summary = check_family(fam, _policy(args))
    if args.json:
        print(json.dumps(summary, indent=1))
    else:
        _print_check(summary)
    return code


def cmd_decompose(args) -> int:
    fam = formats.load_family(args.input)
    base = _policy(args)
    code, summary = check_family(fam, base)
    if code == EXIT_VIOLATION:
        for m in summary["messages"]:
            print(f"error: {m}", file=sys.stderr)
        return code
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", IllConditionedWarning)
            rep = decompose(fam, base)
            entries = apply_canonical(rep, fam) if args.canon else None
    except AnticanonError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    messages = list(summary["messages"]) + [str(w.message) for w in caught]
    if any(b.kind == DEGENERATE for b in rep.blocks):
        code = EXIT_DEGENERATE
    report = formats.report_to_dict(rep, entries, code, messages)
    formats.save_report(report, args.output)
    print(formats.summarize(report))
    return code


def cmd_generate(args) -> int:
    try:
        specs, N, mode, scr, placement = formats.spec_from_dict(formats.read_json(args.spec))
        if args.seed is not None:
            scr = ScrambleSpec(scr.conj_cond_max, args.seed, scr.noise, args.seed + 1)
        fam, skel = build_family(specs, N, mode, placement)
    except InvalidSpec as exc:
        raise FormatError(str(exc), str(args.spec)) from exc
    fam = scramble(fam, scr)
    out = Path(args.output)
    formats.save_family(fam, out)
    sidecar = out.with_name(out.stem + ".expected.json")
    formats.write_atomic(sidecar, formats.dumps(formats.skeleton_to_dict(skel, fam.labels)))
    print(f"wrote {out} (n={fam.n}, N={fam.N}) and {sidecar}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors share the format-error code; 2 is reserved for the degenerate regime
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FORMAT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="anticanon",
        description="Decompose anti-commuting operator families into Clifford blocks.",
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="verify the family hypotheses")
    c.add_argument("input")
    c.add_argument("--tol", type=float, default=None, help="relative zero threshold (default 1e-9)")
    c.add_argument("--json", action="store_true", help="print the machine-readable summary")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("decompose", help="write the invariant decomposition report")
    d.add_argument("input")
    d.add_argument("-o", "--output", required=True)
    d.add_argument("--canon", action="store_true", help="also construct canonical forms")
    d.add_argument("--tol", type=float, default=None, help="relative zero threshold (default 1e-9)")
    d.set_defaults(func=cmd_decompose)

    g = sub.add_parser("generate", help="build a family from a block spec")
    g.add_argument("spec")
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--seed", type=int, default=None, help="override the scramble seed")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "tol", None) is not None and not (0 < args.tol < 0.01):
        print("error: --tol must lie in (0, 0.01)", file=sys.stderr)
        return EXIT_FORMAT
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    raise SystemExit(main())
