"""JSON dialects: family files, generator specs, expected skeletons, reports.

Floats are written with ``repr`` (shortest string that round-trips in double
precision), so a reloaded file reproduces the exact values written.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FormatError, InvalidFamily, InvalidSpec
from .family import COMPLEX, REAL, OperatorFamily
from .oracle import KINDS, BlockSpec, ExpectedBlock, ScrambleSpec, Skeleton

FAMILY_FORMAT = "anticanon/1"
SPEC_FORMAT = "anticanon-spec/1"
SKELETON_FORMAT = "anticanon-skeleton/1"
REPORT_FORMAT = "anticanon-report/1"


# --- scalars and matrices ----------------------------------------------------


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(v, where: str = "") -> complex:
    if isinstance(v, bool):
        raise FormatError("expected a number", where)
    if isinstance(v, (int, float)):
        z = complex(v)
    elif isinstance(v, list) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        z = complex(v[0], v[1])
    else:
        raise FormatError("expected a number or a [re, im] pair", where)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise FormatError("non-finite entry", where)
    return z


def encode_matrix(m: np.ndarray, real: bool = False) -> list:
    m = np.asarray(m)
    if real:
        return [[float(x.real) for x in row] for row in m]
    return [[encode_complex(x) for x in row] for row in m]


def decode_matrix(rows, n: int | None, field_mode: str, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise FormatError("expected a non-empty list of rows", where)
    n_rows = len(rows)
    if n is not None and n_rows != n:
        raise FormatError(f"expected {n} rows, found {n_rows}", where)
    out = np.zeros((n_rows, n_rows), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n_rows:
            raise FormatError(f"expected {n_rows} entries", f"{where}[{i}]")
        for j, v in enumerate(row):
            w = f"{where}[{i}][{j}]"
            if field_mode == REAL and not (isinstance(v, (int, float)) and not isinstance(v, bool)):
                raise FormatError("real-mode entries must be plain numbers", w)
            out[i, j] = decode_complex(v, w)
    return out


# --- file helpers ------------------------------------------------------------


def read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", str(path)) from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise FormatError("expected an object", where)
    if key not in d:
        raise FormatError(f"missing field {key!r}", where)
    return d[key]


# --- family files ------------------------------------------------------------


def family_to_dict(fam: OperatorFamily) -> dict:
    real = fam.field_mode == REAL
    return {
        "format": FAMILY_FORMAT,
        "field_mode": fam.field_mode,
        "n": fam.n,
        "operators": [
            {"name": label, "matrix": encode_matrix(op, real)} for label, op in zip(fam.labels, fam.ops)
        ],
    }


def family_from_dict(d: dict) -> OperatorFamily:
    version = _require(d, "format", "$")
    if version != FAMILY_FORMAT:
        raise FormatError(f"unrecognized format {version!r}, expected {FAMILY_FORMAT!r}", "$.format")
    mode = _require(d, "field_mode", "$")
    if mode not in (REAL, COMPLEX):
        raise FormatError(f"field_mode must be 'real' or 'complex', got {mode!r}", "$.field_mode")
    n = _require(d, "n", "$")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise FormatError("n must be a positive integer", "$.n")
    ops_raw = _require(d, "operators", "$")
    if not isinstance(ops_raw, list) or not ops_raw:
        raise FormatError("expected a non-empty list", "$.operators")
    ops, labels = [], []
    for a, entry in enumerate(ops_raw):
        where = f"$.operators[{a}]"
        name = _require(entry, "name", where)
        if not isinstance(name, str) or not name:
            raise FormatError("name must be a non-empty string", where + ".name")
        ops.append(decode_matrix(_require(entry, "matrix", where), n, mode, where + ".matrix"))
        labels.append(name)
    try:
        return OperatorFamily(tuple(op.real if mode == REAL else op for op in ops), tuple(labels), mode)
    except InvalidFamily as exc:
        raise FormatError(str(exc), "$.operators") from exc


def load_family(path) -> OperatorFamily:
    return family_from_dict(read_json(path))


def save_family(fam: OperatorFamily, path) -> None:
    write_atomic(path, dumps(family_to_dict(fam)))


# --- generator specs ---------------------------------------------------------


def _constants_from(raw, where: str) -> dict:
    if not isinstance(raw, dict):
        raise FormatError("constants must be an object keyed by operator number", where)
    out = {}
    for k, v in raw.items():
        try:
            a = int(k) - 1
        except ValueError as exc:
            raise FormatError(f"bad operator number {k!r}", where) from exc
        out[a] = decode_complex(v, f"{where}.{k}")
    return out


def spec_from_dict(d: dict) -> tuple[list[BlockSpec], int, str, ScrambleSpec, list | None]:
    """Parse a generator spec; operator numbers in the file are 1-based."""
    version = _require(d, "format", "$")
    if version != SPEC_FORMAT:
        raise FormatError(f"unrecognized format {version!r}, expected {SPEC_FORMAT!r}", "$.format")
    N = _require(d, "N", "$")
    if not isinstance(N, int) or N < 1:
        raise FormatError("N must be a positive integer", "$.N")
    mode = d.get("field_mode", COMPLEX)
    if mode not in (REAL, COMPLEX):
        raise FormatError(f"bad field_mode {mode!r}", "$.field_mode")
    raw_blocks = _require(d, "blocks", "$")
    if not isinstance(raw_blocks, list) or not raw_blocks:
        raise FormatError("expected a non-empty list of blocks", "$.blocks")
    specs = []
    for i, b in enumerate(raw_blocks):
        where = f"$.blocks[{i}]"
        kind = _require(b, "kind", where)
        if kind not in KINDS:
            raise FormatError(f"kind must be one of {KINDS}", where + ".kind")
        support = [int(a) - 1 for a in b.get("support", [])]
        try:
            specs.append(
                BlockSpec(
                    kind,
                    _require(b, "dim", where),
                    tuple(support),
                    _constants_from(b.get("constants", {}), where + ".constants"),
                    int(b.get("seed", i)),
                )
            )
        except InvalidSpec as exc:
            raise FormatError(str(exc), where) from exc
    s = d.get("scramble", {})
    try:
        scr = ScrambleSpec(
            conj_cond_max=float(s.get("conj_cond_max", 50.0)),
            perm_seed=int(s.get("perm_seed", 0)),
            noise=float(s.get("noise", 0.0)),
            conj_seed=s.get("conj_seed"),
        )
    except InvalidSpec as exc:
        raise FormatError(str(exc), "$.scramble") from exc
    placement = d.get("placement")
    if placement is not None:
        placement = [[int(i) - 1 for i in p] for p in placement]
    return specs, N, mode, scr, placement


def spec_to_dict(specs, N, field_mode=COMPLEX, scramble=None, placement=None) -> dict:
    out = {
        "format": SPEC_FORMAT,
        "N": N,
        "field_mode": field_mode,
        "blocks": [
            {
                "kind": s.kind,
                "dim": s.dim,
                "support": [a + 1 for a in s.support],
                "constants": {str(a + 1): encode_complex(c) for a, c in s.constants.items()},
                "seed": s.seed,
            }
            for s in specs
        ],
    }
    if scramble is not None:
        out["scramble"] = {
            "conj_cond_max": scramble.conj_cond_max,
            "perm_seed": scramble.perm_seed,
            "noise": scramble.noise,
        }
        if scramble.conj_seed is not None:
            out["scramble"]["conj_seed"] = scramble.conj_seed
    if placement is not None:
        out["placement"] = [[i + 1 for i in p] for p in placement]
    return out


# --- skeletons ---------------------------------------------------------------


def skeleton_to_dict(sk: Skeleton, labels) -> dict:
    return {
        "format": SKELETON_FORMAT,
        "n": sk.n,
        "N": sk.N,
        "blocks": [
            {
                "kind": b.kind,
                "support": [labels[a] for a in b.support],
                "dim": b.dim,
                "constants": [encode_complex(c) for c in b.constants],
            }
            for b in sk.blocks
        ],
    }


def skeleton_from_dict(d: dict, labels) -> Skeleton:
    if _require(d, "format", "$") != SKELETON_FORMAT:
        raise FormatError("unrecognized skeleton format", "$.format")
    index = {lab: a for a, lab in enumerate(labels)}
    blocks = []
    for i, b in enumerate(_require(d, "blocks", "$")):
        where = f"$.blocks[{i}]"
        try:
            support = tuple(index[x] for x in b["support"])
        except KeyError as exc:
            raise FormatError(f"unknown operator {exc.args[0]!r}", where + ".support") from exc
        consts = tuple(decode_complex(c, where + ".constants") for c in b.get("constants", []))
        blocks.append(ExpectedBlock(b["kind"], support, int(b["dim"]), consts))
    return Skeleton(int(d["n"]), int(d["N"]), tuple(blocks))


# --- reports -----------------------------------------------------------------


def _trace_to_json(trace: dict) -> dict:
    return {k: (_trace_to_json(v) if isinstance(v, dict) else v) for k, v in trace.items()}


def report_to_dict(rep, entries=None, exit_code: int = 0, messages=()) -> dict:
    """JSON-ready report; ``entries`` (from ``apply_canonical``) adds the canonical section."""
    labels = rep.labels
    real = rep.field_mode == REAL
    blocks = []
    for i, b in enumerate(rep.blocks):
        blocks.append(
            {
                "index": i,
                "kind": b.kind,
                "dim": b.dim,
                "columns": list(b.columns),
                "support": [labels[a] for a in b.support],
                "constants": {labels[a]: encode_complex(c) for a, c in b.constants.items()},
                "groups": [
                    {
                        "constants": {labels[a]: encode_complex(c) for a, c in g.constants.items()},
                        "columns": list(g.columns),
                    }
                    for g in b.groups
                ],
                "invariance_leak": b.invariance_leak,
                "signature": list(b.signature) if b.signature is not None else None,
                "restrictions": {labels[a]: encode_matrix(r) for a, r in b.restrictions.items()},
            }
        )
    out = {
        "format": REPORT_FORMAT,
        "input": {
            "n": rep.n,
            "N": rep.N,
            "field_mode": rep.field_mode,
            "labels": list(labels),
            "classes": {lab: c for lab, c in zip(labels, rep.classes)},
        },
        "tolerance": {
            "rel_zero": rep.tolerance.rel_zero,
            "eig_cluster": rep.tolerance.eig_cluster,
            "scale": rep.tolerance.scale,
        },
        "dims": rep.dims(),
        "blocks": blocks,
        "support_groups": [
            {"support": [labels[a] for a in s], "blocks": list(ix)} for s, ix in rep.support_groups
        ],
        "clifford_counts": {str(k): v for k, v in sorted(rep.k_counts.items())},
        "residuals": dict(rep.residuals),
        "notes": list(rep.notes),
        "basis": encode_matrix(rep.P),
        "real_input": real,
    }
    if entries is not None:
        canon = []
        for i, e in enumerate(entries):
            item = {"block": i, "kind": e.block.kind, "note": e.note, "form": None}
            f = e.form
            if f is not None and hasattr(f, "generators"):
                item["form"] = {
                    "type": "clifford",
                    "local_basis": encode_matrix(f.local_basis),
                    "generators": {
                        labels[a]: encode_matrix(g) for a, g in zip(e.block.support, f.generators)
                    },
                    "normalizers": {
                        labels[a]: encode_complex(s) for a, s in zip(e.block.support, f.normalizers)
                    },
                    "depth": f.depth,
                    "recursion_trace": _trace_to_json(f.recursion_trace),
                    "residual": f.residual,
                }
            elif f is not None:
                item["form"] = {
                    "type": "single",
                    "local_basis": encode_matrix(f.local_basis),
                    "eigenvalues": [encode_complex(v) for v in f.eigenvalues],
                    "opposite_pairs": f.opposite_pairs,
                    "residual": f.residual,
                }
            canon.append(item)
        out["canonical"] = canon
    out["diagnostics"] = {"exit": exit_code, "messages": list(messages)}
    return out


def save_report(report: dict, path) -> None:
    write_atomic(path, dumps(report))


def load_report(path) -> dict:
    d = read_json(path)
    if not isinstance(d, dict) or d.get("format") != REPORT_FORMAT:
        raise FormatError("not an anticanon report", str(path))
    return d


def summarize(report: dict) -> str:
    """Human-readable summary rendered from a report dict."""
    inp = report["input"]
    lines = [f"n={inp['n']} N={inp['N']} field={inp['field_mode']}  dims={report['dims']}"]
    for b in report["blocks"]:
        sup = ",".join(b["support"]) or "-"
        consts = ", ".join(
            f"{k}^2={_fmt(decode_complex(v))}" for k, v in b["constants"].items()
        )
        line = f"  [{b['index']}] {b['kind']:<15} dim={b['dim']:<3} support={{{sup}}}"
        if consts:
            line += f"  {consts}"
        if b["signature"] is not None:
            line += f"  signature={tuple(b['signature'])}"
        lines.append(line)
    r = report["residuals"]
    lines.append(
        "  residuals: " + ", ".join(f"{k}={v:.2e}" for k, v in r.items())
    )
    for note in report["notes"]:
        lines.append(f"  note: {note}")
    for c in report.get("canonical", []):
        f = c["form"]
        if f is None:
            lines.append(f"  canonical [{c['block']}]: none ({c['note']})")
            continue
        extra = f" depth={f['depth']}" if f["type"] == "clifford" else ""
        lines.append(f"  canonical [{c['block']}]: {f['type']}{extra} residual={f['residual']:.2e}")
    return "\n".join(lines)


def _fmt(z: complex) -> str:
    if abs(z.imag) < 1e-12:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}i"
