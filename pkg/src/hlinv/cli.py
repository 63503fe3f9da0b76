"""Command-line front end.

Exit codes: 0 success or equivalent, 1 distinct, 2 unreadable input,
3 bad usage, 4 unknown.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

import jsonschema

from . import classify as cl
from . import handlebody as hb
from . import hypermatrix as hm
from .magnus import ParseError, delta, mu, mu_bar

EXIT_OK, EXIT_DISTINCT, EXIT_PARSE, EXIT_USAGE, EXIT_UNKNOWN = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class DocumentError(Exception):
    pass


_WORD_MAP = {"type": "object", "additionalProperties": {"type": "string"}}

PRESENTATION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["components"],
    "properties": {
        "components": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["genus", "circles"],
                "properties": {
                    "genus": {"type": "integer", "minimum": 1},
                    "circles": {"type": "array", "items": {"type": "string", "minLength": 1}},
                },
            },
        },
        "longitudes": _WORD_MAP,
    },
}

SCHEMA_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n", "genera"],
    "properties": {
        "n": {"type": "integer", "minimum": 2},
        "genera": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "counts": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["p", "ks", "a"],
                "properties": {
                    "p": {"type": "integer", "minimum": 1},
                    "ks": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                    "a": {"type": "integer"},
                },
            },
        },
    },
}

_HMAT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dims", "entries"],
    "properties": {
        "dims": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "modulus": {"type": "integer", "minimum": 0},
        "entries": {"type": "array", "items": {"type": "integer"}},
    },
}

HYPERMATRIX_SCHEMA = {
    "oneOf": [
        _HMAT,
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["tuple"],
            "properties": {"tuple": {"type": "array", "minItems": 1, "items": _HMAT}},
        },
    ]
}


# ---------------------------------------------------------------- documents


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _validate(doc: Any, schema: dict, path: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "document"
        raise DocumentError(f"{path}: {where}: {exc.message}") from None


def presentation_from_doc(doc: dict, path: str = "<document>") -> hb.HandlebodyPresentation:
    _validate(doc, PRESENTATION_SCHEMA, path)
    comps = []
    for c in doc["components"]:
        if len(c["circles"]) != c["genus"]:
            raise DocumentError(f"{path}: component with genus {c['genus']} lists {len(c['circles'])} circles")
        comps.append(c["circles"])
    labels = [x for c in comps for x in c]
    if len(set(labels)) != len(labels):
        dup = next(x for x in labels if labels.count(x) > 1)
        raise DocumentError(f"{path}: circle label {dup!r} is used twice")
    longitudes = {}
    for label, text in sorted(doc.get("longitudes", {}).items()):
        if label not in labels:
            raise DocumentError(f"{path}: longitude given for unknown circle {label!r}")
        try:
            longitudes[label] = hb.parse_word(text, labels)
        except ParseError as exc:
            raise DocumentError(f"{path}: longitude of {label!r}: {exc} (token {exc.token!r})") from None
    return hb.HandlebodyPresentation.build(comps, longitudes)


def presentation_to_doc(pres: hb.HandlebodyPresentation) -> dict:
    return {
        "components": [{"genus": c.genus, "circles": list(c.circles)} for c in pres.components],
        "longitudes": {c: str(w) for c, w in pres.link.longitudes.items() if w},
    }


def schema_from_doc(doc: dict, path: str = "<document>") -> hb.ClasperSchema:
    _validate(doc, SCHEMA_SCHEMA, path)
    counts = {}
    for entry in doc.get("counts", []):
        key = (entry["p"], *entry["ks"])
        counts[key] = counts.get(key, 0) + entry["a"]
    try:
        return hb.ClasperSchema(doc["n"], tuple(doc["genera"]), counts)
    except ValueError as exc:
        raise DocumentError(f"{path}: {exc}") from None


def schema_to_doc(s: hb.ClasperSchema) -> dict:
    return {
        "n": s.n,
        "genera": list(s.genera),
        "counts": [{"p": k[0], "ks": list(k[1:]), "a": a} for k, a in s.counts.items()],
    }


def hypermatrices_from_doc(doc: dict, path: str = "<document>") -> tuple[list[hm.Hypermatrix], bool]:
    _validate(doc, HYPERMATRIX_SCHEMA, path)
    items = doc["tuple"] if "tuple" in doc else [doc]
    out = []
    for item in items:
        modulus = item.get("modulus", 0)
        try:
            H = hm.Hypermatrix(tuple(item["dims"]), tuple(item["entries"]), 0)
            out.append(hm.reduce_mod(H, modulus))
        except ValueError as exc:
            raise DocumentError(f"{path}: {exc}") from None
    return out, "tuple" in doc


def hypermatrix_to_doc(H: hm.Hypermatrix) -> dict:
    return {"dims": list(H.dims), "modulus": H.modulus, "entries": list(H.entries)}


def load_presentation(path: str) -> hb.HandlebodyPresentation:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise DocumentError(f"{path}: expected a JSON object")
    if "components" in doc:
        return presentation_from_doc(doc, path)
    if "n" in doc:
        return hb.from_clasper_schema(schema_from_doc(doc, path))
    raise DocumentError(f"{path}: neither a presentation (components) nor a schema (n)")


def load_hypermatrices(path: str) -> tuple[list[hm.Hypermatrix], bool]:
    doc = _load_json(path)
    if not isinstance(doc, dict) or not ("dims" in doc or "tuple" in doc):
        raise DocumentError(f"{path}: not a hypermatrix document (dims or tuple)")
    return hypermatrices_from_doc(doc, path)


# ---------------------------------------------------------------- output helpers


def _emit(args, record: dict, lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(record, sort_keys=True, indent=2))
    else:
        for line in lines:
            print(line)


def _seq(I) -> str:
    return ",".join(str(i) for i in I)


def _ed_text(ed) -> str:
    return "(" + ",".join("{" + ",".join(map(str, x)) + "}" for x in ed) + ")"


def _bound_text(x) -> str | int | None:
    if x == float("inf"):
        return "inf"
    return x


# ---------------------------------------------------------------- commands


def cmd_mu(args) -> int:
    pres = load_presentation(args.file)
    parts = [p.strip() for p in args.sequence.split(",")]
    if any(not p for p in parts):
        raise UsageError(f"empty entry in sequence {args.sequence!r}")
    if args.components:
        try:
            I = tuple(int(p) for p in parts)
        except ValueError:
            bad = next(p for p in parts if not p.lstrip("-").isdigit())
            raise UsageError(f"component numbers must be integers, got {bad!r}") from None
        try:
            datum = hb.hypermatrix_of(pres, I)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        record = {"sequence": list(I), "delta": datum.delta_I, **hypermatrix_to_doc(datum.matrix)}
        _emit(args, record, [f"I={_seq(I)} delta={datum.delta_I} matrix={datum.matrix}"])
        return EXIT_OK
    labels = set(pres.link.circles)
    for p in parts:
        if p not in labels:
            raise UsageError(f"unknown label {p!r}")
    if len(set(parts)) != len(parts):
        dup = next(p for p in parts if parts.count(p) > 1)
        raise UsageError(f"label {dup!r} repeats in the sequence")
    if len(parts) < 2:
        raise UsageError("the sequence needs at least two labels")
    value, d = mu(pres.link, parts), delta(pres.link, parts)
    res = mu_bar(pres.link, parts)
    record = {"sequence": parts, "mu": value, "delta": d, "residue": res.value}
    _emit(args, record, [f"mu={value} delta={d} residue={res.value}" + (f" (mod {d})" if d else "")])
    return EXIT_OK


def _datum_record(x: hb.InvariantDatum, bound: int | None, budget: int) -> dict:
    H = x.matrix
    row = {"I": list(x.I), "delta": x.delta_I, "dims": list(H.dims), "entries": list(H.entries)}
    if x.delta_I:
        row["ed_mod"] = [list(e) for e in hm.cokernel_divisors(H)]
        return row
    row["ed"] = [list(e) for e in hm.elementary_divisors(H)]
    row["mlrank"] = list(hm.multilinear_rank(H))
    B = max(H.max_abs(), 1) if bound is None else bound
    if B >= H.max_abs():
        rb = hm.tensor_rank_bounds(H, B, budget)
        row["rank_bounds"] = {"lower": rb.lower, "upper": _bound_text(rb.upper), "exact": rb.exact, "bound": B}
    if len(set(H.dims)) == 1 and H.order % 2 == 0:
        row["abs_hyperdet"] = abs(hm.hyperdeterminant(H))
    return row


def _datum_line(row: dict, H: hm.Hypermatrix) -> str:
    parts = [f"I={_seq(row['I'])}", f"delta={row['delta']}", f"matrix={H}"]
    if "ed_mod" in row:
        parts.append(f"ed_mod={_ed_text(row['ed_mod'])}")
    else:
        parts.append(f"ed={_ed_text(row['ed'])}")
        parts.append(f"mlrank=({_seq(row['mlrank'])})")
        if "rank_bounds" in row:
            rb = row["rank_bounds"]
            parts.append(f"rank=[{rb['lower']},{rb['upper']}]{' exact' if rb['exact'] else ''}")
        if "abs_hyperdet" in row:
            parts.append(f"|hyperdet|={row['abs_hyperdet']}")
    return " ".join(parts)


def cmd_profile(args) -> int:
    pres = load_presentation(args.file)
    p = cl.profile(pres)
    rows, lines = [], []
    for x in p.data.values():
        row = _datum_record(x, args.bound, args.budget)
        rows.append(row)
        lines.append(_datum_line(row, x.matrix))
    record = {"n": p.n, "genera": list(p.genera), "rows": rows}
    _emit(args, record, [f"n={p.n} genera=({_seq(p.genera)})"] + lines)
    return EXIT_OK


def cmd_classify(args) -> int:
    a, b = load_presentation(args.file_a), load_presentation(args.file_b)
    res = cl.classify_pair(a, b, budget=args.budget)
    record: dict = {"verdict": str(res.verdict)}
    lines = [str(res.verdict)]
    if res.verdict is cl.Verdict.EQUIVALENT:
        record["witness"] = hm.format_moves(res.witness or ())
        lines.append(f"witness: {record['witness']}")
    elif res.verdict is cl.Verdict.DISTINCT:
        sep = res.separation
        record["invariant"] = sep.invariant
        record["I"] = None if sep.I is None else list(sep.I)
        record["values"] = [_jsonable(sep.a), _jsonable(sep.b)]
        lines.append(f"invariant: {sep}")
    else:
        record["report"] = _jsonable(res.report)
        lines.append("report: " + ", ".join(f"{k}={v}" for k, v in sorted(res.report.items())))
    _emit(args, record, lines)
    return {cl.Verdict.EQUIVALENT: EXIT_OK, cl.Verdict.DISTINCT: EXIT_DISTINCT}.get(res.verdict, EXIT_UNKNOWN)


def _jsonable(v):
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if v == float("inf"):
        return "inf"
    return v


def _require_integral(H: hm.Hypermatrix, what: str) -> None:
    if H.modulus:
        raise UsageError(f"{what} needs modulus 0, got {H.modulus}")


def cmd_hmat(args) -> int:
    hs, is_tuple = load_hypermatrices(args.file)
    results = []
    lines = []
    for H in hs:
        if args.op == "flatten":
            if not 1 <= args.axis <= H.order:
                raise UsageError(f"axis {args.axis} out of range 1..{H.order}")
            M = hm.flatten(H, args.axis)
            results.append({"rows": M.rows, "cols": M.cols, "matrix": M.tolist()})
            lines.extend(" ".join(f"{x:>{_width(M)}}" for x in row) for row in M.tolist())
        elif args.op == "ed":
            ed = hm.cokernel_divisors(H) if H.modulus else hm.elementary_divisors(H)
            results.append({"ed_mod" if H.modulus else "ed": [list(e) for e in ed]})
            lines.append(("ed_mod=" if H.modulus else "ed=") + _ed_text(ed))
        elif args.op == "mlrank":
            _require_integral(H, "mlrank")
            r = hm.multilinear_rank(H)
            results.append({"mlrank": list(r)})
            lines.append(f"mlrank=({_seq(r)})")
        elif args.op == "rankt":
            _require_integral(H, "rankt")
            if args.bound < H.max_abs():
                raise UsageError(f"--bound {args.bound} is below the largest entry {H.max_abs()}")
            rb = hm.tensor_rank_bounds(H, args.bound, args.budget)
            results.append({"lower": rb.lower, "upper": _bound_text(rb.upper), "exact": rb.exact})
            lines.append(f"lower {rb.lower} upper {_bound_text(rb.upper)} {'exact' if rb.exact else 'inexact'}")
        elif args.op == "hyperdet":
            _require_integral(H, "hyperdet")
            if len(set(H.dims)) != 1:
                raise UsageError(f"hyperdet needs a cubical hypermatrix, got dims {H.dims}")
            v = hm.hyperdeterminant(H)
            results.append({"hyperdet": v})
            lines.append(str(v))
        elif args.op == "apply":
            try:
                moves = hm.parse_moves(args.moves)
                for mv in moves:
                    mv.check(H.dims)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            out = hm.apply_moves(H, moves)
            results.append(hypermatrix_to_doc(out))
    if args.op == "apply":
        doc = {"tuple": results} if is_tuple else results[0]
        print(json.dumps(doc, sort_keys=True, indent=None if not args.json else 2))
        return EXIT_OK
    _emit(args, {"results": results} if is_tuple else results[0], lines)
    return EXIT_OK


def _width(M: hm.Matrix) -> int:
    return max((len(str(x)) for x in M.entries), default=1)


def cmd_convert(args) -> int:
    doc = _load_json(args.file)
    if not isinstance(doc, dict) or "n" not in doc:
        raise DocumentError(f"{args.file}: convert expects a schema document (n, genera, counts)")
    pres = hb.from_clasper_schema(schema_from_doc(doc, args.file))
    print(json.dumps(presentation_to_doc(pres), sort_keys=True, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hlinv", description="Milnor and hypermatrix invariants of handlebody-links.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON record")

    p = sub.add_parser("mu", parents=[common], help="mu, delta and residue of a sequence")
    p.add_argument("file")
    p.add_argument("sequence", help="comma-separated circle labels (or component numbers with --components)")
    p.add_argument("--components", action="store_true", help="read the sequence as component numbers")
    p.set_defaults(func=cmd_mu)

    p = sub.add_parser("profile", parents=[common], help="invariants of every sequence")
    p.add_argument("file")
    p.add_argument("--bound", type=_positive, default=None, help="entry bound for the tensor-rank search")
    p.add_argument("--budget", type=_positive, default=20000, help="tensor-rank search budget")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("classify", parents=[common], help="compare two handlebody-links")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--budget", type=_positive, default=cl.DEFAULT_BUDGET, help="orbit search state budget")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("hmat", help="hypermatrix operations")
    ops = p.add_subparsers(dest="op", required=True, parser_class=_Parser)
    q = ops.add_parser("flatten", parents=[common])
    q.add_argument("file")
    q.add_argument("--axis", type=int, required=True)
    for name in ("ed", "mlrank", "hyperdet"):
        q = ops.add_parser(name, parents=[common])
        q.add_argument("file")
    q = ops.add_parser("rankt", parents=[common])
    q.add_argument("file")
    q.add_argument("--bound", type=_positive, required=True)
    q.add_argument("--budget", type=_positive, default=10**6)
    q = ops.add_parser("apply", parents=[common])
    q.add_argument("file")
    q.add_argument("--moves", required=True, help='e.g. "swap(1,1,2);neg(2,1);add(1,2,1,-1)"')
    p.set_defaults(func=cmd_hmat)

    p = sub.add_parser("convert", help="schema document to presentation document")
    p.add_argument("file")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits for --help (0) and for usage errors (EXIT_USAGE)
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"hlinv: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UsageError as exc:
        print(f"hlinv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
