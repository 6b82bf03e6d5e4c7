"""Command-line front end.

Subcommands: decide, prove, verify, canon, triviality, product, poset,
count, intersect.  Matrix files are digit grids (blank line between the
matrices of a set) or JSON ``{"k": int, "rows": [[...]]}`` objects/arrays;
the format is sniffed from the content.  Exit status encodes the verdict
for decide/verify (0 holds/valid, 1 fails/invalid, 2 error).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .decision import (
    MatrixSet,
    ShortCircuit,
    check_tableau,
    implies,
    tableau_from_obj,
    tableau_to_obj,
)
from .matrices import (
    Matrix,
    MclexError,
    ParseError,
    format_matrix,
    matrix_from_obj,
    matrix_to_obj,
    normalize,
    parse_matrix_set,
    product,
    triviality,
)
from .poset import (
    DecisionCache,
    box_intersect,
    classify_box,
    count_table,
    poset_from_obj,
    poset_to_dot,
    poset_to_obj,
)


def _read_matrices(path: str) -> list[Matrix]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MclexError(f"cannot read {path}: {exc}") from exc
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return [matrix_from_obj(json.loads(text))]
    if stripped.startswith("["):
        return [matrix_from_obj(o) for o in json.loads(text)]
    return parse_matrix_set(text)


def _emit_matrix(m: Matrix, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(matrix_to_obj(m), sort_keys=True)
    return format_matrix(m)


def _add_common(sub, cache=True, jobs=True, fmt=("text", "json")):
    sub.add_argument("--format", choices=fmt, default="text")
    if cache:
        sub.add_argument("--cache", default=os.environ.get("MCLEX_CACHE"))
    if jobs:
        sub.add_argument("--jobs", type=int, default=1)
    sub.add_argument("--include-degenerate", action="store_true")


def _open_cache(args) -> DecisionCache | None:
    path = getattr(args, "cache", None)
    return DecisionCache(path) if path else None


def _premise_set(args) -> MatrixSet:
    mats = _read_matrices(args.premise)
    if getattr(args, "conjoin", False):
        mats = [product(mats)]
    return MatrixSet.of(mats)


def _cmd_decide(args) -> int:
    s = _premise_set(args)
    u = MatrixSet.of(_read_matrices(args.goal))
    verdict = implies(s, u)
    if args.format == "json":
        obj = {"holds": verdict.holds}
        if verdict.short_circuit is not None:
            obj["short_circuit"] = verdict.short_circuit.value
        if verdict.failure_witness is not None:
            fw = verdict.failure_witness
            obj["failure"] = {"kind": fw.kind.value}
            if fw.saturated is not None:
                obj["failure"]["saturated"] = [
                    list(t) for t in fw.saturated.sorted_tuples()
                ]
        print(json.dumps(obj, sort_keys=True))
    else:
        note = ""
        if verdict.short_circuit is ShortCircuit.EMPTY_IN_PREMISE:
            note = " (empty matrix in premise)"
        elif verdict.short_circuit is ShortCircuit.TRIVIAL_IN_PREMISE:
            note = " (trivial matrix in premise)"
        print(("holds" if verdict.holds else "fails") + note)
    return 0 if verdict.holds else 1


def _cmd_prove(args) -> int:
    s = _premise_set(args)
    u = MatrixSet.of(_read_matrices(args.goal))
    verdict = implies(s, u)
    if not verdict.holds:
        print("fails: no certificate exists", file=sys.stderr)
        return 1
    if verdict.certificates is None:
        print("holds (short-circuited; no derivation certificate)", file=sys.stderr)
        return 1
    objs = [tableau_to_obj(t) for t in verdict.certificates]
    for t in verdict.certificates:
        reason = check_tableau(t)
        if reason is not None:
            raise MclexError(f"internal: produced tableau failed: {reason}")
    payload = objs[0] if len(objs) == 1 else objs
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"wrote verified tableau to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    with open(args.tableau, encoding="utf-8") as fh:
        payload = json.load(fh)
    objs = payload if isinstance(payload, list) else [payload]
    for i, obj in enumerate(objs):
        reason = check_tableau(tableau_from_obj(obj))
        if reason is not None:
            where = f"tableau {i}: " if len(objs) > 1 else ""
            print(f"invalid: {where}{reason}")
            return 1
    print("valid")
    return 0


def _cmd_canon(args) -> int:
    for m in _read_matrices(args.matrix):
        print(_emit_matrix(normalize(m), args.format))
    return 0


def _cmd_triviality(args) -> int:
    out = []
    for m in _read_matrices(args.matrix):
        report = triviality(m)
        if args.format == "json":
            obj = {"verdict": report.verdict.value}
            if report.witness is not None:
                obj["witness"] = {
                    "kind": report.witness.kind,
                    "rows": list(report.witness.rows),
                }
            out.append(obj)
        else:
            if report.witness is None:
                print(report.verdict.value.replace("_", "-"))
            else:
                rows = ",".join(str(r) for r in report.witness.rows)
                print(
                    f"{report.verdict.value.replace('_', '-')}"
                    f" ({report.witness.kind.replace('_', ' ')}: {rows})"
                )
    if args.format == "json":
        print(json.dumps(out if len(out) > 1 else out[0], sort_keys=True))
    return 0


def _cmd_product(args) -> int:
    mats: list[Matrix] = []
    for path in args.matrices:
        mats.extend(_read_matrices(path))
    print(_emit_matrix(product(mats), args.format))
    return 0


def _poset_text(p) -> str:
    lines = [f"{len(p.classes)} classes, {len(p.hasse)} hasse edges"]
    for i, c in enumerate(p.classes):
        tag = f" [{c.degenerate}]" if c.degenerate else ""
        grid = "<empty>" if c.canonical.is_empty else format_matrix(
            c.canonical
        ).replace("\n", "/")
        lines.append(f"#{i}{tag} {grid}")
    for a, b in sorted(p.hasse):
        lines.append(f"{a} -> {b}")
    return "\n".join(lines) + "\n"


def _emit_poset(p, args) -> str:
    if args.format == "dot":
        return poset_to_dot(p)
    if args.format == "json":
        return (
            json.dumps(poset_to_obj(p, include_degenerate=args.include_degenerate),
                       sort_keys=True)
            + "\n"
        )
    return _poset_text(p)


def _cmd_poset(args) -> int:
    cache = _open_cache(args)
    p = classify_box(args.rows, args.cols, args.alphabet, cache=cache,
                     jobs=args.jobs)
    text = _emit_poset(p, args)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(poset_to_dot(p))
    if cache is not None:
        cache.save()
    return 0


def _cmd_count(args) -> int:
    cache = _open_cache(args)
    counts = count_table(args.rows, args.alphabet, args.m_max, cache=cache,
                         jobs=args.jobs)
    if args.format == "json":
        print(json.dumps({"rows": args.rows, "alphabet": args.alphabet,
                          "counts": counts}, sort_keys=True))
    else:
        print(",".join(str(c) for c in counts))
    if cache is not None:
        cache.save()
    return 0


def _cmd_intersect(args) -> int:
    cache = _open_cache(args)
    posets = []
    for path in args.posets:
        with open(path, encoding="utf-8") as fh:
            posets.append(poset_from_obj(json.load(fh)))
    acc = posets[0]
    for other in posets[1:]:
        acc = box_intersect(acc, other, cache=cache)
    text = _emit_poset(acc, args)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cache is not None:
        cache.save()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mclex",
        description="Decide implications of matrix properties and compute "
                    "posets of matrix classes.",
    )
    subs = ap.add_subparsers(dest="command", required=True)

    decide = subs.add_parser("decide", help="decide premise => goal")
    decide.add_argument("--premise", required=True)
    decide.add_argument("--goal", required=True)
    decide.add_argument("--conjoin", action="store_true",
                        help="replace the premise set by its product matrix")
    _add_common(decide)
    decide.set_defaults(fn=_cmd_decide)

    prove = subs.add_parser("prove", help="decide and write a tableau")
    prove.add_argument("--premise", required=True)
    prove.add_argument("--goal", required=True)
    prove.add_argument("--out", required=True)
    prove.add_argument("--conjoin", action="store_true")
    _add_common(prove)
    prove.set_defaults(fn=_cmd_prove)

    verify = subs.add_parser("verify", help="replay a tableau certificate")
    verify.add_argument("tableau")
    _add_common(verify, cache=False, jobs=False)
    verify.set_defaults(fn=_cmd_verify)

    canon = subs.add_parser("canon", help="print the normal form")
    canon.add_argument("matrix")
    _add_common(canon, cache=False, jobs=False)
    canon.set_defaults(fn=_cmd_canon)

    triv = subs.add_parser("triviality", help="report triviality")
    triv.add_argument("matrix")
    _add_common(triv, cache=False, jobs=False)
    triv.set_defaults(fn=_cmd_triviality)

    prod = subs.add_parser("product", help="product of matrices, in order")
    prod.add_argument("matrices", nargs="+")
    _add_common(prod, cache=False, jobs=False)
    prod.set_defaults(fn=_cmd_product)

    poset = subs.add_parser("poset", help="classify a dimension box")
    poset.add_argument("rows", type=int)
    poset.add_argument("cols", type=int)
    poset.add_argument("alphabet", type=int)
    poset.add_argument("--out")
    poset.add_argument("--dot", help="also write a DOT file here")
    _add_common(poset, fmt=("text", "json", "dot"))
    poset.set_defaults(fn=_cmd_poset)

    count = subs.add_parser("count", help="class counts for m = 1..m_max")
    count.add_argument("rows", type=int)
    count.add_argument("alphabet", type=int)
    count.add_argument("m_max", type=int)
    _add_common(count)
    count.set_defaults(fn=_cmd_count)

    inter = subs.add_parser("intersect", help="intersect saved posets")
    inter.add_argument("posets", nargs="+")
    inter.add_argument("--out")
    _add_common(inter, fmt=("text", "json", "dot"))
    inter.set_defaults(fn=_cmd_intersect)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (MclexError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
