"""Command-line front end.

Subcommands: ``verify`` (build the model family and replay the whole
certification), ``eval`` (meaning of a formula over a structure file),
``closure``/``atoms`` (atom report of the definable-relation algebra),
``definable`` (union-of-atoms query with witness), ``automorphisms``.

Exit codes: 0 all checks pass / query answered positively, 1 verification
failure or negative definability answer, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .closure import automorphisms, close, is_definable
from .construction import ATOM_FAMILY_MODES, DIAGONAL_REFINED, verify_theorem
from .semantics import CylindricSpace, evaluate
from .structures import NAryRelation, load_structure
from .syntax import is_restricted, parse, render

MAX_VERIFIED_DIMENSION = 5


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _write_json(path: str, payload: dict):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _cmd_verify(args) -> int:
    n = args.n
    if n >= MAX_VERIFIED_DIMENSION + 1:
        print(f"error: n = {n} refused; closures beyond n = {MAX_VERIFIED_DIMENSION} "
              f"exceed the validated size envelope ((2n+1)^n cells)", file=sys.stderr)
        return 2
    if n < 3:
        print(f"error: n = {n} out of range; the construction starts at n = 3",
              file=sys.stderr)
        return 2
    report = verify_theorem(n, mode=args.mode)
    print(f"verification report (n={report.n}, universe size {2 * n + 1})")
    print(f"scope: {report.scope}")
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"  [{status}] {check.check_id}: {check.detail}")
    print(f"overall: {'PASS' if report.overall else 'FAIL'}")
    if args.json:
        _write_json(args.json, report.to_dict())
    return 0 if report.overall else 1


def _cmd_eval(args) -> int:
    structure = load_structure(_load_json(args.structure))
    space = CylindricSpace(args.n, structure.universe_size)
    formula = parse(args.formula, structure.signature)
    meaning = evaluate(structure, formula, space)
    print(meaning.count())
    if args.tuples:
        for t in meaning.tuples():
            print(" ".join(str(v) for v in t))
    return 0


def _cmd_closure(args) -> int:
    structure = load_structure(_load_json(args.structure))
    space = CylindricSpace(args.n, structure.universe_size)
    closure = close(structure, space)
    signature = dict(structure.signature)
    atoms = []
    for atom_id, relation in closure.atoms:
        witness = closure.atom_witness(atom_id)
        atoms.append({
            "id": atom_id,
            "size": relation.count(),
            "witness": render(witness),
            "witness_restricted": is_restricted(witness, signature),
            "tuples": [list(t) for t in relation.tuples()],
        })
    _write_json(args.out, {
        "n": space.dimension,
        "universe_size": space.universe_size,
        "atom_count": closure.atom_count,
        "atoms": atoms,
    })
    print(f"{closure.atom_count} atoms over {space.universe_size}^{space.dimension} cells"
          f" -> {args.out}")
    return 0


def _cmd_definable(args) -> int:
    structure = load_structure(_load_json(args.structure))
    n = args.n
    space = CylindricSpace(n, structure.universe_size)
    doc = _load_json(args.relation)
    if not isinstance(doc, dict) or "arity" not in doc or "tuples" not in doc:
        raise ValueError("relation document must carry arity and tuples")
    arity = doc["arity"]
    if arity > n:
        raise ValueError(f"relation arity {arity} exceeds dimension {n}")
    base = NAryRelation.from_tuples(arity, structure.universe_size, doc["tuples"])
    if arity < n:
        # lift by full cylinders on the trailing coordinates
        cells = np.broadcast_to(
            base.cells.reshape(base.cells.shape + (1,) * (n - arity)), space.shape)
        base = NAryRelation(n, structure.universe_size, cells)
    closure = close(structure, space)
    definable, witness = is_definable(closure, base)
    if definable:
        print("definable")
        print(f"witness: {render(witness)}")
        return 0
    print("not definable")
    return 1


def _cmd_automorphisms(args) -> int:
    structure = load_structure(_load_json(args.structure))
    sorts = None
    if args.sorts:
        blocks = _load_json(args.sorts)
        if not isinstance(blocks, list):
            raise ValueError("sorts document must be a list of element lists")
        sorts = [NAryRelation.from_tuples(1, structure.universe_size,
                                          [(e,) for e in block])
                 for block in blocks]
    elif structure.universe_size > 8:
        print("error: universe too large for the full permutation search; "
              "pass --sorts with a partition into definable sorts", file=sys.stderr)
        return 2
    group = automorphisms(structure, sorts)
    print(len(group))
    for sigma in group:
        print(" ".join(str(v) for v in sigma))
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finvar",
        description="n-variable first-order logic over finite structures: "
                    "verification, evaluation, and definability queries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="build the model family and replay all checks")
    p.add_argument("--n", type=int, required=True, help="dimension (3 to 5)")
    p.add_argument("--json", help="also write the report as JSON to this path")
    p.add_argument("--mode", choices=ATOM_FAMILY_MODES, default=DIAGONAL_REFINED,
                   help="which predicted atom family the summary line highlights")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("eval", help="evaluate a formula over a structure file")
    p.add_argument("--structure", required=True, help="structure JSON path")
    p.add_argument("--n", type=int, required=True, help="dimension of the tuple space")
    p.add_argument("--formula", required=True, help="formula in concrete syntax")
    p.add_argument("--tuples", action="store_true", help="list the satisfying tuples")
    p.set_defaults(handler=_cmd_eval)

    for name in ("closure", "atoms"):
        p = sub.add_parser(name, help="compute the definable-relation algebra "
                                      "and write the atom report")
        p.add_argument("--structure", required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--out", required=True, help="atom report JSON path")
        p.set_defaults(handler=_cmd_closure)

    p = sub.add_parser("definable", help="is a relation a union of atoms?")
    p.add_argument("--structure", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--relation", required=True,
                   help="JSON path: {\"arity\": k, \"tuples\": [[..], ..]}")
    p.set_defaults(handler=_cmd_definable)

    p = sub.add_parser("automorphisms", help="enumerate relation-preserving permutations")
    p.add_argument("--structure", required=True)
    p.add_argument("--sorts", help="JSON path: list of element lists partitioning M")
    p.set_defaults(handler=_cmd_automorphisms)
    return parser


def main(argv=None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
