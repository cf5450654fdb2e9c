"""Finite relational structures over universes {0, .., m-1}.

Relations are dense boolean tables.  The flat cell index of a tuple
(a_0, .., a_{k-1}) in a table over universe size m is

    a_0 * m**(k-1) + a_1 * m**(k-2) + ... + a_{k-1}

i.e. C order with coordinate 0 most significant.  This ordering is the
contract for serialization, hashing, and every "ascending" tuple listing.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "NAryRelation", "Structure", "relation_from_tuples",
    "load_structure", "save_structure", "project_coordinate",
]


class NAryRelation:
    """An immutable subset of M^k stored as a dense bool array of shape (m,)*k."""

    __slots__ = ("arity", "universe_size", "cells")

    def __init__(self, arity: int, universe_size: int, cells):
        if arity < 1:
            raise ValueError("arity must be at least 1")
        if universe_size < 1:
            raise ValueError("universe size must be at least 1")
        table = np.ascontiguousarray(cells, dtype=bool)
        expected = (universe_size,) * arity
        if table.shape != expected:
            raise ValueError(f"cell table has shape {table.shape}, expected {expected}")
        table.setflags(write=False)
        self.arity = arity
        self.universe_size = universe_size
        self.cells = table

    @classmethod
    def empty(cls, arity: int, universe_size: int) -> "NAryRelation":
        return cls(arity, universe_size, np.zeros((universe_size,) * arity, dtype=bool))

    @classmethod
    def full(cls, arity: int, universe_size: int) -> "NAryRelation":
        return cls(arity, universe_size, np.ones((universe_size,) * arity, dtype=bool))

    @classmethod
    def from_tuples(cls, arity: int, universe_size: int, tuples) -> "NAryRelation":
        table = np.zeros((universe_size,) * arity, dtype=bool)
        for t in tuples:
            t = tuple(t)
            if len(t) != arity:
                raise ValueError(f"tuple {t} has length {len(t)}, expected {arity}")
            for a in t:
                if not 0 <= a < universe_size:
                    raise ValueError(f"entry {a} out of range for universe size {universe_size}")
            table[t] = True
        return cls(arity, universe_size, table)

    def count(self) -> int:
        return int(self.cells.sum())

    def tuples(self):
        """All member tuples in ascending flat-index order."""
        return [tuple(int(v) for v in row) for row in np.argwhere(self.cells)]

    def __contains__(self, t) -> bool:
        return bool(self.cells[tuple(t)])

    def __eq__(self, other) -> bool:
        return (isinstance(other, NAryRelation)
                and self.arity == other.arity
                and self.universe_size == other.universe_size
                and np.array_equal(self.cells, other.cells))

    def __hash__(self) -> int:
        return hash((self.arity, self.universe_size, self.cells.tobytes()))

    def __repr__(self) -> str:
        return (f"NAryRelation(arity={self.arity}, universe_size={self.universe_size}, "
                f"count={self.count()})")


def relation_from_tuples(arity: int, universe_size: int, tuples) -> NAryRelation:
    return NAryRelation.from_tuples(arity, universe_size, tuples)


def project_coordinate(relation: NAryRelation, coord: int) -> frozenset:
    """Values taken by coordinate ``coord`` across the member tuples."""
    if not 0 <= coord < relation.arity:
        raise ValueError(f"coordinate {coord} out of range for arity {relation.arity}")
    return frozenset(t[coord] for t in relation.tuples())


class Structure:
    """A finite structure: universe size, signature, and one table per name."""

    def __init__(self, universe_size: int, signature: dict, relations: dict):
        if universe_size < 1:
            raise ValueError("universe size must be at least 1")
        for name, arity in signature.items():
            if not isinstance(name, str) or not name:
                raise ValueError(f"bad relation name {name!r}")
            if not isinstance(arity, int) or arity < 1:
                raise ValueError(f"relation {name!r} has bad arity {arity!r}")
        missing = set(signature) - set(relations)
        if missing:
            raise ValueError(f"uninterpreted relation(s): {sorted(missing)}")
        extra = set(relations) - set(signature)
        if extra:
            raise ValueError(f"interpretation for undeclared relation(s): {sorted(extra)}")
        for name, rel in relations.items():
            if rel.arity != signature[name]:
                raise ValueError(
                    f"relation {name!r}: table arity {rel.arity} != declared {signature[name]}")
            if rel.universe_size != universe_size:
                raise ValueError(
                    f"relation {name!r}: universe size {rel.universe_size} != {universe_size}")
        self.universe_size = universe_size
        self.signature = dict(signature)
        self.relations = dict(relations)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Structure)
                and self.universe_size == other.universe_size
                and self.signature == other.signature
                and self.relations == other.relations)

    def __repr__(self) -> str:
        sig = ", ".join(f"{k}/{v}" for k, v in sorted(self.signature.items()))
        return f"Structure(universe_size={self.universe_size}, signature=[{sig}])"


def save_structure(structure: Structure) -> dict:
    """JSON-ready document; tuples listed in the normative cell order."""
    return {
        "universe_size": structure.universe_size,
        "signature": {name: structure.signature[name] for name in sorted(structure.signature)},
        "relations": {
            name: {
                "arity": structure.relations[name].arity,
                "tuples": [list(t) for t in structure.relations[name].tuples()],
            }
            for name in sorted(structure.relations)
        },
    }


def load_structure(document: dict) -> Structure:
    if not isinstance(document, dict):
        raise ValueError("structure document must be a JSON object")
    for key in ("universe_size", "signature", "relations"):
        if key not in document:
            raise ValueError(f"structure document lacks {key!r}")
    m = document["universe_size"]
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"bad universe_size {m!r}")
    signature = document["signature"]
    if not isinstance(signature, dict):
        raise ValueError("signature must be an object mapping names to arities")
    tables = document["relations"]
    if not isinstance(tables, dict):
        raise ValueError("relations must be an object")
    relations = {}
    for name, arity in signature.items():
        if name not in tables:
            raise ValueError(f"relation {name!r} declared but not interpreted")
        entry = tables[name]
        if not isinstance(entry, dict) or "arity" not in entry or "tuples" not in entry:
            raise ValueError(f"relation {name!r}: entry must carry arity and tuples")
        if entry["arity"] != arity:
            raise ValueError(
                f"relation {name!r}: arity {entry['arity']} != declared {arity}")
        relations[name] = NAryRelation.from_tuples(arity, m, entry["tuples"])
    return Structure(m, signature, relations)
