"""Tarskian semantics over finite structures.

``evaluate`` computes the meaning of a formula, the set of n-tuples of
variable values that satisfy it, compositionally with cylindric set
operations: atoms by reindexing the base table (which realises variable
substitution semantically), equality by diagonals, negation by complement,
conjunction by intersection, and the existential quantifier on v_i by the
i-th cylindrification.

``evaluate_naive`` is the independent oracle: a recursive satisfaction
check run on every one of the m^n assignments, with no set shortcuts.

A sentence is a formula whose meaning is all of M^n; this reads every
formula with implicit outermost universal quantifiers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .structures import NAryRelation, Structure
from .syntax import And, Atom, Eq, Exists, Formula, Not, subformulas, variable_span

__all__ = [
    "CylindricSpace", "evaluate", "evaluate_naive", "sentence_holds",
]


@dataclass(frozen=True)
class CylindricSpace:
    """The ambient space M^n: a dimension and a universe size."""

    dimension: int
    universe_size: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if self.universe_size < 1:
            raise ValueError("universe size must be at least 1")

    @property
    def shape(self):
        return (self.universe_size,) * self.dimension

    def full(self) -> NAryRelation:
        return NAryRelation.full(self.dimension, self.universe_size)

    def empty(self) -> NAryRelation:
        return NAryRelation.empty(self.dimension, self.universe_size)

    def axis_grid(self, axis: int) -> np.ndarray:
        """arange(m) shaped to vary along ``axis`` only (broadcasts to M^n)."""
        shape = [1] * self.dimension
        shape[axis] = self.universe_size
        return np.arange(self.universe_size).reshape(shape)

    def _check(self, relation: NAryRelation):
        if relation.arity != self.dimension or relation.universe_size != self.universe_size:
            raise ValueError(
                f"dimension mismatch: relation is {relation.arity}-ary over "
                f"{relation.universe_size}, space is {self.dimension}-dimensional over "
                f"{self.universe_size}")

    def complement(self, x: NAryRelation) -> NAryRelation:
        self._check(x)
        return NAryRelation(self.dimension, self.universe_size, ~x.cells)

    def intersect(self, x: NAryRelation, y: NAryRelation) -> NAryRelation:
        self._check(x)
        self._check(y)
        return NAryRelation(self.dimension, self.universe_size, x.cells & y.cells)

    def union(self, x: NAryRelation, y: NAryRelation) -> NAryRelation:
        self._check(x)
        self._check(y)
        return NAryRelation(self.dimension, self.universe_size, x.cells | y.cells)

    def cylindrify(self, axis: int, x: NAryRelation) -> NAryRelation:
        """All tuples agreeing with some member of ``x`` off coordinate ``axis``."""
        if not 0 <= axis < self.dimension:
            raise ValueError(f"coordinate {axis} out of range for dimension {self.dimension}")
        self._check(x)
        spread = np.broadcast_to(x.cells.any(axis=axis, keepdims=True), self.shape)
        return NAryRelation(self.dimension, self.universe_size, spread)

    def diagonal(self, i: int, j: int) -> NAryRelation:
        """All tuples whose i-th and j-th coordinates agree."""
        for axis in (i, j):
            if not 0 <= axis < self.dimension:
                raise ValueError(f"coordinate {axis} out of range for dimension {self.dimension}")
        cells = np.broadcast_to(self.axis_grid(i) == self.axis_grid(j), self.shape)
        return NAryRelation(self.dimension, self.universe_size, cells)


def _check_formula(structure: Structure, f: Formula, space: CylindricSpace):
    span = variable_span(f)
    if span > space.dimension:
        raise ValueError(
            f"formula uses v{span - 1} but the space has dimension {space.dimension}")
    if structure.universe_size != space.universe_size:
        raise ValueError(
            f"structure universe size {structure.universe_size} != space "
            f"universe size {space.universe_size}")
    for g in subformulas(f):
        if isinstance(g, Atom):
            base = structure.relations.get(g.name)
            if base is None:
                raise ValueError(f"unknown relation {g.name!r}")
            if len(g.args) != base.arity:
                raise ValueError(
                    f"relation {g.name!r} is {base.arity}-ary, applied to {len(g.args)} arguments")


def evaluate(structure: Structure, f: Formula, space: CylindricSpace,
             cache: dict | None = None) -> NAryRelation:
    """The meaning of ``f``: the n-tuples of variable values satisfying it.

    ``cache`` maps subformulas to their cell arrays and may be shared across
    calls for the same structure and space.
    """
    _check_formula(structure, f, space)
    memo = cache if cache is not None else {}
    shape = space.shape

    def ev(g: Formula) -> np.ndarray:
        got = memo.get(g)
        if got is not None:
            return got
        if isinstance(g, Atom):
            base = structure.relations[g.name]
            index = tuple(space.axis_grid(a) for a in g.args)
            out = np.broadcast_to(base.cells[index], shape)
        elif isinstance(g, Eq):
            out = np.broadcast_to(space.axis_grid(g.left) == space.axis_grid(g.right), shape)
        elif isinstance(g, Not):
            out = ~ev(g.body)
        elif isinstance(g, And):
            out = ev(g.left) & ev(g.right)
        elif isinstance(g, Exists):
            out = np.broadcast_to(ev(g.body).any(axis=g.var, keepdims=True), shape)
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = out
        return out

    return NAryRelation(space.dimension, space.universe_size, ev(f))


def evaluate_naive(structure: Structure, f: Formula, space: CylindricSpace) -> NAryRelation:
    """Per-assignment satisfaction oracle.

    Enumerates all m^n assignments and checks each recursively; relation
    membership goes through plain tuple sets, never through table algebra.
    """
    _check_formula(structure, f, space)
    n, m = space.dimension, space.universe_size
    tables = {name: set(rel.tuples()) for name, rel in structure.relations.items()}

    def sat(g: Formula, env: list) -> bool:
        if isinstance(g, Atom):
            return tuple(env[a] for a in g.args) in tables[g.name]
        if isinstance(g, Eq):
            return env[g.left] == env[g.right]
        if isinstance(g, Not):
            return not sat(g.body, env)
        if isinstance(g, And):
            return sat(g.left, env) and sat(g.right, env)
        if isinstance(g, Exists):
            saved = env[g.var]
            try:
                return any(sat(g.body, _rebind(env, g.var, w)) for w in range(m))
            finally:
                env[g.var] = saved
        raise TypeError(f"not a formula: {g!r}")

    def _rebind(env, var, value):
        env[var] = value
        return env

    hits = [t for t in itertools.product(range(m), repeat=n) if sat(f, list(t))]
    return NAryRelation.from_tuples(n, m, hits)


def sentence_holds(structure: Structure, f: Formula, space: CylindricSpace,
                   cache: dict | None = None) -> bool:
    """True iff the meaning of ``f`` is all of M^n (implicit universal closure)."""
    return bool(evaluate(structure, f, space, cache=cache).cells.all())
