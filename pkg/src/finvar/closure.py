"""The algebra of definable n-ary relations of a finite structure.

``close`` computes the atom partition of the subalgebra of P(M^n)
generated by the meanings of all atomic formulas (every variable tuple
over the signature, plus every diagonal) under complement, intersection,
and all cylindrifications.  The algorithm is simultaneous partition
refinement: cells start grouped by their membership pattern across the
generators, and each round regroups cells by which current blocks occur
on their axis lines (equivalently, by membership in C_i(b) for every
block b and axis i) until nothing splits.  Unions of the resulting atoms
are exactly the definable relations; as the cell space is finite, the
same family is closed under arbitrary, hence infinitary, unions.

Every atom carries a synthesized witness formula whose meaning is the
atom itself, assembled from the refinement history: signed generator
atoms for the initial grouping, and signed ``E v_i <block witness>``
conjuncts for the splits.  Witnesses are built lazily and memoized, so
large closures stay cheap until a witness is actually requested.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from .semantics import CylindricSpace, evaluate, sentence_holds
from .structures import NAryRelation, Structure
from .syntax import (And, Atom, Eq, Exists, Formula, Not, conj, disj,
                     mentions_relation, render)

__all__ = [
    "AlgebraClosure", "ImplicitDefinitionProblem", "close", "is_definable",
    "definable_unary_relations", "solutions_of_implicit_definition",
    "automorphisms", "atom_coordinate_presence",
]


class AlgebraClosure:
    """Atom partition of the definable-relation algebra of one structure.

    ``atom_of`` maps flat cell index to atom id; ids are canonical (atoms
    are numbered by their first cell in the normative order), so equal
    partitions get equal labelings no matter how the refinement ran.
    """

    def __init__(self, space, generators, atom_of, membership, rounds, internal_of_canon):
        self.space = space
        self.generators = generators          # list of (Formula, NAryRelation)
        self.atom_of = atom_of                # flat int32 array, read-only
        self.atom_count = int(atom_of.max()) + 1 if atom_of.size else 0
        self.atom_sizes = np.bincount(atom_of, minlength=self.atom_count)
        self._membership = membership         # initial classes x generators, bool
        self._rounds = rounds                 # per round: label -> (parent, line sets)
        self._internal_of_canon = internal_of_canon
        self._witness_memo = {}
        self._atoms = None

    @property
    def atoms(self):
        """List of (atom id, relation) pairs; tables materialize on first use."""
        if self._atoms is None:
            self._atoms = [(i, self.atom_relation(i)) for i in range(self.atom_count)]
        return self._atoms

    def atom_relation(self, atom_id: int) -> NAryRelation:
        if not 0 <= atom_id < self.atom_count:
            raise ValueError(f"no atom {atom_id}")
        cells = (self.atom_of == atom_id).reshape(self.space.shape)
        return NAryRelation(self.space.dimension, self.space.universe_size, cells)

    def atom_witness(self, atom_id: int) -> Formula:
        """A formula whose meaning is exactly this atom."""
        if not 0 <= atom_id < self.atom_count:
            raise ValueError(f"no atom {atom_id}")
        return self._witness(len(self._rounds), int(self._internal_of_canon[atom_id]))

    def _witness(self, level: int, label: int) -> Formula:
        got = self._witness_memo.get((level, label))
        if got is not None:
            return got
        if level == 0:
            out = self._initial_witness(label)
        else:
            parent, sets = self._rounds[level - 1][label]
            conjuncts = [self._witness(level - 1, parent)]
            separators = {}
            for other, (other_parent, other_sets) in enumerate(self._rounds[level - 1]):
                if other == label or other_parent != parent:
                    continue
                separators[self._separator(sets, other_sets)] = None
            for axis, block, sign in sorted(separators):
                term = Exists(axis, self._witness(level - 1, block))
                conjuncts.append(term if sign else Not(term))
            out = conj(conjuncts)
        self._witness_memo[(level, label)] = out
        return out

    def _initial_witness(self, label: int) -> Formula:
        mine = self._membership[label]
        picked = {}
        for other in range(self._membership.shape[0]):
            if other == label:
                continue
            differ = np.nonzero(mine != self._membership[other])[0]
            g = int(differ[0])
            picked[(g, bool(mine[g]))] = None
        if not picked:
            return Eq(0, 0)
        conjuncts = []
        for g, sign in sorted(picked):
            f = self.generators[g][0]
            conjuncts.append(f if sign else Not(f))
        return conj(conjuncts)

    @staticmethod
    def _separator(sets, other_sets):
        # some axis line-set must differ between sibling blocks
        for axis, (mine, theirs) in enumerate(zip(sets, other_sets)):
            plus = mine - theirs
            if plus:
                return (axis, min(plus), True)
            minus = theirs - mine
            if minus:
                return (axis, min(minus), False)
        raise AssertionError("sibling blocks with identical refinement signatures")


def _generator_meanings(structure: Structure, space: CylindricSpace, order_seed):
    n = space.dimension
    formulas = []
    for name in sorted(structure.signature):
        arity = structure.signature[name]
        if arity > n:
            raise ValueError(
                f"relation {name!r} has arity {arity} > space dimension {n}")
        formulas.extend(
            Atom(name, args) for args in itertools.product(range(n), repeat=arity))
    formulas.extend(Eq(i, j) for i in range(n) for j in range(i + 1, n))
    if order_seed is not None:
        random.Random(order_seed).shuffle(formulas)
    seen = set()
    out = []
    for f in formulas:
        meaning = evaluate(structure, f, space)
        key = meaning.cells.tobytes()
        if key not in seen:
            seen.add(key)
            out.append((f, meaning))
    return out


def close(structure: Structure, space: CylindricSpace, *, order_seed=None) -> AlgebraClosure:
    """Compute the atom partition of the generated definable-relation algebra.

    ``order_seed`` shuffles generator and refinement processing order; the
    resulting partition (and, thanks to canonical ids, the whole ``atom_of``
    map) is independent of it.
    """
    if structure.universe_size != space.universe_size:
        raise ValueError("structure and space universe sizes differ")
    n, m = space.dimension, space.universe_size
    rng = random.Random(order_seed) if order_seed is not None else None

    generators = _generator_meanings(structure, space, order_seed)
    if generators:
        matrix = np.stack([g.cells.ravel() for _, g in generators], axis=1)
        _, first_index, labels = np.unique(
            matrix, axis=0, return_index=True, return_inverse=True)
        membership = matrix[first_index]
    else:
        labels = np.zeros(m ** n, dtype=np.int64)
        membership = np.zeros((1, 0), dtype=bool)
    labels = labels.reshape(space.shape).astype(np.int32)

    rounds = []
    while True:
        count = int(labels.max()) + 1
        axis_line_ids = []
        axis_line_sets = []
        for axis in range(n):
            moved = np.moveaxis(labels, axis, -1)
            lines = moved.reshape(-1, m)
            ids = np.empty(lines.shape[0], dtype=np.int32)
            interned = {}
            sets_list = []
            for row in range(lines.shape[0]):
                uniq = np.unique(lines[row])
                key = uniq.tobytes()
                sid = interned.get(key)
                if sid is None:
                    sid = len(sets_list)
                    interned[key] = sid
                    sets_list.append(frozenset(int(v) for v in uniq))
                ids[row] = sid
            per_cell = np.broadcast_to(ids[:, None], lines.shape).reshape(moved.shape)
            axis_line_ids.append(np.moveaxis(per_cell, -1, axis))
            axis_line_sets.append(sets_list)
        axis_order = list(range(n))
        if rng is not None:
            rng.shuffle(axis_order)
        combo = np.stack(
            [labels.ravel()] + [axis_line_ids[a].ravel() for a in axis_order], axis=1)
        _, first_index, new_labels = np.unique(
            combo, axis=0, return_index=True, return_inverse=True)
        new_count = int(new_labels.max()) + 1
        if new_count == count:
            break
        flat_old = labels.ravel()
        provenance = []
        for label in range(new_count):
            rep = int(first_index[label])
            parent = int(flat_old[rep])
            sets = tuple(axis_line_sets[a][int(axis_line_ids[a].ravel()[rep])]
                         for a in range(n))
            provenance.append((parent, sets))
        rounds.append(provenance)
        labels = new_labels.reshape(space.shape).astype(np.int32)

    flat = labels.ravel()
    internal_count = int(flat.max()) + 1
    _, first_cell = np.unique(flat, return_index=True)
    order = np.argsort(first_cell, kind="stable")
    canon_of_internal = np.empty(internal_count, dtype=np.int32)
    canon_of_internal[order] = np.arange(internal_count, dtype=np.int32)
    internal_of_canon = order.astype(np.int32)
    atom_of = canon_of_internal[flat]
    atom_of.setflags(write=False)
    return AlgebraClosure(space, generators, atom_of, membership, rounds, internal_of_canon)


def is_definable(closure: AlgebraClosure, x: NAryRelation):
    """Is ``x`` a union of atoms?  If so, also return a witness formula.

    The witness is the disjunction of the witnesses of the atoms below
    ``x`` (a refuting contradiction for the empty relation), and its
    meaning equals ``x`` bit for bit.
    """
    space = closure.space
    if x.arity != space.dimension or x.universe_size != space.universe_size:
        raise ValueError(
            f"dimension mismatch: relation is {x.arity}-ary over {x.universe_size}, "
            f"closure is over M^{space.dimension} with |M| = {space.universe_size}")
    inside = np.bincount(closure.atom_of[x.cells.ravel()], minlength=closure.atom_count)
    cut = (inside > 0) & (inside < closure.atom_sizes)
    if cut.any():
        return False, None
    hit = np.nonzero(inside > 0)[0]
    if hit.size == 0:
        return True, Not(Eq(0, 0))
    return True, disj([closure.atom_witness(int(a)) for a in hit])


def atom_coordinate_presence(closure: AlgebraClosure, axis: int = 0) -> np.ndarray:
    """Bool matrix (m x atom count): does value u occur at ``axis`` in the atom."""
    n, m = closure.space.dimension, closure.space.universe_size
    if not 0 <= axis < n:
        raise ValueError(f"coordinate {axis} out of range for dimension {n}")
    shaped = closure.atom_of.reshape(closure.space.shape)
    moved = np.moveaxis(shaped, axis, 0).reshape(m, -1)
    present = np.zeros((m, closure.atom_count), dtype=bool)
    for u in range(m):
        present[u, np.unique(moved[u])] = True
    return present


def definable_unary_relations(closure: AlgebraClosure):
    """All V subseteq M such that V x M^(n-1) is a union of atoms.

    These are exactly the meanings of formulas in the single free variable
    v0.  V may not cut the coordinate-0 projection of any atom, so the
    valid sets are the unions of the components of the "shares an atom
    projection" relation on M.  Returned ascending by bit-table value
    (element 0 is the least significant bit).
    """
    m = closure.space.universe_size
    present = atom_coordinate_presence(closure, axis=0)
    parent = list(range(m))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for a in range(closure.atom_count):
        members = np.nonzero(present[:, a])[0]
        root = find(int(members[0]))
        for u in members[1:]:
            parent[find(int(u))] = root
    components = {}
    for u in range(m):
        components.setdefault(find(u), []).append(u)
    parts = sorted(components.values())
    out = []
    for picks in itertools.product((False, True), repeat=len(parts)):
        members = sorted(u for take, part in zip(picks, parts) if take for u in part)
        value = sum(1 << u for u in members)
        cells = np.zeros(m, dtype=bool)
        cells[members] = True
        out.append((value, NAryRelation(1, m, cells)))
    out.sort(key=lambda pair: pair[0])
    return [rel for _, rel in out]


@dataclass(frozen=True)
class ImplicitDefinitionProblem:
    """A base theory, a constraint set over one new unary symbol, its name."""

    theory: tuple
    sigma: tuple
    target: str

    def __post_init__(self):
        object.__setattr__(self, "theory", tuple(self.theory))
        object.__setattr__(self, "sigma", tuple(self.sigma))


def solutions_of_implicit_definition(problem: ImplicitDefinitionProblem,
                                     structure: Structure,
                                     space: CylindricSpace):
    """All unary tables D for which every sigma constraint is a sentence.

    The structure must satisfy the base theory (a violated precondition is
    an error, not an empty answer).  All 2^m candidates are tried, ascending
    by bit-table value with element 0 as the least significant bit.
    """
    m = space.universe_size
    if problem.target in structure.signature:
        raise ValueError(f"target {problem.target!r} already interpreted")
    base_cache = {}
    for axiom in problem.theory:
        if not sentence_holds(structure, axiom, space, cache=base_cache):
            raise ValueError(
                f"structure does not satisfy the base theory: {render(axiom)} fails")
    signature = dict(structure.signature)
    signature[problem.target] = 1
    free_cache = {f: v for f, v in base_cache.items()}
    solutions = []
    for mask in range(1 << m):
        cells = np.array([bool(mask >> u & 1) for u in range(m)], dtype=bool)
        candidate = NAryRelation(1, m, cells)
        expanded = Structure(m, signature,
                             {**structure.relations, problem.target: candidate})
        cache = dict(free_cache)
        ok = all(sentence_holds(expanded, s, space, cache=cache) for s in problem.sigma)
        if mask == 0:
            # meanings of target-free subformulas are candidate-independent
            free_cache.update(
                (f, v) for f, v in cache.items()
                if not mentions_relation(f, problem.target))
        if ok:
            solutions.append(candidate)
    return solutions


def automorphisms(structure: Structure, fixed_sorts=None):
    """All permutations of M preserving every relation exactly.

    With ``fixed_sorts`` (unary relations partitioning M) the search runs
    over sort-preserving permutations only; passing sorts that are each
    definable keeps this exhaustive, since definable sets are invariant
    under every automorphism.  Without sorts the full m! space is searched,
    which is the audit mode and is limited to small universes.
    """
    m = structure.universe_size
    if fixed_sorts is None:
        if m > 8:
            raise ValueError("full permutation search is limited to universes of size <= 8")
        candidates = itertools.permutations(range(m))
    else:
        blocks = []
        seen = set()
        for sort in fixed_sorts:
            if sort.arity != 1 or sort.universe_size != m:
                raise ValueError("sorts must be unary relations over the same universe")
            members = [t[0] for t in sort.tuples()]
            if seen & set(members):
                raise ValueError("sorts overlap; they must partition the universe")
            seen.update(members)
            blocks.append(members)
        if seen != set(range(m)):
            raise ValueError("sorts do not cover the universe; they must partition it")
        def sort_preserving():
            for images in itertools.product(
                    *(itertools.permutations(block) for block in blocks)):
                sigma = [0] * m
                for block, image in zip(blocks, images):
                    for source, target in zip(block, image):
                        sigma[source] = target
                yield tuple(sigma)
        candidates = sort_preserving()
    tables = {name: set(rel.tuples()) for name, rel in structure.relations.items()}
    out = []
    for sigma in candidates:
        if all(tuple(sigma[v] for v in t) in table
               for table in tables.values() for t in table):
            out.append(tuple(sigma))
    return sorted(out)
