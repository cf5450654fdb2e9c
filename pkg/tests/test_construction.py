import itertools
import random

import numpy as np
import pytest

from finvar import (AS_WRITTEN, DIAGONAL_REFINED, CanonicalModel,
                    CylindricSpace, NAryRelation, Structure, build_model,
                    build_sigma, build_theory, carrier_formula,
                    compare_atom_family, close, evaluate, hull_formula,
                    predicted_atom_family, r_atom, sentence_holds,
                    sigma_axioms, theory_axioms, variable_span,
                    verify_theorem)
from finvar.syntax import And, Atom, is_restricted


# ---------------------------------------------------------------------------
# the model

def test_model_3_shape(model3):
    assert model3.structure.universe_size == 7
    assert model3.structure.relations["R"].count() == 6
    assert model3.hull.count() == 12
    assert model3.labels == {"a0": 0, "a1": 1, "a2": 2,
                             "b0": 3, "b1": 4, "c0": 5, "c1": 6}
    assert model3.structure.relations["S"].tuples() == [(0, 1), (1, 2), (2, 0)]


def test_model_4_shape():
    model = build_model(4)
    assert model.structure.universe_size == 9
    assert model.hull.count() == 3 * 2 * 2 * 2 == 24
    assert model.structure.relations["R"].count() == 12


def test_parity_rule_against_enumeration():
    # brute-force the rule: first coordinate a0 with even block-index sum,
    # first coordinate a1/a2 with odd sum
    for n in (3, 4, 5):
        model = build_model(n)
        blocks = [[0, 1, 2]] + [[2 * i + 1, 2 * i + 2] for i in range(1, n)]
        expected = set()
        for t in itertools.product(*blocks):
            indices = [blocks[i].index(t[i]) for i in range(1, n)]
            if (t[0] == 0) == (sum(indices) % 2 == 0):
                expected.add(t)
        assert set(model.structure.relations["R"].tuples()) == expected


def test_cut_halves_every_fiber(model3):
    # big(R) forces each element of U0 to hit exactly half the hull pairs
    r = set(model3.structure.relations["R"].tuples())
    for u in (0, 1, 2):
        fiber = {(b, c) for (a, b, c) in r if a == u}
        assert len(fiber) == 2


def test_model_rejects_small_dimension():
    with pytest.raises(ValueError):
        build_model(2)


def test_model_without_cycle_relation():
    model = build_model(4, with_s_cycle=False)
    assert "S" not in model.structure.signature
    space = CylindricSpace(4, 9)
    for name, f in theory_axioms(4, with_s_cycle=False):
        assert sentence_holds(model.structure, f, space), name
    with pytest.raises(ValueError):
        theory_axioms(3, with_s_cycle=False)


# ---------------------------------------------------------------------------
# the theory and the implicit definition

def test_every_axiom_has_small_span():
    for n in (3, 4, 5):
        for name, f in theory_axioms(n) + sigma_axioms(n):
            assert variable_span(f) <= n, (n, name)


def test_theory_holds_for_each_dimension():
    for n in (4, 5):
        model = build_model(n)
        space = CylindricSpace(n, model.structure.universe_size)
        cache = {}
        for name, f in theory_axioms(n):
            assert sentence_holds(model.structure, f, space, cache=cache), name


def test_replacing_r_with_hull_breaks_only_big_r(model3, space3):
    mutated = Structure(7, model3.structure.signature,
                        {"R": model3.hull, "S": model3.structure.relations["S"]})
    for name, f in theory_axioms(3):
        holds = sentence_holds(mutated, f, space3)
        assert holds == (name != "big(R)"), name


def test_sigma_rejects_wrong_singleton(model3, space3):
    sig = dict(model3.structure.signature)
    sig["D"] = 1
    rels = dict(model3.structure.relations)
    rels["D"] = NAryRelation.from_tuples(1, 7, [(1,)])  # {a1}
    expanded = Structure(7, sig, rels)
    failing = [name for name, f in sigma_axioms(3)
               if not sentence_holds(expanded, f, space3)]
    assert failing  # {a1} is not a solution
    rels["D"] = NAryRelation.from_tuples(1, 7, [(0,)])  # {a0}
    expanded = Structure(7, sig, rels)
    assert all(sentence_holds(expanded, f, space3) for _, f in sigma_axioms(3))


def test_restrictedness_census(model3):
    # the axioms that substitute inside S atoms are flagged, nothing else is
    sig = dict(model3.structure.signature)
    sig["D"] = 1
    statuses = {name: is_restricted(f, sig)
                for name, f in theory_axioms(3) + sigma_axioms(3)}
    unrestricted = {name for name, ok in statuses.items() if not ok}
    assert unrestricted == {"s-functional", "s-three-cycle", "s-connects-U0"}


# ---------------------------------------------------------------------------
# the predicted atom family

def test_predicted_family_examples(model3, space3):
    family = {(d.sorts, d.choice): d for d in predicted_atom_family(model3, AS_WRITTEN)}
    assert family[((0, 1, 2), ("r",))].cells == model3.structure.relations["R"]
    hull_minus_r = NAryRelation(
        3, 7, model3.hull.cells & ~model3.structure.relations["R"].cells)
    assert family[((0, 1, 2), ("-r",))].cells == hull_minus_r
    # the two-step cycle block is the meaning of the corresponding formula
    from finvar.syntax import conj
    formula = conj([
        carrier_formula(3, 0, at=0),
        carrier_formula(3, 0, at=1),
        carrier_formula(3, 0, at=2),
        Atom("S", (0, 1)),
        Atom("S", (1, 2)),
    ])
    assert family[((0, 0, 0), ("S", "S"))].cells == \
        evaluate(model3.structure, formula, space3)


def test_predicted_family_counts(model3):
    # recount the family from the binary-partition cardinalities
    sizes = {(0, 0): 3, (1, 1): 2, (2, 2): 2}
    expected = 0
    for sorts in itertools.product(range(3), repeat=3):
        i, j, k = sorts
        if len({i, j, k}) == 3:
            expected += 2
        else:
            expected += sizes.get((i, j), 1) * sizes.get((j, k), 1)
    as_written = predicted_atom_family(model3, AS_WRITTEN)
    assert len(as_written) == expected
    refined = predicted_atom_family(model3, DIAGONAL_REFINED)
    middle_repeat = [s for s in itertools.product(range(3), repeat=3)
                     if s[0] == s[2] != s[1]]
    extra = sum(sizes[(s[0], s[0])] - 1 for s in middle_repeat)
    assert len(refined) == expected + extra


def test_predicted_family_partitions_each_mode(model3):
    for mode in (AS_WRITTEN, DIAGONAL_REFINED):
        family = predicted_atom_family(model3, mode)
        total = np.zeros((7, 7, 7), dtype=int)
        for d in family:
            total += d.cells.cells
        assert (total == 1).all()


def test_predicted_family_rejects_other_dimensions():
    with pytest.raises(ValueError, match="dimension 3"):
        predicted_atom_family(build_model(4))
    with pytest.raises(ValueError, match="unknown mode"):
        predicted_atom_family(build_model(3), "other")


def test_family_comparison(model3, closure3):
    comparison = compare_atom_family(closure3, model3)
    assert comparison["diagonal_refined_exact"]
    assert comparison["as_written_agrees_outside_middle_repeat"]
    assert not comparison["as_written_exact"]
    assert comparison["mixed_shape_atoms"] == 0
    mismatched = [tuple(row["sorts"]) for row in comparison["shapes"]
                  if not row[AS_WRITTEN]["match"]]
    assert mismatched == [s for s in itertools.product(range(3), repeat=3)
                          if s[0] == s[2] != s[1]]


# ---------------------------------------------------------------------------
# the verification report

def test_verify_theorem_3(model3):
    report = verify_theorem(3)
    assert report.overall
    for check_id in ("theory-holds", "implicit-definition-unique",
                     "target-not-definable", "domain-dichotomy", "rigidity"):
        assert report.check(check_id).passed, check_id
    assert report.check("atom-family-vs-predicted").passed
    assert report.atom_comparison is not None
    payload = report.to_dict()
    assert set(payload) == {"n", "scope", "checks", "atom_comparison", "overall"}


def test_verify_mutated_model_fails_theory(model3):
    mutated_structure = Structure(
        7, model3.structure.signature,
        {"R": model3.hull, "S": model3.structure.relations["S"]})
    mutated = CanonicalModel(3, mutated_structure, model3.labels,
                             model3.carriers, model3.hull)
    report = verify_theorem(3, model=mutated)
    assert not report.overall
    check = report.check("theory-holds")
    assert not check.passed and "big(R)" in check.detail


def test_verify_without_cardinality_axiom_fails_uniqueness():
    sigma = [(name, f) for name, f in sigma_axioms(3) if name != "size-D=1"]
    report = verify_theorem(3, sigma=sigma)
    assert not report.overall
    check = report.check("implicit-definition-unique")
    assert not check.passed and "5 solution(s)" in check.detail


def test_report_is_stable_under_element_renaming(model3):
    # an isomorphic copy produces the same pass/fail pattern
    rng = random.Random(8)
    perm = list(range(7))
    rng.shuffle(perm)
    relabel = {name: perm[e] for name, e in model3.labels.items()}
    relations = {
        name: NAryRelation.from_tuples(
            rel.arity, 7, [tuple(perm[v] for v in t) for t in rel.tuples()])
        for name, rel in model3.structure.relations.items()}
    carriers = [NAryRelation.from_tuples(1, 7, [(perm[t[0]],) for t in c.tuples()])
                for c in model3.carriers]
    hull = NAryRelation.from_tuples(
        3, 7, [tuple(perm[v] for v in t) for t in model3.hull.tuples()])
    permuted = CanonicalModel(
        3, Structure(7, model3.structure.signature, relations), relabel,
        carriers, hull)
    base = verify_theorem(3)
    moved = verify_theorem(3, model=permuted)
    assert [(c.check_id, c.passed) for c in base.checks] == \
        [(c.check_id, c.passed) for c in moved.checks]
    assert moved.overall
