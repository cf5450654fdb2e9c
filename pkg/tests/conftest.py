import itertools
import random

import pytest
from hypothesis import settings

from finvar import (CylindricSpace, NAryRelation, Structure, build_model,
                    close)
from finvar.syntax import And, Atom, Eq, Exists, Not

settings.register_profile("suite", max_examples=60, deadline=None)
settings.load_profile("suite")

PAPERISH_SIG = {"R": 3, "S": 2}


@pytest.fixture(scope="session")
def model3():
    return build_model(3)


@pytest.fixture(scope="session")
def space3(model3):
    return CylindricSpace(3, model3.structure.universe_size)


@pytest.fixture(scope="session")
def closure3(model3, space3):
    return close(model3.structure, space3)


def random_structure(rng: random.Random, m: int, signature: dict,
                     density: float = 0.5) -> Structure:
    relations = {}
    for name, arity in signature.items():
        tuples = [t for t in itertools.product(range(m), repeat=arity)
                  if rng.random() < density]
        relations[name] = NAryRelation.from_tuples(arity, m, tuples)
    return Structure(m, signature, relations)


def random_formula(rng: random.Random, signature: dict, n: int, depth: int):
    """A primitive-constructor tree of depth at most ``depth`` (leaves count 1)."""
    if depth <= 1 or rng.random() < 0.3:
        if signature and rng.random() < 0.6:
            name = rng.choice(sorted(signature))
            return Atom(name, tuple(rng.randrange(n) for _ in range(signature[name])))
        return Eq(rng.randrange(n), rng.randrange(n))
    r = rng.random()
    if r < 0.25:
        return Not(random_formula(rng, signature, n, depth - 1))
    if r < 0.6:
        return And(random_formula(rng, signature, n, depth - 1),
                   random_formula(rng, signature, n, depth - 1))
    return Exists(rng.randrange(n), random_formula(rng, signature, n, depth - 1))
