"""n-variable first-order logic over finite structures.

Evaluation with cylindric set operations, the full algebra of definable
n-ary relations with witness formulas, implicit-definition solving, and
the mechanical replay of a family of models over 2n+1 elements whose
implicitly defined point has no n-variable explicit definition.
"""

from .syntax import (Atom, Eq, Not, And, Exists, Formula, Signature,
                     ParseError, parse, render, variable_span, is_restricted,
                     subformulas, mentions_relation, or_, implies, iff,
                     forall, conj, disj)
from .structures import (NAryRelation, Structure, relation_from_tuples,
                         load_structure, save_structure, project_coordinate)
from .semantics import CylindricSpace, evaluate, evaluate_naive, sentence_holds
from .closure import (AlgebraClosure, ImplicitDefinitionProblem, close,
                      is_definable, definable_unary_relations,
                      solutions_of_implicit_definition, automorphisms,
                      atom_coordinate_presence)
from .construction import (CanonicalModel, AtomDescriptor, CheckResult,
                           VerificationReport, AS_WRITTEN, DIAGONAL_REFINED,
                           ATOM_FAMILY_MODES, build_model, theory_axioms,
                           build_theory, sigma_axioms, build_sigma,
                           carrier_formula, hull_formula, r_atom,
                           big_r_formula, predicted_atom_family,
                           compare_atom_family, verify_theorem)

__version__ = "0.1.0"
