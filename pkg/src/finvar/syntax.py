"""Formulas of the bounded-variable fragment.

The primitive constructors are relation application, equality, negation,
binary conjunction, and existential quantification.  Disjunction,
implication, equivalence, and universal quantification are accepted by the
parser (and by the helper builders below) but are rewritten into primitives
on the spot, so everything downstream sees a five-constructor tree.

Variables are plain indices: ``v0``, ``v1``, ... in the concrete syntax,
``0``, ``1``, ... in the tree.  Quantifiers bind by index; there is no
notion of shadowing or renaming.

Concrete grammar (whitespace-insensitive)::

    formula := quant | binary
    quant   := ("E" | "A") var formula            # scope extends maximally
    binary  := unary (("&" | "|" | "->" | "<->") unary)*
               # precedence ~ > & > | > -> > <->,
               # & and | left-associative, -> and <-> right-associative
    unary   := "~" unary | "(" formula ")" | atom
    atom    := name "(" var ("," var)* ")" | var "=" var
    var     := "v" digits
    name    := letter (letter | digit | "_")*

``E`` and ``A`` are reserved words and cannot be used as relation names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "Atom", "Eq", "Not", "And", "Exists", "Formula", "Signature",
    "ParseError", "parse", "render", "variable_span", "is_restricted",
    "subformulas", "mentions_relation",
    "or_", "implies", "iff", "forall", "conj", "disj",
]

Signature = dict  # relation name -> arity (>= 1)


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(int(a) for a in self.args))


@dataclass(frozen=True)
class Eq:
    left: int
    right: int


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: int
    body: "Formula"


Formula = Union[Atom, Eq, Not, And, Exists]


# ---------------------------------------------------------------------------
# derived connectives, rewritten into primitives

def _neg(p: "Formula") -> "Formula":
    # collapse double negation so rewritten sugar stays readable
    return p.body if isinstance(p, Not) else Not(p)


def or_(p: Formula, q: Formula) -> Formula:
    return Not(And(_neg(p), _neg(q)))


def implies(p: Formula, q: Formula) -> Formula:
    return Not(And(p, _neg(q)))


def iff(p: Formula, q: Formula) -> Formula:
    return And(implies(p, q), implies(q, p))


def forall(var: int, body: Formula) -> Formula:
    return Not(Exists(var, _neg(body)))


def conj(parts) -> Formula:
    """Left fold of a nonempty sequence under And."""
    parts = list(parts)
    if not parts:
        raise ValueError("conj of an empty sequence")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        raise ValueError("disj of an empty sequence")
    out = parts[0]
    for p in parts[1:]:
        out = or_(out, p)
    return out


# ---------------------------------------------------------------------------
# analyses

def subformulas(f: Formula) -> Iterator[Formula]:
    """Yield every subformula of ``f``, including ``f`` itself."""
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, And):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, Exists):
        yield from subformulas(f.body)


def variable_span(f: Formula) -> int:
    """1 + the largest variable index occurring in ``f``, free or bound."""
    if isinstance(f, Atom):
        return max(f.args) + 1
    if isinstance(f, Eq):
        return max(f.left, f.right) + 1
    if isinstance(f, Not):
        return variable_span(f.body)
    if isinstance(f, And):
        return max(variable_span(f.left), variable_span(f.right))
    if isinstance(f, Exists):
        return max(f.var + 1, variable_span(f.body))
    raise TypeError(f"not a formula: {f!r}")


def is_restricted(f: Formula, signature: Signature) -> bool:
    """True iff every relational atom lists its variables as v0, .., v(k-1).

    Equality atoms are unconstrained.  Unknown relation names are an error.
    """
    for g in subformulas(f):
        if isinstance(g, Atom):
            if g.name not in signature:
                raise ValueError(f"unknown relation {g.name!r}")
            if g.args != tuple(range(signature[g.name])):
                return False
    return True


def mentions_relation(f: Formula, name: str) -> bool:
    return any(isinstance(g, Atom) and g.name == name for g in subformulas(f))


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    """Malformed input; ``position`` is a character offset into the text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at character {position})")
        self.position = position


_TOKEN = re.compile(r"<->|->|[()~&|,=]|[A-Za-z_][A-Za-z0-9_]*")
_VAR = re.compile(r"v(\d+)\Z")
_QUANTIFIERS = ("E", "A")


class _Parser:
    def __init__(self, text: str, signature: Signature):
        self.text = text
        self.signature = signature
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            self.tokens.append((m.group(), pos))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def position(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, want: str) -> bool:
        if self.peek() == want:
            self.i += 1
            return True
        return False

    def expect(self, want: str):
        if not self.accept(want):
            raise ParseError(f"expected {want!r}, found {self.peek()!r}", self.position())

    def variable(self) -> int:
        pos = self.position()
        if self.peek() is None:
            raise ParseError("expected a variable", pos)
        tok, _ = self.take()
        m = _VAR.match(tok)
        if m is None:
            raise ParseError(f"expected a variable, found {tok!r}", pos)
        return int(m.group(1))

    def formula(self) -> Formula:
        if self.peek() in _QUANTIFIERS:
            quant, _ = self.take()
            var = self.variable()
            body = self.formula()
            return Exists(var, body) if quant == "E" else forall(var, body)
        return self._iff()

    def _iff(self) -> Formula:
        left = self._implies()
        if self.accept("<->"):
            return iff(left, self._iff())
        return left

    def _implies(self) -> Formula:
        left = self._or()
        if self.accept("->"):
            return implies(left, self._implies())
        return left

    def _or(self) -> Formula:
        left = self._and()
        while self.accept("|"):
            left = or_(left, self._and())
        return left

    def _and(self) -> Formula:
        left = self._unary()
        while self.accept("&"):
            left = And(left, self._unary())
        return left

    def _unary(self) -> Formula:
        if self.accept("~"):
            return Not(self._unary())
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        return self._atom()

    def _atom(self) -> Formula:
        pos = self.position()
        if self.peek() is None:
            raise ParseError("expected a formula", pos)
        tok, _ = self.take()
        if _VAR.match(tok):
            self.expect("=")
            return Eq(int(tok[1:]), self.variable())
        if not tok[0].isalpha() and tok[0] != "_":
            raise ParseError(f"expected an atom, found {tok!r}", pos)
        name = tok
        if name not in self.signature:
            raise ParseError(f"unknown relation {name!r}", pos)
        self.expect("(")
        args = [self.variable()]
        while self.accept(","):
            args.append(self.variable())
        self.expect(")")
        arity = self.signature[name]
        if len(args) != arity:
            raise ParseError(
                f"relation {name!r} takes {arity} arguments, got {len(args)}", pos)
        return Atom(name, tuple(args))


def parse(text: str, signature: Signature) -> Formula:
    """Parse ``text`` against ``signature``; sugar is eliminated eagerly."""
    p = _Parser(text, signature)
    f = p.formula()
    if p.peek() is not None:
        raise ParseError(f"unexpected token {p.peek()!r}", p.position())
    return f


# ---------------------------------------------------------------------------
# rendering

def render(f: Formula) -> str:
    """Concrete syntax for ``f``; ``parse(render(f)) == f`` structurally."""
    if isinstance(f, Atom):
        return f"{f.name}({', '.join(f'v{a}' for a in f.args)})"
    if isinstance(f, Eq):
        return f"v{f.left} = v{f.right}"
    if isinstance(f, Not):
        return "~" + _operand(f.body)
    if isinstance(f, And):
        return f"{_operand(f.left, allow_and=True)} & {_operand(f.right)}"
    if isinstance(f, Exists):
        return f"E v{f.var} {render(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _operand(f: Formula, allow_and: bool = False) -> str:
    # quantifiers never appear bare inside binary/unary contexts, and a
    # right-hand And must be bracketed to survive left-associative reparsing
    if isinstance(f, Exists) or (isinstance(f, And) and not allow_and):
        return "(" + render(f) + ")"
    return render(f)
