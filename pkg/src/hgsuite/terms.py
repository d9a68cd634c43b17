"""Symbolic terms and constraint literals.

The whole pipeline (extraction, rule files, solving) shares one small
term language:

    term = IntConst | StrConst | BoolConst     constants
         | SymInput(name, sort)                user inputs, locals, state reads
         | AttrVar(device, attribute, sort)    device attribute state
         | EventVal(sort)                      the triggering event's value
         | Arith(op, lhs, rhs)                 op in {+, -, *}

    lit  = ConstraintLit(op, lhs, rhs)         op in {==, !=, <, <=, >, >=}

Literals are closed under negation, so path conditions stay plain
conjunctions.  Terms serialize to s-expression strings; symbol atoms
carry their sort so deserialization is lossless:

    (> (var t int) (var threshold1 int))
    (== (attr tv1 switch str) "on")
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

Sort = str  # "int" | "str" | "bool"

# ---------------------------------------------------------------- terms


@dataclass(frozen=True, slots=True)
class IntConst:
    value: int


@dataclass(frozen=True, slots=True)
class StrConst:
    value: str


@dataclass(frozen=True, slots=True)
class BoolConst:
    value: bool


@dataclass(frozen=True, slots=True)
class SymInput:
    name: str
    sort: Sort = "int"


@dataclass(frozen=True, slots=True)
class AttrVar:
    device: str
    attribute: str
    sort: Sort = "str"


@dataclass(frozen=True, slots=True)
class EventVal:
    sort: Sort = "str"


@dataclass(frozen=True, slots=True)
class Arith:
    op: str  # + - *
    lhs: "Term"
    rhs: "Term"


Term = Union[IntConst, StrConst, BoolConst, SymInput, AttrVar, EventVal, Arith]

_NEGATED = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
_CMP_OPS = frozenset(_NEGATED)
_ARITH_OPS = frozenset({"+", "-", "*"})


@dataclass(frozen=True, slots=True)
class ConstraintLit:
    op: str
    lhs: Term
    rhs: Term

    def negate(self) -> "ConstraintLit":
        return ConstraintLit(_NEGATED[self.op], self.lhs, self.rhs)


def sort_of(term: Term) -> Sort:
    if isinstance(term, IntConst):
        return "int"
    if isinstance(term, StrConst):
        return "str"
    if isinstance(term, BoolConst):
        return "bool"
    if isinstance(term, (SymInput, AttrVar, EventVal)):
        return term.sort
    if isinstance(term, Arith):
        return "int"
    raise TypeError(f"not a term: {term!r}")


def walk(term: Term) -> Iterator[Term]:
    """Yield ``term`` and every subterm, preorder."""
    yield term
    if isinstance(term, Arith):
        yield from walk(term.lhs)
        yield from walk(term.rhs)


def lit_terms(lit: ConstraintLit) -> Iterator[Term]:
    yield from walk(lit.lhs)
    yield from walk(lit.rhs)


def substitute(term: Term, mapping: Mapping[Term, Term]) -> Term:
    """Replace leaf terms per ``mapping``; folds constant arithmetic."""
    if term in mapping:
        return mapping[term]
    if isinstance(term, Arith):
        return make_arith(term.op, substitute(term.lhs, mapping), substitute(term.rhs, mapping))
    return term


def substitute_lit(lit: ConstraintLit, mapping: Mapping[Term, Term]) -> ConstraintLit:
    return ConstraintLit(lit.op, substitute(lit.lhs, mapping), substitute(lit.rhs, mapping))


def make_arith(op: str, lhs: Term, rhs: Term) -> Term:
    """Build an arithmetic term, folding when both sides are constants."""
    if op not in _ARITH_OPS:
        raise ValueError(f"bad arithmetic op {op!r}")
    if isinstance(lhs, IntConst) and isinstance(rhs, IntConst):
        a, b = lhs.value, rhs.value
        return IntConst(a + b if op == "+" else a - b if op == "-" else a * b)
    return Arith(op, lhs, rhs)


def is_linear(term: Term) -> bool:
    """True iff no multiplication has variables on both sides."""
    if isinstance(term, Arith):
        if term.op == "*":
            lhs_vars = any(not _is_const(t) for t in walk(term.lhs))
            rhs_vars = any(not _is_const(t) for t in walk(term.rhs))
            if lhs_vars and rhs_vars:
                return False
        return is_linear(term.lhs) and is_linear(term.rhs)
    return True


def _is_const(term: Term) -> bool:
    return isinstance(term, (IntConst, StrConst, BoolConst))


# ----------------------------------------------------------- evaluation


def eval_term(term: Term, env: Mapping[Term, object]) -> object:
    """Evaluate under an assignment of leaf terms to Python values."""
    if isinstance(term, IntConst):
        return term.value
    if isinstance(term, StrConst):
        return term.value
    if isinstance(term, BoolConst):
        return term.value
    if isinstance(term, Arith):
        a = eval_term(term.lhs, env)
        b = eval_term(term.rhs, env)
        if not isinstance(a, int) or not isinstance(b, int) or isinstance(a, bool) or isinstance(b, bool):
            raise ValueError(f"arithmetic over non-int values: {a!r} {term.op} {b!r}")
        return a + b if term.op == "+" else a - b if term.op == "-" else a * b
    if term in env:
        return env[term]
    raise KeyError(f"unassigned term {term!r}")


def eval_lit(lit: ConstraintLit, env: Mapping[Term, object]) -> bool:
    a = eval_term(lit.lhs, env)
    b = eval_term(lit.rhs, env)
    if lit.op == "==":
        return a == b
    if lit.op == "!=":
        return a != b
    if isinstance(a, bool) or isinstance(b, bool) or not isinstance(a, int) or not isinstance(b, int):
        raise ValueError(f"ordering comparison over non-int values: {a!r} {lit.op} {b!r}")
    if lit.op == "<":
        return a < b
    if lit.op == "<=":
        return a <= b
    if lit.op == ">":
        return a > b
    return a >= b


def const_eval_lit(lit: ConstraintLit) -> bool | None:
    """Evaluate a literal whose sides are constants; None when symbolic."""
    try:
        return eval_lit(lit, {})
    except (KeyError, ValueError):
        return None


# -------------------------------------------------------- s-expressions


def term_to_sexpr(term: Term) -> str:
    if isinstance(term, IntConst):
        return str(term.value)
    if isinstance(term, StrConst):
        return json.dumps(term.value, ensure_ascii=False)
    if isinstance(term, BoolConst):
        return "true" if term.value else "false"
    if isinstance(term, SymInput):
        return f"(var {term.name} {term.sort})"
    if isinstance(term, AttrVar):
        return f"(attr {term.device} {term.attribute} {term.sort})"
    if isinstance(term, EventVal):
        return f"(evt {term.sort})"
    if isinstance(term, Arith):
        return f"({term.op} {term_to_sexpr(term.lhs)} {term_to_sexpr(term.rhs)})"
    raise TypeError(f"not a term: {term!r}")


def lit_to_sexpr(lit: ConstraintLit) -> str:
    return f"({lit.op} {term_to_sexpr(lit.lhs)} {term_to_sexpr(lit.rhs)})"


def _tokenize_sexpr(text: str) -> list[str]:
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            out.append(c)
            i += 1
        elif c == '"':
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                elif text[j] == '"':
                    break
                else:
                    j += 1
            if j >= n:
                raise ValueError(f"unterminated string in s-expression: {text!r}")
            out.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _read(tokens: list[str], pos: int) -> tuple[object, int]:
    tok = tokens[pos]
    if tok == "(":
        items: list[object] = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _read(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise ValueError("unbalanced s-expression")
        return items, pos + 1
    if tok == ")":
        raise ValueError("unbalanced s-expression")
    return tok, pos + 1


_SORTS = frozenset({"int", "str", "bool"})


def _atom_to_term(atom: object) -> Term:
    if isinstance(atom, str):
        if atom.startswith('"'):
            return StrConst(json.loads(atom))
        if atom == "true":
            return BoolConst(True)
        if atom == "false":
            return BoolConst(False)
        try:
            return IntConst(int(atom, 10))
        except ValueError:
            raise ValueError(f"bad term atom {atom!r}") from None
    assert isinstance(atom, list)
    head = atom[0]
    if head == "var" and len(atom) == 3 and atom[2] in _SORTS:
        return SymInput(str(atom[1]), str(atom[2]))
    if head == "attr" and len(atom) == 4 and atom[3] in _SORTS:
        return AttrVar(str(atom[1]), str(atom[2]), str(atom[3]))
    if head == "evt" and len(atom) == 2 and atom[1] in _SORTS:
        return EventVal(str(atom[1]))
    if head in _ARITH_OPS and len(atom) == 3:
        return make_arith(str(head), _atom_to_term(atom[1]), _atom_to_term(atom[2]))
    raise ValueError(f"bad term s-expression {atom!r}")


def term_from_sexpr(text: str) -> Term:
    tokens = _tokenize_sexpr(text)
    atom, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in s-expression {text!r}")
    return _atom_to_term(atom)


def lit_from_sexpr(text: str) -> ConstraintLit:
    tokens = _tokenize_sexpr(text)
    atom, pos = _read(tokens, 0)
    if pos != len(tokens) or not isinstance(atom, list) or len(atom) != 3 or atom[0] not in _CMP_OPS:
        raise ValueError(f"bad constraint s-expression {text!r}")
    return ConstraintLit(str(atom[0]), _atom_to_term(atom[1]), _atom_to_term(atom[2]))
