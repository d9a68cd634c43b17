"""AST node types for HGL.

Nodes carry their source position for diagnostics; positions are
excluded from equality so a parse -> format -> parse round trip compares
equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


def _pos():
    return field(default=0, compare=False, repr=False)


# ------------------------------------------------------------- inputs


@dataclass(frozen=True, slots=True)
class DeviceKind:
    capability: str


@dataclass(frozen=True, slots=True)
class NumberKind:
    pass


@dataclass(frozen=True, slots=True)
class StringKind:
    pass


@dataclass(frozen=True, slots=True)
class BoolKind:
    pass


@dataclass(frozen=True, slots=True)
class EnumKind:
    values: tuple[str, ...]


InputKind = Union[DeviceKind, NumberKind, StringKind, BoolKind, EnumKind]


@dataclass(frozen=True, slots=True)
class InputDecl:
    name: str
    kind: InputKind
    title: str | None = None
    line: int = _pos()
    col: int = _pos()


# -------------------------------------------------------- expressions


@dataclass(frozen=True, slots=True)
class Lit:
    value: int | str | bool
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class VarRef:
    name: str
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class EventValue:
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class StateRead:
    name: str
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class AttrRead:
    device: str
    attribute: str
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class Binary:
    op: str  # + - * == != < <= > >= && ||
    lhs: "Expr"
    rhs: "Expr"
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class Unary:
    op: str  # ! -
    operand: "Expr"
    line: int = _pos()
    col: int = _pos()


Expr = Union[Lit, VarRef, EventValue, StateRead, AttrRead, Binary, Unary]


# --------------------------------------------------------- statements


@dataclass(frozen=True, slots=True)
class Subscribe:
    device: str
    attr_spec: str  # "attr" or "attr.value"
    handler: str
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class RunIn:
    delay: Expr
    handler: str
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class RunEvery:
    period: Expr
    handler: str
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class CommandCall:
    device: str
    command: str
    args: tuple[Expr, ...]
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class Assign:
    name: str
    expr: Expr
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...]
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class Switch:
    scrutinee: Expr
    cases: tuple[tuple[Lit, tuple["Stmt", ...]], ...]
    default: tuple["Stmt", ...] | None
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class LocalCall:
    name: str
    line: int = _pos()
    col: int = _pos()


Stmt = Union[Subscribe, RunIn, RunEvery, CommandCall, Assign, If, Switch, LocalCall]


@dataclass(frozen=True, slots=True)
class FuncDef:
    name: str
    param: str | None
    body: tuple[Stmt, ...]
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True, slots=True)
class SourceUnit:
    name: str
    inputs: tuple[InputDecl, ...]
    funcs: tuple[FuncDef, ...]

    def input(self, name: str) -> InputDecl | None:
        for decl in self.inputs:
            if decl.name == name:
                return decl
        return None

    def func(self, name: str) -> FuncDef | None:
        for fn in self.funcs:
            if fn.name == name:
                return fn
        return None


@dataclass(frozen=True, slots=True)
class Diagnostic:
    code: str
    message: str
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.code}: {self.message}"
