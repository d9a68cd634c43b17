"""HGL: a small trigger-condition-action automation language."""

from .ast import (
    AttrRead,
    Assign,
    Binary,
    CommandCall,
    Diagnostic,
    EnumKind,
    EventValue,
    FuncDef,
    If,
    InputDecl,
    Lit,
    LocalCall,
    RunEvery,
    RunIn,
    SourceUnit,
    StateRead,
    Subscribe,
    Switch,
    Unary,
    VarRef,
)
from .parser import parse
from .printer import format_source
from .validate import validate

__all__ = [
    "Assign",
    "AttrRead",
    "Binary",
    "CommandCall",
    "Diagnostic",
    "EnumKind",
    "EventValue",
    "FuncDef",
    "If",
    "InputDecl",
    "Lit",
    "LocalCall",
    "RunEvery",
    "RunIn",
    "SourceUnit",
    "StateRead",
    "Subscribe",
    "Switch",
    "Unary",
    "VarRef",
    "format_source",
    "parse",
    "validate",
]
