"""Canonical formatter for HGL source units.

``parse(format_source(unit)) == unit`` (positions aside); tests rely on
this round trip.
"""

from __future__ import annotations

import json

from . import ast

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
}
_UNARY_PREC = 7


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _lit(value: int | str | bool) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return _quote(value)


def format_expr(expr: ast.Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, ast.Lit):
        return _lit(expr.value)
    if isinstance(expr, ast.VarRef):
        return expr.name
    if isinstance(expr, ast.EventValue):
        return "evt.value"
    if isinstance(expr, ast.StateRead):
        return f"state.{expr.name}"
    if isinstance(expr, ast.AttrRead):
        return f"{expr.device}.current({_quote(expr.attribute)})"
    if isinstance(expr, ast.Unary):
        inner = format_expr(expr.operand, _UNARY_PREC)
        return f"{expr.op}{inner}"
    assert isinstance(expr, ast.Binary)
    prec = _PRECEDENCE[expr.op]
    lhs = format_expr(expr.lhs, prec)
    rhs = format_expr(expr.rhs, prec, right_side=True)
    text = f"{lhs} {expr.op} {rhs}"
    if prec < parent_prec or (prec == parent_prec and right_side):
        return f"({text})"
    return text


def _format_stmt(stmt: ast.Stmt, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(stmt, ast.Subscribe):
        out.append(f"{pad}subscribe({stmt.device}, {_quote(stmt.attr_spec)}, {stmt.handler})")
    elif isinstance(stmt, ast.RunIn):
        out.append(f"{pad}runIn({format_expr(stmt.delay)}, {stmt.handler})")
    elif isinstance(stmt, ast.RunEvery):
        out.append(f"{pad}runEvery({format_expr(stmt.period)}, {stmt.handler})")
    elif isinstance(stmt, ast.CommandCall):
        args = ", ".join(format_expr(a) for a in stmt.args)
        out.append(f"{pad}{stmt.device}.{stmt.command}({args})")
    elif isinstance(stmt, ast.Assign):
        out.append(f"{pad}{stmt.name} = {format_expr(stmt.expr)}")
    elif isinstance(stmt, ast.If):
        out.append(f"{pad}if ({format_expr(stmt.cond)}) {{")
        for inner in stmt.then:
            _format_stmt(inner, indent + 1, out)
        if stmt.orelse:
            out.append(f"{pad}}} else {{")
            for inner in stmt.orelse:
                _format_stmt(inner, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, ast.Switch):
        out.append(f"{pad}switch ({format_expr(stmt.scrutinee)}) {{")
        for lit, block in stmt.cases:
            out.append(f"{pad}  case {_lit(lit.value)}: {{")
            for inner in block:
                _format_stmt(inner, indent + 2, out)
            out.append(f"{pad}  }}")
        if stmt.default is not None:
            out.append(f"{pad}  default: {{")
            for inner in stmt.default:
                _format_stmt(inner, indent + 2, out)
            out.append(f"{pad}  }}")
        out.append(f"{pad}}}")
    else:
        assert isinstance(stmt, ast.LocalCall)
        out.append(f"{pad}{stmt.name}()")


def _format_kind(kind: ast.InputKind) -> str:
    if isinstance(kind, ast.DeviceKind):
        return f"device.{kind.capability}"
    if isinstance(kind, ast.NumberKind):
        return "number"
    if isinstance(kind, ast.StringKind):
        return "string"
    if isinstance(kind, ast.BoolKind):
        return "bool"
    assert isinstance(kind, ast.EnumKind)
    return "enum(" + ", ".join(_quote(v) for v in kind.values) + ")"


def format_source(unit: ast.SourceUnit) -> str:
    out: list[str] = [f"app {_quote(unit.name)}"]
    if unit.inputs:
        out.append("")
    for decl in unit.inputs:
        line = f"input {decl.name}: {_format_kind(decl.kind)}"
        if decl.title is not None:
            line += f" title {_quote(decl.title)}"
        out.append(line)
    for fn in unit.funcs:
        out.append("")
        param = fn.param or ""
        out.append(f"def {fn.name}({param}) {{")
        for stmt in fn.body:
            _format_stmt(stmt, 1, out)
        out.append("}")
    return "\n".join(out) + "\n"
