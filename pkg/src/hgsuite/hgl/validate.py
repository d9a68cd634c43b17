"""Static checks that make a parsed unit analyzable.

An empty diagnostic list means downstream extraction cannot hit an
undefined name, an unknown command, recursion, or a symbolic schedule
delay.  ``location`` (the home's mode, capability ``mode``) and ``api``
(notification/API sinks) are built-in subjects available without a
declaration.
"""

from __future__ import annotations

from ..catalog import Catalog
from . import ast

LOCATION_VAR = "location"
API_VAR = "api"
LOCATION_CAPABILITY = "mode"

_RESERVED = frozenset({LOCATION_VAR, API_VAR, "evt", "state"})


def _is_const_expr(expr: ast.Expr) -> bool:
    if isinstance(expr, ast.Lit):
        return isinstance(expr.value, int) and not isinstance(expr.value, bool)
    if isinstance(expr, ast.Unary):
        return expr.op == "-" and _is_const_expr(expr.operand)
    if isinstance(expr, ast.Binary):
        return expr.op in ("+", "-", "*") and _is_const_expr(expr.lhs) and _is_const_expr(expr.rhs)
    return False


class _Validator:
    def __init__(self, unit: ast.SourceUnit, catalog: Catalog):
        self.unit = unit
        self.catalog = catalog
        self.out: list[ast.Diagnostic] = []
        self.devices: dict[str, str] = {}  # device var -> capability
        self.value_inputs: set[str] = set()
        for decl in unit.inputs:
            if isinstance(decl.kind, ast.DeviceKind):
                self.devices[decl.name] = decl.kind.capability
            else:
                self.value_inputs.add(decl.name)
        self.funcs = {fn.name: fn for fn in unit.funcs}

    def emit(self, code: str, message: str, node) -> None:
        self.out.append(ast.Diagnostic(code, message, node.line, node.col))

    # ------------------------------------------------------- top level

    def run(self) -> list[ast.Diagnostic]:
        for decl in self.unit.inputs:
            if decl.name in _RESERVED:
                self.emit("ReservedName", f"{decl.name!r} is a built-in name", decl)
            if isinstance(decl.kind, ast.DeviceKind):
                if decl.kind.capability not in self.catalog.capabilities:
                    self.emit(
                        "UnknownCapability",
                        f"input {decl.name!r} uses undeclared capability {decl.kind.capability!r}",
                        decl,
                    )
            elif isinstance(decl.kind, ast.EnumKind) and not decl.kind.values:
                self.emit("SchemaViolation", f"input {decl.name!r} has an empty enum", decl)
        for fn in self.unit.funcs:
            if fn.name in _RESERVED:
                self.emit("ReservedName", f"{fn.name!r} is a built-in name", fn)
            self.check_func(fn)
        self.check_recursion()
        return self.out

    def check_recursion(self) -> None:
        # runIn/runEvery edges count: symbolic execution inlines the
        # scheduled handler just like a direct call.
        edges: dict[str, list[str]] = {name: [] for name in self.funcs}

        def collect(name: str, stmts) -> None:
            for stmt in stmts:
                if isinstance(stmt, ast.LocalCall) and stmt.name in self.funcs:
                    edges[name].append(stmt.name)
                elif isinstance(stmt, (ast.RunIn, ast.RunEvery)) and stmt.handler in self.funcs:
                    edges[name].append(stmt.handler)
                elif isinstance(stmt, ast.If):
                    collect(name, stmt.then)
                    collect(name, stmt.orelse)
                elif isinstance(stmt, ast.Switch):
                    for _, block in stmt.cases:
                        collect(name, block)
                    if stmt.default is not None:
                        collect(name, stmt.default)

        for fn in self.unit.funcs:
            collect(fn.name, fn.body)

        WHITE, GRAY, BLACK = 0, 1, 2
        color = {name: WHITE for name in self.funcs}
        flagged: set[str] = set()

        def visit(name: str) -> None:
            color[name] = GRAY
            for succ in edges[name]:
                if color[succ] == GRAY:
                    if succ not in flagged:
                        flagged.add(succ)
                        self.emit(
                            "RecursionNotSupported",
                            f"call cycle through {succ!r}",
                            self.funcs[succ],
                        )
                elif color[succ] == WHITE:
                    visit(succ)
            color[name] = BLACK

        for name in self.funcs:
            if color[name] == WHITE:
                visit(name)

    # ------------------------------------------------------ functions

    def check_func(self, fn: ast.FuncDef) -> None:
        assigned: set[str] = set()
        self.check_stmts(fn, fn.body, assigned)

    def check_stmts(self, fn: ast.FuncDef, stmts, assigned: set[str]) -> None:
        for stmt in stmts:
            self.check_stmt(fn, stmt, assigned)

    def device_capability(self, var: str) -> str | None:
        if var == LOCATION_VAR:
            return LOCATION_CAPABILITY
        return self.devices.get(var)

    def check_subject(self, var: str, node, allow_api: bool = False) -> str | None:
        """Return the capability for a device subject, or None with a diagnostic."""
        if allow_api and var == API_VAR:
            return None
        cap = self.device_capability(var)
        if cap is None:
            self.emit("NotADevice", f"{var!r} is not a device input", node)
        elif cap not in self.catalog.capabilities:
            return None  # already diagnosed at the input declaration
        return cap

    def check_handler(self, name: str, node) -> None:
        if name not in self.funcs:
            self.emit("UnknownHandler", f"no function named {name!r}", node)

    def check_stmt(self, fn: ast.FuncDef, stmt: ast.Stmt, assigned: set[str]) -> None:
        if isinstance(stmt, ast.Subscribe):
            cap = self.check_subject(stmt.device, stmt)
            if cap is not None:
                attr, _, value = stmt.attr_spec.partition(".")
                spec = self.catalog.capability(cap).attributes.get(attr)
                if spec is None:
                    self.emit(
                        "UnknownAttribute", f"capability {cap!r} has no attribute {attr!r}", stmt
                    )
                elif value and spec.sort == "enum" and value not in spec.values:
                    self.emit(
                        "UnknownAttributeValue",
                        f"{attr!r} has no value {value!r} (expected one of {', '.join(spec.values)})",
                        stmt,
                    )
                elif value and spec.sort != "enum":
                    self.emit(
                        "UnknownAttributeValue",
                        f"{attr!r} is not an enum attribute; subscribe without a value filter",
                        stmt,
                    )
            self.check_handler(stmt.handler, stmt)
        elif isinstance(stmt, (ast.RunIn, ast.RunEvery)):
            delay = stmt.delay if isinstance(stmt, ast.RunIn) else stmt.period
            if not _is_const_expr(delay):
                self.emit("NonConstantDelay", "schedule delays must be integer constants", stmt)
            self.check_handler(stmt.handler, stmt)
            target = self.funcs.get(stmt.handler)
            if target is not None and target.param is not None:
                self.emit(
                    "ArityMismatch",
                    f"{stmt.handler!r} expects an event argument and cannot be scheduled",
                    stmt,
                )
            self.check_expr(fn, delay, assigned)
        elif isinstance(stmt, ast.CommandCall):
            cap = self.check_subject(stmt.device, stmt, allow_api=True)
            if stmt.device == API_VAR:
                sink = self.catalog.api_sinks.get(stmt.command)
                if sink is None:
                    self.emit("UnknownCommand", f"no API sink named {stmt.command!r}", stmt)
                elif len(stmt.args) != len(sink.params):
                    self.emit(
                        "ArityMismatch",
                        f"{stmt.command} takes {len(sink.params)} argument(s), got {len(stmt.args)}",
                        stmt,
                    )
            elif cap is not None:
                spec = self.catalog.capability(cap).commands.get(stmt.command)
                if spec is None:
                    self.emit(
                        "UnknownCommand",
                        f"capability {cap!r} has no command {stmt.command!r}",
                        stmt,
                    )
                elif len(stmt.args) != len(spec.params):
                    self.emit(
                        "ArityMismatch",
                        f"{cap}.{stmt.command} takes {len(spec.params)} argument(s), got {len(stmt.args)}",
                        stmt,
                    )
            for arg in stmt.args:
                self.check_expr(fn, arg, assigned)
        elif isinstance(stmt, ast.Assign):
            if stmt.name in self.devices or stmt.name in _RESERVED:
                self.emit("NotAssignable", f"cannot assign to {stmt.name!r}", stmt)
            self.check_expr(fn, stmt.expr, assigned)
            assigned.add(stmt.name)
        elif isinstance(stmt, ast.If):
            # Definite assignment: a local survives the join only when
            # every branch assigns it.
            self.check_expr(fn, stmt.cond, assigned)
            then_set = set(assigned)
            else_set = set(assigned)
            self.check_stmts(fn, stmt.then, then_set)
            self.check_stmts(fn, stmt.orelse, else_set)
            assigned |= then_set & else_set
        elif isinstance(stmt, ast.Switch):
            self.check_expr(fn, stmt.scrutinee, assigned)
            arms: list[set[str]] = []
            for _, block in stmt.cases:
                arm = set(assigned)
                self.check_stmts(fn, block, arm)
                arms.append(arm)
            if stmt.default is not None:
                arm = set(assigned)
                self.check_stmts(fn, stmt.default, arm)
                arms.append(arm)
            else:
                arms.append(set(assigned))  # fall-through arm assigns nothing
            assigned |= set.intersection(*arms)
        else:
            assert isinstance(stmt, ast.LocalCall)
            self.check_handler(stmt.name, stmt)
            target = self.funcs.get(stmt.name)
            if target is not None and target.param is not None:
                self.emit(
                    "ArityMismatch",
                    f"{stmt.name!r} expects an event argument and cannot be called locally",
                    stmt,
                )

    def check_expr(self, fn: ast.FuncDef, expr: ast.Expr, assigned: set[str]) -> None:
        if isinstance(expr, ast.VarRef):
            if expr.name == fn.param:
                self.emit(
                    "BadEventUse", "the event parameter is only readable via evt.value", expr
                )
            elif (
                expr.name not in self.value_inputs
                and expr.name not in assigned
                and expr.name not in self.devices
            ):
                self.emit("UnboundVariable", f"{expr.name!r} is not defined here", expr)
            elif expr.name in self.devices:
                self.emit("NotAValue", f"device {expr.name!r} cannot be used as a value", expr)
        elif isinstance(expr, ast.EventValue):
            if fn.param is None:
                self.emit("BadEventUse", f"{fn.name!r} has no event parameter", expr)
        elif isinstance(expr, ast.AttrRead):
            cap = self.check_subject(expr.device, expr)
            if cap is not None and expr.attribute not in self.catalog.capability(cap).attributes:
                self.emit(
                    "UnknownAttribute",
                    f"capability {cap!r} has no attribute {expr.attribute!r}",
                    expr,
                )
        elif isinstance(expr, ast.Binary):
            self.check_expr(fn, expr.lhs, assigned)
            self.check_expr(fn, expr.rhs, assigned)
        elif isinstance(expr, ast.Unary):
            self.check_expr(fn, expr.operand, assigned)
        # Lit and StateRead need no checks.


def validate(unit: ast.SourceUnit, catalog: Catalog) -> list[ast.Diagnostic]:
    """Return all diagnostics; empty means the unit is analyzable."""
    return _Validator(unit, catalog).run()
