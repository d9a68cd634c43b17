"""Concrete HGL interpreter used as a differential oracle.

Runs an app the straightforward way: register subscriptions by walking
``installed()``, then dispatch one event against a concrete world and
record every command the handlers fire.  The extracted rules for the
same app must predict exactly those commands when their trigger and
condition are evaluated under the same world, which is what
``fired_commands`` / ``predicted_commands`` let a test compare.

The world maps ``(input_name, attribute)`` to attribute values and
plain input names to number/string/bool values.  ``location`` is just
another source name.  State reads are out of scope for the corpus this
oracle runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from hgsuite.hgl import ast
from hgsuite import terms
from hgsuite.rules import Rule


@dataclass(frozen=True)
class Event:
    source: str  # input name or "location"
    attribute: str
    value: int | str | bool


@dataclass(frozen=True)
class Fired:
    subject: str
    command: str
    args: tuple
    when: int = 0
    period: int = 0

    def key(self):
        return (self.subject, self.command, self.args, self.when, self.period)


@dataclass
class _Frame:
    event: Event
    locals: dict = field(default_factory=dict)
    delay: int = 0
    period: int = 0


class Interpreter:
    def __init__(self, unit: ast.SourceUnit, world: dict):
        self.unit = unit
        self.world = world
        self.fired: list[Fired] = []
        self.subs: dict[tuple, ast.Subscribe] = {}
        installed = unit.func("installed")
        if installed is not None:
            self._register(installed)

    def _register(self, fn: ast.FuncDef) -> None:
        for stmt in fn.body:
            if isinstance(stmt, ast.Subscribe):
                key = (stmt.device, stmt.attr_spec, stmt.handler)
                self.subs[key] = stmt
            elif isinstance(stmt, (ast.RunIn, ast.RunEvery, ast.CommandCall, ast.LocalCall)):
                pass  # lifecycle side effects are not event-driven
            # control flow inside installed() is not part of the corpus

    # ------------------------------------------------------------ events

    def dispatch(self, event: Event) -> list[Fired]:
        self.fired = []
        # at handler time the triggering attribute holds the event value
        self.world = {**self.world, (event.source, event.attribute): event.value}
        for (device, attr_spec, handler), _ in sorted(self.subs.items()):
            if device != event.source:
                continue
            attr, _, want = attr_spec.partition(".")
            if attr != event.attribute:
                continue
            if want and str(event.value) != want:
                continue
            fn = self.unit.func(handler)
            assert fn is not None, handler
            self._run(fn, _Frame(event=event))
        return self.fired

    def _run(self, fn: ast.FuncDef, frame: _Frame) -> None:
        self._stmts(fn.body, frame)

    def _stmts(self, stmts, frame: _Frame) -> None:
        for stmt in stmts:
            self._stmt(stmt, frame)

    def _stmt(self, stmt, frame: _Frame) -> None:
        if isinstance(stmt, ast.Assign):
            frame.locals[stmt.name] = self._eval(stmt.expr, frame)
        elif isinstance(stmt, ast.CommandCall):
            args = tuple(self._eval(a, frame) for a in stmt.args)
            self.fired.append(
                Fired(stmt.device, stmt.command, args, when=frame.delay, period=frame.period)
            )
        elif isinstance(stmt, ast.If):
            branch = stmt.then if self._eval(stmt.cond, frame) else stmt.orelse
            self._stmts(branch, frame)
        elif isinstance(stmt, ast.Switch):
            value = self._eval(stmt.scrutinee, frame)
            for lit, body in stmt.cases:
                if value == lit.value:
                    self._stmts(body, frame)
                    return
            if stmt.default is not None:
                self._stmts(stmt.default, frame)
        elif isinstance(stmt, ast.LocalCall):
            fn = self.unit.func(stmt.name)
            assert fn is not None, stmt.name
            self._run(fn, frame)
        elif isinstance(stmt, ast.RunIn):
            fn = self.unit.func(stmt.handler)
            assert fn is not None, stmt.handler
            inner = _Frame(event=frame.event, locals=dict(frame.locals),
                           delay=frame.delay + int(self._eval(stmt.delay, frame)),
                           period=frame.period)
            self._run(fn, inner)
        elif isinstance(stmt, ast.RunEvery):
            fn = self.unit.func(stmt.handler)
            assert fn is not None, stmt.handler
            inner = _Frame(event=frame.event, locals=dict(frame.locals),
                           delay=frame.delay,
                           period=int(self._eval(stmt.period, frame)))
            self._run(fn, inner)
        elif isinstance(stmt, ast.Subscribe):
            pass  # re-subscription during an event changes nothing here
        else:  # pragma: no cover - corpus never reaches this
            raise AssertionError(f"unhandled statement {stmt!r}")

    def _eval(self, expr, frame: _Frame):
        if isinstance(expr, ast.Lit):
            return expr.value
        if isinstance(expr, ast.EventValue):
            return frame.event.value
        if isinstance(expr, ast.VarRef):
            if expr.name in frame.locals:
                return frame.locals[expr.name]
            return self.world[expr.name]  # number/string/bool input
        if isinstance(expr, ast.AttrRead):
            return self.world[(expr.device, expr.attribute)]
        if isinstance(expr, ast.Binary):
            if expr.op == "&&":
                return bool(self._eval(expr.lhs, frame)) and bool(self._eval(expr.rhs, frame))
            if expr.op == "||":
                return bool(self._eval(expr.lhs, frame)) or bool(self._eval(expr.rhs, frame))
            lhs = self._eval(expr.lhs, frame)
            rhs = self._eval(expr.rhs, frame)
            return {
                "+": lambda: lhs + rhs,
                "-": lambda: lhs - rhs,
                "*": lambda: lhs * rhs,
                "==": lambda: lhs == rhs,
                "!=": lambda: lhs != rhs,
                "<": lambda: lhs < rhs,
                "<=": lambda: lhs <= rhs,
                ">": lambda: lhs > rhs,
                ">=": lambda: lhs >= rhs,
            }[expr.op]()
        if isinstance(expr, ast.Unary):
            value = self._eval(expr.operand, frame)
            return (not value) if expr.op == "!" else -value
        raise AssertionError(f"unhandled expression {expr!r}")  # pragma: no cover


def fired_commands(unit: ast.SourceUnit, world: dict, event: Event) -> list[tuple]:
    """Commands the app fires for one event, as sorted comparable keys."""
    return sorted(f.key() for f in Interpreter(unit, world).dispatch(event))


# ---------------------------------------------------- rule-side oracle


class _Env(dict):
    """Term assignment keyed by identity, not sort: extracted terms carry
    inferred sorts the oracle should not have to reproduce."""

    @staticmethod
    def _key(term):
        if isinstance(term, terms.SymInput):
            return ("in", term.name)
        if isinstance(term, terms.AttrVar):
            return ("attr", term.device, term.attribute)
        if isinstance(term, terms.EventVal):
            return ("evt",)
        return term

    def __contains__(self, term):
        return super().__contains__(self._key(term))

    def __getitem__(self, term):
        return super().__getitem__(self._key(term))

    def __setitem__(self, term, value):
        super().__setitem__(self._key(term), value)


def _term_env(world: dict, event: Event) -> _Env:
    env = _Env()
    env[terms.EventVal()] = event.value
    for key, value in world.items():
        if isinstance(key, tuple):
            env[terms.AttrVar(key[0], key[1])] = value
        else:
            env[terms.SymInput(key)] = value
    env[terms.AttrVar(event.source, event.attribute)] = event.value
    return env


def _resolve_data(data, env: dict) -> bool:
    """Data lits are single-assignment definitions; solve by fixpoint."""
    pending = list(data)
    while pending:
        progress = []
        for lit in pending:
            if lit.op == "==" and isinstance(lit.lhs, terms.SymInput) and lit.lhs not in env:
                try:
                    env[lit.lhs] = terms.eval_term(lit.rhs, env)
                    continue
                except KeyError:
                    pass
            progress.append(lit)
        if len(progress) == len(pending):
            break
        pending = progress
    return all(terms.eval_lit(lit, env) for lit in pending)


def rule_fires(rule: Rule, world: dict, event: Event) -> bool:
    if rule.unsatisfiable or rule.trigger.subject is None:
        return False
    if (rule.trigger.subject, rule.trigger.attribute) != (event.source, event.attribute):
        return False
    env = _term_env(world, event)
    if not _resolve_data(rule.data, env):
        return False
    return all(terms.eval_lit(lit, env) for lit in (*rule.trigger.constraint, *rule.condition))


def predicted_commands(rules, world: dict, event: Event) -> list[tuple]:
    """What the extracted rules say the app does for this event."""
    out = []
    for rule in rules:
        if not rule_fires(rule, world, event):
            continue
        env = _term_env(world, event)
        _resolve_data(rule.data, env)
        args = tuple(terms.eval_term(p, env) for p in rule.action.paras)
        out.append((rule.action.subject, rule.action.command, args,
                    rule.action.when, rule.action.period))
    return sorted(out)
