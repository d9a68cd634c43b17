"""Path-sensitive rule extraction.

Walks every execution path from the lifecycle entry points (installed,
updated, uninstalled), collecting subscriptions, scheduled handlers and
command sinks.  Each (subscription, path, sink) triple becomes one rule:

- branch decisions become predicate constraints (stored pre-normalized,
  so a negated ``a < b`` is kept as ``a >= b``);
- locals assigned from device reads or arithmetic stay symbolic, with a
  defining data constraint (``t == tSensor.temperature``); locals that
  merely alias constants or other symbols are substituted away;
- comparisons over the subscribed event's value fold into the trigger,
  with the event value rewritten to the subscribed attribute;
- runIn delays sum along the path, runEvery keeps the innermost period.

A sink records the constraints in force at the moment it executes, so a
sink above a branch is not polluted by literals from below it, and the
same sink reached along branches that only diverge later deduplicates
into a single rule (ids are content hashes).

Boolean-valued assignments (``armed = t > 30``) fork the path and pin
the local to true/false on each side; conditions then see a constant.

State reads (``state.name``) are symbolic inputs shared across rules of
the app.  Their sort is inferred from usage before exploration; the
language has no state writes, so no data constraints arise for them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

from . import solver
from .catalog import Catalog
from .errors import ExtractionError
from .hgl import ast
from .rules import (
    Action,
    InputSpec,
    Rule,
    RuleSet,
    Trigger,
    canonical_lits,
    with_computed_id,
)
from .terms import (
    AttrVar,
    BoolConst,
    ConstraintLit,
    EventVal,
    IntConst,
    StrConst,
    SymInput,
    Term,
    const_eval_lit,
    lit_terms,
    lit_to_sexpr,
    make_arith,
    sort_of,
    substitute,
    substitute_lit,
    walk,
)

PATH_BUDGET = 10_000

LOCATION_VAR = "location"
LOCATION_CAPABILITY = "mode"

_COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")

_Env = dict[str, Term]


def _is_predicate(expr: ast.Expr) -> bool:
    if isinstance(expr, ast.Binary):
        return expr.op in _COMPARISONS or expr.op in ("&&", "||")
    return isinstance(expr, ast.Unary) and expr.op == "!"


def _mentions_event(term: Term) -> bool:
    return any(isinstance(t, EventVal) for t in walk(term))


def _lit_mentions_event(lit: ConstraintLit) -> bool:
    return any(isinstance(t, EventVal) for t in lit_terms(lit))


@dataclass(frozen=True, slots=True)
class _Ctx:
    """Constraints and schedule in force at one point on one path."""

    lits: tuple[ConstraintLit, ...] = ()
    data: tuple[ConstraintLit, ...] = ()
    when: int = 0
    period: int = 0

    def with_lit(self, lit: ConstraintLit) -> "_Ctx | None":
        """Append a branch literal; None when the path dies."""
        verdict = const_eval_lit(lit)
        if verdict is True:
            return self
        if verdict is False or lit.negate() in self.lits:
            return None
        if lit in self.lits:
            return self
        return replace(self, lits=self.lits + (lit,))


@dataclass(frozen=True, slots=True)
class _SinkHit:
    subject: str
    command: str
    paras: tuple[Term, ...]
    when: int
    period: int
    lits: tuple[ConstraintLit, ...]
    data: tuple[ConstraintLit, ...]


@dataclass(frozen=True, slots=True)
class _Subscription:
    device: str
    attribute: str
    value: str | None
    handler: str
    guard_lits: tuple[ConstraintLit, ...]
    guard_data: tuple[ConstraintLit, ...]
    on_uninstall: bool


class _Extractor:
    def __init__(self, unit: ast.SourceUnit, catalog: Catalog):
        self.unit = unit
        self.catalog = catalog
        self.paths = 0
        self.devices: dict[str, str] = {
            decl.name: decl.kind.capability
            for decl in unit.inputs
            if isinstance(decl.kind, ast.DeviceKind)
        }
        self.value_inputs: dict[str, str] = {}
        for decl in unit.inputs:
            if isinstance(decl.kind, ast.NumberKind):
                self.value_inputs[decl.name] = "int"
            elif isinstance(decl.kind, ast.BoolKind):
                self.value_inputs[decl.name] = "bool"
            elif isinstance(decl.kind, (ast.StringKind, ast.EnumKind)):
                self.value_inputs[decl.name] = "str"
        self.state_sorts = self._infer_state_sorts()
        # Per-exploration accumulators, reset by run().
        self.sinks: list[_SinkHit] = []
        self.subs: list[_Subscription] = []
        self.on_uninstall = False
        # EventVal -> AttrVar of the subscription being explored; event
        # guards on a nested subscribe fold through this so the inner
        # rule keeps them as device-state conditions.
        self.evt_map: dict[Term, Term] = {}

    # ------------------------------------------------------- helpers

    def fail(self, code: str, message: str, node) -> ExtractionError:
        return ExtractionError(code, message, line=node.line, col=node.col)

    def capability_of(self, var: str) -> str:
        if var == LOCATION_VAR:
            return LOCATION_CAPABILITY
        return self.devices[var]

    def attr_sort(self, var: str, attribute: str) -> str:
        return self.catalog.attribute(self.capability_of(var), attribute).term_sort()

    # ------------------------------------------- state sort inference

    def _infer_state_sorts(self) -> dict[str, str]:
        """Pick a sort for each state.name from how it is compared."""
        hints: dict[str, set[str]] = {}
        reads: dict[str, ast.StateRead] = {}

        def static_sort(expr: ast.Expr) -> str | None:
            if isinstance(expr, ast.Lit):
                if isinstance(expr.value, bool):
                    return "bool"
                return "int" if isinstance(expr.value, int) else "str"
            if isinstance(expr, ast.VarRef):
                return self.value_inputs.get(expr.name)
            if isinstance(expr, ast.AttrRead) and (
                expr.device in self.devices or expr.device == LOCATION_VAR
            ):
                return self.attr_sort(expr.device, expr.attribute)
            if isinstance(expr, (ast.Binary, ast.Unary)):
                return "int"  # arithmetic or negation context
            return None

        def visit(expr: ast.Expr) -> None:
            if isinstance(expr, ast.StateRead):
                reads.setdefault(expr.name, expr)
            elif isinstance(expr, ast.Binary):
                for side, other in ((expr.lhs, expr.rhs), (expr.rhs, expr.lhs)):
                    if isinstance(side, ast.StateRead):
                        if expr.op in ("+", "-", "*", "<", "<=", ">", ">="):
                            hints.setdefault(side.name, set()).add("int")
                        else:
                            got = static_sort(other)
                            if got is not None:
                                hints.setdefault(side.name, set()).add(got)
                visit(expr.lhs)
                visit(expr.rhs)
            elif isinstance(expr, ast.Unary):
                if isinstance(expr.operand, ast.StateRead) and expr.op == "-":
                    hints.setdefault(expr.operand.name, set()).add("int")
                visit(expr.operand)

        def visit_stmts(stmts) -> None:
            for stmt in stmts:
                if isinstance(stmt, (ast.RunIn, ast.RunEvery)):
                    visit(stmt.delay if isinstance(stmt, ast.RunIn) else stmt.period)
                elif isinstance(stmt, ast.CommandCall):
                    for arg in stmt.args:
                        visit(arg)
                elif isinstance(stmt, ast.Assign):
                    visit(stmt.expr)
                elif isinstance(stmt, ast.If):
                    visit(stmt.cond)
                    visit_stmts(stmt.then)
                    visit_stmts(stmt.orelse)
                elif isinstance(stmt, ast.Switch):
                    visit(stmt.scrutinee)
                    for _, block in stmt.cases:
                        visit_stmts(block)
                    if stmt.default is not None:
                        visit_stmts(stmt.default)

        for fn in self.unit.funcs:
            visit_stmts(fn.body)
        sorts: dict[str, str] = {}
        for name, node in reads.items():
            wanted = hints.get(name, set())
            if len(wanted) > 1:
                raise self.fail("SortMismatch", f"state.{name} is used at conflicting sorts", node)
            sorts[name] = next(iter(wanted)) if wanted else "str"
        return sorts

    # ----------------------------------------------- expr translation

    def translate(self, expr: ast.Expr, env: _Env, evt_sort: str | None) -> Term:
        if isinstance(expr, ast.Lit):
            if isinstance(expr.value, bool):
                return BoolConst(expr.value)
            if isinstance(expr.value, int):
                return IntConst(expr.value)
            return StrConst(expr.value)
        if isinstance(expr, ast.VarRef):
            if expr.name in env:
                return env[expr.name]
            sort = self.value_inputs.get(expr.name)
            if sort is None:
                raise self.fail("UnboundVariable", f"{expr.name!r} has no value here", expr)
            return SymInput(expr.name, sort)
        if isinstance(expr, ast.EventValue):
            if evt_sort is None:
                raise self.fail("BadEventUse", "no event is available here", expr)
            return EventVal(evt_sort)
        if isinstance(expr, ast.StateRead):
            return SymInput(f"state.{expr.name}", self.state_sorts[expr.name])
        if isinstance(expr, ast.AttrRead):
            return AttrVar(expr.device, expr.attribute, self.attr_sort(expr.device, expr.attribute))
        if isinstance(expr, ast.Unary):
            if expr.op == "-":
                operand = self.translate(expr.operand, env, evt_sort)
                if sort_of(operand) != "int":
                    raise self.fail("SortMismatch", "unary minus needs a number", expr)
                return make_arith("-", IntConst(0), operand)
            raise self.fail("UnsupportedExpression", "boolean operators need a branching context", expr)
        assert isinstance(expr, ast.Binary)
        if expr.op in ("+", "-", "*"):
            lhs = self.translate(expr.lhs, env, evt_sort)
            rhs = self.translate(expr.rhs, env, evt_sort)
            if sort_of(lhs) != "int" or sort_of(rhs) != "int":
                raise self.fail("SortMismatch", f"arithmetic {expr.op!r} needs numbers", expr)
            return make_arith(expr.op, lhs, rhs)
        raise self.fail("UnsupportedExpression", "boolean operators need a branching context", expr)

    def cond_alternatives(
        self, expr: ast.Expr, polarity: bool, env: _Env, evt_sort: str | None
    ) -> list[list[ConstraintLit]]:
        """Short-circuit path expansion; each alternative is a conjunction.

        The alternatives for one polarity are mutually exclusive and
        jointly cover it, so path enumeration stays complete.
        """
        if isinstance(expr, ast.Unary) and expr.op == "!":
            return self.cond_alternatives(expr.operand, not polarity, env, evt_sort)
        if isinstance(expr, ast.Binary) and expr.op in ("&&", "||"):
            lhs_true = self.cond_alternatives(expr.lhs, True, env, evt_sort)
            lhs_false = self.cond_alternatives(expr.lhs, False, env, evt_sort)
            rhs = self.cond_alternatives(expr.rhs, polarity, env, evt_sort)
            if expr.op == "&&":
                if polarity:
                    return [a + b for a in lhs_true for b in rhs]
                return lhs_false + [a + b for a in lhs_true for b in rhs]
            if polarity:
                return lhs_true + [a + b for a in lhs_false for b in rhs]
            return [a + b for a in lhs_false for b in rhs]
        if isinstance(expr, ast.Binary) and expr.op in _COMPARISONS:
            lhs = self.translate(expr.lhs, env, evt_sort)
            rhs = self.translate(expr.rhs, env, evt_sort)
            self._check_comparison(expr, lhs, rhs)
            lit = ConstraintLit(expr.op, lhs, rhs)
            if not polarity:
                lit = self._negate(lit)
            return [[lit]]
        term = self.translate(expr, env, evt_sort)
        if isinstance(term, BoolConst):
            return [[]] if term.value is polarity else []
        if sort_of(term) != "bool":
            raise self.fail("NotABoolean", "condition must be a boolean expression", expr)
        return [[ConstraintLit("==", term, BoolConst(polarity))]]

    def _negate(self, lit: ConstraintLit) -> ConstraintLit:
        # A negated boolean equality reads better as the flipped constant.
        if lit.op == "==" and isinstance(lit.rhs, BoolConst) and sort_of(lit.lhs) == "bool":
            return ConstraintLit("==", lit.lhs, BoolConst(not lit.rhs.value))
        return lit.negate()

    def _check_comparison(self, expr: ast.Binary, lhs: Term, rhs: Term) -> None:
        ls, rs = sort_of(lhs), sort_of(rhs)
        if expr.op in ("<", "<=", ">", ">="):
            if ls != "int" or rs != "int":
                raise self.fail("SortMismatch", f"ordering {expr.op!r} needs numbers", expr)
        elif ls != rs:
            raise self.fail("SortMismatch", f"cannot compare {ls} with {rs}", expr)

    # -------------------------------------------------- path walking

    def _count_path(self) -> None:
        self.paths += 1
        if self.paths > PATH_BUDGET:
            raise ExtractionError("PathBudgetExceeded", f"more than {PATH_BUDGET} execution paths")

    def _drain(self, body, ctx: _Ctx, evt_sort: str | None) -> None:
        """Explore a whole function body and count its terminal paths."""
        for _ctx, _env in self._exec(body, 0, ctx, {}, evt_sort, prefix=""):
            self._count_path()

    def _exec(
        self,
        stmts,
        i: int,
        ctx: _Ctx,
        env: _Env,
        evt_sort: str | None,
        prefix: str,
    ) -> Iterator[tuple[_Ctx, _Env]]:
        if i == len(stmts):
            yield ctx, env
            return
        stmt = stmts[i]

        def rest(c: _Ctx, e: _Env) -> Iterator[tuple[_Ctx, _Env]]:
            return self._exec(stmts, i + 1, c, e, evt_sort, prefix)

        if isinstance(stmt, ast.Subscribe):
            attribute, _, value = stmt.attr_spec.partition(".")
            self.subs.append(
                _Subscription(
                    device=stmt.device,
                    attribute=attribute,
                    value=value or None,
                    handler=stmt.handler,
                    guard_lits=tuple(substitute_lit(l, self.evt_map) for l in ctx.lits),
                    guard_data=ctx.data,
                    on_uninstall=self.on_uninstall,
                )
            )
            yield from rest(ctx, env)

        elif isinstance(stmt, (ast.RunIn, ast.RunEvery)):
            delay_expr = stmt.delay if isinstance(stmt, ast.RunIn) else stmt.period
            delay = self.translate(delay_expr, env, evt_sort)
            if not isinstance(delay, IntConst):
                raise self.fail("NonConstantDelay", "schedule delays must be constants", stmt)
            if delay.value < 0:
                raise self.fail("InvalidDelay", "schedule delays must be non-negative", stmt)
            handler = self.unit.func(stmt.handler)
            assert handler is not None
            if isinstance(stmt, ast.RunIn):
                scheduled = replace(ctx, when=ctx.when + delay.value)
            else:
                scheduled = replace(ctx, period=delay.value or ctx.period)
            # The handler runs later: explore it for sinks, then carry on
            # with the current path unchanged.
            self._drain(handler.body, scheduled, None)
            yield from rest(ctx, env)

        elif isinstance(stmt, ast.CommandCall):
            paras = tuple(self.translate(arg, env, evt_sort) for arg in stmt.args)
            self.sinks.append(
                _SinkHit(stmt.device, stmt.command, paras, ctx.when, ctx.period, ctx.lits, ctx.data)
            )
            yield from rest(ctx, env)

        elif isinstance(stmt, ast.Assign):
            if _is_predicate(stmt.expr):
                # A boolean-valued assignment forks the path.
                for value in (True, False):
                    for alt in self.cond_alternatives(stmt.expr, value, env, evt_sort):
                        forked = self._apply_alt(ctx, alt)
                        if forked is not None:
                            yield from rest(forked, {**env, stmt.name: BoolConst(value)})
                return
            term = self.translate(stmt.expr, env, evt_sort)
            if isinstance(term, (IntConst, StrConst, BoolConst, SymInput)) or _mentions_event(term):
                # Constants, aliases and event values substitute directly.
                yield from rest(ctx, {**env, stmt.name: term})
                return
            base = prefix + stmt.name
            prior = sum(
                1
                for d in ctx.data
                if isinstance(d.lhs, SymInput) and d.lhs.name.split("#")[0] == base
            )
            name = base if prior == 0 else f"{base}#{prior + 1}"
            sym = SymInput(name, sort_of(term))
            forked = replace(ctx, data=ctx.data + (ConstraintLit("==", sym, term),))
            yield from rest(forked, {**env, stmt.name: sym})

        elif isinstance(stmt, ast.If):
            for polarity, block in ((True, stmt.then), (False, stmt.orelse)):
                for alt in self.cond_alternatives(stmt.cond, polarity, env, evt_sort):
                    forked = self._apply_alt(ctx, alt)
                    if forked is None:
                        continue
                    for done_ctx, done_env in self._exec(block, 0, forked, dict(env), evt_sort, prefix):
                        yield from rest(done_ctx, done_env)

        elif isinstance(stmt, ast.Switch):
            scrutinee = self.translate(stmt.scrutinee, env, evt_sort)
            seen: list[Term] = []
            for case_lit, block in stmt.cases:
                value = self.translate(case_lit, env, evt_sort)
                if sort_of(scrutinee) != sort_of(value):
                    raise self.fail(
                        "SortMismatch",
                        f"switch compares {sort_of(scrutinee)} against {sort_of(value)}",
                        stmt,
                    )
                seen.append(value)
                forked = ctx.with_lit(ConstraintLit("==", scrutinee, value))
                if forked is None:
                    continue
                for done_ctx, done_env in self._exec(block, 0, forked, dict(env), evt_sort, prefix):
                    yield from rest(done_ctx, done_env)
            default_ctx: _Ctx | None = ctx
            for value in seen:
                default_ctx = default_ctx.with_lit(ConstraintLit("!=", scrutinee, value))
                if default_ctx is None:
                    break
            if default_ctx is not None:
                block = stmt.default if stmt.default is not None else ()
                for done_ctx, done_env in self._exec(block, 0, default_ctx, dict(env), evt_sort, prefix):
                    yield from rest(done_ctx, done_env)

        else:
            assert isinstance(stmt, ast.LocalCall)
            callee = self.unit.func(stmt.name)
            assert callee is not None
            # Inline: the callee's branches fork this path, but its locals
            # live in their own frame.
            for done_ctx, _callee_env in self._exec(
                callee.body, 0, ctx, {}, evt_sort, prefix=f"{stmt.name}."
            ):
                yield from rest(done_ctx, env)

    def _apply_alt(self, ctx: _Ctx, alt: list[ConstraintLit]) -> _Ctx | None:
        out: _Ctx | None = ctx
        for lit in alt:
            out = out.with_lit(lit)
            if out is None:
                return None
        return out

    # ---------------------------------------------- rule construction

    def _fold(
        self, sub: _Subscription, sink: _SinkHit
    ) -> tuple[Trigger, tuple[ConstraintLit, ...], dict[Term, Term]]:
        sort = self.attr_sort(sub.device, sub.attribute)
        attr_var = AttrVar(sub.device, sub.attribute, sort)
        mapping: dict[Term, Term] = {EventVal(sort): attr_var}
        trigger_lits: list[ConstraintLit] = []
        if sub.value is not None:
            trigger_lits.append(ConstraintLit("==", attr_var, StrConst(sub.value)))
        residual: list[ConstraintLit] = []
        for lit in sink.lits:
            if _lit_mentions_event(lit):
                trigger_lits.append(substitute_lit(lit, mapping))
            else:
                residual.append(lit)
        trigger = Trigger(sub.device, sub.attribute, canonical_lits(_dedup(trigger_lits)))
        return trigger, tuple(_dedup(residual)), mapping

    def _prune_data(
        self,
        data: tuple[ConstraintLit, ...],
        trigger: Trigger,
        condition: tuple[ConstraintLit, ...],
        paras: tuple[Term, ...],
    ) -> tuple[ConstraintLit, ...]:
        """Keep only data constraints the rule actually references."""
        needed: set[str] = set()
        for lit in (*trigger.constraint, *condition):
            needed.update(t.name for t in lit_terms(lit) if isinstance(t, SymInput))
        for para in paras:
            needed.update(t.name for t in walk(para) if isinstance(t, SymInput))
        kept: dict[int, ConstraintLit] = {}
        changed = True
        while changed:
            changed = False
            for idx, lit in enumerate(data):
                if idx in kept or not isinstance(lit.lhs, SymInput) or lit.lhs.name not in needed:
                    continue
                kept[idx] = lit
                needed.update(t.name for t in walk(lit.rhs) if isinstance(t, SymInput))
                changed = True
        return tuple(lit for _, lit in sorted(kept.items()))

    def _trigger_unsatisfiable(self, trigger: Trigger) -> bool:
        if not trigger.constraint:
            return False
        caps = dict(self.devices)
        caps[LOCATION_VAR] = LOCATION_CAPABILITY
        part = solver.MergePart("trigger", trigger.constraint, {}, caps)
        problem = solver.merge(self.catalog, (part,))
        return solver.solve(problem).is_unsat

    def _build_rule(self, sub: _Subscription, sink: _SinkHit) -> Rule:
        trigger, residual, mapping = self._fold(sub, sink)
        condition = canonical_lits(_dedup((*sub.guard_lits, *residual)))
        paras = tuple(substitute(p, mapping) for p in sink.paras)
        data = self._prune_data(tuple(_dedup(sink.data)), trigger, condition, paras)
        return Rule(
            id="",
            name="",
            trigger=trigger,
            condition=condition,
            data=data,
            action=Action(sink.subject, sink.command, paras, sink.when, sink.period),
            unsatisfiable=self._trigger_unsatisfiable(trigger),
            on_uninstall=sub.on_uninstall,
        )

    def _lifecycle_rule(self, sink: _SinkHit, on_uninstall: bool) -> Rule:
        condition = canonical_lits(_dedup(sink.lits))
        data = self._prune_data(tuple(_dedup(sink.data)), Trigger(), condition, sink.paras)
        return Rule(
            id="",
            name="",
            trigger=Trigger(),
            condition=condition,
            data=data,
            action=Action(sink.subject, sink.command, sink.paras, sink.when, sink.period),
            on_uninstall=on_uninstall,
        )

    # -------------------------------------------------------- driver

    def run(self) -> RuleSet:
        raw: list[Rule] = []
        queue: list[_Subscription] = []
        seen_subs: set = set()

        def enqueue(subs: list[_Subscription]) -> None:
            for sub in subs:
                key = _sub_key(sub)
                if key not in seen_subs:
                    seen_subs.add(key)
                    queue.append(sub)

        for entry_name in ("installed", "updated", "uninstalled"):
            entry = self.unit.func(entry_name)
            if entry is None:
                continue
            self.sinks, self.subs = [], []
            self.on_uninstall = entry_name == "uninstalled"
            self.evt_map = {}
            self._drain(entry.body, _Ctx(), None)
            raw.extend(self._lifecycle_rule(s, self.on_uninstall) for s in self.sinks)
            enqueue(self.subs)

        head = 0
        while head < len(queue):
            sub = queue[head]
            head += 1
            handler = self.unit.func(sub.handler)
            assert handler is not None
            evt_sort = self.attr_sort(sub.device, sub.attribute)
            self.sinks, self.subs = [], []
            self.on_uninstall = sub.on_uninstall
            self.evt_map = {EventVal(evt_sort): AttrVar(sub.device, sub.attribute, evt_sort)}
            self._drain(handler.body, _Ctx(lits=sub.guard_lits, data=sub.guard_data), evt_sort)
            raw.extend(self._build_rule(sub, sink) for sink in self.sinks)
            enqueue(self.subs)

        inputs = {decl.name: _input_spec(decl) for decl in self.unit.inputs}
        deduped: list[Rule] = []
        ids: set[str] = set()
        for rule in raw:
            hashed = with_computed_id(rule, self.unit.name)
            if hashed.id not in ids:
                ids.add(hashed.id)
                deduped.append(hashed)
        named = tuple(
            with_computed_id(replace(rule, name=f"Rule{n}"), self.unit.name)
            for n, rule in enumerate(deduped, start=1)
        )
        return RuleSet(self.unit.name, inputs, named)


def _dedup(lits) -> list:
    out = []
    for lit in lits:
        if lit not in out:
            out.append(lit)
    return out


def _sub_key(sub: _Subscription):
    return (
        sub.device,
        sub.attribute,
        sub.value,
        sub.handler,
        tuple(lit_to_sexpr(l) for l in sub.guard_lits),
        tuple(lit_to_sexpr(l) for l in sub.guard_data),
        sub.on_uninstall,
    )


def _input_spec(decl: ast.InputDecl) -> InputSpec:
    kind = decl.kind
    if isinstance(kind, ast.DeviceKind):
        return InputSpec("device", capability=kind.capability, title=decl.title)
    if isinstance(kind, ast.NumberKind):
        return InputSpec("number", title=decl.title)
    if isinstance(kind, ast.StringKind):
        return InputSpec("string", title=decl.title)
    if isinstance(kind, ast.BoolKind):
        return InputSpec("bool", title=decl.title)
    assert isinstance(kind, ast.EnumKind)
    return InputSpec("enum", values=kind.values, title=decl.title)


def extract_rules(unit: ast.SourceUnit, catalog: Catalog) -> RuleSet:
    """All rules of a validated source unit, named Rule1..RuleN."""
    return _Extractor(unit, catalog).run()
