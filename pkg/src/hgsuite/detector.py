"""Cross-app interference detection over bound rules.

Pairwise checks classify how one rule's action can interfere with
another rule:

- AR: contradictory commands on the same physical device from rules
  sharing a trigger, under jointly reachable conditions;
- GC: actions pushing a goal feature (temperature, illuminance, ...) in
  opposite directions, reachable together (no simultaneity required);
- CT: one rule's action fires another rule's trigger, either by setting
  the exact device attribute the trigger watches or by moving an
  environment feature the trigger's sensor reads;
- SD: CT where the triggered rule's action contradicts the triggering
  rule's action (it undoes what just happened);
- LT: mutual CT with contradictory actions (an on/off loop);
- EC / DC: the action's effect, turned into a constraint, makes another
  rule's condition satisfiable (enables) or unsatisfiable (disables);
- INDETERMINATE: a satisfiability check hit the solver budget, so the
  corresponding verdict is unknown rather than silently dropped.

Every satisfiability question goes through ``solver.merge``: rule
constraint sets are alpha-renamed, device variables bound to one
physical DeviceId unify, and feature-named sensor attributes share one
environment variable (switch off with ``env_unification=False``).

Chains: CT and EC findings are edges of a directed graph; simple paths
of three or more rules that use at least one new edge are reported as
CHAIN findings with a covert-rule summary ("unlocks the door when
motion is detected").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from . import solver
from .catalog import Catalog, CommandSpec, channel_effects, contradicts, goal_effect
from .errors import DetectionError, HgError
from .rules import (
    ANY,
    LIFECYCLE,
    LOCATION_DEVICE_ID,
    BoundRuleSet,
    Rule,
    action_phrase,
    apply_substitution,
    substitution,
    trigger_phrase,
)
from .terms import (
    AttrVar,
    BoolConst,
    ConstraintLit,
    IntConst,
    StrConst,
    SymInput,
    Term,
    walk,
)

CHAIN_BUDGET = 10_000

KIND_ORDER = ("AR", "GC", "CT", "SD", "LT", "EC", "DC", "INDETERMINATE", "CHAIN")

LOCATION_VAR = "location"
LOCATION_CAPABILITY = "mode"

# Flipped comparison for a literal read right-to-left.
_MIRROR = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


@dataclass(frozen=True, slots=True)
class BoundRule:
    """One rule plus the app context detection needs."""

    app: str
    rule: Rule
    device_of: Mapping[str, str]  # input var -> 32-hex DeviceId
    capability_of: Mapping[str, str]  # input var -> capability name

    @property
    def id(self) -> str:
        return self.rule.id

    @property
    def label(self) -> str:
        return f"{self.app}.{self.rule.name}"

    def sort_key(self) -> tuple[str, str]:
        return (self.app, self.rule.name)

    def action_device(self) -> str | None:
        return self.device_of.get(self.rule.action.subject)

    def action_capability(self) -> str | None:
        return self.capability_of.get(self.rule.action.subject)

    def trigger_device(self) -> str | None:
        subject = self.rule.trigger.subject
        return None if subject is None else self.device_of.get(subject)

    def command_spec(self, catalog: Catalog) -> CommandSpec | None:
        cap = self.action_capability()
        if cap is None:
            return None  # api sinks have no device effects
        return catalog.capability(cap).commands.get(self.rule.action.command)

    def part(self, lits: Sequence[ConstraintLit], rid: str | None = None) -> solver.MergePart:
        return solver.MergePart(rid or self.id, tuple(lits), self.device_of, self.capability_of)

    def condition_part(self) -> solver.MergePart:
        return self.part((*self.rule.condition, *self.rule.data))

    def trigger_part(self) -> solver.MergePart:
        return self.part((*self.rule.trigger.constraint, *self.rule.data))

    def full_part(self) -> solver.MergePart:
        return self.part((*self.rule.trigger.constraint, *self.rule.condition, *self.rule.data))


def bound_rules(ruleset: BoundRuleSet) -> tuple[BoundRule, ...]:
    """Wrap a bound ruleset's rules for detection."""
    caps = {
        name: spec.capability
        for name, spec in ruleset.inputs.items()
        if spec.kind == "device" and spec.capability is not None
    }
    caps[LOCATION_VAR] = LOCATION_CAPABILITY
    devices = dict(ruleset.device_of)
    devices.setdefault(LOCATION_VAR, LOCATION_DEVICE_ID)
    return tuple(BoundRule(ruleset.app, rule, devices, caps) for rule in ruleset.rules)


@dataclass(frozen=True, slots=True)
class ThreatFinding:
    kind: str
    rules: tuple[str, ...]  # rule ids; the whole path for CHAIN
    direction: tuple[str, str] | None = None  # (source id, target id)
    witness: Mapping[str, int | str] | None = None
    channel: str | None = None
    explanation: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rules": list(self.rules),
            "direction": list(self.direction) if self.direction else None,
            "witness": dict(self.witness) if self.witness is not None else None,
            "channel": self.channel,
            "explanation": self.explanation,
        }


def finding_from_dict(raw: Mapping) -> ThreatFinding:
    direction = raw.get("direction")
    witness = raw.get("witness")
    return ThreatFinding(
        kind=str(raw["kind"]),
        rules=tuple(str(r) for r in raw["rules"]),
        direction=(str(direction[0]), str(direction[1])) if direction else None,
        witness=dict(witness) if witness is not None else None,
        channel=raw.get("channel"),
        explanation=str(raw.get("explanation", "")),
    )


@dataclass(frozen=True, slots=True)
class Edge:
    """A directed interference edge for chain analysis."""

    kind: str  # "CT" | "EC"
    src: str
    dst: str


# -------------------------------------------------------------- helpers


def _const_of(value: int | str | bool) -> Term:
    if isinstance(value, bool):
        return BoolConst(value)
    if isinstance(value, int):
        return IntConst(value)
    return StrConst(value)


def _concrete(term: Term) -> int | str | bool | None:
    if isinstance(term, IntConst):
        return term.value
    if isinstance(term, StrConst):
        return term.value
    if isinstance(term, BoolConst):
        return term.value
    return None


def _resolved_paras(r: BoundRule) -> tuple[Term, ...]:
    pinned = substitution(r.rule)
    return tuple(apply_substitution(p, pinned) for p in r.rule.action.paras)


def _commands_contradict(catalog: Catalog, a: BoundRule, b: BoundRule) -> bool:
    """Contradiction check tolerant of one device bound under two
    capability views; parameter clashes need concrete values."""
    pa = tuple(_concrete(t) for t in _resolved_paras(a))
    pb = tuple(_concrete(t) for t in _resolved_paras(b))
    if a.rule.action.command == b.rule.action.command and (None in pa or None in pb):
        pa = pb = ()  # unresolved params cannot witness a clash
    for cap in {a.action_capability(), b.action_capability()} - {None}:
        spec = catalog.capabilities.get(cap)
        if spec is None:
            continue
        if a.rule.action.command in spec.commands and b.rule.action.command in spec.commands:
            if contradicts(catalog, cap, a.rule.action.command, pa, b.rule.action.command, pb):
                return True
    return False


def _self_effect_lit(src: BoundRule, catalog: Catalog) -> ConstraintLit | None:
    """`subject.attr == value` for the action's self effect, if any."""
    spec = src.command_spec(catalog)
    if spec is None or spec.self_effect is None:
        return None
    se = spec.self_effect
    cap = src.action_capability()
    assert cap is not None
    sort = catalog.attribute(cap, se.attribute).term_sort()
    if se.value is not None:
        value: Term = _const_of(se.value)
    else:
        idx = spec.params.index(se.param)
        if idx >= len(src.rule.action.paras):
            return None
        value = _resolved_paras(src)[idx]
    attr = AttrVar(src.rule.action.subject, se.attribute, sort)
    return ConstraintLit("==", attr, value)


def _setpoint_value(src: BoundRule, spec: CommandSpec, param: str) -> Term | None:
    idx = spec.params.index(param)
    if idx >= len(src.rule.action.paras):
        return None
    return _resolved_paras(src)[idx]


def _condition_attr_mentions(r: BoundRule) -> set[tuple[str | None, str, str]]:
    """(DeviceId, var, attribute) triples the condition reads, with data
    definitions substituted in so locals expose their sources."""
    pinned = substitution(r.rule)
    out: set[tuple[str | None, str, str]] = set()
    for lit in r.rule.condition:
        for side in (lit.lhs, lit.rhs):
            for t in walk(apply_substitution(side, pinned)):
                if isinstance(t, AttrVar):
                    out.add((r.device_of.get(t.device), t.device, t.attribute))
    return out


def _trigger_ops(rule: Rule) -> list[tuple[str, Term]]:
    """(op, other side) for each trigger literal, read with the watched
    attribute on the left."""
    out = []
    subject, attribute = rule.trigger.subject, rule.trigger.attribute
    for lit in rule.trigger.constraint:
        if isinstance(lit.lhs, AttrVar) and (lit.lhs.device, lit.lhs.attribute) == (subject, attribute):
            out.append((lit.op, lit.rhs))
        elif isinstance(lit.rhs, AttrVar) and (lit.rhs.device, lit.rhs.attribute) == (subject, attribute):
            out.append((_MIRROR[lit.op], lit.lhs))
    return out


# ---------------------------------------------------------- pair checks


class _PairCheck:
    def __init__(self, catalog: Catalog, a: BoundRule, b: BoundRule, env_unification: bool):
        self.catalog = catalog
        self.a = a
        self.b = b
        self.env_unification = env_unification
        self.by_id = {a.id: a, b.id: b}
        self.findings: list[ThreatFinding] = []

    def solve(self, parts: Sequence[solver.MergePart]) -> solver.Outcome:
        problem = solver.merge(self.catalog, parts, env_unification=self.env_unification)
        return solver.solve(problem)

    def indeterminate(self, blocked_kind: str, direction: tuple[str, str] | None) -> None:
        pair = tuple(sorted((self.a.id, self.b.id)))
        self.findings.append(
            ThreatFinding(
                kind="INDETERMINATE",
                rules=direction or pair,
                direction=direction,
                explanation=(
                    f"solver budget exhausted while checking {blocked_kind} for "
                    f"{self.label(pair[0])} and {self.label(pair[1])}; verdict unknown"
                ),
            )
        )

    def label(self, rule_id: str) -> str:
        return self.by_id[rule_id].label

    def pretty_witness(self, witness: Mapping[str, int | str]) -> str:
        device_labels: dict[str, str] = {}
        for r in (self.a, self.b):
            for var, dev in sorted(r.device_of.items()):
                device_labels.setdefault(dev, var)
        parts = []
        for name, value in sorted(witness.items()):
            if name.startswith("env::"):
                label = name[len("env::") :]
            elif name.startswith("dev::"):
                _, dev, attr = name.split("::")
                label = f"{device_labels.get(dev, dev[:8])}.{attr}"
            else:
                rid, _, sym = name.partition("::")
                owner = self.by_id.get(rid)
                label = f"{owner.app}.{sym}" if owner else sym
            parts.append(f"{label}={value}")
        return ", ".join(parts)

    # ------------------------------------------------------------- AR

    def action_interference(self) -> None:
        a, b, catalog = self.a, self.b, self.catalog
        pair = tuple(sorted((a.id, b.id)))
        da, db = a.action_device(), b.action_device()
        contradictory = (
            da is not None and da == db and _commands_contradict(catalog, a, b)
        )
        if contradictory:
            same_trigger = (
                a.rule.trigger.kind != LIFECYCLE
                and b.rule.trigger.kind != LIFECYCLE
                and a.trigger_device() == b.trigger_device()
                and a.rule.trigger.attribute == b.rule.trigger.attribute
            )
            if same_trigger:
                triggers = self.solve([a.trigger_part(), b.trigger_part()])
                if triggers.kind == "budget":
                    self.indeterminate("AR", None)
                elif triggers.is_sat:
                    conditions = self.solve([a.condition_part(), b.condition_part()])
                    if conditions.kind == "budget":
                        self.indeterminate("AR", None)
                    elif conditions.is_sat:
                        witness = conditions.witness or {}
                        text = (
                            f"{a.label} and {b.label} react to the same trigger with "
                            f"contradictory commands on one device: {action_phrase(a.rule)} "
                            f"vs {action_phrase(b.rule)}"
                        )
                        if witness:
                            text += f"; both conditions hold at {self.pretty_witness(witness)}"
                        self.findings.append(
                            ThreatFinding("AR", pair, witness=witness, explanation=text)
                        )

        # ------------------------------------------------------------ GC
        ca, cb = a.action_capability(), b.action_capability()
        if ca is None or cb is None:
            return
        ga = goal_effect(catalog, ca, a.rule.action.command)
        gb = goal_effect(catalog, cb, b.rule.action.command)
        opposed = [f for f in catalog.goal_features if {ga[f], gb[f]} == {"+", "-"}]
        if not opposed:
            return
        out = self.solve([a.full_part(), b.full_part()])
        if out.kind == "budget":
            self.indeterminate("GC", None)
            return
        if not out.is_sat:
            return
        witness = out.witness or {}
        text = (
            f"{a.label} and {b.label} drive {', '.join(opposed)} in opposite directions "
            f"({action_phrase(a.rule)} vs {action_phrase(b.rule)}) and can both be reached"
        )
        if witness:
            text += f"; for example at {self.pretty_witness(witness)}"
        self.findings.append(
            ThreatFinding("GC", pair, witness=witness, channel=opposed[0], explanation=text)
        )

    # ------------------------------------------------------------- CT

    def covert_trigger(self, src: BoundRule, dst: BoundRule) -> ThreatFinding | None:
        """CT(src -> dst), or None; budget exhaustion is recorded."""
        catalog = self.catalog
        trigger = dst.rule.trigger
        if trigger.kind == LIFECYCLE:
            return None
        channel: str | None = None
        route: str | None = None

        se_lit = _self_effect_lit(src, catalog)
        if (
            se_lit is not None
            and src.action_device() is not None
            and src.action_device() == dst.trigger_device()
            and isinstance(se_lit.lhs, AttrVar)
            and se_lit.lhs.attribute == trigger.attribute
        ):
            if trigger.kind == ANY:
                channel, route = trigger.attribute, "sets"
            else:
                hit = self.solve(
                    [
                        dst.trigger_part(),
                        src.part((se_lit,)),
                        src.part(src.rule.data),
                    ]
                )
                if hit.kind == "budget":
                    self.indeterminate("CT", (src.id, dst.id))
                elif hit.is_sat:
                    channel, route = trigger.attribute, "sets"

        if channel is None:
            cap = src.action_capability()
            spec = src.command_spec(catalog)
            if cap is not None and spec is not None:
                for ch in channel_effects(catalog, cap, src.rule.action.command):
                    if trigger.attribute != ch.feature:
                        continue
                    if self._direction_compatible(src, spec, ch, dst):
                        channel, route = ch.feature, "moves"
                        break
        if channel is None:
            return None

        out = self.solve([src.condition_part(), dst.condition_part()])
        if out.kind == "budget":
            self.indeterminate("CT", (src.id, dst.id))
            return None
        if not out.is_sat:
            return None
        witness = out.witness or {}
        verb = "sets the attribute" if route == "sets" else "moves the feature"
        text = (
            f"{src.label}'s action {action_phrase(src.rule)} {verb} {channel!r} watched by "
            f"{dst.label}'s trigger ({trigger_phrase(dst.rule)}), so it can fire that rule"
        )
        if witness:
            text += f"; both conditions hold at {self.pretty_witness(witness)}"
        return ThreatFinding(
            "CT", (src.id, dst.id), direction=(src.id, dst.id), witness=witness,
            channel=channel, explanation=text,
        )

    def _direction_compatible(self, src, spec: CommandSpec, ch, dst: BoundRule) -> bool:
        if dst.rule.trigger.kind == ANY:
            return True
        setpoint = (
            _setpoint_value(src, spec, ch.setpoint_param) if ch.setpoint_param else None
        )
        for op, other in _trigger_ops(dst.rule):
            if ch.direction == "+" and op in (">", ">="):
                return True
            if ch.direction == "-" and op in ("<", "<="):
                return True
            if op == "==" and setpoint is not None:
                want = _concrete(apply_substitution(other, substitution(dst.rule)))
                have = _concrete(setpoint)
                if want is not None and want == have:
                    return True
        return False

    # ---------------------------------------------------------- EC / DC

    def condition_interference(self, src: BoundRule, dst: BoundRule) -> None:
        catalog = self.catalog
        mentions = _condition_attr_mentions(dst)
        if not mentions:
            return
        emitted: set[tuple[str, str]] = set()

        def emit(effect_parts: list[solver.MergePart], channel: str, qualitative: bool) -> None:
            out = self.solve([*effect_parts, dst.condition_part()])
            if out.kind == "budget":
                self.indeterminate("EC/DC", (src.id, dst.id))
                return
            kind = "EC" if out.is_sat else "DC"
            if (kind, channel) in emitted:
                return
            emitted.add((kind, channel))
            effect = f"{src.label}'s action {action_phrase(src.rule)}"
            if kind == "EC":
                text = f"{effect} can make {dst.label}'s condition true (via {channel})"
                witness = out.witness or {}
                if witness:
                    text += f"; for example at {self.pretty_witness(witness)}"
            else:
                text = f"{effect} makes {dst.label}'s condition unsatisfiable (via {channel})"
                witness = None
            if qualitative:
                text += " [qualitative: sustained actuation assumed]"
            self.findings.append(
                ThreatFinding(kind, (src.id, dst.id), direction=(src.id, dst.id),
                              witness=witness, channel=channel, explanation=text)
            )

        # Self-effect route: src pins a device attribute the condition reads.
        se_lit = _self_effect_lit(src, catalog)
        if se_lit is not None and src.action_device() is not None:
            attr = se_lit.lhs.attribute  # type: ignore[union-attr]
            d1 = src.action_device()
            is_dst_trigger = (
                dst.trigger_device() == d1 and dst.rule.trigger.attribute == attr
            )
            dst_se = _self_effect_lit(dst, catalog)
            is_dst_action = (
                dst.action_device() == d1
                and dst_se is not None
                and isinstance(dst_se.lhs, AttrVar)
                and dst_se.lhs.attribute == attr
            )
            read = any(dev == d1 and a == attr for dev, _, a in mentions)
            if read and not is_dst_trigger and not is_dst_action:
                emit([src.part((se_lit,)), src.part(src.rule.data)], attr, qualitative=False)

        # Channel route: src moves an environment feature the condition reads.
        cap = src.action_capability()
        spec = src.command_spec(catalog)
        if cap is None or spec is None:
            return
        for ch in channel_effects(catalog, cap, src.rule.action.command):
            f = ch.feature
            if dst.rule.trigger.attribute == f:
                continue  # covert-trigger jurisdiction
            readers = sorted(var for dev, var, a in mentions if a == f)
            if not readers:
                continue
            sensor_var = readers[0]
            sensor_cap = dst.capability_of.get(sensor_var)
            if sensor_cap is None or catalog.attribute(sensor_cap, f).term_sort() != "int":
                continue
            attr = AttrVar(sensor_var, f, "int")
            if ch.setpoint_param:
                setpoint = _setpoint_value(src, spec, ch.setpoint_param)
                if setpoint is None:
                    continue
                op = ">=" if ch.direction == "+" else "<="
                lit = ConstraintLit(op, attr, setpoint)
                parts = [dst.part((lit,), rid=src.id), src.part(src.rule.data)]
                emit(parts, f, qualitative=False)
            else:
                lo, hi = catalog.int_domain(sensor_cap, f)
                bound = hi if ch.direction == "+" else lo
                lit = ConstraintLit("==", attr, IntConst(bound))
                emit([dst.part((lit,), rid=src.id)], f, qualitative=True)


def detect_pair(
    a: BoundRule, b: BoundRule, catalog: Catalog, *, env_unification: bool = True
) -> list[ThreatFinding]:
    """All pairwise findings for two bound rules, deterministically ordered."""
    if a.id == b.id:
        return []
    skip = lambda r: r.rule.unsatisfiable or r.rule.on_uninstall
    if skip(a) or skip(b):
        return []
    check = _PairCheck(catalog, a, b, env_unification)
    check.action_interference()

    ct_ab = check.covert_trigger(a, b)
    ct_ba = check.covert_trigger(b, a)
    ar_candidate = (
        a.action_device() is not None
        and a.action_device() == b.action_device()
        and _commands_contradict(catalog, a, b)
    )
    for ct, src, dst in ((ct_ab, a, b), (ct_ba, b, a)):
        if ct is None:
            continue
        check.findings.append(ct)
        if ar_candidate:
            check.findings.append(
                ThreatFinding(
                    "SD", ct.rules, direction=ct.direction, witness=ct.witness,
                    channel=ct.channel,
                    explanation=(
                        f"{src.label} triggers {dst.label}, whose action "
                        f"{action_phrase(dst.rule)} contradicts {action_phrase(src.rule)}"
                    ),
                )
            )
    if ct_ab is not None and ct_ba is not None and ar_candidate:
        pair = tuple(sorted((a.id, b.id)))
        check.findings.append(
            ThreatFinding(
                "LT", pair, witness=ct_ab.witness, channel=ct_ab.channel,
                explanation=(
                    f"{a.label} and {b.label} trigger each other with contradictory "
                    f"actions; the pair can loop"
                ),
            )
        )

    check.condition_interference(a, b)
    check.condition_interference(b, a)

    return sorted(
        check.findings,
        key=lambda f: (KIND_ORDER.index(f.kind), f.rules, f.channel or "", str(f.direction)),
    )


def detect_many(
    new: Sequence[BoundRule],
    installed: Sequence[BoundRule],
    catalog: Catalog,
    *,
    env_unification: bool = True,
    on_error: Callable[[BoundRule, BoundRule, Exception], None] | None = None,
) -> list[ThreatFinding]:
    """Sweep (new x installed) plus (new x new) pairs.

    With ``on_error`` set, a pair that raises is reported to the callback
    and skipped, so the sweep still yields results for the healthy pairs.
    """
    new = sorted(new, key=BoundRule.sort_key)
    installed = sorted(installed, key=BoundRule.sort_key)
    pairs: list[tuple[BoundRule, BoundRule]] = []
    seen: set[frozenset[str]] = set()
    for x in new:
        for y in (*installed, *new):
            key = frozenset((x.id, y.id))
            if x.id == y.id or key in seen:
                continue
            seen.add(key)
            pairs.append((x, y))
    findings: list[ThreatFinding] = []
    for x, y in pairs:
        try:
            findings.extend(detect_pair(x, y, catalog, env_unification=env_unification))
        except HgError as exc:
            if on_error is None:
                raise
            on_error(x, y, exc)
    return findings


# --------------------------------------------------------------- chains


def detect_chains(
    new_findings: Iterable[ThreatFinding],
    allowed: Iterable[Edge],
    rules: Iterable[BoundRule],
    max_len: int = 4,
    budget: int = CHAIN_BUDGET,
) -> list[ThreatFinding]:
    """Simple CT/EC paths of 3..max_len rules using at least one new edge."""
    by_id = {r.id: r for r in rules}
    new_edges = {
        (f.direction[0], f.direction[1])
        for f in new_findings
        if f.kind in ("CT", "EC") and f.direction is not None
    }
    old_edges = {(e.src, e.dst) for e in allowed if e.kind in ("CT", "EC")}
    adjacency: dict[str, list[str]] = {}
    for src, dst in new_edges | old_edges:
        adjacency.setdefault(src, []).append(dst)
    for dsts in adjacency.values():
        dsts.sort()

    chains: list[tuple[str, ...]] = []
    explored = 0

    def extend(path: list[str], has_new: bool) -> None:
        nonlocal explored
        for nxt in adjacency.get(path[-1], ()):
            if nxt in path:
                continue
            explored += 1
            if explored > budget:
                raise DetectionError(
                    "ChainBudgetExceeded", f"more than {budget} chain paths explored"
                )
            fresh = has_new or (path[-1], nxt) in new_edges
            path.append(nxt)
            if len(path) >= 3 and fresh:
                chains.append(tuple(path))
            if len(path) < max_len:
                extend(path, fresh)
            path.pop()

    for start in sorted(adjacency):
        extend([start], False)

    findings = []
    for path in chains:
        first, last = by_id.get(path[0]), by_id.get(path[-1])
        hops = " -> ".join(by_id[r].label if r in by_id else r for r in path)
        if first is not None and last is not None:
            covert = f"{action_phrase(last.rule)} when {trigger_phrase(first.rule)}"
            text = f"covert rule: {covert} (chain {hops})"
        else:
            text = f"covert rule chain: {hops}"
        findings.append(ThreatFinding("CHAIN", path, explanation=text))
    return findings
