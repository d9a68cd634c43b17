"""Rule intermediate form, its JSON wire format, and binding.

A rule is one straight-line reaction: a trigger (what wakes it), a
condition (path predicates plus the data constraints defining locals
and bound inputs), and a single action.  Rule ids are content hashes
over the canonical serialization, so identical behavior always gets the
identical id and re-extraction is cache-friendly.

The wire format is ``hgrule/1``: one JSON document per app holding the
declared inputs, the rules, and (for configured apps) the binding that
maps inputs to device ids and values.  Terms and predicates serialize
as s-expression strings to stay language-neutral.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping

from .errors import BindError, SchemaError
from .terms import (
    Arith,
    AttrVar,
    BoolConst,
    ConstraintLit,
    EventVal,
    IntConst,
    StrConst,
    SymInput,
    Term,
    lit_from_sexpr,
    lit_to_sexpr,
    lit_terms,
    term_from_sexpr,
    term_to_sexpr,
    walk,
)

SCHEMA = "hgrule/1"

LOCATION_DEVICE_ID = "0" * 32

# Trigger kinds (derived, not stored: a trigger with no subject is a
# lifecycle trigger, one with an empty constraint fires on any change).
VALUE = "value"
ANY = "any"
LIFECYCLE = "lifecycle"


@dataclass(frozen=True, slots=True)
class Trigger:
    subject: str | None = None
    attribute: str | None = None
    constraint: tuple[ConstraintLit, ...] = ()

    @property
    def kind(self) -> str:
        if self.subject is None:
            return LIFECYCLE
        return VALUE if self.constraint else ANY


@dataclass(frozen=True, slots=True)
class Action:
    subject: str
    command: str
    paras: tuple[Term, ...] = ()
    when: int = 0
    period: int = 0


@dataclass(frozen=True, slots=True)
class Rule:
    id: str
    name: str
    trigger: Trigger
    condition: tuple[ConstraintLit, ...]  # predicate constraints
    data: tuple[ConstraintLit, ...]  # data constraints (definitions)
    action: Action
    unsatisfiable: bool = False
    on_uninstall: bool = False

    def all_lits(self) -> Iterator[ConstraintLit]:
        yield from self.trigger.constraint
        yield from self.condition
        yield from self.data

    def referenced_inputs(self) -> set[str]:
        """Names of symbolic inputs mentioned anywhere in the rule."""
        names: set[str] = set()
        for lit in self.all_lits():
            names.update(t.name for t in lit_terms(lit) if isinstance(t, SymInput))
        for arg in self.action.paras:
            names.update(t.name for t in walk(arg) if isinstance(t, SymInput))
        return names


@dataclass(frozen=True, slots=True)
class InputSpec:
    kind: str  # "device" | "number" | "string" | "bool" | "enum"
    capability: str | None = None
    values: tuple[str, ...] = ()
    title: str | None = None


@dataclass(frozen=True, slots=True)
class RuleSet:
    app: str
    inputs: Mapping[str, InputSpec]
    rules: tuple[Rule, ...]

    def rule(self, name: str) -> Rule:
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(name)


@dataclass(frozen=True, slots=True)
class BoundRuleSet(RuleSet):
    device_of: Mapping[str, str] = field(default_factory=dict)
    values: Mapping[str, int | str | bool] = field(default_factory=dict)


def canonical_lits(lits: Iterator[ConstraintLit] | tuple[ConstraintLit, ...]) -> tuple[ConstraintLit, ...]:
    """Sort predicates by their serialized text; path order must not leak
    into rule ids."""
    return tuple(sorted(lits, key=lit_to_sexpr))


# -------------------------------------------------- wire format pieces


def _trigger_dict(trigger: Trigger) -> dict:
    out: dict = {}
    if trigger.subject is not None:
        out["subject"] = trigger.subject
        out["attribute"] = trigger.attribute
    if trigger.constraint:
        out["constraint"] = [lit_to_sexpr(p) for p in trigger.constraint]
    return out


def _rule_dict(rule: Rule, with_id: bool = True) -> dict:
    out: dict = {}
    if with_id:
        out["id"] = rule.id
        out["name"] = rule.name
    out["trigger"] = _trigger_dict(rule.trigger)
    out["condition"] = {
        "data": [lit_to_sexpr(d) for d in rule.data],
        "predicates": [lit_to_sexpr(c) for c in rule.condition],
    }
    out["action"] = {
        "subject": rule.action.subject,
        "command": rule.action.command,
        "paras": [term_to_sexpr(a) for a in rule.action.paras],
        "when": rule.action.when,
        "period": rule.action.period,
    }
    flags = []
    if rule.on_uninstall:
        flags.append("onUninstall")
    if rule.unsatisfiable:
        flags.append("unsatisfiable")
    if flags:
        out["flags"] = flags
    return out


def compute_rule_id(rule: Rule, app: str) -> str:
    """Content hash over (app, trigger, condition, action); the display
    name stays out so renaming rules never shifts identity."""
    payload = json.dumps(_rule_dict(rule, with_id=False), sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(f"{SCHEMA}\n{app}\n{payload}".encode()).hexdigest()
    return digest[:16]


def with_computed_id(rule: Rule, app: str) -> Rule:
    return replace(rule, id=compute_rule_id(rule, app))


def _input_dict(spec: InputSpec) -> dict:
    out: dict = {"kind": spec.kind}
    if spec.kind == "device":
        out["capability"] = spec.capability
    if spec.kind == "enum":
        out["values"] = list(spec.values)
    if spec.title:
        out["title"] = spec.title
    return out


def ruleset_to_dict(ruleset: RuleSet) -> dict:
    doc: dict = {
        "schema": SCHEMA,
        "app": ruleset.app,
        "inputs": {name: _input_dict(spec) for name, spec in ruleset.inputs.items()},
        "rules": [_rule_dict(rule) for rule in ruleset.rules],
    }
    if isinstance(ruleset, BoundRuleSet):
        doc["binding"] = {
            "devices": dict(ruleset.device_of),
            "values": dict(ruleset.values),
        }
    return doc


def serialize_ruleset(ruleset: RuleSet) -> str:
    return json.dumps(ruleset_to_dict(ruleset), indent=2, ensure_ascii=False) + "\n"


# ------------------------------------------------------ deserializing


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError("SchemaViolation", message)


def _parse_lits(items: object, where: str) -> tuple[ConstraintLit, ...]:
    _require(isinstance(items, list), f"{where} must be a list")
    out = []
    for item in items:
        _require(isinstance(item, str), f"{where} entries must be strings")
        try:
            out.append(lit_from_sexpr(item))
        except ValueError as exc:
            raise SchemaError("SchemaViolation", f"bad predicate in {where}: {exc}") from None
    return tuple(out)


def _parse_trigger(obj: object) -> Trigger:
    _require(isinstance(obj, dict), "trigger must be an object")
    assert isinstance(obj, dict)
    allowed = {"subject", "attribute", "constraint"}
    _require(set(obj) <= allowed, f"unexpected trigger keys {sorted(set(obj) - allowed)}")
    subject = obj.get("subject")
    attribute = obj.get("attribute")
    if subject is None:
        _require(attribute is None and "constraint" not in obj, "lifecycle trigger must be empty")
        return Trigger()
    _require(isinstance(subject, str) and isinstance(attribute, str), "trigger needs subject and attribute")
    constraint = _parse_lits(obj.get("constraint", []), "trigger.constraint")
    return Trigger(subject, attribute, constraint)


def _parse_action(obj: object) -> Action:
    _require(isinstance(obj, dict), "action must be an object")
    assert isinstance(obj, dict)
    allowed = {"subject", "command", "paras", "when", "period"}
    _require(set(obj) <= allowed, f"unexpected action keys {sorted(set(obj) - allowed)}")
    subject, command = obj.get("subject"), obj.get("command")
    _require(isinstance(subject, str) and isinstance(command, str), "action needs subject and command")
    raw_paras = obj.get("paras", [])
    _require(isinstance(raw_paras, list), "action.paras must be a list")
    paras = []
    for raw in raw_paras:
        _require(isinstance(raw, str), "action paras must be strings")
        try:
            paras.append(term_from_sexpr(raw))
        except ValueError as exc:
            raise SchemaError("SchemaViolation", f"bad action parameter: {exc}") from None
    when = obj.get("when", 0)
    period = obj.get("period", 0)
    _require(
        type(when) is int and type(period) is int and when >= 0 and period >= 0,
        "when/period must be non-negative integers",
    )
    return Action(subject, command, tuple(paras), when, period)


def _parse_rule(obj: object, app: str) -> Rule:
    _require(isinstance(obj, dict), "rule must be an object")
    assert isinstance(obj, dict)
    allowed = {"id", "name", "trigger", "condition", "data", "action", "flags"}
    _require(set(obj) <= allowed, f"unexpected rule keys {sorted(set(obj) - allowed)}")
    rule_id, name = obj.get("id"), obj.get("name")
    _require(isinstance(rule_id, str) and isinstance(name, str), "rule needs id and name")
    condition = obj.get("condition")
    _require(
        isinstance(condition, dict) and set(condition) <= {"data", "predicates"},
        "condition must hold data and predicates",
    )
    assert isinstance(condition, dict)
    flags = obj.get("flags", [])
    _require(
        isinstance(flags, list) and set(flags) <= {"onUninstall", "unsatisfiable"},
        "bad flags",
    )
    rule = Rule(
        id=rule_id,
        name=name,
        trigger=_parse_trigger(obj.get("trigger")),
        condition=_parse_lits(condition.get("predicates", []), "condition.predicates"),
        data=_parse_lits(condition.get("data", []), "condition.data"),
        action=_parse_action(obj.get("action")),
        unsatisfiable="unsatisfiable" in flags,
        on_uninstall="onUninstall" in flags,
    )
    expected = compute_rule_id(rule, app)
    if expected != rule_id:
        raise SchemaError("IdMismatch", f"rule {name!r}: id {rule_id!r} does not match content ({expected!r})")
    return rule


def _parse_input(name: str, obj: object) -> InputSpec:
    _require(isinstance(obj, dict), f"input {name!r} must be an object")
    assert isinstance(obj, dict)
    kind = obj.get("kind")
    _require(kind in ("device", "number", "string", "bool", "enum"), f"input {name!r}: unknown kind {kind!r}")
    allowed = {"kind", "title"}
    if kind == "device":
        allowed.add("capability")
        _require(isinstance(obj.get("capability"), str), f"device input {name!r} needs a capability")
    if kind == "enum":
        allowed.add("values")
        values = obj.get("values")
        _require(
            isinstance(values, list) and bool(values) and all(isinstance(v, str) for v in values),
            f"enum input {name!r} needs string values",
        )
    _require(set(obj) <= allowed, f"input {name!r}: unexpected keys")
    title = obj.get("title")
    _require(title is None or isinstance(title, str), f"input {name!r}: title must be a string")
    return InputSpec(
        kind=kind,
        capability=obj.get("capability"),
        values=tuple(obj.get("values", ())),
        title=title,
    )


def deserialize_ruleset(text: str) -> RuleSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("SchemaViolation", f"not valid JSON: {exc}") from None
    return ruleset_from_dict(doc)


def ruleset_from_dict(doc: object) -> RuleSet:
    _require(isinstance(doc, dict), "document must be an object")
    assert isinstance(doc, dict)
    _require(doc.get("schema") == SCHEMA, f"expected schema {SCHEMA!r}")
    allowed = {"schema", "app", "inputs", "rules", "binding"}
    _require(set(doc) <= allowed, f"unexpected keys {sorted(set(doc) - allowed)}")
    app = doc.get("app")
    _require(isinstance(app, str) and bool(app), "app name required")
    _require("inputs" in doc and "rules" in doc, "inputs and rules are required")
    raw_inputs = doc["inputs"]
    _require(isinstance(raw_inputs, dict), "inputs must be an object")
    inputs = {name: _parse_input(name, spec) for name, spec in raw_inputs.items()}
    raw_rules = doc["rules"]
    _require(isinstance(raw_rules, list), "rules must be a list")
    rules = tuple(_parse_rule(obj, app) for obj in raw_rules)
    names = [r.name for r in rules]
    _require(len(set(names)) == len(names), "duplicate rule names")
    if "binding" not in doc:
        return RuleSet(app, inputs, rules)
    binding = doc["binding"]
    _require(isinstance(binding, dict) and set(binding) <= {"devices", "values"}, "bad binding")
    devices = binding.get("devices", {})
    values = binding.get("values", {})
    _require(
        isinstance(devices, dict) and all(isinstance(v, str) for v in devices.values()),
        "binding.devices must map names to id strings",
    )
    _require(
        isinstance(values, dict) and all(isinstance(v, (int, str, bool)) for v in values.values()),
        "binding.values must map names to scalars",
    )
    return BoundRuleSet(app, inputs, rules, device_of=devices, values=values)


# ------------------------------------------------------------- binding


def _binding_const(name: str, spec: InputSpec, value: object) -> Term:
    if spec.kind == "number":
        if type(value) is not int:
            raise BindError("SortMismatch", f"input {name!r} expects a number, got {value!r}")
        return IntConst(value)
    if spec.kind == "bool":
        if type(value) is not bool:
            raise BindError("SortMismatch", f"input {name!r} expects a bool, got {value!r}")
        return BoolConst(value)
    if not isinstance(value, str):
        raise BindError("SortMismatch", f"input {name!r} expects a string, got {value!r}")
    if spec.kind == "enum" and value not in spec.values:
        raise BindError(
            "SortMismatch", f"input {name!r} expects one of {list(spec.values)}, got {value!r}"
        )
    return StrConst(value)


def _input_sort(spec: InputSpec) -> str:
    return "int" if spec.kind == "number" else "bool" if spec.kind == "bool" else "str"


def _mentions_location(rules: tuple[Rule, ...]) -> bool:
    for rule in rules:
        if rule.trigger.subject == "location" or rule.action.subject == "location":
            return True
        for lit in rule.all_lits():
            if any(isinstance(t, AttrVar) and t.device == "location" for t in lit_terms(lit)):
                return True
        for arg in rule.action.paras:
            if any(isinstance(t, AttrVar) and t.device == "location" for t in walk(arg)):
                return True
    return False


def bind_configuration(
    ruleset: RuleSet,
    device_bindings: Mapping[str, str],
    value_bindings: Mapping[str, int | str | bool],
) -> BoundRuleSet:
    """Attach a concrete configuration to an extracted rule set.

    Every declared input must be bound.  Value bindings become data
    constraints on the rules that mention the input; the predicates
    themselves stay intact, so a report can still show which user knob
    each number came from.
    """
    device_of: dict[str, str] = {}
    consts: dict[str, tuple[InputSpec, Term]] = {}
    for name, spec in ruleset.inputs.items():
        if spec.kind == "device":
            if name not in device_bindings:
                raise BindError("MissingBinding", f"device input {name!r} is not configured")
            device_of[name] = device_bindings[name]
        else:
            if name not in value_bindings:
                raise BindError("MissingBinding", f"input {name!r} is not configured")
            consts[name] = (spec, _binding_const(name, spec, value_bindings[name]))
    for name in device_bindings:
        if name not in ruleset.inputs or ruleset.inputs[name].kind != "device":
            raise BindError("UnknownInput", f"{name!r} is not a declared device input")
    for name in value_bindings:
        if name not in ruleset.inputs or ruleset.inputs[name].kind == "device":
            raise BindError("UnknownInput", f"{name!r} is not a declared value input")
    if _mentions_location(ruleset.rules):
        device_of["location"] = LOCATION_DEVICE_ID

    bound_rules = []
    for rule in ruleset.rules:
        mentioned = rule.referenced_inputs()
        extra = tuple(
            ConstraintLit("==", SymInput(name, _input_sort(spec)), const)
            for name, (spec, const) in consts.items()
            if name in mentioned
        )
        new_rule = replace(rule, data=rule.data + extra)
        bound_rules.append(with_computed_id(new_rule, ruleset.app))

    return BoundRuleSet(
        app=ruleset.app,
        inputs=ruleset.inputs,
        rules=tuple(bound_rules),
        device_of=device_of,
        values={name: value_bindings[name] for name in consts},
    )


# ----------------------------------------------------------- rendering


def _names_in(term: Term) -> set[str]:
    return {t.name for t in walk(term) if isinstance(t, SymInput)}


def substitution(rule: Rule) -> dict[str, Term]:
    """Resolve data constraints into a symbol -> defining-term map.

    Locals point at their source terms (attribute reads, arithmetic),
    bound inputs at their literal values; chains resolve transitively.
    """
    pinned: dict[str, Term] = {}
    defs = [
        (lit.lhs.name, lit.rhs)
        for lit in rule.data
        if lit.op == "==" and isinstance(lit.lhs, SymInput)
    ]
    for _ in range(len(defs) + 1):
        changed = False
        for name, rhs in defs:
            if name in pinned:
                continue
            resolved = apply_substitution(rhs, pinned)
            if name not in _names_in(resolved):
                pinned[name] = resolved
                changed = True
        if not changed:
            break
    return pinned


def apply_substitution(term: Term, pinned: Mapping[str, Term]) -> Term:
    if isinstance(term, SymInput) and term.name in pinned:
        return pinned[term.name]
    if isinstance(term, Arith):
        lhs = apply_substitution(term.lhs, pinned)
        rhs = apply_substitution(term.rhs, pinned)
        if isinstance(lhs, IntConst) and isinstance(rhs, IntConst):
            value = (
                lhs.value + rhs.value
                if term.op == "+"
                else lhs.value - rhs.value
                if term.op == "-"
                else lhs.value * rhs.value
            )
            return IntConst(value)
        return Arith(term.op, lhs, rhs)
    return term


def render_term(term: Term) -> str:
    """Display form: strings and enum values print bare, reads print as
    device.attribute."""
    if isinstance(term, IntConst):
        return str(term.value)
    if isinstance(term, StrConst):
        return term.value
    if isinstance(term, BoolConst):
        return "true" if term.value else "false"
    if isinstance(term, SymInput):
        return term.name
    if isinstance(term, AttrVar):
        return f"{term.device}.{term.attribute}"
    if isinstance(term, EventVal):
        return "event"
    assert isinstance(term, Arith)
    return f"({render_term(term.lhs)} {term.op} {render_term(term.rhs)})"


def render_lit(lit: ConstraintLit, pinned: Mapping[str, Term] = {}) -> str:
    lhs = apply_substitution(lit.lhs, pinned)
    rhs = apply_substitution(lit.rhs, pinned)
    return f"{render_term(lhs)} {lit.op} {render_term(rhs)}"


def trigger_phrase(rule: Rule, pinned: Mapping[str, Term] | None = None) -> str:
    """The trigger as prose: "tv1.switch becomes on", "the app is installed"."""
    pinned = substitution(rule) if pinned is None else pinned
    trig = rule.trigger
    if trig.kind == LIFECYCLE:
        stage = "uninstalled" if rule.on_uninstall else "installed"
        return f"the app is {stage}"
    if trig.kind == ANY:
        return f"{trig.subject}.{trig.attribute} changes"
    if len(trig.constraint) == 1:
        only = trig.constraint[0]
        rhs = apply_substitution(only.rhs, pinned)
        if (
            only.op == "=="
            and isinstance(only.lhs, AttrVar)
            and isinstance(rhs, (IntConst, StrConst, BoolConst))
        ):
            return f"{trig.subject}.{trig.attribute} becomes {render_term(rhs)}"
    return " AND ".join(sorted(render_lit(p, pinned) for p in trig.constraint))


def action_phrase(rule: Rule, pinned: Mapping[str, Term] | None = None) -> str:
    """The action as prose: "window1.on()", "light1.off() after 300s"."""
    pinned = substitution(rule) if pinned is None else pinned
    paras = ", ".join(render_term(apply_substitution(a, pinned)) for a in rule.action.paras)
    text = f"{rule.action.subject}.{rule.action.command}({paras})"
    if rule.action.when:
        text += f" after {rule.action.when}s"
    if rule.action.period:
        text += f" every {rule.action.period}s"
    return text


def render_rule(rule: Rule) -> str:
    """One line of prose: WHEN ... IF ... THEN ...

    Data constraints are substituted in, so a bound rule reads with the
    user's actual numbers and the sensors actually consulted.  Condition
    predicates sort lexicographically so the text is path-order stable.
    """
    pinned = substitution(rule)
    pieces = [f"WHEN {trigger_phrase(rule, pinned)}"]
    if rule.condition:
        pieces.append("IF " + " AND ".join(sorted(render_lit(c, pinned) for c in rule.condition)))
    pieces.append(f"THEN {action_phrase(rule, pinned)}")
    return " ".join(pieces)
