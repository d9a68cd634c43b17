"""Effects catalog: what device commands do to device state and to the home.

The catalog is plain data (TOML or JSON, schema tag ``hgcat/1``) so new
device types are a data change, not a code change.  Per capability it
records:

* attributes with sorts (``int`` with optional range, closed ``enum``,
  open ``string``, ``bool``),
* commands with a self effect (the attribute value the command sets),
  environment channels (signed effect on a measurable feature, with an
  optional setpoint parameter), and goal effects (``+``/``-``/``#``),
* contradiction rules (opposite command pairs, or same-command
  parameter clashes).

Goal features are fixed: temperature, illuminance, humidity, power,
noise.  Environment features (the ones merged across sensors during
solving) are temperature, illuminance, humidity, power, timeOfDay.
Virtual capabilities (``mode``) carry no goal effects and are excluded
from goal-conflict analysis.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import CatalogError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

SCHEMA = "hgcat/1"

GOAL_FEATURES = ("temperature", "illuminance", "humidity", "power", "noise")
ENV_FEATURES = ("temperature", "illuminance", "humidity", "power", "timeOfDay")

# Domains for environment features; plain ints default to (-10**6, 10**6).
FEATURE_DOMAINS: Mapping[str, tuple[int, int]] = {
    "temperature": (-50, 150),
    "illuminance": (0, 100_000),
    "power": (0, 100_000),
    "humidity": (0, 100),
    "timeOfDay": (0, 1439),
    "noise": (0, 140),
}

DEFAULT_INT_DOMAIN = (-(10**6), 10**6)

_SORTS = frozenset({"int", "enum", "string", "bool"})


@dataclass(frozen=True, slots=True)
class AttributeSpec:
    name: str
    sort: str  # int | enum | string | bool
    values: tuple[str, ...] = ()  # enum sorts only
    lo: int | None = None  # int sorts only
    hi: int | None = None

    def term_sort(self) -> str:
        """The term-language sort this attribute's values live in."""
        if self.sort == "int":
            return "int"
        if self.sort == "bool":
            return "bool"
        return "str"


@dataclass(frozen=True, slots=True)
class SelfEffect:
    attribute: str
    value: str | int | bool | None = None
    param: str | None = None  # name of the command param that supplies the value


@dataclass(frozen=True, slots=True)
class Channel:
    feature: str
    direction: str  # "+" or "-"
    setpoint_param: str | None = None


@dataclass(frozen=True, slots=True)
class CommandSpec:
    name: str
    params: tuple[str, ...] = ()
    self_effect: SelfEffect | None = None
    channels: tuple[Channel, ...] = ()
    goal: Mapping[str, str] = field(default_factory=dict)  # explicit +/-/# entries


@dataclass(frozen=True, slots=True)
class ContradictionRule:
    kind: str  # "opposite" | "paramClash"
    commands: tuple[str, ...]  # (a, b) for opposite, (cmd,) for paramClash


@dataclass(frozen=True, slots=True)
class CapabilitySpec:
    name: str
    virtual: bool
    attributes: Mapping[str, AttributeSpec]
    commands: Mapping[str, CommandSpec]
    contradictions: tuple[ContradictionRule, ...] = ()


@dataclass(frozen=True, slots=True)
class ApiSink:
    name: str
    params: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class Catalog:
    capabilities: Mapping[str, CapabilitySpec]
    api_sinks: Mapping[str, ApiSink]
    goal_features: tuple[str, ...] = GOAL_FEATURES
    env_features: tuple[str, ...] = ENV_FEATURES

    def capability(self, name: str) -> CapabilitySpec:
        try:
            return self.capabilities[name]
        except KeyError:
            raise CatalogError("UnknownCapability", f"no capability {name!r} in catalog") from None

    def attribute(self, capability: str, attr: str) -> AttributeSpec:
        cap = self.capability(capability)
        try:
            return cap.attributes[attr]
        except KeyError:
            raise CatalogError(
                "UnknownAttribute", f"capability {capability!r} has no attribute {attr!r}"
            ) from None

    def int_domain(self, capability: str, attr: str) -> tuple[int, int]:
        spec = self.attribute(capability, attr)
        if spec.lo is not None and spec.hi is not None:
            return (spec.lo, spec.hi)
        if spec.name in FEATURE_DOMAINS:
            return FEATURE_DOMAINS[spec.name]
        return DEFAULT_INT_DOMAIN


# ------------------------------------------------------------- loading


def _err(msg: str) -> CatalogError:
    return CatalogError("SchemaViolation", msg)


def _parse_attribute(raw: object, cap: str) -> AttributeSpec:
    if not isinstance(raw, dict) or "name" not in raw or "sort" not in raw:
        raise _err(f"{cap}: attribute entries need name and sort: {raw!r}")
    sort = raw["sort"]
    if sort not in _SORTS:
        raise _err(f"{cap}.{raw['name']}: bad sort {sort!r}")
    values = tuple(raw.get("values", ()))
    if sort == "enum" and not values:
        raise _err(f"{cap}.{raw['name']}: enum attribute needs values")
    if sort != "enum" and values:
        raise _err(f"{cap}.{raw['name']}: only enum attributes take values")
    rng = raw.get("range")
    lo = hi = None
    if rng is not None:
        if sort != "int" or not isinstance(rng, list) or len(rng) != 2:
            raise _err(f"{cap}.{raw['name']}: range must be [lo, hi] on an int attribute")
        lo, hi = int(rng[0]), int(rng[1])
        if lo > hi:
            raise _err(f"{cap}.{raw['name']}: empty range")
    return AttributeSpec(str(raw["name"]), str(sort), values, lo, hi)


def _parse_command(raw: object, cap: str, attrs: Mapping[str, AttributeSpec]) -> CommandSpec:
    if not isinstance(raw, dict) or "name" not in raw:
        raise _err(f"{cap}: command entries need a name: {raw!r}")
    name = str(raw["name"])
    params = tuple(str(p) for p in raw.get("params", ()))
    self_effect = None
    if "self" in raw:
        se = raw["self"]
        if not isinstance(se, dict) or "attribute" not in se:
            raise _err(f"{cap}.{name}: self effect needs an attribute")
        if se["attribute"] not in attrs:
            raise _err(f"{cap}.{name}: self effect on undeclared attribute {se['attribute']!r}")
        value = se.get("value")
        param = se.get("param")
        if (value is None) == (param is None):
            raise _err(f"{cap}.{name}: self effect needs exactly one of value/param")
        if param is not None and param not in params:
            raise _err(f"{cap}.{name}: self effect param {param!r} not a command param")
        attr_spec = attrs[str(se["attribute"])]
        if value is not None and attr_spec.sort == "enum" and value not in attr_spec.values:
            raise _err(f"{cap}.{name}: self effect value {value!r} not in enum {attr_spec.name}")
        self_effect = SelfEffect(str(se["attribute"]), value, param)
    channels = []
    for ch in raw.get("channels", ()):
        if not isinstance(ch, dict) or "feature" not in ch or ch.get("direction") not in ("+", "-"):
            raise _err(f"{cap}.{name}: channels need feature and direction +/-: {ch!r}")
        if ch["feature"] not in GOAL_FEATURES:
            raise CatalogError(
                "DanglingFeature",
                f"{cap}.{name}: channel feature {ch['feature']!r} is not a goal feature",
            )
        sp = ch.get("setpoint")
        if sp is not None and sp not in params:
            raise _err(f"{cap}.{name}: setpoint {sp!r} not a command param")
        channels.append(Channel(str(ch["feature"]), str(ch["direction"]), sp))
    goal = dict(raw.get("goal", {}))
    for feature, sign in goal.items():
        if feature not in GOAL_FEATURES:
            raise CatalogError("DanglingFeature", f"{cap}.{name}: goal feature {feature!r} unknown")
        if sign not in ("+", "-", "#"):
            raise _err(f"{cap}.{name}: goal sign must be one of + - #")
    for ch in channels:
        if ch.feature in goal and goal[ch.feature] != ch.direction:
            raise _err(f"{cap}.{name}: goal[{ch.feature}] disagrees with channel direction")
    return CommandSpec(name, params, self_effect, tuple(channels), goal)


def _parse_capability(name: str, raw: object) -> CapabilitySpec:
    if not isinstance(raw, dict):
        raise _err(f"capability {name!r} must be a table")
    virtual = bool(raw.get("virtual", False))
    attrs: dict[str, AttributeSpec] = {}
    for entry in raw.get("attributes", ()):
        spec = _parse_attribute(entry, name)
        if spec.name in attrs:
            raise _err(f"{name}: duplicate attribute {spec.name!r}")
        attrs[spec.name] = spec
    commands: dict[str, CommandSpec] = {}
    for entry in raw.get("commands", ()):
        spec = _parse_command(entry, name, attrs)
        if spec.name in commands:
            raise _err(f"{name}: duplicate command {spec.name!r}")
        if virtual and (spec.channels or any(s != "#" for s in spec.goal.values())):
            raise _err(f"{name}: virtual capabilities carry no goal effects")
        commands[spec.name] = spec
    contradictions = []
    for entry in raw.get("contradictions", ()):
        if not isinstance(entry, dict):
            raise _err(f"{name}: bad contradiction entry {entry!r}")
        if "opposite" in entry:
            pair = entry["opposite"]
            if not isinstance(pair, list) or len(pair) != 2:
                raise _err(f"{name}: opposite takes two command names")
            for cmd in pair:
                if cmd not in commands:
                    raise _err(f"{name}: contradiction references unknown command {cmd!r}")
            contradictions.append(ContradictionRule("opposite", (str(pair[0]), str(pair[1]))))
        elif "param_clash" in entry:
            cmd = entry["param_clash"]
            if cmd not in commands:
                raise _err(f"{name}: contradiction references unknown command {cmd!r}")
            if not commands[cmd].params:
                raise _err(f"{name}: param clash on parameterless command {cmd!r}")
            contradictions.append(ContradictionRule("paramClash", (str(cmd),)))
        else:
            raise _err(f"{name}: contradiction entry needs opposite or param_clash")
    return CapabilitySpec(name, virtual, attrs, commands, tuple(contradictions))


def parse_catalog(raw: object) -> Catalog:
    if not isinstance(raw, dict):
        raise _err("catalog root must be a table")
    if raw.get("schema") != SCHEMA:
        raise _err(f"expected schema {SCHEMA!r}, got {raw.get('schema')!r}")
    caps_raw = raw.get("capabilities")
    if not isinstance(caps_raw, dict) or not caps_raw:
        raise _err("catalog needs a non-empty capabilities table")
    capabilities = {name: _parse_capability(name, body) for name, body in caps_raw.items()}
    sinks: dict[str, ApiSink] = {}
    for entry in raw.get("api_sinks", ()):
        if not isinstance(entry, dict) or "name" not in entry:
            raise _err(f"bad api sink entry {entry!r}")
        sinks[str(entry["name"])] = ApiSink(str(entry["name"]), tuple(entry.get("params", ())))
    return Catalog(capabilities, sinks)


def load_catalog(path: str | Path | None = None) -> Catalog:
    """Load a catalog file; with no path, the packaged default."""
    if path is None:
        data = resources.files("hgsuite").joinpath("data/catalog.toml").read_bytes()
        return parse_catalog(tomllib.loads(data.decode("utf-8")))
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise CatalogError("SchemaViolation", f"cannot read catalog {p}: {exc}") from exc
    if p.suffix == ".json":
        try:
            return parse_catalog(json.loads(text))
        except json.JSONDecodeError as exc:
            raise _err(f"bad JSON in {p}: {exc}") from exc
    try:
        return parse_catalog(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise _err(f"bad TOML in {p}: {exc}") from exc


# ------------------------------------------------------------ queries


def contradicts(
    catalog: Catalog,
    capability: str,
    cmd_a: str,
    params_a: tuple,
    cmd_b: str,
    params_b: tuple,
) -> bool:
    """True when the two commands on one device cannot both stand."""
    cap = catalog.capability(capability)
    for rule in cap.contradictions:
        if rule.kind == "opposite":
            x, y = rule.commands
            if {cmd_a, cmd_b} == {x, y}:
                return True
        else:
            (cmd,) = rule.commands
            if cmd_a == cmd_b == cmd and params_a != params_b:
                return True
    return False


def goal_effect(catalog: Catalog, capability: str, command: str) -> dict[str, str]:
    """Signed effect on each goal feature; total, defaulting to ``#``."""
    cap = catalog.capability(capability)
    if command not in cap.commands:
        raise CatalogError("UnknownCommand", f"{capability} has no command {command!r}")
    spec = cap.commands[command]
    out = {feature: "#" for feature in catalog.goal_features}
    if cap.virtual:
        return out
    for ch in spec.channels:
        out[ch.feature] = ch.direction
    for feature, sign in spec.goal.items():
        out[feature] = sign
    return out


def channel_effects(catalog: Catalog, capability: str, command: str) -> tuple[Channel, ...]:
    cap = catalog.capability(capability)
    if command not in cap.commands:
        raise CatalogError("UnknownCommand", f"{capability} has no command {command!r}")
    return cap.commands[command].channels
