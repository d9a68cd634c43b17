"""Install sessions: configuration ingestion and the home's decision ledger.

A home is a set of installed apps (each a bound rule set plus the
configuration it was bound with) and a ledger of interference pairs the
owner has explicitly accepted.  Kept pairs feed chain detection on later
installs; rejecting an install removes the app again.

Configurations arrive as the companion URI, one path segment per
binding::

    http://my.com/appname:ComfortTV/tv1:0e0b...741b/threshold1:30/

Values that look like 128-bit hex ids become device bindings; integers
and ``true``/``false`` are parsed; everything else stays a string.

State persists as a single JSON document (schema ``hgstate/1``) written
atomically, so a crashed writer never leaves a torn file behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from urllib.parse import unquote, urlsplit

from .detector import Edge, ThreatFinding
from .errors import SchemaError, SessionError, UriError
from .rules import BoundRuleSet, Rule, ruleset_from_dict, ruleset_to_dict

STATE_SCHEMA = "hgstate/1"

_HEX = frozenset("0123456789abcdef")


@dataclass(frozen=True, slots=True)
class Configuration:
    """One app's user-supplied bindings."""

    app_name: str
    device_bindings: Mapping[str, str] = field(default_factory=dict)
    value_bindings: Mapping[str, int | str | bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "appName": self.app_name,
            "deviceBindings": dict(self.device_bindings),
            "valueBindings": dict(self.value_bindings),
        }


def _as_device_id(raw: str) -> str | None:
    """Normalized 32-hex DeviceId, or None if the text is not one."""
    compact = raw.replace("-", "").lower()
    if len(compact) == 32 and set(compact) <= _HEX:
        return compact
    return None


def parse_config_uri(uri: str) -> Configuration:
    """Parse the companion configuration URI.

    The path must start with an ``appname:<name>`` segment; every later
    non-empty segment is one ``key:value`` binding.
    """
    try:
        split = urlsplit(uri.strip())
    except ValueError as exc:
        raise UriError("MalformedUri", f"unparseable URI: {exc}") from None
    if not split.scheme or not split.netloc:
        raise UriError("MalformedUri", "expected an absolute http(s) URI")
    segments = [unquote(s) for s in split.path.split("/") if s]
    if not segments:
        raise UriError("MissingAppName", "URI path is empty")

    pairs = []
    for segment in segments:
        key, sep, value = segment.partition(":")
        if not sep or not key or not value or ":" in value:
            raise UriError("MalformedUri", f"segment {segment!r} is not key:value")
        pairs.append((key, value))

    first_key, app_name = pairs[0]
    if first_key != "appname":
        raise UriError("MissingAppName", "first segment must be appname:<name>")

    devices: dict[str, str] = {}
    values: dict[str, int | str | bool] = {}
    for key, raw in pairs[1:]:
        if key == "appname":
            raise UriError("MalformedUri", "duplicate appname segment")
        if key in devices or key in values:
            raise UriError("MalformedUri", f"duplicate binding for {key!r}")
        device = _as_device_id(raw)
        if device is not None:
            devices[key] = device
        elif raw in ("true", "false"):
            values[key] = raw == "true"
        else:
            try:
                values[key] = int(raw, 10)
            except ValueError:
                values[key] = raw
    return Configuration(app_name, devices, values)


@dataclass(frozen=True, slots=True)
class AllowedPair:
    """One finding the owner decided to live with."""

    rule_a: str
    rule_b: str
    kind: str
    decided_at: str  # ISO-8601 UTC
    decided_by: str = ""

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.rule_a, self.rule_b, self.kind)


@dataclass(frozen=True, slots=True)
class InstalledApp:
    ruleset: BoundRuleSet
    config: Configuration
    seq: int  # install order; higher = newer


@dataclass(frozen=True, slots=True)
class HomeState:
    apps: Mapping[str, InstalledApp] = field(default_factory=dict)
    allowed: tuple[AllowedPair, ...] = ()

    def rule_owner(self, rule_id: str) -> str | None:
        for name, entry in self.apps.items():
            if any(r.id == rule_id for r in entry.ruleset.rules):
                return name
        return None

    def rule_by_id(self, rule_id: str) -> Rule | None:
        for entry in self.apps.values():
            for rule in entry.ruleset.rules:
                if rule.id == rule_id:
                    return rule
        return None

    def allowed_edges(self) -> tuple[Edge, ...]:
        """Directed CT/EC edges for chain detection, in ledger order."""
        return tuple(
            Edge(p.kind, p.rule_a, p.rule_b)
            for p in self.allowed
            if p.kind in ("CT", "EC")
        )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _next_seq(state: HomeState) -> int:
    return 1 + max((entry.seq for entry in state.apps.values()), default=0)


def _prune_allowed(apps: Mapping[str, InstalledApp], allowed: tuple[AllowedPair, ...]) -> tuple[AllowedPair, ...]:
    live = {r.id for entry in apps.values() for r in entry.ruleset.rules}
    return tuple(p for p in allowed if p.rule_a in live and p.rule_b in live)


def record_install(state: HomeState, ruleset: BoundRuleSet, config: Configuration) -> HomeState:
    """Install or replace an app; allowed pairs that now reference
    retired rule ids are dropped."""
    if config.app_name != ruleset.app:
        raise SessionError(
            "AppMismatch",
            f"configuration is for {config.app_name!r}, rules for {ruleset.app!r}",
        )
    prior = state.apps.get(ruleset.app)
    if prior is not None and prior.ruleset == ruleset and prior.config == config:
        return state
    apps = dict(state.apps)
    apps[ruleset.app] = InstalledApp(ruleset, config, _next_seq(state))
    return HomeState(apps, _prune_allowed(apps, state.allowed))


def remove_app(state: HomeState, app_name: str) -> HomeState:
    if app_name not in state.apps:
        raise SessionError("UnknownApp", f"no installed app named {app_name!r}")
    apps = {name: entry for name, entry in state.apps.items() if name != app_name}
    return HomeState(apps, _prune_allowed(apps, state.allowed))


def record_decision(
    state: HomeState,
    finding: ThreatFinding,
    decision: str,
    decided_by: str = "",
) -> HomeState:
    """Apply one keep/reject decision.

    Keep adds the pair to the ledger (chains have no single pair and
    are advisory, so they record nothing).  Reject removes the newest
    app involved in the finding.
    """
    if decision not in ("keep", "reject"):
        raise SessionError("BadDecision", f"decision must be keep or reject, got {decision!r}")
    owners = []
    for rule_id in finding.rules:
        owner = state.rule_owner(rule_id)
        if owner is None:
            raise SessionError("StaleFinding", f"rule {rule_id} is not installed anymore")
        owners.append(owner)

    if decision == "reject":
        newest = max(owners, key=lambda name: state.apps[name].seq)
        return remove_app(state, newest)

    if finding.kind == "CHAIN" or len(finding.rules) != 2:
        return state
    rule_a, rule_b = (
        finding.direction if finding.direction is not None else tuple(sorted(finding.rules))
    )
    pair = AllowedPair(rule_a, rule_b, finding.kind, _now(), decided_by)
    if any(p.key == pair.key for p in state.allowed):
        return state
    return HomeState(state.apps, state.allowed + (pair,))


# ---------------------------------------------------------- persistence


def state_to_dict(state: HomeState) -> dict:
    return {
        "schema": STATE_SCHEMA,
        "apps": {
            name: {
                "ruleset": ruleset_to_dict(entry.ruleset),
                "config": entry.config.to_dict(),
                "seq": entry.seq,
            }
            for name, entry in sorted(state.apps.items())
        },
        "allowed": [
            {
                "ruleA": p.rule_a,
                "ruleB": p.rule_b,
                "kind": p.kind,
                "decidedAt": p.decided_at,
                "decidedBy": p.decided_by,
            }
            for p in state.allowed
        ],
    }


def config_from_dict(raw: object) -> Configuration:
    if not isinstance(raw, dict) or not isinstance(raw.get("appName"), str):
        raise SchemaError("SchemaViolation", "config needs an appName")
    devices = raw.get("deviceBindings", {})
    values = raw.get("valueBindings", {})
    if not isinstance(devices, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in devices.items()
    ):
        raise SchemaError("SchemaViolation", "deviceBindings must map names to id strings")
    if not isinstance(values, dict) or not all(
        isinstance(k, str) and isinstance(v, (int, str, bool)) for k, v in values.items()
    ):
        raise SchemaError("SchemaViolation", "valueBindings must map names to scalars")
    return Configuration(raw["appName"], dict(devices), dict(values))


def state_from_dict(doc: object) -> HomeState:
    if not isinstance(doc, dict) or doc.get("schema") != STATE_SCHEMA:
        raise SchemaError("SchemaViolation", f"expected schema {STATE_SCHEMA!r}")
    raw_apps = doc.get("apps", {})
    if not isinstance(raw_apps, dict):
        raise SchemaError("SchemaViolation", "apps must be an object")
    apps: dict[str, InstalledApp] = {}
    for name, raw in raw_apps.items():
        if not isinstance(raw, dict):
            raise SchemaError("SchemaViolation", f"app {name!r} entry must be an object")
        ruleset = ruleset_from_dict(raw.get("ruleset"))
        if not isinstance(ruleset, BoundRuleSet):
            raise SchemaError("SchemaViolation", f"app {name!r} is stored without a binding")
        seq = raw.get("seq")
        if type(seq) is not int or seq < 1:
            raise SchemaError("SchemaViolation", f"app {name!r} needs a positive seq")
        apps[name] = InstalledApp(ruleset, config_from_dict(raw.get("config")), seq)
    raw_allowed = doc.get("allowed", [])
    if not isinstance(raw_allowed, list):
        raise SchemaError("SchemaViolation", "allowed must be a list")
    allowed: list[AllowedPair] = []
    for raw in raw_allowed:
        if not isinstance(raw, dict) or not all(
            isinstance(raw.get(k), str) for k in ("ruleA", "ruleB", "kind", "decidedAt")
        ):
            raise SchemaError("SchemaViolation", "allowed entries need ruleA/ruleB/kind/decidedAt")
        allowed.append(
            AllowedPair(
                raw["ruleA"], raw["ruleB"], raw["kind"], raw["decidedAt"],
                str(raw.get("decidedBy", "")),
            )
        )
    state = HomeState(apps, tuple(allowed))
    if _prune_allowed(apps, state.allowed) != state.allowed:
        raise SchemaError("SchemaViolation", "allowed pair references an unknown rule id")
    return state


def save_state(state: HomeState, path: str | Path) -> None:
    """Write the home file atomically (temp file + rename)."""
    path = Path(path)
    text = json.dumps(state_to_dict(state), indent=2, ensure_ascii=False) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def load_state(path: str | Path) -> HomeState:
    path = Path(path)
    if not path.exists():
        return HomeState()
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError("SchemaViolation", f"{path}: not valid JSON: {exc}") from None
    return state_from_dict(doc)
