"""Shared fixtures: the packaged catalog, the app corpus, build helpers."""

from __future__ import annotations

from pathlib import Path

import pytest

from hgsuite.catalog import load_catalog
from hgsuite.detector import bound_rules
from hgsuite.hgl import parse, validate
from hgsuite.rules import bind_configuration
from hgsuite.symex import extract_rules

FIXTURES = Path(__file__).parent / "fixtures"
APPS = FIXTURES / "apps"
GOLDENS = Path(__file__).parent / "goldens"

# Shared device ids for the five-app home.  The TV, the window, and the
# floor lamp are each bound by two apps; everything else is private.
TV = "aa" * 16
WINDOW = "bb" * 16
TSENSOR = "cc" * 16
WEATHER = "dd" * 16
VOICE = "ee" * 16
CAL = "ff" * 16
MOTION = "99" * 16
LAMP = "11" * 16
CLOCK = "22" * 16
ALARM = "33" * 16

FIVE_APP_BINDINGS = {
    "comfort_tv": ({"tv1": TV, "window1": WINDOW, "tSensor": TSENSOR}, {"threshold1": 30}),
    "cold_defender": ({"tv2": TV, "window2": WINDOW, "weather": WEATHER}, {}),
    "catch_live_show": ({"voice": VOICE, "tv3": TV, "cal": CAL}, {}),
    "burglar_finder": ({"motion1": MOTION, "floorLamp": LAMP, "clock1": CLOCK, "siren1": ALARM}, {}),
    "night_care": ({"lamp5": LAMP}, {}),
}


def app_source(name: str) -> str:
    return (APPS / f"{name}.hgl").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def corpus(catalog):
    """Every fixture app parsed, validated, and extracted once."""
    out = {}
    for path in sorted(APPS.glob("*.hgl")):
        unit = parse(path.read_text(encoding="utf-8"))
        assert validate(unit, catalog) == [], path.name
        out[path.stem] = extract_rules(unit, catalog)
    return out


def build_rule(catalog, name: str, devices: dict, values: dict | None = None):
    """One fixture app to a single BoundRule."""
    unit = parse(app_source(name))
    assert validate(unit, catalog) == []
    bound = bind_configuration(extract_rules(unit, catalog), devices, values or {})
    (rule,) = bound_rules(bound)
    return rule


def build_rules(catalog, name: str, devices: dict, values: dict | None = None):
    unit = parse(app_source(name))
    assert validate(unit, catalog) == []
    bound = bind_configuration(extract_rules(unit, catalog), devices, values or {})
    return bound_rules(bound)


@pytest.fixture(scope="session")
def five_apps(catalog):
    """The canonical five-app home as a list of BoundRules, app order fixed."""
    rules = []
    for name, (devices, values) in FIVE_APP_BINDINGS.items():
        rules.extend(build_rules(catalog, name, devices, values))
    return rules


def shape_of(finding, label_of):
    """Findings as comparable tuples: directed (kind, src, dst), else sorted."""
    if finding.direction:
        return (finding.kind, label_of[finding.direction[0]], label_of[finding.direction[1]])
    return (finding.kind,) + tuple(sorted(label_of[r] for r in finding.rules))


def shapes(findings, label_of):
    return {shape_of(f, label_of) for f in findings}
