"""Pairwise interference detection and chained covert rules.

Expected finding sets are frozen from hand evaluation of the catalog
semantics; docs/five_app_derivation.md walks through the ten-pair
derivation for the canonical five-app home.
"""

import pytest

from hgsuite import solver
from hgsuite.catalog import parse_catalog
from hgsuite.detector import (
    Edge,
    ThreatFinding,
    bound_rules,
    detect_chains,
    detect_many,
    detect_pair,
    finding_from_dict,
)
from hgsuite.errors import CatalogError, DetectionError
from hgsuite.hgl import parse
from hgsuite.rules import bind_configuration
from hgsuite.solver import check_witness, merge
from hgsuite.symex import extract_rules
from hgsuite.terms import AttrVar, ConstraintLit, IntConst, StrConst

from conftest import ALARM, CLOCK, LAMP, TV, build_rule, shapes

AC = "ac" * 16


# ------------------------------------------------------ witness checks


def assert_valid_witness(catalog, finding, by_id):
    """Re-check the witness against the problem that defines the kind."""
    assert finding.witness is not None, finding
    a, b = (by_id[r] for r in finding.rules[:2])
    if finding.kind == "GC":
        problem = merge(catalog, [a.full_part(), b.full_part()])
    else:  # AR, CT, SD, LT: both rules' conditions co-hold
        problem = merge(catalog, [a.condition_part(), b.condition_part()])
    assert check_witness(problem, finding.witness), finding


# ------------------------------------------------------- five-app home

APP_NO = {
    "ComfortTV": "1", "ColdDefender": "2", "CatchLiveShow": "3",
    "BurglarFinder": "4", "NightCare": "5",
}


@pytest.fixture(scope="module")
def five_findings(catalog, five_apps):
    return detect_many(five_apps, [], catalog)


def test_five_app_exact_finding_set(five_apps, five_findings):
    """The canonical home yields exactly AR(1,2), CT(3->1), CT(3->2),
    DC(5->4) over all ten app pairs, nothing else."""
    label_of = {r.id: APP_NO[r.app] for r in five_apps}
    assert shapes(five_findings, label_of) == {
        ("AR", "1", "2"),
        ("CT", "3", "1"),
        ("CT", "3", "2"),
        ("DC", "5", "4"),
    }


def test_five_app_witnesses(catalog, five_apps, five_findings):
    by_id = {r.id: r for r in five_apps}
    for f in five_findings:
        if f.kind == "DC":
            assert f.witness is None  # unsatisfiability has no witness
        else:
            assert_valid_witness(catalog, f, by_id)


def test_five_app_ar_witness_content(five_findings):
    (ar,) = [f for f in five_findings if f.kind == "AR"]
    # the scenario needs rain plus a hot room; both show in the witness
    values = set(ar.witness.values())
    assert "raining" in values
    assert 31 in values


def test_five_app_determinism(catalog, five_apps, five_findings):
    assert detect_many(five_apps, [], catalog) == five_findings


def test_five_app_pair_symmetry(catalog, five_apps):
    label_of = {r.id: APP_NO[r.app] for r in five_apps}
    for i, a in enumerate(five_apps):
        for b in five_apps[i + 1:]:
            assert shapes(detect_pair(a, b, catalog), label_of) == shapes(
                detect_pair(b, a, catalog), label_of
            ), (a.label, b.label)


# --------------------------------------------------- per-category pairs


@pytest.fixture(scope="module")
def sd_pair(catalog):
    a = build_rule(catalog, "cool_on_motion",
                   {"motion1": "11" * 16, "ac1": AC, "tSensor": "22" * 16})
    b = build_rule(catalog, "power_guard",
                   {"meter": "33" * 16, "ac2": AC}, {"limit": 2000})
    return a, b


def test_sd_pair_exact_set(catalog, sd_pair):
    a, b = sd_pair
    labels = {a.id: "A", b.id: "B"}
    found = detect_pair(a, b, catalog)
    # ac.on also raises power draw, firing the guard that switches the
    # same unit off; ac.off in turn lets the room heat back up
    assert shapes(found, labels) == {
        ("GC", "A", "B"),
        ("CT", "A", "B"),
        ("SD", "A", "B"),
        ("EC", "B", "A"),
    }
    by_id = {a.id: a, b.id: b}
    for f in found:
        if f.kind in ("GC", "CT", "SD"):
            assert_valid_witness(catalog, f, by_id)
    (sd,) = [f for f in found if f.kind == "SD"]
    assert sd.direction == (a.id, b.id)
    assert sd.channel == "power"
    (gc,) = [f for f in found if f.kind == "GC"]
    assert gc.channel == "temperature"


def test_sd_implies_ct_same_direction(catalog, sd_pair):
    found = detect_pair(*sd_pair, catalog)
    ct_dirs = {f.direction for f in found if f.kind == "CT"}
    for f in found:
        if f.kind == "SD":
            assert f.direction in ct_dirs


@pytest.fixture(scope="module")
def lt_pair(catalog):
    a = build_rule(catalog, "light_on_dim", {"lux1": "44" * 16, "lamp1": LAMP})
    b = build_rule(catalog, "light_off_bright", {"lux2": "55" * 16, "lamp2": LAMP})
    return a, b


def test_lt_pair_exact_set(catalog, lt_pair):
    a, b = lt_pair
    labels = {a.id: "A", b.id: "B"}
    found = detect_pair(a, b, catalog)
    # no GC: with one ambient illuminance, lux<30 and lux>50 cannot co-hold
    assert shapes(found, labels) == {
        ("CT", "A", "B"),
        ("CT", "B", "A"),
        ("SD", "A", "B"),
        ("SD", "B", "A"),
        ("LT", "A", "B"),
    }
    by_id = {a.id: a, b.id: b}
    for f in found:
        assert_valid_witness(catalog, f, by_id)
    (lt,) = [f for f in found if f.kind == "LT"]
    assert lt.channel == "illuminance"
    assert lt.direction is None  # a loop has no single source


def test_lt_requires_cycle(catalog, lt_pair):
    a, b = lt_pair
    found = detect_pair(a, b, catalog)
    ct_dirs = {f.direction for f in found if f.kind == "CT"}
    if any(f.kind == "LT" for f in found):
        assert (a.id, b.id) in ct_dirs and (b.id, a.id) in ct_dirs


def test_lt_pair_without_env_unification(catalog, lt_pair):
    a, b = lt_pair
    labels = {a.id: "A", b.id: "B"}
    found = detect_pair(a, b, catalog, env_unification=False)
    # separate sensors may disagree, so the pair can also co-fire: GC appears
    assert ("GC", "A", "B") in shapes(found, labels)


def test_ec_channel_pair(catalog):
    """A heating setpoint above another rule's hot-room threshold enables
    that rule's condition through the shared temperature feature."""
    a = build_rule(catalog, "morning_heat", {"motion2": "66" * 16, "thermo": "77" * 16})
    b = build_rule(catalog, "hot_vent",
                   {"door": "88" * 16, "tSensor2": "99" * 16, "fan": "aa" * 16})
    labels = {a.id: "A", b.id: "B"}
    found = detect_pair(a, b, catalog)
    assert shapes(found, labels) == {("EC", "A", "B")}
    (ec,) = found
    assert ec.direction == (a.id, b.id)
    assert ec.channel == "temperature"
    # independent reconstruction: setpoint 35 drives the temperature B's
    # sensor reads to >= 35, and B's condition must hold alongside it
    effect = ConstraintLit(">=", AttrVar("tSensor2", "temperature", "int"), IntConst(35))
    problem = merge(catalog, [b.part((effect,)), b.condition_part()])
    assert check_witness(problem, ec.witness)
    assert ec.witness["env::temperature"] == 35


def test_ec_attribute_pair(catalog):
    """Turning the shared floor lamp on enables the burglar rule's
    lamp-is-on check: the classic enabling-condition shape."""
    a = build_rule(catalog, "bedside_light", {"motion2": "77" * 16, "lamp4": LAMP})
    b = build_rule(catalog, "burglar_finder",
                   {"motion1": "99" * 16, "floorLamp": LAMP, "clock1": CLOCK, "siren1": ALARM})
    labels = {a.id: "A", b.id: "B"}
    found = detect_pair(a, b, catalog)
    assert shapes(found, labels) == {("EC", "A", "B")}
    (ec,) = found
    assert ec.direction == (a.id, b.id)
    assert ec.channel == "switch"
    # reconstruction: lamp.on pins lamp.switch to on, under which B's
    # condition must still be satisfiable, witnessed
    effect = ConstraintLit("==", AttrVar("lamp4", "switch"), StrConst("on"))
    problem = merge(catalog, [a.part((effect,)), a.part(a.rule.data), b.condition_part()])
    assert check_witness(problem, ec.witness)
    assert ec.witness[f"dev::{LAMP}::switch"] == "on"


def test_dc_pair(catalog):
    """NightCare turns the lamp off, which makes BurglarFinder's lamp-on
    condition unsatisfiable: a disabling condition."""
    a = build_rule(catalog, "night_care", {"lamp5": LAMP})
    b = build_rule(catalog, "burglar_finder",
                   {"motion1": "99" * 16, "floorLamp": LAMP, "clock1": CLOCK, "siren1": ALARM})
    found = detect_pair(a, b, catalog)
    dc = [f for f in found if f.kind == "DC"]
    assert len(dc) == 1
    assert dc[0].direction == (a.id, b.id)
    assert dc[0].witness is None
    assert dc[0].channel == "switch"


def test_gc_pair(catalog):
    a = build_rule(catalog, "warm_up", {"who": "bb" * 16, "heat1": "cc" * 16})
    b = build_rule(catalog, "cool_breeze", {"btn": "dd" * 16, "shade1": "ee" * 16})
    labels = {a.id: "A", b.id: "B"}
    found = detect_pair(a, b, catalog)
    assert shapes(found, labels) == {("GC", "A", "B")}
    (gc,) = found
    assert gc.channel == "temperature"
    assert gc.direction is None  # goal conflicts are symmetric
    assert_valid_witness(catalog, gc, {a.id: a, b.id: b})


def test_no_findings_for_unrelated_apps(catalog):
    a = build_rule(catalog, "catch_live_show",
                   {"voice": "ee" * 16, "tv3": TV, "cal": "ff" * 16})
    b = build_rule(catalog, "bedside_light", {"motion2": "77" * 16, "lamp4": LAMP})
    assert detect_pair(a, b, catalog) == []


def test_same_rule_is_not_a_pair(catalog):
    a = build_rule(catalog, "warm_up", {"who": "bb" * 16, "heat1": "cc" * 16})
    assert detect_pair(a, a, catalog) == []


def test_unsatisfiable_rules_are_skipped(catalog):
    src = '''
app "Contra"
input sw : device.switch
input lamp : device.light

def installed() { subscribe(sw, "switch.on", h) }
def h(evt) {
  if (evt.value == "off") { lamp.on() }
}
'''
    bound = bind_configuration(extract_rules(parse(src), catalog),
                               {"sw": "12" * 16, "lamp": LAMP}, {})
    (dead,) = bound_rules(bound)
    assert dead.rule.unsatisfiable
    live = build_rule(catalog, "burglar_finder",
                      {"motion1": "99" * 16, "floorLamp": LAMP, "clock1": CLOCK, "siren1": ALARM})
    assert detect_pair(dead, live, catalog) == []


# ------------------------------------------------------- finding model


def test_finding_round_trip(five_findings):
    for f in five_findings:
        assert finding_from_dict(f.to_dict()) == f


def test_finding_order_is_stable(catalog, sd_pair):
    found = detect_pair(*sd_pair, catalog)
    kinds = [f.kind for f in found]
    assert kinds == sorted(kinds, key=("AR", "GC", "CT", "SD", "LT", "EC", "DC",
                                       "INDETERMINATE", "CHAIN").index)


# -------------------------------------------------------- error paths


def test_detect_many_on_error_collects(sd_pair):
    # a catalog without the airConditioner capability breaks this pair
    small = parse_catalog({
        "schema": "hgcat/1",
        "capabilities": {
            "motionSensor": {
                "attributes": [
                    {"name": "motion", "sort": "enum", "values": ["active", "inactive"]}
                ],
            },
        },
    })
    a, b = sd_pair
    failures = []
    out = detect_many([a], [b], small, on_error=lambda x, y, exc: failures.append(exc))
    assert out == []
    assert len(failures) == 1 and isinstance(failures[0], CatalogError)

    with pytest.raises(CatalogError):
        detect_many([a], [b], small)


def test_budget_exhaustion_reports_indeterminate(catalog, sd_pair, monkeypatch):
    monkeypatch.setattr(solver, "solve",
                        lambda problem, node_budget=0: solver.Outcome("budget"))
    found = detect_pair(*sd_pair, catalog)
    assert found  # the pair is not silently clean
    assert {f.kind for f in found} == {"INDETERMINATE"}
    assert all("verdict unknown" in f.explanation for f in found)


# -------------------------------------------------------------- chains


@pytest.fixture(scope="module")
def trio(catalog):
    a = build_rule(catalog, "curling_iron", {"motion3": "12" * 16, "outlet": "34" * 16})
    b = build_rule(catalog, "switch_mode", {"outlet2": "34" * 16})
    c = build_rule(catalog, "make_it_so", {"door1": "56" * 16})
    return a, b, c


def test_chain_trio(catalog, trio):
    a, b, c = trio
    pairwise = detect_many(list(trio), [], catalog)
    labels = {r.id: r.app for r in trio}
    assert shapes(pairwise, labels) == {
        ("CT", "CurlingIron", "SwitchMode"),
        ("CT", "SwitchMode", "MakeItSo"),
    }
    (chain,) = detect_chains(pairwise, [], trio)
    assert chain.kind == "CHAIN"
    assert chain.rules == (a.id, b.id, c.id)
    assert chain.direction is None and chain.witness is None
    # the rendered covert rule: unlock the door when motion is detected
    assert "door1.unlock()" in chain.explanation
    assert "motion3.motion becomes active" in chain.explanation


def test_chain_needs_a_new_edge(catalog, trio):
    pairwise = detect_many(list(trio), [], catalog)
    edges = [Edge("CT", f.direction[0], f.direction[1]) for f in pairwise]
    # everything already allowed: nothing new to report
    assert detect_chains([], edges, trio) == []
    # one allowed edge plus one fresh finding still completes the chain
    assert len(detect_chains(pairwise[1:], edges[:1], trio)) == 1
    assert len(detect_chains(pairwise[:1], edges[1:], trio)) == 1


def test_chain_ignores_non_directional_kinds(trio):
    a, b, _ = trio
    fake = ThreatFinding("GC", (a.id, b.id), explanation="x")
    assert detect_chains([fake], [], trio) == []


def test_chain_max_len():
    # synthetic line graph r1 -> r2 -> r3 -> r4 -> r5, only the last hop new
    edges = [Edge("CT", "r1", "r2"), Edge("CT", "r2", "r3"), Edge("CT", "r3", "r4")]
    new = [ThreatFinding("CT", ("r4", "r5"), direction=("r4", "r5"), explanation="x")]
    lengths = {len(c.rules) for c in detect_chains(new, edges, [], max_len=5)}
    assert lengths == {3, 4, 5}
    capped = {len(c.rules) for c in detect_chains(new, edges, [], max_len=3)}
    assert capped == {3}


def test_chain_budget():
    # a dense synthetic graph overruns a tiny exploration budget
    new = [
        ThreatFinding("CT", (f"n{i}", f"n{j}"), direction=(f"n{i}", f"n{j}"), explanation="x")
        for i in range(8) for j in range(8) if i != j
    ]
    with pytest.raises(DetectionError) as err:
        detect_chains(new, [], [], budget=50)
    assert err.value.code == "ChainBudgetExceeded"
