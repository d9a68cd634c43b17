"""Parser, printer, and validator for the automation language."""

import pytest

from hgsuite.errors import HglSyntaxError
from hgsuite.hgl import EnumKind, FuncDef, If, Switch, format_source, parse, validate

from conftest import APPS, app_source


# ------------------------------------------------------------- parsing


def test_parse_comfort_tv():
    unit = parse(app_source("comfort_tv"))
    assert unit.name == "ComfortTV"
    assert [d.name for d in unit.inputs] == ["tv1", "window1", "tSensor", "threshold1"]
    assert [f.name for f in unit.funcs] == ["installed", "updated", "onHandler", "turnOnWindow"]
    handler = unit.func("onHandler")
    assert handler.param == "evt"
    assert isinstance(handler.body[1], If)


def test_parse_positions():
    unit = parse('app "X"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "switch", h) }\ndef h(evt) { sw.on() }\n')
    assert unit.inputs[0].line == 2
    assert unit.funcs[0].line == 4


def test_parse_ternary_desugars_to_if():
    unit = parse('''
app "T"
input sw : device.switch

def installed() { subscribe(sw, "switch", h) }
def h(evt) {
  x = evt.value == "on" ? 1 : 2
  if (x > 1) { sw.off() }
}
''')
    body = unit.func("h").body
    assert isinstance(body[0], If)  # assignment in both arms


def test_parse_switch_statement():
    unit = parse('''
app "S"
input sw : device.switch

def installed() { subscribe(sw, "switch", h) }
def h(evt) {
  switch (evt.value) {
    case "on": { sw.off() }
    default: { sw.on() }
  }
}
''')
    stmt = unit.func("h").body[0]
    assert isinstance(stmt, Switch)
    assert stmt.cases[0][0].value == "on"
    assert stmt.default is not None


def test_parse_enum_input():
    unit = parse('''
app "E"
input level : enum("low", "high")
input sw : device.switch

def installed() { subscribe(sw, "switch", h) }
def h(evt) { sw.on() }
''')
    kind = unit.inputs[0].kind
    assert isinstance(kind, EnumKind) and kind.values == ("low", "high")


def test_parse_input_title():
    unit = parse('''
app "T"
input sw : device.switch title "Main switch"

def installed() { subscribe(sw, "switch", h) }
def h(evt) { sw.on() }
''')
    assert unit.inputs[0].title == "Main switch"


@pytest.mark.parametrize(
    "source",
    [
        "",
        "input x : number",
        'app X',
        'app "A" input',
        'app "A"\ninput x : device\n',
        'app "A"\ninput x : gadget.switch\n',
        'app "A"\ndef f( { }',
        'app "A"\ndef f() { if x { } }',
        'app "A"\ndef f() { y = }',
        'app "A"\ndef f() { sw.on( }',
        'app "A"\ndef f() { } trailing',
        'app "A"\ndef f() { x = 1 ? 2 }',
    ],
)
def test_parse_rejects(source):
    with pytest.raises(HglSyntaxError):
        parse(source)


def test_parse_error_carries_position():
    with pytest.raises(HglSyntaxError) as err:
        parse('app "A"\ndef f() { y = }\n')
    assert err.value.line == 2
    assert err.value.col > 0


# ------------------------------------------------------------ printing


def test_format_parse_round_trip_corpus():
    for path in sorted(APPS.glob("*.hgl")):
        unit = parse(path.read_text(encoding="utf-8"))
        printed = format_source(unit)
        assert parse(printed) == unit, path.name
        # printing is a fixpoint
        assert format_source(parse(printed)) == printed, path.name


def test_format_is_deterministic():
    unit = parse(app_source("burglar_finder"))
    assert format_source(unit) == format_source(parse(format_source(unit)))


# ----------------------------------------------------------- validation


def _diag_codes(source: str, catalog) -> set[str]:
    return {d.code for d in validate(parse(source), catalog)}


def test_corpus_validates_clean(catalog):
    for path in sorted(APPS.glob("*.hgl")):
        assert validate(parse(path.read_text(encoding="utf-8")), catalog) == [], path.name


def test_validate_unknown_capability(catalog):
    src = 'app "A"\ninput x : device.teleporter\n\ndef installed() { subscribe(x, "beam", h) }\ndef h(evt) { x.on() }\n'
    assert "UnknownCapability" in _diag_codes(src, catalog)


def test_validate_unknown_attribute(catalog):
    src = 'app "A"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "bogus", h) }\ndef h(evt) { sw.on() }\n'
    assert "UnknownAttribute" in _diag_codes(src, catalog)


def test_validate_unknown_attribute_value(catalog):
    src = 'app "A"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "switch.sideways", h) }\ndef h(evt) { sw.on() }\n'
    assert "UnknownAttributeValue" in _diag_codes(src, catalog)


def test_validate_unknown_command(catalog):
    src = 'app "A"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "switch", h) }\ndef h(evt) { sw.explode() }\n'
    assert "UnknownCommand" in _diag_codes(src, catalog)


def test_validate_unknown_handler(catalog):
    src = 'app "A"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "switch", ghost) }\n'
    assert "UnknownHandler" in _diag_codes(src, catalog)


def test_validate_unbound_variable(catalog):
    src = 'app "A"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "switch", h) }\ndef h(evt) { if (mystery > 1) { sw.on() } }\n'
    assert "UnboundVariable" in _diag_codes(src, catalog)


def test_validate_event_outside_handler(catalog):
    src = 'app "A"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "switch", h) }\ndef h(evt) { helper() }\ndef helper() { if (evt.value == "on") { sw.on() } }\n'
    assert "BadEventUse" in _diag_codes(src, catalog)


def test_validate_recursion(catalog):
    src = 'app "A"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "switch", h) }\ndef h(evt) { h2() }\ndef h2() { h2() }\n'
    assert "RecursionNotSupported" in _diag_codes(src, catalog)


def test_validate_arity(catalog):
    src = 'app "A"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "switch", h) }\ndef h(evt) { sw.on(3) }\n'
    assert "ArityMismatch" in _diag_codes(src, catalog)


def test_validate_reserved_location_name(catalog):
    src = 'app "A"\ninput location : device.switch\n\ndef installed() { subscribe(location, "switch", h) }\ndef h(evt) { location.on() }\n'
    assert "ReservedName" in _diag_codes(src, catalog)


def test_diagnostics_point_at_source(catalog):
    src = 'app "A"\ninput sw : device.switch\n\ndef installed() { subscribe(sw, "switch", h) }\ndef h(evt) { sw.explode() }\n'
    (diag,) = validate(parse(src), catalog)
    assert diag.line == 5
    assert str(diag).startswith("5:")


def test_validate_location_is_usable(catalog):
    # location needs no declaration: triggers, reads, and commands all work
    src = '''
app "L"
input sw : device.switch

def installed() { subscribe(location, "mode", h) }
def h(evt) {
  if (location.current("mode") == "Home") { location.setMode("Away") }
}
'''
    assert validate(parse(src), catalog) == []
