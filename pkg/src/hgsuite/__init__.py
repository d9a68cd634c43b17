"""Cross-app interference analysis for trigger-condition-action automations.

The pipeline: HGL app source is parsed and validated, symbolic execution
extracts one declarative rule per (trigger, path, action), a user
configuration binds devices and values, and the detector classifies how
bound rules from different apps can interfere (contradictory actions,
covert triggering, condition enabling/disabling, chains).  A small
constraint solver answers every reachability question and produces the
witness scenarios shown to the home owner.

Typical library use::

    from hgsuite import bind_configuration, bound_rules, detect_many, extract_rules
    from hgsuite.catalog import load_catalog
    from hgsuite.hgl import parse, validate

    catalog = load_catalog()
    unit = parse(source)
    assert not validate(unit, catalog)
    bound = bind_configuration(extract_rules(unit, catalog), devices, values)
    findings = detect_many(bound_rules(bound), installed, catalog)

The HTTP service and CLI in :mod:`hgsuite.service` and
:mod:`hgsuite.cli` wrap the same calls.
"""

from .catalog import Catalog, load_catalog
from .detector import (
    BoundRule,
    Edge,
    ThreatFinding,
    bound_rules,
    detect_chains,
    detect_many,
    detect_pair,
)
from .errors import HgError
from .rules import (
    BoundRuleSet,
    Rule,
    RuleSet,
    bind_configuration,
    deserialize_ruleset,
    render_rule,
    serialize_ruleset,
)
from .session import (
    AllowedPair,
    Configuration,
    HomeState,
    load_state,
    parse_config_uri,
    record_decision,
    record_install,
    save_state,
)
from .symex import extract_rules

__version__ = "0.1.0"

__all__ = [
    "AllowedPair",
    "BoundRule",
    "BoundRuleSet",
    "Catalog",
    "Configuration",
    "Edge",
    "HgError",
    "HomeState",
    "Rule",
    "RuleSet",
    "ThreatFinding",
    "__version__",
    "bind_configuration",
    "bound_rules",
    "deserialize_ruleset",
    "detect_chains",
    "detect_many",
    "detect_pair",
    "extract_rules",
    "load_catalog",
    "load_state",
    "parse_config_uri",
    "record_decision",
    "record_install",
    "render_rule",
    "save_state",
    "serialize_ruleset",
]
