"""Install service: source + configuration in, threat report out.

``HomeService`` owns one home state file and runs the full pipeline for
each install request: parse, validate, extract (with an on-disk cache
keyed by source hash), bind, pairwise detection against everything
already installed, then chain detection through the Allowed ledger.
The app stays pending until the owner decides; keep commits it and
records every pairwise finding as accepted, reject leaves the home
exactly as it was.

Reports use the ``hgthreat/1`` schema.  Identical state file + request
produce a byte-identical report: orderings are canonical all the way
down and the decision id is a content hash, not a random token.

``create_app`` wraps a service in a small FastAPI application; the CLI
drives the same class without HTTP.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .catalog import Catalog, load_catalog
from .detector import (
    BoundRule,
    ThreatFinding,
    bound_rules,
    detect_chains,
    detect_many,
    finding_from_dict,
)
from .errors import DetectionError, HgError, SchemaError, SessionError
from .hgl import parse, validate
from .rules import (
    BoundRuleSet,
    RuleSet,
    bind_configuration,
    deserialize_ruleset,
    render_rule,
    ruleset_from_dict,
    ruleset_to_dict,
    serialize_ruleset,
)
from .session import (
    Configuration,
    config_from_dict,
    load_state,
    parse_config_uri,
    record_decision,
    record_install,
    save_state,
    state_to_dict,
)
from .symex import extract_rules

REPORT_SCHEMA = "hgthreat/1"


@dataclass(frozen=True, slots=True)
class _Pending:
    """An install awaiting its keep/reject decision."""

    ruleset: BoundRuleSet
    config: Configuration
    findings: tuple[ThreatFinding, ...]
    report: Mapping


def _error_entry(stage: str, exc: HgError) -> dict:
    entry: dict = {"stage": stage, "code": exc.code, "message": exc.message}
    if exc.line is not None:
        entry["line"] = exc.line
        entry["col"] = exc.col
    return entry


class HomeService:
    """One home's install sessions, serialized behind a single lock."""

    def __init__(
        self,
        home_path: str | Path,
        catalog: Catalog | None = None,
        *,
        cache_dir: str | Path | None = None,
        max_chain_len: int = 4,
        env_unification: bool = True,
    ):
        self.home_path = Path(home_path)
        self.catalog = catalog if catalog is not None else load_catalog()
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self.max_chain_len = max_chain_len
        self.env_unification = env_unification
        self._lock = threading.Lock()
        self._state = load_state(self.home_path)
        self._pending: dict[str, _Pending] = {}
        self._reports: dict[str, dict] = {}
        self._load_pending()

    # ------------------------------------------------ pending persistence

    # Pending installs survive process restarts in a sidecar next to the
    # home file, so the CLI can analyze in one invocation and decide in
    # the next.
    @property
    def _pending_path(self) -> Path:
        return self.home_path.with_suffix(self.home_path.suffix + ".pending")

    def _load_pending(self) -> None:
        path = self._pending_path
        if not path.exists():
            return
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError("SchemaViolation", f"{path}: not valid JSON: {exc}") from None
        for decision_id, raw in doc.get("pending", {}).items():
            ruleset = ruleset_from_dict(raw["ruleset"])
            assert isinstance(ruleset, BoundRuleSet)
            entry = _Pending(
                ruleset=ruleset,
                config=config_from_dict(raw["config"]),
                findings=tuple(finding_from_dict(f) for f in raw["findings"]),
                report=raw["report"],
            )
            self._pending[decision_id] = entry
            self._reports[decision_id] = dict(raw["report"])

    def _save_pending(self) -> None:
        doc = {
            "schema": "hgpend/1",
            "pending": {
                decision_id: {
                    "ruleset": ruleset_to_dict(entry.ruleset),
                    "config": entry.config.to_dict(),
                    "findings": [f.to_dict() for f in entry.findings],
                    "report": entry.report,
                }
                for decision_id, entry in sorted(self._pending.items())
            },
        }
        path = self._pending_path
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        tmp.replace(path)

    # ------------------------------------------------------- extraction

    def _cache_path(self, source: str) -> Path | None:
        if self.cache_dir is None:
            return None
        digest = hashlib.sha256(source.encode()).hexdigest()[:32]
        return self.cache_dir / f"{digest}.json"

    def _extract_cached(self, source: str, unit) -> RuleSet:
        """Extract rules for validated source, via the content-addressed
        cache when one is configured."""
        path = self._cache_path(source)
        if path is not None and path.exists():
            return deserialize_ruleset(path.read_text(encoding="utf-8"))
        ruleset = extract_rules(unit, self.catalog)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(serialize_ruleset(ruleset), encoding="utf-8")
        return ruleset

    # ---------------------------------------------------------- install

    def install(self, source: str, config: Configuration | None = None, config_uri: str | None = None) -> dict:
        """Run the full pipeline; the report is also retrievable later by
        its decision id."""
        with self._lock:
            return self._install_locked(source, config, config_uri)

    def _install_locked(self, source: str, config: Configuration | None, config_uri: str | None) -> dict:
        report: dict = {
            "schema": REPORT_SCHEMA,
            "app": None,
            "renderedRules": [],
            "findings": [],
            "chains": [],
            "errors": [],
            "decisionId": None,
            "pendingDecisionIds": [],
        }
        if (config is None) == (config_uri is None):
            report["errors"].append(
                {"stage": "config", "code": "BadRequest",
                 "message": "exactly one of config and configUri is required"}
            )
            return report
        if config is None:
            try:
                config = parse_config_uri(config_uri or "")
            except HgError as exc:
                report["errors"].append(_error_entry("config", exc))
                return report
        report["app"] = config.app_name

        try:
            unit = parse(source)
        except HgError as exc:
            report["errors"].append(_error_entry("parse", exc))
            return report
        if unit.name != config.app_name:
            report["errors"].append(
                {"stage": "config", "code": "AppMismatch",
                 "message": f"configuration is for {config.app_name!r}, source declares {unit.name!r}"}
            )
            return report
        diagnostics = validate(unit, self.catalog)
        if diagnostics:
            report["errors"].extend(
                {"stage": "validate", "code": d.code, "message": d.message,
                 "line": d.line, "col": d.col}
                for d in diagnostics
            )
            return report
        try:
            ruleset = self._extract_cached(source, unit)
        except HgError as exc:
            report["errors"].append(_error_entry("extract", exc))
            return report
        try:
            bound = bind_configuration(ruleset, dict(config.device_bindings), dict(config.value_bindings))
        except HgError as exc:
            report["errors"].append(_error_entry("bind", exc))
            return report

        report["renderedRules"] = [render_rule(rule) for rule in bound.rules]

        new = bound_rules(bound)
        installed = [
            br
            for name, entry in sorted(self._state.apps.items())
            if name != bound.app
            for br in bound_rules(entry.ruleset)
        ]

        def pair_failed(a: BoundRule, b: BoundRule, exc: Exception) -> None:
            assert isinstance(exc, HgError)
            entry = _error_entry("detect", exc)
            entry["pair"] = sorted((a.label, b.label))
            report["errors"].append(entry)

        findings = detect_many(
            new, installed, self.catalog,
            env_unification=self.env_unification, on_error=pair_failed,
        )
        try:
            chains = detect_chains(
                findings, self._state.allowed_edges(), (*installed, *new),
                max_len=self.max_chain_len,
            )
        except DetectionError as exc:
            report["errors"].append(_error_entry("detect", exc))
            chains = []
        report["findings"] = [f.to_dict() for f in findings]
        report["chains"] = [c.to_dict() for c in chains]

        decision_id = self._decision_id(source, config)
        report["decisionId"] = decision_id
        report["pendingDecisionIds"] = [decision_id]
        self._pending[decision_id] = _Pending(bound, config, tuple(findings), report)
        self._reports[decision_id] = report
        self._save_pending()
        return report

    def _decision_id(self, source: str, config: Configuration) -> str:
        basis = json.dumps(
            {
                "state": state_to_dict(self._state),
                "source": source,
                "config": config.to_dict(),
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(basis.encode()).hexdigest()[:16]

    # --------------------------------------------------------- decision

    def decide(self, decision_id: str, choice: str) -> dict:
        if choice not in ("keep", "reject"):
            raise SessionError("BadDecision", f"choice must be keep or reject, got {choice!r}")
        with self._lock:
            pending = self._pending.pop(decision_id, None)
            if pending is None:
                raise SessionError("UnknownDecisionId", f"no pending decision {decision_id!r}")
            if choice == "reject":
                self._save_pending()
                return {"status": "rejected", "app": pending.ruleset.app,
                        "allowedCount": len(self._state.allowed)}
            state = record_install(self._state, pending.ruleset, pending.config)
            for finding in pending.findings:
                if finding.kind == "INDETERMINATE":
                    continue  # unknown verdicts are not accepted interference
                try:
                    state = record_decision(state, finding, "keep")
                except SessionError as exc:
                    if exc.code != "StaleFinding":
                        raise
                    # a later install retired one side of the pair; nothing to allow
            self._state = state
            save_state(state, self.home_path)
            self._save_pending()
            return {"status": "kept", "app": pending.ruleset.app,
                    "allowedCount": len(state.allowed)}

    # ------------------------------------------------------------ reads

    def report(self, decision_id: str) -> dict:
        found = self._reports.get(decision_id)
        if found is None:
            raise SessionError("UnknownDecisionId", f"no report for {decision_id!r}")
        return found

    def rules_of(self, app_name: str) -> dict:
        entry = self._state.apps.get(app_name)
        if entry is None:
            raise SessionError("UnknownApp", f"no installed app named {app_name!r}")
        doc = ruleset_to_dict(entry.ruleset)
        doc["renderedRules"] = [render_rule(rule) for rule in entry.ruleset.rules]
        return doc

    def home_summary(self) -> dict:
        return {
            "schema": "hgstate/1",
            "apps": {
                name: {
                    "seq": entry.seq,
                    "rules": [render_rule(rule) for rule in entry.ruleset.rules],
                }
                for name, entry in sorted(self._state.apps.items())
            },
            "allowed": [
                {"ruleA": p.rule_a, "ruleB": p.rule_b, "kind": p.kind}
                for p in self._state.allowed
            ],
            "pendingDecisionIds": sorted(self._pending),
        }


# ------------------------------------------------------------- HTTP app


try:  # request models; the service core never needs pydantic
    from pydantic import BaseModel as _BaseModel

    class InstallBody(_BaseModel):
        appSource: str
        configUri: str | None = None
        config: dict | None = None

    class DecisionBody(_BaseModel):
        decisionId: str
        choice: str

except ImportError:  # pragma: no cover - library use without the service extra
    InstallBody = DecisionBody = None  # type: ignore[assignment,misc]


def create_app(service: HomeService):
    """FastAPI wrapper; all logic lives in the service object."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import JSONResponse

    app = FastAPI(title="hgsuite", docs_url=None, redoc_url=None)

    def fail(status: int, exc: HgError):
        raise HTTPException(status_code=status, detail={"code": exc.code, "message": exc.message})

    @app.post("/install")
    def install(body: InstallBody) -> JSONResponse:
        config = None
        if body.config is not None:
            config = Configuration(
                app_name=str(body.config.get("appName", "")),
                device_bindings=dict(body.config.get("deviceBindings", {})),
                value_bindings=dict(body.config.get("valueBindings", {})),
            )
        report = service.install(body.appSource, config=config, config_uri=body.configUri)
        return JSONResponse(report)

    @app.post("/decision")
    def decision(body: DecisionBody) -> JSONResponse:
        try:
            return JSONResponse(service.decide(body.decisionId, body.choice))
        except SessionError as exc:
            status = 404 if exc.code == "UnknownDecisionId" else 400
            fail(status, exc)

    @app.get("/home")
    def home() -> JSONResponse:
        return JSONResponse(service.home_summary())

    @app.get("/rules/{app_name}")
    def rules(app_name: str) -> JSONResponse:
        try:
            return JSONResponse(service.rules_of(app_name))
        except SessionError as exc:
            fail(404, exc)

    @app.get("/report/{decision_id}")
    def report(decision_id: str) -> JSONResponse:
        try:
            return JSONResponse(service.report(decision_id))
        except SessionError as exc:
            fail(404, exc)

    return app
