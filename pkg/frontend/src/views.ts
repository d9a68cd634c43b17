/** HTML-string views.  Every function is a pure map from service responses
 *  to markup; nothing in here talks to the network or keeps state. */

import { ApiError, NetworkError } from "./client.js";
import type {
  DecisionAck,
  Finding,
  FindingKind,
  HomeSummary,
  RuleIndex,
  StageError,
  ThreatReport,
  WitnessValue,
} from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#039;");
}

export interface KindBadge {
  /** Short human name shown on the badge. */
  label: string;
  /** CSS tone class; doubles as the visual distinction between kinds. */
  tone: string;
  /** One-line template explaining what this kind of finding means. */
  blurb: string;
}

export const KIND_BADGES: Record<FindingKind, KindBadge> = {
  AR: {
    label: "action race",
    tone: "tone-red",
    blurb: "Both rules can fire on the same event and send contradictory commands to one device.",
  },
  GC: {
    label: "goal conflict",
    tone: "tone-orange",
    blurb: "Two reachable actions push the same goal feature in opposite directions.",
  },
  CT: {
    label: "covert trigger",
    tone: "tone-purple",
    blurb: "One rule's action fires the other rule's trigger without the owner asking for it.",
  },
  SD: {
    label: "undone action",
    tone: "tone-brown",
    blurb: "The covertly triggered rule immediately reverses what the first rule just did.",
  },
  LT: {
    label: "trigger loop",
    tone: "tone-magenta",
    blurb: "The two rules covertly trigger each other back and forth with opposing actions.",
  },
  EC: {
    label: "condition enabled",
    tone: "tone-blue",
    blurb: "One rule's effect can make the other rule's condition become satisfiable.",
  },
  DC: {
    label: "condition disabled",
    tone: "tone-slate",
    blurb: "One rule's effect makes the other rule's condition unsatisfiable, silently disarming it.",
  },
  CHAIN: {
    label: "covert chain",
    tone: "tone-black",
    blurb: "Several rules chain into an implicit rule none of the installed apps declares on its own.",
  },
  INDETERMINATE: {
    label: "verdict unknown",
    tone: "tone-gray",
    blurb: "The check hit its solver budget; this pair is unresolved, not known to be clean.",
  },
};

const WITNESS_TAILS: Record<FindingKind, string> = {
  AR: "both rules fire",
  GC: "both actions are reachable",
  CT: "the triggered rule's condition holds",
  SD: "the undoing rule fires back",
  LT: "the loop closes",
  EC: "the enabled condition holds",
  DC: "the condition can no longer hold",
  CHAIN: "every hop's condition holds",
  INDETERMINATE: "the verdict is unknown",
};

function witnessPhrase(key: string, value: WitnessValue): string | null {
  const pretty = typeof value === "string" ? value : String(value);
  const env = /^env::(.+)$/.exec(key);
  if (env) return `the ${env[1]} is ${pretty}`;
  const dev = /^dev::([0-9a-f]{32})::(.+)$/.exec(key);
  if (dev) {
    const [, id, attr] = dev;
    if (attr === "weather") return `it is ${pretty}`;
    return `the ${attr} of device ${id!.slice(0, 8)} is ${pretty}`;
  }
  return null; // rule-scoped solver variable; the explanation already shows it
}

/** Turn a witness assignment into plain words, e.g. "when it is raining and
 *  the temperature is 31, both rules fire". */
export function verbalizeWitness(
  witness: Record<string, WitnessValue> | null,
  kind: FindingKind,
): string {
  if (witness === null) return "";
  const phrases = Object.keys(witness)
    .sort((a, b) => {
      const rank = (k: string) => (k.startsWith("env::") ? 0 : 1);
      return rank(a) - rank(b) || a.localeCompare(b);
    })
    .map((key) => witnessPhrase(key, witness[key]!))
    .filter((p): p is string => p !== null);
  const tail = WITNESS_TAILS[kind];
  if (phrases.length === 0) return `in every scenario, ${tail}`;
  const list =
    phrases.length === 1
      ? phrases[0]!
      : `${phrases.slice(0, -1).join(", ")} and ${phrases[phrases.length - 1]!}`;
  return `when ${list}, ${tail}`;
}

/** Insert soft line breaks so WHEN / IF / THEN read as three clauses. */
function clauseMarkup(rendered: string): string {
  return escapeHtml(rendered)
    .replace(/ IF /g, "<br>IF ")
    .replace(/ THEN /g, "<br>THEN ");
}

const NEW_RULE_ANCHOR = (i: number) => `rule-new-${i + 1}`;
const NEW_GROUP_ANCHOR = "rules-new";

function ruleCards(report: ThreatReport): string {
  const app = escapeHtml(report.app ?? "");
  const cards = report.renderedRules
    .map(
      (text, i) => `<article class="card rule" data-card="rule" id="${NEW_RULE_ANCHOR(i)}">
  <header>${app}.Rule${i + 1} <span class="chip">this install</span></header>
  <code class="rule-text">${clauseMarkup(text)}</code>
</article>`,
    )
    .join("\n");
  return `<section id="${NEW_GROUP_ANCHOR}" class="rules">\n${cards}\n</section>`;
}

interface SideRef {
  /** Markup naming one rule of the pair, linked when a card exists for it. */
  html: string;
  /** Rendered text of an installed counterpart, shown inline. */
  inline: string | null;
}

function sideRef(id: string, report: ThreatReport, index: RuleIndex): SideRef {
  const known = index.get(id);
  if (known) {
    return {
      html: `<span class="ref installed">${escapeHtml(known.label)}</span>`,
      inline: known.text,
    };
  }
  const app = escapeHtml(report.app ?? "");
  const single = report.renderedRules.length === 1;
  const anchor = single ? NEW_RULE_ANCHOR(0) : NEW_GROUP_ANCHOR;
  const label = single ? `${app}.Rule1` : `${app} (new rules)`;
  return { html: `<a class="ref new" href="#${anchor}">${label}</a>`, inline: null };
}

function findingCard(
  finding: Finding,
  i: number,
  report: ThreatReport,
  index: RuleIndex,
): string {
  const badge = KIND_BADGES[finding.kind];
  const ordered = finding.direction ?? finding.rules;
  const sides = ordered.map((id) => sideRef(id, report, index));
  const joiner = finding.direction ? " &rarr; " : " &harr; ";
  const refs = sides.map((s) => s.html).join(joiner);
  const counterparts = sides
    .filter((s) => s.inline !== null)
    .map((s) => `<code class="rule-text counterpart">${clauseMarkup(s.inline!)}</code>`)
    .join("\n");
  const channel = finding.channel
    ? `<span class="chip channel">${escapeHtml(finding.channel)}</span>`
    : "";
  const witness = verbalizeWitness(finding.witness, finding.kind);
  const witnessLine = witness
    ? `<p class="witness">${escapeHtml(witness)}</p>`
    : "";
  return `<article class="card finding ${badge.tone}" data-card="finding" data-kind="${finding.kind}" id="finding-${i + 1}">
  <header><span class="badge ${badge.tone}">${badge.label}</span> <span class="kind">${finding.kind}</span> ${channel}</header>
  <p class="blurb">${badge.blurb}</p>
  <p class="refs">${refs}</p>
  ${counterparts}
  <p class="explanation">${escapeHtml(finding.explanation)}</p>
  ${witnessLine}
</article>`;
}

function errorItem(err: StageError): string {
  const where =
    err.line !== undefined ? ` at line ${err.line}, col ${err.col ?? "?"}` : "";
  const pair = err.pair ? ` (${err.pair.map(escapeHtml).join(" / ")})` : "";
  return `<li class="error" data-stage="${escapeHtml(err.stage)}"><strong>${escapeHtml(err.stage)}</strong>: ${escapeHtml(err.code)}${where} &mdash; ${escapeHtml(err.message)}${pair}</li>`;
}

function decisionControls(report: ThreatReport): string {
  if (report.decisionId === null) return "";
  const id = escapeHtml(report.decisionId);
  return `<div class="decision-controls" data-decision-id="${id}">
  <button data-action="keep" data-decision-id="${id}">Keep: install and allow these findings</button>
  <button data-action="reject" data-decision-id="${id}">Reject: leave the home unchanged</button>
</div>`;
}

/** The install-review page: rule cards for the new app, one card per
 *  finding/chain, staged errors, and the keep/reject controls. */
export function reportView(report: ThreatReport, index: RuleIndex): string {
  const title = report.app
    ? `Installing ${escapeHtml(report.app)}`
    : "Install failed";
  const errors = report.errors.length
    ? `<ul class="errors">\n${report.errors.map(errorItem).join("\n")}\n</ul>`
    : "";
  const all = [...report.findings, ...report.chains];
  const cards = all.map((f, i) => findingCard(f, i, report, index)).join("\n");
  const clean =
    all.length === 0 && report.errors.length === 0
      ? `<div class="banner ok" data-banner="clean">No interference found. This app does not interact with anything already installed.</div>`
      : "";
  const findingsSection = all.length
    ? `<section class="findings">\n${cards}\n</section>`
    : "";
  return `<section class="report" data-view="report">
<h2>${title}</h2>
${errors}
${report.renderedRules.length ? ruleCards(report) : ""}
${clean}
${findingsSection}
${decisionControls(report)}
</section>`;
}

/** Home overview: installed apps with their rules, the Allowed ledger, and
 *  any decisions still waiting. */
export function homeView(summary: HomeSummary): string {
  const apps = Object.entries(summary.apps)
    .map(
      ([name, entry]) => `<article class="card app" data-card="app">
  <header>${escapeHtml(name)} <span class="chip">#${entry.seq}</span></header>
  ${entry.rules.map((r) => `<code class="rule-text">${clauseMarkup(r)}</code>`).join("\n")}
</article>`,
    )
    .join("\n");
  const ledger = summary.allowed
    .map(
      (p) =>
        `<li><span class="kind">${escapeHtml(p.kind)}</span> <code>${escapeHtml(p.ruleA)}</code> / <code>${escapeHtml(p.ruleB)}</code></li>`,
    )
    .join("\n");
  const pending = summary.pendingDecisionIds
    .map((id) => `<code>${escapeHtml(id)}</code>`)
    .join(", ");
  return `<section class="home" data-view="home">
<h2>This home</h2>
${apps || '<p class="empty">No apps installed yet.</p>'}
<h3>Allowed ledger <span class="chip" data-ledger-count="${summary.allowed.length}">${summary.allowed.length}</span></h3>
<ul class="ledger">${ledger}</ul>
${pending ? `<p class="pending">Awaiting decision: ${pending}</p>` : ""}
</section>`;
}

export function decisionView(ack: DecisionAck): string {
  if (ack.status === "kept") {
    return `<section class="decision kept" data-view="decision">
<h2>${escapeHtml(ack.app)} installed</h2>
<p>The Allowed ledger now holds <strong data-ledger-count="${ack.allowedCount}">${ack.allowedCount}</strong> pair(s); they will not be reported again.</p>
</section>`;
  }
  return `<section class="decision rejected" data-view="decision">
<h2>${escapeHtml(ack.app)} not installed</h2>
<p>Installation rolled back; the home is exactly as it was before.</p>
</section>`;
}

export function sessionExpiredView(decisionId: string): string {
  return `<section class="expired" data-view="expired">
<h2>Session expired</h2>
<p>Decision <code>${escapeHtml(decisionId)}</code> is no longer pending. Re-run the install to get a fresh report.</p>
</section>`;
}

/** Inline failure panel; network failures get a retry affordance because
 *  nothing was committed on the server. */
export function errorView(err: unknown): string {
  if (err instanceof NetworkError) {
    return `<section class="failure network" data-view="failure">
<p>The service is unreachable. Nothing was changed.</p>
<button data-action="retry">Retry</button>
</section>`;
  }
  if (err instanceof ApiError) {
    return `<section class="failure api" data-view="failure">
<p><strong>${escapeHtml(err.code)}</strong> (${err.status}): ${escapeHtml(err.message)}</p>
</section>`;
  }
  return `<section class="failure" data-view="failure"><p>${escapeHtml(String(err))}</p></section>`;
}

/** Install form; prefilled after a reject so the owner can adjust the
 *  configuration and try again. */
export function installFormView(prefill: { appSource?: string; configUri?: string } = {}): string {
  return `<form class="install" data-view="install-form">
<label>App source
<textarea name="appSource" rows="14" spellcheck="false">${escapeHtml(prefill.appSource ?? "")}</textarea>
</label>
<label>Configuration URI
<input name="configUri" type="text" value="${escapeHtml(prefill.configUri ?? "")}" placeholder="http://hub/appname:MyApp/dev1:&lt;32-hex&gt;/limit:30">
</label>
<button type="submit" data-action="install">Analyze install</button>
</form>`;
}
