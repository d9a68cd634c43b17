/** The whole review flow against a live service: seed two apps, review a
 *  third, reject, re-install, keep.  UI assertions run on the rendered
 *  HTML strings; state assertions run on fresh service responses. */

import { afterAll, beforeAll, expect, test } from "vitest";

import { ApiError, NetworkError, ServiceClient } from "../src/client.js";
import type { HomeSummary, ThreatReport } from "../src/types.js";
import { errorView, reportView, sessionExpiredView } from "../src/views.js";
import { CATCH_LIVE_SHOW, COLD_DEFENDER, COMFORT_TV } from "./fixtures.js";
import { startService, type LiveService } from "./service.js";

let service: LiveService;
let client: ServiceClient;

beforeAll(async () => {
  service = await startService();
  client = new ServiceClient(service.baseUrl);
});

afterAll(async () => {
  await service?.stop();
});

function count(html: string, needle: string): number {
  return html.split(needle).length - 1;
}

function everyAnchorResolves(html: string): void {
  for (const [, target] of html.matchAll(/href="#([^"]+)"/g)) {
    expect(html).toContain(`id="${target}"`);
  }
}

async function renderReport(report: ThreatReport): Promise<string> {
  return reportView(report, await client.ruleIndex());
}

test("a clean install on an empty home shows the no-interference banner", async () => {
  const report = await client.install({
    appSource: COMFORT_TV.source,
    configUri: COMFORT_TV.configUri,
  });
  expect(report.errors).toEqual([]);
  expect(report.findings).toEqual([]);
  expect(report.chains).toEqual([]);
  expect(report.renderedRules).toHaveLength(1);

  const html = await renderReport(report);
  expect(count(html, 'data-card="rule"')).toBe(1);
  expect(count(html, 'data-card="finding"')).toBe(0);
  expect(html).toContain('data-banner="clean"');

  await client.decide(report.decisionId!, "reject");
  const home = await client.home();
  expect(home.apps).toEqual({});
  expect(home.allowed).toEqual([]);
});

test("seeding ColdDefender then CatchLiveShow populates the Allowed ledger", async () => {
  const first = await client.install({
    appSource: COLD_DEFENDER.source,
    configUri: COLD_DEFENDER.configUri,
  });
  expect(first.findings).toEqual([]);
  const firstAck = await client.decide(first.decisionId!, "keep");
  expect(firstAck).toMatchObject({ status: "kept", app: "ColdDefender", allowedCount: 0 });

  const second = await client.install({
    appSource: CATCH_LIVE_SHOW.source,
    configUri: CATCH_LIVE_SHOW.configUri,
  });
  expect(second.findings.map((f) => f.kind)).toEqual(["CT"]);
  const secondAck = await client.decide(second.decisionId!, "keep");
  expect(secondAck).toMatchObject({ status: "kept", app: "CatchLiveShow", allowedCount: 1 });
});

let preInstall: HomeSummary;
let review: ThreatReport;

test("installing ComfortTV renders 1 rule card and 2 finding cards", async () => {
  preInstall = await client.home();
  expect(Object.keys(preInstall.apps).sort()).toEqual(["CatchLiveShow", "ColdDefender"]);

  review = await client.install({
    appSource: COMFORT_TV.source,
    configUri: COMFORT_TV.configUri,
  });
  expect(review.errors).toEqual([]);
  expect(review.findings.map((f) => f.kind).sort()).toEqual(["AR", "CT"]);

  const html = await renderReport(review);
  expect(count(html, 'data-card="rule"')).toBe(1);
  expect(count(html, 'data-card="finding"')).toBe(2);
  expect(html).toContain('data-kind="AR"');
  expect(html).toContain('data-kind="CT"');

  // each finding card names both sides and links to the new rule card
  expect(count(html, 'href="#rule-new-1"')).toBe(2);
  expect(html).toContain("ColdDefender.Rule1");
  expect(html).toContain("CatchLiveShow.Rule1");
  everyAnchorResolves(html);

  // the witness reads as a scenario in plain words
  expect(html).toContain("when the temperature is 31");
  expect(html).toContain("it is raining, both rules fire");

  // keep/reject controls carry the decision id
  expect(html).toContain(`data-decision-id="${review.decisionId}"`);
  expect(html).toContain('data-action="keep"');
  expect(html).toContain('data-action="reject"');
});

test("reject restores the pre-install home summary exactly", async () => {
  const ack = await client.decide(review.decisionId!, "reject");
  expect(ack).toMatchObject({ status: "rejected", app: "ComfortTV" });
  expect(await client.home()).toEqual(preInstall);
});

test("keep installs the app and grows the ledger by the kept findings", async () => {
  const before = (await client.home()).allowed.length;
  const again = await client.install({
    appSource: COMFORT_TV.source,
    configUri: COMFORT_TV.configUri,
  });
  expect(again.findings).toHaveLength(2);

  const ack = await client.decide(again.decisionId!, "keep");
  expect(ack.status).toBe("kept");
  expect(ack.allowedCount).toBe(before + 2);

  const home = await client.home();
  expect(home.allowed).toHaveLength(before + 2);
  expect(Object.keys(home.apps).sort()).toEqual(["CatchLiveShow", "ColdDefender", "ComfortTV"]);

  // the decision is one-shot: a second submit fails, though the report
  // itself stays readable for the rest of this service's lifetime
  await expect(client.decide(again.decisionId!, "keep")).rejects.toMatchObject({
    status: 404,
    code: "UnknownDecisionId",
  });
  expect((await client.report(again.decisionId!)).app).toBe("ComfortTV");

  // an id the service never issued gets the session-expired treatment
  let stale: unknown;
  try {
    await client.report("0123456789abcdef");
  } catch (err) {
    stale = err;
  }
  expect(stale).toBeInstanceOf(ApiError);
  expect((stale as ApiError).status).toBe(404);
  expect(sessionExpiredView("0123456789abcdef")).toContain("Session expired");
});

test("an unreachable service surfaces a retry affordance and changes nothing", async () => {
  const offline = new ServiceClient("http://127.0.0.1:9");
  let caught: unknown;
  try {
    await offline.decide("0".repeat(16), "keep");
  } catch (err) {
    caught = err;
  }
  expect(caught).toBeInstanceOf(NetworkError);
  expect(errorView(caught)).toContain('data-action="retry"');

  const home = await client.home();
  expect(Object.keys(home.apps)).toHaveLength(3);
});
