/** Browser entry point.  Thin glue: every screen is rendered from a fresh
 *  service response by the pure views; this file only wires events. */

import { ApiError, NetworkError, ServiceClient } from "./client.js";
import {
  decisionView,
  errorView,
  homeView,
  installFormView,
  reportView,
  sessionExpiredView,
} from "./views.js";

const params = new URLSearchParams(location.search);
const client = new ServiceClient(params.get("service") ?? location.origin);
const root = document.getElementById("app")!;

interface LastInstall {
  appSource: string;
  configUri: string;
}

let lastInstall: LastInstall | null = null;
let retry: (() => Promise<void>) | null = null;

function render(...panels: string[]): void {
  root.innerHTML = panels.join("\n");
}

async function showHome(): Promise<void> {
  retry = showHome;
  render(installFormView(lastInstall ?? {}), homeView(await client.home()));
}

async function runInstall(appSource: string, configUri: string): Promise<void> {
  retry = () => runInstall(appSource, configUri);
  lastInstall = { appSource, configUri };
  const report = await client.install({ appSource, configUri });
  const index = await client.ruleIndex();
  render(reportView(report, index), homeView(await client.home()));
}

async function runDecision(decisionId: string, choice: "keep" | "reject"): Promise<void> {
  retry = () => runDecision(decisionId, choice);
  try {
    const ack = await client.decide(decisionId, choice);
    const prefill = choice === "reject" && lastInstall ? lastInstall : {};
    render(decisionView(ack), installFormView(prefill), homeView(await client.home()));
  } catch (err) {
    if (err instanceof ApiError && err.code === "UnknownDecisionId") {
      render(sessionExpiredView(decisionId), installFormView(lastInstall ?? {}));
      return;
    }
    throw err;
  }
}

function guard(task: Promise<void>): void {
  task.catch((err) => {
    if (err instanceof NetworkError) {
      render(errorView(err)); // retry button re-runs the failed step
    } else {
      render(errorView(err), installFormView(lastInstall ?? {}));
    }
  });
}

root.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  if (form.dataset["view"] !== "install-form") return;
  event.preventDefault();
  const data = new FormData(form);
  guard(runInstall(String(data.get("appSource") ?? ""), String(data.get("configUri") ?? "")));
});

root.addEventListener("click", (event) => {
  const button = (event.target as HTMLElement).closest<HTMLButtonElement>("button[data-action]");
  if (!button) return;
  const action = button.dataset["action"];
  if (action === "keep" || action === "reject") {
    // one-shot decision: disable both buttons before the request goes out
    for (const b of root.querySelectorAll<HTMLButtonElement>(".decision-controls button")) {
      b.disabled = true;
    }
    guard(runDecision(button.dataset["decisionId"]!, action));
  } else if (action === "retry" && retry) {
    guard(retry());
  }
});

guard(showHome());
