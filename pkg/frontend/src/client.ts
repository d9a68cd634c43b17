/** Typed fetch client for the install service.  No state lives here: every
 *  view is rendered from a fresh response. */

import type {
  DecisionAck,
  HomeSummary,
  InstallRequest,
  RuleFile,
  RuleIndex,
  ThreatReport,
} from "./types.js";

/** The service answered with a non-2xx status. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The service could not be reached at all (offline, wrong port, ...). */
export class NetworkError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "NetworkError";
  }
}

interface ErrorBody {
  detail?: { code?: string; message?: string };
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new NetworkError(`cannot reach ${this.baseUrl}: ${String(err)}`);
    }
    if (!res.ok) {
      let body: ErrorBody = {};
      try {
        body = (await res.json()) as ErrorBody;
      } catch {
        // non-JSON error body; fall through to the generic message
      }
      const code = body.detail?.code ?? `Http${res.status}`;
      const message = body.detail?.message ?? `${res.status} on ${path}`;
      throw new ApiError(res.status, code, message);
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  install(req: InstallRequest): Promise<ThreatReport> {
    return this.post("/install", req);
  }

  decide(decisionId: string, choice: "keep" | "reject"): Promise<DecisionAck> {
    return this.post("/decision", { decisionId, choice });
  }

  home(): Promise<HomeSummary> {
    return this.request("/home");
  }

  rulesOf(app: string): Promise<RuleFile> {
    return this.request(`/rules/${encodeURIComponent(app)}`);
  }

  report(decisionId: string): Promise<ThreatReport> {
    return this.request(`/report/${encodeURIComponent(decisionId)}`);
  }

  /** Map every installed rule id to its app, label, and rendered text, so
   *  finding cards can name the other side of each pair. */
  async ruleIndex(): Promise<RuleIndex> {
    const index: RuleIndex = new Map();
    const home = await this.home();
    for (const app of Object.keys(home.apps)) {
      const file = await this.rulesOf(app);
      file.rules.forEach((rule, i) => {
        index.set(rule.id, {
          app,
          label: `${app}.Rule${i + 1}`,
          text: file.renderedRules[i] ?? "",
        });
      });
    }
    return index;
  }
}
