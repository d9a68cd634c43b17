/** Wire types for the hgsuite install service, mirrored field by field. */

export const FINDING_KINDS = [
  "AR",
  "GC",
  "CT",
  "SD",
  "LT",
  "EC",
  "DC",
  "CHAIN",
  "INDETERMINATE",
] as const;

export type FindingKind = (typeof FINDING_KINDS)[number];

export type WitnessValue = number | string;

export interface Finding {
  kind: FindingKind;
  /** Content-hashed rule ids, 16 hex chars each. */
  rules: string[];
  /** [src, dst] for directed kinds (CT, SD, EC, DC), null otherwise. */
  direction: [string, string] | null;
  /** Concrete scenario under which the interference happens; null for DC. */
  witness: Record<string, WitnessValue> | null;
  channel: string | null;
  explanation: string;
}

export interface StageError {
  stage: "config" | "parse" | "validate" | "extract" | "bind" | "detect";
  code: string;
  message: string;
  line?: number;
  col?: number;
  /** Rule labels of the pair that failed, detect stage only. */
  pair?: string[];
}

/** POST /install response (hgthreat/1). */
export interface ThreatReport {
  schema: "hgthreat/1";
  app: string | null;
  renderedRules: string[];
  findings: Finding[];
  chains: Finding[];
  errors: StageError[];
  decisionId: string | null;
  pendingDecisionIds: string[];
}

/** GET /home response (hgstate/1 summary). */
export interface HomeSummary {
  schema: "hgstate/1";
  apps: Record<string, { seq: number; rules: string[] }>;
  allowed: { ruleA: string; ruleB: string; kind: string }[];
  pendingDecisionIds: string[];
}

/** POST /decision response. */
export interface DecisionAck {
  status: "kept" | "rejected";
  app: string;
  allowedCount: number;
}

/** GET /rules/{app} response: the bound rule file plus rendered text. */
export interface RuleFile {
  schema: "hgrule/1";
  app: string;
  rules: { id: string }[];
  renderedRules: string[];
  binding?: {
    devices: Record<string, string>;
    values: Record<string, number | string | boolean>;
  };
}

export interface InstallRequest {
  appSource: string;
  configUri?: string;
  config?: {
    appName: string;
    deviceBindings: Record<string, string>;
    valueBindings: Record<string, number | string | boolean>;
  };
}

/** Where an already installed rule id lives, for cross-referencing cards. */
export interface RuleRef {
  app: string;
  label: string;
  text: string;
}

export type RuleIndex = Map<string, RuleRef>;
