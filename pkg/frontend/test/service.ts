/** Spawn a real install service for the duration of a test file. */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface LiveService {
  baseUrl: string;
  homePath: string;
  stop(): Promise<void>;
}

const READY_TRIES = 100;
const READY_DELAY_MS = 150;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function startService(): Promise<LiveService> {
  const dir = await mkdtemp(join(tmpdir(), "hgsuite-ui-"));
  const homePath = join(dir, "home.json");
  const port = 21000 + (process.pid % 20000);
  const baseUrl = `http://127.0.0.1:${port}`;

  const proc: ChildProcess = spawn(
    "python3",
    ["-m", "hgsuite.cli", "session", "serve", "--home", homePath, "--listen", `127.0.0.1:${port}`],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let output = "";
  proc.stdout?.on("data", (chunk: Buffer) => (output += chunk.toString()));
  proc.stderr?.on("data", (chunk: Buffer) => (output += chunk.toString()));
  const exited = new Promise<void>((resolve) => proc.on("exit", () => resolve()));

  for (let i = 0; i < READY_TRIES; i++) {
    if (proc.exitCode !== null) break;
    try {
      const res = await fetch(`${baseUrl}/home`);
      if (res.ok) {
        return {
          baseUrl,
          homePath,
          async stop() {
            proc.kill("SIGTERM");
            await exited;
            await rm(dir, { recursive: true, force: true });
          },
        };
      }
    } catch {
      // not listening yet
    }
    await sleep(READY_DELAY_MS);
  }
  proc.kill("SIGKILL");
  await rm(dir, { recursive: true, force: true });
  throw new Error(`service did not come up on ${baseUrl}\n${output}`);
}
