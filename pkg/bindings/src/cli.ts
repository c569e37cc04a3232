/** Subprocess plumbing for the camprior CLI. */

import { spawnSync } from "node:child_process";
import { mkdirSync, mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Resolve the CLI launcher: CAMPRIOR_BIN overrides, `camprior` on PATH
 *  otherwise, falling back to `python3 -m camprior`. */
function launcher(): string[] {
  const env = process.env.CAMPRIOR_BIN;
  if (env && env.length > 0) return env.split(" ");
  const probe = spawnSync("camprior", ["--help"], { stdio: "ignore" });
  if (probe.status === 0) return ["camprior"];
  return ["python3", "-m", "camprior"];
}

let cachedLauncher: string[] | null = null;

export function runCli(args: string[]): string {
  if (cachedLauncher === null) cachedLauncher = launcher();
  const [cmd, ...prefix] = cachedLauncher;
  const proc = spawnSync(cmd, [...prefix, ...args], {
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.error) throw proc.error;
  if (proc.status !== 0) {
    const detail = (proc.stderr || "").trim().split("\n").pop() ?? "";
    throw new Error(`camprior exited ${proc.status}: ${detail}`);
  }
  return proc.stdout;
}

export function withTempDir<T>(fn: (dir: string) => T, keep?: string): T {
  if (keep) {
    mkdirSync(keep, { recursive: true });
    return fn(keep);
  }
  const dir = mkdtempSync(join(tmpdir(), "camprior-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
