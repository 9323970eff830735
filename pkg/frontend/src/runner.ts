/**
 * Process-level plumbing: every binding call goes through the `forge` CLI,
 * so there is exactly one implementation of the record formats and error
 * text. Set FORGE_BIN to point at a non-PATH installation.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export class ForgeCliError extends Error {
  readonly exitCode: number;

  constructor(message: string, exitCode: number) {
    super(message);
    this.name = "ForgeCliError";
    this.exitCode = exitCode;
  }
}

export function forgeBinary(): string {
  return process.env.FORGE_BIN ?? "forge";
}

/** Run the CLI; on failure throw the primary tool's stderr text verbatim. */
export function runForge(args: string[]): string {
  try {
    return execFileSync(forgeBinary(), args, {
      encoding: "utf8",
      maxBuffer: 1 << 28,
    });
  } catch (error) {
    const err = error as NodeJS.ErrnoException & {
      stderr?: string;
      status?: number | null;
    };
    if (err.code === "ENOENT") {
      throw new ForgeCliError(
        `forge binary not found (looked for ${forgeBinary()}); install the ` +
          "molforge package or set FORGE_BIN",
        127,
      );
    }
    const stderr = (err.stderr ?? "").trim();
    throw new ForgeCliError(stderr || String(err), err.status ?? 1);
  }
}

export function withTempDir<T>(body: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "molforge-bind-"));
  try {
    return body(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export function writeJsonl(path: string, records: unknown[]): void {
  writeFileSync(path, records.map((r) => JSON.stringify(r)).join("\n") + "\n");
}

export function readJsonl<T>(path: string): T[] {
  return readFileSync(path, "utf8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as T);
}

/** Minimal YAML emitter for the flat config trees the pipeline takes. */
export function toYaml(value: unknown, indent = 0): string {
  const pad = "  ".repeat(indent);
  if (Array.isArray(value)) {
    return value
      .map((item) => {
        const rendered = toYaml(item, indent + 1);
        if (typeof item === "object" && item !== null) {
          return `${pad}-\n${rendered}`;
        }
        return `${pad}- ${rendered.trim()}`;
      })
      .join("\n");
  }
  if (typeof value === "object" && value !== null) {
    return Object.entries(value as Record<string, unknown>)
      .map(([key, val]) => {
        if (typeof val === "object" && val !== null) {
          return `${pad}${key}:\n${toYaml(val, indent + 1)}`;
        }
        return `${pad}${key}: ${scalar(val)}`;
      })
      .join("\n");
  }
  return pad + scalar(value);
}

function scalar(value: unknown): string {
  if (typeof value === "string") {
    return JSON.stringify(value); // double-quoted strings are valid YAML
  }
  return String(value);
}
