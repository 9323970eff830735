/**
 * Bindings over the molforge CLI: instruction forging, output scoring and
 * chemistry utilities for the data workflows that consume the datasets.
 * No logic is reimplemented here; records, metrics and error text come
 * from the one underlying tool, so binding output is byte-equivalent to
 * what the CLI writes on the same inputs.
 */

import { join } from "node:path";
import { readFileSync, writeFileSync } from "node:fs";

import {
  ForgeCliError,
  readJsonl,
  runForge,
  toYaml,
  withTempDir,
  writeJsonl,
} from "./runner.js";

export { ForgeCliError } from "./runner.js";

/** Mirror of the instruction record JSONL schema. */
export interface BoundRecord {
  context: string | null;
  question: string;
  answer: string;
  task: string;
  provenance: Record<string, unknown>;
  seed: number;
}

export interface MoltextPair {
  smiles: string;
  description: string;
}

export interface EvalReport {
  tasks: Record<string, Record<string, unknown>>;
  n_predictions: number;
  n_queries: number;
  unmatched_predictions: number;
  config: Record<string, unknown>;
  footnotes: string[];
}

export interface Prediction {
  query_id: string;
  raw_text: string;
}

export type EvalQuery = Record<string, unknown> & {
  query_id: string;
  task: string;
};

interface StageManifest {
  name: string;
  in: number;
  out: number;
  skipped: Record<string, number>;
}

function runStage(stage: Record<string, unknown>, seed: number, outDir: string): {
  records: BoundRecord[];
  manifest: StageManifest;
} {
  const outputPath = join(outDir, "output.jsonl");
  const manifestPath = join(outDir, "manifest.json");
  const configPath = join(outDir, "config.yaml");
  const config = {
    seed,
    manifest: manifestPath,
    stages: [{ ...stage, output: outputPath }],
  };
  writeFileSync(configPath, toYaml(config) + "\n");
  runForge(["run", configPath]);
  const manifest = JSON.parse(readFileSync(manifestPath, "utf8"));
  return {
    records: readJsonl<BoundRecord>(outputPath),
    manifest: manifest.stages[0] as StageManifest,
  };
}

function raiseOnSkips(manifest: StageManifest): void {
  const reasons = Object.entries(manifest.skipped).filter(([, n]) => n > 0);
  if (reasons.length > 0) {
    const detail = reasons.map(([reason, n]) => `${reason}=${n}`).join(", ");
    throw new ForgeCliError(
      `${manifest.name} rejected ${reasons.reduce((s, [, n]) => s + n, 0)} ` +
        `record(s): ${detail}`,
      2,
    );
  }
}

/**
 * Validate SMILES through the tool so error text (UnclosedRing, ...) is the
 * primary implementation's own. One process for the happy path; on failure
 * a per-input pass finds the offender.
 */
function requireValidSmiles(smilesList: string[]): void {
  if (smilesList.length === 0) return;
  try {
    runForge(["inspect", "chem", "canon", ...smilesList]);
    return;
  } catch {
    for (const smiles of smilesList) {
      try {
        runForge(["inspect", "chem", "canon", smiles]);
      } catch (error) {
        const err = error as ForgeCliError;
        throw new ForgeCliError(`invalid SMILES ${JSON.stringify(smiles)}: ${err.message}`, 2);
      }
    }
  }
}

/**
 * Molecule-description pairs to describe-the-molecule records, identical
 * to running the CLI moltext stage over the same pairs as a JSONL file.
 * Order is preserved; any rejected pair raises instead of being skipped.
 */
export function bindForge(pairs: MoltextPair[], seed = 0): BoundRecord[] {
  requireValidSmiles(pairs.map((p) => p.smiles));
  return withTempDir((dir) => {
    const pairsPath = join(dir, "pairs.jsonl");
    writeJsonl(pairsPath, pairs);
    const { records, manifest } = runStage({ name: "moltext", pairs: pairsPath }, seed, dir);
    raiseOnSkips(manifest);
    return records;
  });
}

export interface PropertyTableInput {
  /** Property names in schema order (the TSV header after "smiles"). */
  schema: string[];
  /** SMILES -> property name -> value. */
  rows: Record<string, Record<string, number | boolean | string>>;
}

function writePropertyTsv(path: string, table: PropertyTableInput): void {
  const lines = ["smiles\t" + table.schema.join("\t")];
  for (const [smiles, row] of Object.entries(table.rows)) {
    const cells = table.schema.map((name) => {
      const value = row[name];
      return value === undefined ? "" : String(value);
    });
    lines.push(smiles + "\t" + cells.join("\t"));
  }
  writeFileSync(path, lines.join("\n") + "\n");
}

/** Property-function instruction records from an in-memory property table. */
export function bindForgeSynth(table: PropertyTableInput, seed = 0): BoundRecord[] {
  requireValidSmiles(Object.keys(table.rows));
  return withTempDir((dir) => {
    const propsPath = join(dir, "props.tsv");
    writePropertyTsv(propsPath, table);
    const { records, manifest } = runStage(
      { name: "synth", properties: propsPath },
      seed,
      dir,
    );
    raiseOnSkips(manifest);
    return records;
  });
}

/** Reverse design records (constraint question, molecule answer). */
export function bindForgeDesign(
  table: PropertyTableInput,
  objectives: string[],
  seed = 0,
): BoundRecord[] {
  requireValidSmiles(Object.keys(table.rows));
  return withTempDir((dir) => {
    const propsPath = join(dir, "props.tsv");
    writePropertyTsv(propsPath, table);
    const { records, manifest } = runStage(
      { name: "design", properties: propsPath, objectives },
      seed,
      dir,
    );
    raiseOnSkips(manifest);
    return records;
  });
}

/** Score predictions against queries; the report is the CLI's own JSON. */
export function bindEval(
  predictions: Prediction[],
  queries: EvalQuery[],
): EvalReport {
  return withTempDir((dir) => {
    const predictionsPath = join(dir, "predictions.jsonl");
    const queriesPath = join(dir, "queries.jsonl");
    const reportPath = join(dir, "report.json");
    writeJsonl(predictionsPath, predictions);
    writeJsonl(queriesPath, queries);
    runForge(["eval", predictionsPath, queriesPath, "--output", reportPath]);
    return JSON.parse(readFileSync(reportPath, "utf8")) as EvalReport;
  });
}

// ---------------------------------------------------------------------------
// chem utilities

/** Canonical SMILES for each input, in order. */
export function canonicalSmiles(smiles: string[]): string[] {
  if (smiles.length === 0) return [];
  const out = runForge(["inspect", "chem", "canon", ...smiles]);
  return out.trimEnd().split("\n");
}

export type DescriptorName =
  | "nRing"
  | "MaxRing"
  | "nRot"
  | "nRig"
  | "nHD"
  | "nHet"
  | "fChar";

/** Structural descriptor table for one molecule. */
export function descriptors(smiles: string): Record<DescriptorName, number> {
  const out = runForge(["inspect", "chem", "descriptors", smiles]);
  const fields = out.trim().split("\t")[1];
  const entries = fields.split(" ").map((pair) => {
    const [key, value] = pair.split("=");
    return [key, Number(value)] as const;
  });
  return Object.fromEntries(entries) as Record<DescriptorName, number>;
}

/** Morgan fingerprint popcount (radius/width as configured in the tool). */
export function fingerprintPopcount(
  smiles: string,
  radius = 2,
  width = 2048,
): number {
  const out = runForge([
    "inspect", "chem", "fp", smiles,
    "--radius", String(radius),
    "--width", String(width),
  ]);
  const match = out.match(/popcount=(\d+)/);
  if (!match) {
    throw new ForgeCliError(`unexpected fp output: ${out.trim()}`, 2);
  }
  return Number(match[1]);
}
