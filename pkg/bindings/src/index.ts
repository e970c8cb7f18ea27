/**
 * Thin wrapper around the gmmsearch CLI for callers that hold their data in
 * memory. Arrays are serialized with shortest-round-trip decimals, so the
 * engine sees bit-identical doubles; results come back from the CLI's
 * stable file formats (labels CSV, model JSON, dendrogram JSON).
 *
 * The engine binary defaults to `gmmsearch` on PATH and can be overridden
 * via the GMMSEARCH_CLI environment variable (e.g. "python3 -m
 * gmmsearch.cli").
 */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

export const AFFINITIES = ["l2", "l1", "cosine", "none"] as const;
export const LINKAGES = ["ward", "complete", "average", "single"] as const;
export const CONSTRAINTS = ["spherical", "diag", "tied", "full"] as const;
export const CRITERIA = ["bic", "aic"] as const;

export type Affinity = (typeof AFFINITIES)[number];
export type Linkage = (typeof LINKAGES)[number];
export type Constraint = (typeof CONSTRAINTS)[number];
export type Criterion = (typeof CRITERIA)[number];

/** Caller passed invalid data or configuration (engine exit code 1). */
export class InputError extends Error {}

/** Every candidate in the search grid failed (engine exit code 2). */
export class SearchError extends Error {}

export interface SearchOptions {
  kmin?: number;
  kmax?: number;
  affinities?: Affinity[];
  linkages?: Linkage[];
  constraints?: Constraint[];
  criterion?: Criterion;
  subsetCap?: number;
  kmeansReps?: number;
  maxIter?: number;
  tol?: number;
  seed?: number;
  threads?: number;
}

export interface HfitOptions extends Omit<SearchOptions, "kmin" | "kmax"> {
  maxComponents?: number;
  minSplit?: number;
  maxDepth?: number;
}

/** Mirrors the engine's model JSON schema. */
export interface ModelRecord {
  criterion: string;
  criterion_value: number;
  k: number;
  d: number;
  n: number;
  constraint: string;
  reg_covar: number;
  init: { affinity: string | null; linkage: string | null };
  weights: number[];
  means: number[][];
  covariances: unknown;
  seed: number | null;
}

export interface FitOutcome {
  labels: number[];
  model: ModelRecord;
  /** one-line summary exactly as the engine printed it */
  summary: string;
}

export interface DendrogramRecord {
  depth: number;
  size: number;
  children: DendrogramRecord[];
  model: ModelRecord | null;
  leaf_reason: string | null;
}

export interface HfitOutcome {
  dendrogram: DendrogramRecord;
  /** cuts[d][i] = cluster of sample i when every branch stops at depth d */
  cuts: number[][];
  summary: string;
}

function validateMatrix(data: number[][]): void {
  if (!Array.isArray(data) || data.length < 2) {
    throw new InputError("need at least 2 samples");
  }
  const width = data[0]?.length ?? 0;
  if (width < 1) {
    throw new InputError("expected a 2-d sample matrix");
  }
  for (let i = 0; i < data.length; i++) {
    const row = data[i];
    if (!Array.isArray(row) || row.length !== width) {
      throw new InputError(`row ${i} has ${row?.length ?? 0} columns, expected ${width}`);
    }
    for (let j = 0; j < width; j++) {
      if (typeof row[j] !== "number" || !Number.isFinite(row[j])) {
        throw new InputError("data contains non-finite values");
      }
    }
  }
}

function oneOf<T extends string>(value: string, allowed: readonly T[], what: string): T {
  if (!(allowed as readonly string[]).includes(value)) {
    throw new InputError(`unknown ${what} '${value}'; choose from ${allowed.join(", ")}`);
  }
  return value as T;
}

function validateOptions(opts: SearchOptions): void {
  const kmin = opts.kmin ?? 2;
  const kmax = opts.kmax ?? 20;
  if (!(kmin >= 1 && kmin <= kmax)) {
    throw new InputError("need 1 <= kmin <= kmax");
  }
  const affinities = opts.affinities ?? [...AFFINITIES];
  const linkages = opts.linkages ?? [...LINKAGES];
  affinities.forEach((a) => oneOf(a, AFFINITIES, "affinity"));
  linkages.forEach((l) => oneOf(l, LINKAGES, "linkage"));
  (opts.constraints ?? [...CONSTRAINTS]).forEach((c) => oneOf(c, CONSTRAINTS, "constraint"));
  if (opts.criterion !== undefined) {
    oneOf(opts.criterion, CRITERIA, "criterion");
  }
  const agglomerative = affinities.filter((a) => a !== "none");
  const usable = agglomerative.some((a) =>
    linkages.some((l) => l !== "ward" || a === "l2"),
  );
  if (!usable && !affinities.includes("none")) {
    throw new InputError("the affinity/linkage sets allow no initialization method");
  }
  if (opts.subsetCap !== undefined && opts.subsetCap < 1) {
    throw new InputError("subset_cap must be >= 1");
  }
  if (opts.kmeansReps !== undefined && opts.kmeansReps < 1) {
    throw new InputError("kmeans_reps must be >= 1");
  }
  if (opts.maxIter !== undefined && opts.maxIter < 1) {
    throw new InputError("max_iter must be >= 1");
  }
  if (opts.tol !== undefined && !(opts.tol > 0)) {
    throw new InputError("tol must be > 0");
  }
}

/** Shortest-round-trip CSV so the engine parses back identical doubles. */
export function toCsv(data: number[][]): string {
  return data.map((row) => row.map((v) => String(v)).join(",")).join("\n") + "\n";
}

function engineCommand(): string[] {
  const override = process.env.GMMSEARCH_CLI;
  if (override && override.trim()) {
    return override.trim().split(/\s+/);
  }
  return ["gmmsearch"];
}

function runEngine(args: string[], cwd: string): string {
  const [cmd, ...pre] = engineCommand();
  const result = spawnSync(cmd, [...pre, ...args], {
    cwd,
    encoding: "utf-8",
    timeout: 600_000,
    maxBuffer: 1 << 26,
  });
  if (result.error) {
    throw new Error(
      `cannot run the gmmsearch engine (${result.error.message}); ` +
        "install the Python package or set GMMSEARCH_CLI",
    );
  }
  if (result.status === 1) {
    throw new InputError(result.stderr.trim());
  }
  if (result.status === 2) {
    throw new SearchError(result.stderr.trim());
  }
  if (result.status !== 0) {
    throw new Error(`engine exited with ${result.status}: ${result.stderr}`);
  }
  return result.stdout;
}

function commonFlags(opts: SearchOptions): string[] {
  const flags: string[] = [];
  if (opts.affinities) flags.push("--affinities", opts.affinities.join(","));
  if (opts.linkages) flags.push("--linkages", opts.linkages.join(","));
  if (opts.constraints) flags.push("--constraints", opts.constraints.join(","));
  if (opts.criterion) flags.push("--criterion", opts.criterion);
  if (opts.subsetCap !== undefined) flags.push("--subset-cap", String(opts.subsetCap));
  if (opts.kmeansReps !== undefined) flags.push("--kmeans-reps", String(opts.kmeansReps));
  if (opts.maxIter !== undefined) flags.push("--max-iter", String(opts.maxIter));
  if (opts.tol !== undefined) flags.push("--tol", String(opts.tol));
  if (opts.seed !== undefined) flags.push("--seed", String(opts.seed));
  if (opts.threads !== undefined) flags.push("--threads", String(opts.threads));
  return flags;
}

function withWorkdir<T>(fn: (dir: string) => T): T {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "gmmsearch-"));
  try {
    return fn(dir);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

function readLabels(file: string): number[] {
  return fs
    .readFileSync(file, "utf-8")
    .trim()
    .split("\n")
    .map((line) => Number.parseInt(line, 10));
}

/**
 * Grid-search a mixture model over an in-memory matrix.
 *
 * Equivalent to `gmmsearch fit` with the same seed: labels and criterion
 * value match a direct engine run on the same values exactly.
 */
export function fit(data: number[][], options: SearchOptions = {}): FitOutcome {
  validateMatrix(data);
  validateOptions(options);
  return withWorkdir((dir) => {
    const dataPath = path.join(dir, "data.csv");
    fs.writeFileSync(dataPath, toCsv(data));
    const flags = ["fit", dataPath, "--out-dir", dir];
    if (options.kmin !== undefined) flags.push("--kmin", String(options.kmin));
    if (options.kmax !== undefined) flags.push("--kmax", String(options.kmax));
    flags.push(...commonFlags(options));
    const stdout = runEngine(flags, dir);
    const labels = readLabels(path.join(dir, "labels.csv"));
    const model = JSON.parse(
      fs.readFileSync(path.join(dir, "model.json"), "utf-8"),
    ) as ModelRecord;
    return { labels, model, summary: stdout.trim().split("\n")[0] ?? "" };
  });
}

/**
 * Recursive search producing a dendrogram plus one flat cut per depth.
 */
export function hfit(data: number[][], options: HfitOptions = {}): HfitOutcome {
  validateMatrix(data);
  const { maxComponents, minSplit, maxDepth, ...rest } = options;
  if (maxComponents !== undefined && maxComponents < 2) {
    throw new InputError("need kmax >= 2 to ever split a node");
  }
  validateOptions(rest);
  return withWorkdir((dir) => {
    const dataPath = path.join(dir, "data.csv");
    fs.writeFileSync(dataPath, toCsv(data));
    const flags = ["hfit", dataPath, "--out-dir", dir];
    if (maxComponents !== undefined) flags.push("--max-components", String(maxComponents));
    if (minSplit !== undefined) flags.push("--min-split", String(minSplit));
    if (maxDepth !== undefined) flags.push("--max-depth", String(maxDepth));
    flags.push(...commonFlags(rest));
    const stdout = runEngine(flags, dir);
    const dendrogram = JSON.parse(
      fs.readFileSync(path.join(dir, "dendrogram.json"), "utf-8"),
    ) as DendrogramRecord;
    const rows = fs
      .readFileSync(path.join(dir, "cuts.csv"), "utf-8")
      .trim()
      .split("\n")
      .map((line) => line.split(",").map((v) => Number.parseInt(v, 10)));
    const depths = rows[0].length;
    const cuts = Array.from({ length: depths }, (_, d) => rows.map((row) => row[d]));
    return { dendrogram, cuts, summary: stdout.trim().split("\n")[0] ?? "" };
  });
}

/**
 * A pre-validated search configuration reusable across fits. Options are
 * checked at construction with the same rules (and failure modes) the
 * engine applies, so a bad config fails fast and identically.
 */
export class BoundSession {
  readonly options: Readonly<SearchOptions>;

  constructor(options: SearchOptions = {}) {
    validateOptions(options);
    this.options = Object.freeze({ ...options });
  }

  fit(data: number[][]): FitOutcome {
    return fit(data, this.options);
  }

  hfit(data: number[][], extra: Omit<HfitOptions, keyof SearchOptions> = {}): HfitOutcome {
    const { kmin: _kmin, kmax: _kmax, ...rest } = this.options;
    return hfit(data, { ...rest, ...extra });
  }
}

/** Adjusted Rand index of two labelings, computed by the engine. */
export function ari(a: number[], b: number[]): number {
  if (a.length !== b.length) {
    throw new InputError(`label vectors differ in length: ${a.length} vs ${b.length}`);
  }
  return withWorkdir((dir) => {
    const pa = path.join(dir, "a.csv");
    const pb = path.join(dir, "b.csv");
    fs.writeFileSync(pa, a.map((v) => String(v)).join("\n") + "\n");
    fs.writeFileSync(pb, b.map((v) => String(v)).join("\n") + "\n");
    return Number.parseFloat(runEngine(["ari", pa, pb], dir).trim());
  });
}
