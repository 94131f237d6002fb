#!/usr/bin/env node
/** render --kind raster|coverage|energy|alpha|loss --in <file> --out <image.svg>
 *
 * Writes the figure to --out and a sidecar CSV of exactly the plotted values
 * next to it (<out without extension>.data.csv). Deterministic: identical
 * inputs produce identical bytes. Exit codes: 0 success, 2 invalid input,
 * 1 runtime failure.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, extname } from "node:path";

import type { Rendered } from "./charts.js";
import {
  renderAlpha,
  renderCoverage,
  renderEnergy,
  renderLoss,
  renderRaster,
} from "./charts.js";
import { SchemaError, readAlpha, readEnergyReports, readHistogram, readLoss, readRaster } from "./io.js";

export const KINDS = ["raster", "coverage", "energy", "alpha", "loss"] as const;
export type Kind = (typeof KINDS)[number];

export function sidecarPath(outPath: string): string {
  const ext = extname(outPath);
  const stem = ext ? outPath.slice(0, -ext.length) : outPath;
  return `${stem}.data.csv`;
}

export function renderKind(kind: Kind, inPath: string): Rendered {
  switch (kind) {
    case "raster":
      return renderRaster(readRaster(inPath));
    case "coverage":
      return renderCoverage(readHistogram(inPath));
    case "energy":
      return renderEnergy(readEnergyReports(inPath));
    case "alpha":
      return renderAlpha(readAlpha(inPath));
    case "loss":
      return renderLoss(readLoss(inPath));
  }
}

interface Args {
  kind: Kind;
  inPath: string;
  outPath: string;
}

function parseArgs(argv: string[]): Args {
  const values = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new SchemaError("args", `expected --flag value pairs, got ${argv.join(" ")}`);
    }
    values.set(flag.slice(2), value);
  }
  const kind = values.get("kind");
  const inPath = values.get("in");
  const outPath = values.get("out");
  if (!kind || !(KINDS as readonly string[]).includes(kind)) {
    throw new SchemaError("kind", `--kind must be one of ${KINDS.join("|")}, got ${kind}`);
  }
  if (!inPath) {
    throw new SchemaError("in", "--in is required");
  }
  if (!outPath) {
    throw new SchemaError("out", "--out is required");
  }
  return { kind: kind as Kind, inPath, outPath };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }
  try {
    const rendered = renderKind(args.kind, args.inPath);
    mkdirSync(dirname(args.outPath), { recursive: true });
    writeFileSync(args.outPath, rendered.svg);
    writeFileSync(sidecarPath(args.outPath), rendered.sidecar);
    process.stdout.write(`wrote ${args.outPath} and ${sidecarPath(args.outPath)}\n`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`invalid input: ${err.message}\n`);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`invalid input: ${(err as Error).message}\n`);
      return 2;
    }
    process.stderr.write(`runtime failure: ${(err as Error).message}\n`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
