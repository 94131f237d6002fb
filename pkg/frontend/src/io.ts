/** Parsers for the primary component's output files, with schema checks. */

import { readFileSync } from "node:fs";
import { z } from "zod";

import { SchemaError, parseInteger, parseNumber } from "./canon.js";

export { SchemaError };

/** Simple comma-split rows; the upstream formats never quote or escape. */
export function readCsv(path: string, expectedHeader: string[]): string[][] {
  const text = readFileSync(path, "utf8");
  const lines = text
    .split("\n")
    .map((line) => (line.endsWith("\r") ? line.slice(0, -1) : line))
    .filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("header", `${path} is empty`);
  }
  const header = lines[0].split(",");
  if (header.join(",") !== expectedHeader.join(",")) {
    throw new SchemaError(
      "header",
      `expected ${expectedHeader.join(",")}, got ${lines[0]}`,
    );
  }
  return lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== expectedHeader.length) {
      throw new SchemaError(
        `row ${i + 2}`,
        `expected ${expectedHeader.length} cells, got ${cells.length}`,
      );
    }
    return cells;
  });
}

function parseJsonWith<T>(schema: z.ZodType<T>, path: string): T {
  let doc: unknown;
  try {
    doc = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaError("json", `${path}: ${(err as Error).message}`);
  }
  const result = schema.safeParse(doc);
  if (!result.success) {
    const issue = result.error.issues[0];
    const where = issue.path.length ? issue.path.join(".") : "document";
    throw new SchemaError(where, issue.message);
  }
  return result.data;
}

// histogram.json: {"T": 4, "counts": [16 bins]}
const histogramSchema = z
  .object({ T: z.number().int().positive(), counts: z.array(z.number().int().nonnegative()) })
  .superRefine((doc, ctx) => {
    if (doc.counts.length !== 2 ** doc.T) {
      ctx.addIssue({
        code: z.ZodIssueCode.custom,
        path: ["counts"],
        message: `expected ${2 ** doc.T} bins for T=${doc.T}, got ${doc.counts.length}`,
      });
    }
  });

export type Histogram = z.infer<typeof histogramSchema>;

export function readHistogram(path: string): Histogram {
  return parseJsonWith(histogramSchema, path);
}

// energy.json: a single report or a {reports: [...], ratio} compare document
const energyReportSchema = z.object({
  variant: z.string(),
  shape: z.array(z.number().int().positive()),
  mul: z.number().int().nonnegative(),
  ac: z.number().int().nonnegative(),
  energy_joules: z.number().nonnegative(),
  ratio_vs_baseline: z.number().nullable(),
});
const energyDocSchema = z.union([
  z.object({ reports: z.array(energyReportSchema).min(1), ratio: z.number().nullable() }),
  energyReportSchema,
]);

export type EnergyReport = z.infer<typeof energyReportSchema>;

export function readEnergyReports(path: string): EnergyReport[] {
  const doc = parseJsonWith(energyDocSchema, path);
  return "reports" in doc ? doc.reports : [doc];
}

export interface RasterRow {
  neuronId: number;
  t: number;
  spike: number;
}

export function readRaster(path: string): RasterRow[] {
  return readCsv(path, ["neuron_id", "t", "spike"]).map((cells, i) => {
    const where = `raster row ${i + 2}`;
    const spike = parseInteger(cells[2], where);
    if (spike !== 0 && spike !== 1) {
      throw new SchemaError(where, `spike must be 0 or 1, got ${cells[2]}`);
    }
    return {
      neuronId: parseInteger(cells[0], where),
      t: parseInteger(cells[1], where),
      spike,
    };
  });
}

export interface AlphaRow {
  round: number;
  t: number;
  alpha: number;
}

export function readAlpha(path: string): AlphaRow[] {
  return readCsv(path, ["round", "t", "alpha"]).map((cells, i) => {
    const where = `alpha row ${i + 2}`;
    const alpha = parseNumber(cells[2], where);
    if (alpha < 0 || alpha > 1) {
      throw new SchemaError(where, `alpha must be in [0, 1], got ${cells[2]}`);
    }
    return { round: parseInteger(cells[0], where), t: parseInteger(cells[1], where), alpha };
  });
}

export interface LossRow {
  step: number;
  variant: string;
  loss: number;
}

export function readLoss(path: string): LossRow[] {
  return readCsv(path, ["step", "variant", "loss"]).map((cells, i) => {
    const where = `loss row ${i + 2}`;
    return {
      step: parseInteger(cells[0], where),
      variant: cells[1],
      loss: parseNumber(cells[2], where),
    };
  });
}
