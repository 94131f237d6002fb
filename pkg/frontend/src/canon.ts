/** Canonical value formatting shared by every sidecar table. */

export class SchemaError extends Error {
  constructor(public field: string, message: string) {
    super(`field ${JSON.stringify(field)}: ${message}`);
  }
}

/** Shortest round-trip decimal form; integers print without a fraction. */
export function canonNumber(value: number): string {
  if (!Number.isFinite(value)) {
    throw new SchemaError("value", `non-finite value ${value} cannot be canonicalized`);
  }
  return String(value);
}

/** Parse a numeric CSV cell strictly (whole cell must be the number). */
export function parseNumber(cell: string, where: string): number {
  const trimmed = cell.trim();
  if (trimmed === "" || Number.isNaN(Number(trimmed))) {
    throw new SchemaError(where, `expected a number, got ${JSON.stringify(cell)}`);
  }
  return Number(trimmed);
}

export function parseInteger(cell: string, where: string): number {
  const value = parseNumber(cell, where);
  if (!Number.isInteger(value)) {
    throw new SchemaError(where, `expected an integer, got ${cell}`);
  }
  return value;
}
