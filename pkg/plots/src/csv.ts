import Papa from "papaparse";

/** Column contract of the curve CSVs written by the simulator CLI. */
export const CURVE_COLUMNS = [
  "iteration",
  "mse_db_mean",
  "mse_db_std",
  "uploads",
  "downloads",
] as const;

export type CurveColumn = (typeof CURVE_COLUMNS)[number];

export type CurveTable = Record<CurveColumn, number[]>;

export class SchemaError extends Error {}

/**
 * Parse one curve CSV and check it against the column contract.
 *
 * Any deviation raises a SchemaError naming the offending column; `source`
 * is prepended to messages so callers can pass the file path.
 */
export function parseCurveCsv(text: string, source: string): CurveTable {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  for (const required of CURVE_COLUMNS) {
    if (!fields.includes(required)) {
      throw new SchemaError(`${source}: missing column "${required}"`);
    }
  }
  for (const field of fields) {
    if (!(CURVE_COLUMNS as readonly string[]).includes(field)) {
      throw new SchemaError(`${source}: unexpected column "${field}"`);
    }
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${source}: no data rows`);
  }

  const table: CurveTable = {
    iteration: [],
    mse_db_mean: [],
    mse_db_std: [],
    uploads: [],
    downloads: [],
  };
  parsed.data.forEach((row, i) => {
    for (const column of CURVE_COLUMNS) {
      const cell = row[column];
      const value = cell === undefined || cell === "" ? NaN : Number(cell);
      if (!Number.isFinite(value)) {
        throw new SchemaError(
          `${source}: column "${column}" row ${i + 1}: not a number: ${JSON.stringify(cell ?? "")}`,
        );
      }
      table[column].push(value);
    }
  });
  return table;
}
