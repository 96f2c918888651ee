import { readFileSync } from "node:fs";
import { join } from "node:path";

import { CURVE_COLUMNS, SchemaError, parseCurveCsv } from "./csv.js";

export interface Curve {
  label: string;
  iterations: number[];
  mean: number[];
  std: number[];
}

export interface Bundle {
  name: string;
  title: string;
  floorDb: number;
  curves: Curve[];
}

function fail(source: string, message: string): never {
  throw new SchemaError(`${source}: ${message}`);
}

/**
 * Load a result bundle directory: manifest.json plus one CSV per curve.
 *
 * Curves come back in the manifest's curve_order. The manifest's column
 * list is checked against the CSV contract before any CSV is opened.
 */
export function loadBundle(dir: string): Bundle {
  const manifestPath = join(dir, "manifest.json");
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(manifestPath, "utf8"));
  } catch (e) {
    if (e instanceof SyntaxError) {
      fail(manifestPath, `not valid JSON (${e.message})`);
    }
    throw e;
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    fail(manifestPath, "top level must be an object");
  }
  const doc = raw as Record<string, unknown>;

  const columns = doc.columns;
  if (!Array.isArray(columns)) {
    fail(manifestPath, 'missing column list "columns"');
  }
  for (const required of CURVE_COLUMNS) {
    if (!columns.includes(required)) {
      fail(manifestPath, `missing column "${required}"`);
    }
  }

  const floorDb = doc.mse_db_floor;
  if (typeof floorDb !== "number") {
    fail(manifestPath, '"mse_db_floor" must be a number');
  }

  const order = doc.curve_order;
  const entries = doc.curves;
  if (!Array.isArray(order) || order.length === 0) {
    fail(manifestPath, '"curve_order" must be a non-empty list');
  }
  if (typeof entries !== "object" || entries === null) {
    fail(manifestPath, '"curves" must be an object');
  }

  const curves: Curve[] = order.map((label) => {
    if (typeof label !== "string") {
      fail(manifestPath, `curve_order entry ${JSON.stringify(label)} is not a string`);
    }
    const entry = (entries as Record<string, unknown>)[label];
    if (typeof entry !== "object" || entry === null) {
      fail(manifestPath, `curve "${label}" missing from "curves"`);
    }
    const file = (entry as Record<string, unknown>).file;
    if (typeof file !== "string") {
      fail(manifestPath, `curve "${label}": "file" must be a string`);
    }
    const csvPath = join(dir, file);
    let text: string;
    try {
      text = readFileSync(csvPath, "utf8");
    } catch {
      fail(manifestPath, `curve "${label}": cannot read ${csvPath}`);
    }
    const table = parseCurveCsv(text, csvPath);
    return {
      label,
      iterations: table.iteration,
      mean: table.mse_db_mean,
      std: table.mse_db_std,
    };
  });

  const figure = (doc.figure ?? {}) as Record<string, unknown>;
  return {
    name: typeof figure.name === "string" ? figure.name : "figure",
    title: typeof figure.title === "string" ? figure.title : "",
    floorDb,
    curves,
  };
}
