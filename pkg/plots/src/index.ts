export { CURVE_COLUMNS, SchemaError, parseCurveCsv } from "./csv.js";
export type { CurveColumn, CurveTable } from "./csv.js";
export { loadBundle } from "./manifest.js";
export type { Bundle, Curve } from "./manifest.js";
export { renderFigure } from "./svg.js";
export type { RenderOptions } from "./svg.js";
export { main } from "./cli.js";
