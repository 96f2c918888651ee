import { writeFileSync } from "node:fs";
import { join, resolve } from "node:path";
import { parseArgs } from "node:util";
import { fileURLToPath } from "node:url";

import { SchemaError } from "./csv.js";
import { loadBundle } from "./manifest.js";
import { renderFigure } from "./svg.js";

const USAGE = `usage: paofed-plots [--out FILE] [--no-band] [--width N] [--height N] BUNDLE_DIR...

Renders each bundle directory (manifest.json plus curve CSVs, as written by
"paofed run" or "paofed figures") to an SVG learning-curve figure. The image
goes next to the manifest, named after the figure, unless --out is given
(single bundle only).`;

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string" },
        "no-band": { type: "boolean", default: false },
        width: { type: "string" },
        height: { type: "string" },
        help: { type: "boolean", short: "h", default: false },
      },
    });
  } catch (e) {
    console.error((e as Error).message);
    console.error(USAGE);
    return 2;
  }
  if (args.values.help) {
    console.log(USAGE);
    return 0;
  }
  const dirs = args.positionals;
  if (dirs.length === 0) {
    console.error("no bundle directories given");
    console.error(USAGE);
    return 2;
  }
  if (args.values.out !== undefined && dirs.length > 1) {
    console.error("--out only makes sense with a single bundle directory");
    return 2;
  }

  for (const dir of dirs) {
    let bundle;
    try {
      bundle = loadBundle(dir);
    } catch (e) {
      if (e instanceof SchemaError) {
        console.error(e.message);
        return 1;
      }
      throw e;
    }
    const svg = renderFigure(bundle.curves, {
      title: bundle.title || undefined,
      band: !args.values["no-band"],
      floorDb: bundle.floorDb,
      width: args.values.width ? Number(args.values.width) : undefined,
      height: args.values.height ? Number(args.values.height) : undefined,
    });
    const out = args.values.out ?? join(dir, `${bundle.name}.svg`);
    writeFileSync(out, svg);
    console.log(`wrote ${out} (${bundle.curves.length} curves)`);
  }
  return 0;
}

const entry = process.argv[1] ? resolve(process.argv[1]) : "";
if (entry && fileURLToPath(import.meta.url) === entry) {
  process.exit(main(process.argv.slice(2)));
}
