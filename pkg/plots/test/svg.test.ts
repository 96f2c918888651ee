import { expect, test } from "vitest";

import type { Curve } from "../src/manifest.js";
import { renderFigure } from "../src/svg.js";

function curve(label: string, mean: number[], std?: number[]): Curve {
  return {
    label,
    iterations: mean.map((_, i) => i * 10),
    mean,
    std: std ?? mean.map(() => 0.2),
  };
}

const count = (svg: string, re: RegExp) => (svg.match(re) ?? []).length;

test("one path and one legend entry per curve", () => {
  const svg = renderFigure(
    [curve("PAO-Fed-U1", [-1, -5, -9]), curve("Online-FedSGD", [-1, -4, -8])],
    { title: "comparison" },
  );
  expect(count(svg, /class="curve"/g)).toBe(2);
  expect(count(svg, /class="legend-label"/g)).toBe(2);
  expect(svg).toContain(">PAO-Fed-U1</text>");
  expect(svg).toContain(">comparison</text>");
});

test("band can be turned off", () => {
  const curves = [curve("a", [-1, -2, -3])];
  expect(count(renderFigure(curves), /class="band"/g)).toBe(1);
  expect(count(renderFigure(curves, { band: false }), /class="band"/g)).toBe(0);
});

test("floored values do not stretch the axis", () => {
  const svg = renderFigure(
    [curve("exact-fit", [-3, -400.0, -6], [0, 0, 0]), curve("other", [-2, -4, -5])],
    { floorDb: -400.0 },
  );
  const tickValues = [...svg.matchAll(/class="tick-label"[^>]*>([^<]+)</g)].map((m) =>
    Number(m[1]),
  );
  expect(Math.min(...tickValues)).toBeGreaterThan(-50);
});

test("labels are xml-escaped", () => {
  const svg = renderFigure([curve('m<32> & "friends"', [-1, -2])]);
  expect(svg).toContain("m&lt;32&gt; &amp; &quot;friends&quot;");
  expect(svg).not.toContain('data-label="m<32>');
});

test("no curves is an error", () => {
  expect(() => renderFigure([])).toThrowError(/no curves/);
});

test("single-point curve still renders", () => {
  const svg = renderFigure([
    { label: "dot", iterations: [0], mean: [-3], std: [0.1] },
  ]);
  expect(count(svg, /class="curve"/g)).toBe(1);
});
