/**
 * Parallel-coordinates contract tests against recorded service fixtures of a
 * full-scale bundle (109 solutions).  Rendered values must equal fixture
 * values; the client only rescales for screen space.
 */

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join } from "node:path";

import {
  applyBrushes,
  buildParallelCoordinates,
  INDEX_AXIS_KEY,
  objectiveAxes,
  renderSvg,
  robustnessAxes,
} from "../src/pcp.js";
import { objectiveSeries, robustnessSeries } from "../src/transform.js";
import { CriteriaResponse, Meta, Overview } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8")) as T;
}

const meta = fixture<Meta>("meta");
const overview = fixture<Overview>("overview_2periods");
const criteria = fixture<CriteriaResponse>("criteria_302030");

describe("objective parallel coordinates (two-period view)", () => {
  const series = objectiveSeries(overview.solutions!);
  const axes = objectiveAxes(meta.assortments, overview.periods, meta.scenario_ids.length);
  const model = buildParallelCoordinates(series, axes);

  it("renders 109 polylines over 18 objective axes", () => {
    expect(overview.solutions!.length).toBe(109);
    expect(axes.length).toBe(3 * 2 * 3);
    expect(model.polylines.length).toBe(109);
    const objectiveAxisModels = model.axes.filter((a) => !a.isIndex);
    expect(objectiveAxisModels.length).toBe(18);
  });

  it("keeps a right-most index axis tracking the solution number", () => {
    const last = model.axes[model.axes.length - 1];
    expect(last.key).toBe(INDEX_AXIS_KEY);
    expect(last.isIndex).toBe(true);
    expect(Math.max(...model.axes.map((a) => a.x))).toBe(last.x);
    const line42 = model.polylines.find((l) => l.id === 42)!;
    expect(line42.points[line42.points.length - 1].value).toBe(42);
  });

  it("plots exactly the fixture deviations, unrecomputed", () => {
    for (const sol of overview.solutions!) {
      const line = model.polylines.find((l) => l.id === sol.id)!;
      for (const v of sol.values) {
        const key = `d:${v.assortment}:${v.period}:${v.scenario}`;
        const point = line.points.find((p) => p.axis === key)!;
        expect(point.value).toBe(v.deviation_m3);
      }
    }
  });

  it("emits one <polyline> element per solution", () => {
    const svg = renderSvg(model);
    expect(svg.match(/<polyline/g)!.length).toBe(109);
    expect(svg).toContain('data-id="1"');
    expect(svg).toContain('data-id="109"');
  });

  it("brushing an axis filters client-side without touching the data", () => {
    const axisKey = axes[0].key;
    const values = series.map((s) => s.values[axisKey]);
    const lo = Math.min(...values);
    const hi = (lo + Math.max(...values)) / 2;
    const visible = applyBrushes(series, { [axisKey]: [lo, hi] });
    expect(visible.length).toBeGreaterThan(0);
    expect(visible.length).toBeLessThan(series.length);
    const brushed = buildParallelCoordinates(series, axes, {
      brushes: { [axisKey]: [lo, hi] },
    });
    expect(brushed.polylines.filter((l) => l.visible).length).toBe(visible.length);
    // All 109 series remain in the model; brushing only hides them.
    expect(brushed.polylines.length).toBe(109);
  });

  it("degenerate single-solution single-axis input still renders", () => {
    const one = buildParallelCoordinates([series[0]], [axes[0]]);
    expect(one.polylines.length).toBe(1);
    expect(renderSvg(one)).toContain("<polyline");
  });
});

describe("robustness parallel coordinates", () => {
  it("shows 109 solutions over 9 axes for the first three periods", () => {
    const series = robustnessSeries(criteria.scores);
    const axes = robustnessAxes(meta.assortments, [1, 2, 3]);
    const model = buildParallelCoordinates(series, axes);
    expect(axes.length).toBe(9);
    expect(model.polylines.length).toBe(109);
    // every plotted robustness equals the fixture fraction
    for (const s of criteria.scores.slice(0, 10)) {
      const line = model.polylines.find((l) => l.id === s.id)!;
      for (let a = 1; a <= 3; a++) {
        for (let t = 1; t <= 3; t++) {
          const point = line.points.find((p) => p.axis === `r:${a}:${t}`)!;
          expect(point.value).toBe(s.robustness[a - 1][t - 1]);
        }
      }
    }
  });

  it("highlight flags survive model building", () => {
    const series = robustnessSeries(criteria.scores);
    const axes = robustnessAxes(meta.assortments, [1]);
    const model = buildParallelCoordinates(series, axes, { highlighted: [5, 7] });
    expect(model.polylines.filter((l) => l.highlighted).map((l) => l.id)).toEqual([5, 7]);
    const svg = renderSvg(model);
    expect(svg).toContain("pcp-line highlight");
  });
});
