/** Shortlist comparison: stand-count table with low-count outlier flags. */

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join } from "node:path";

import {
  buildComparisonTable,
  median,
  renderComparisonHtml,
} from "../src/shortlist.js";
import { SolutionDetail } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8")) as T;
}

const details = fixture<SolutionDetail[]>("details_shortlist");

function detailWithCounts(id: number, counts: number[]): SolutionDetail {
  return {
    id,
    label: `emphasis:${id}`,
    label_text: `solution ${id}`,
    status: "optimal",
    objective: 0,
    duplicate_of: null,
    assignment: [],
    stand_counts: counts,
    robustness: null,
    deviations_m3: [],
  };
}

describe("comparison table", () => {
  it("flags period counts below 50% of that solution's median", () => {
    const a = detailWithCounts(25, [24, 19, 23, 27, 25, 22, 20, 13, 15, 21, 17, 22]);
    const b = detailWithCounts(29, [20, 21, 26, 13, 20, 19, 23, 25, 21, 11, 24, 24]);
    const c = detailWithCounts(104, [26, 24, 26, 20, 19, 15, 20, 20, 17, 23, 8, 24]);
    const table = buildComparisonTable([a, b, c]);

    const flagged = table.columns.flatMap((col) =>
      col.cells
        .map((cell, i) => ({ id: col.id, period: i + 1, ...cell }))
        .filter((cell) => cell.flagged)
    );
    // Median period counts are 21.5, 21 and 20: only the 10/11 (count 11)
    // and 11/104 (count 8) cells sit below half the median.
    expect(flagged).toEqual([
      { id: 29, period: 10, count: 11, flagged: true },
      { id: 104, period: 11, count: 8, flagged: true },
    ]);

    const html = renderComparisonHtml(table);
    expect(html).toContain('class="flagged" data-id="104" data-period="11">8<');
    expect(html).toContain('class="flagged" data-id="29" data-period="10">11<');
  });

  it("single column shows counts but no comparison flags", () => {
    const lone = detailWithCounts(7, [10, 1, 12]);
    const table = buildComparisonTable([lone]);
    expect(table.columns.length).toBe(1);
    expect(table.columns[0].cells.every((c) => !c.flagged)).toBe(true);
  });

  it("rejects more than five solutions", () => {
    const many = Array.from({ length: 6 }, (_, i) => detailWithCounts(i + 1, [1, 2]));
    expect(() => buildComparisonTable(many)).toThrow();
  });

  it("median helper matches the textbook definition", () => {
    expect(median([3, 1, 2])).toBe(2);
    expect(median([4, 1, 2, 3])).toBe(2.5);
    expect(median([])).toBe(0);
  });

  it("handles recorded service fixtures end to end", () => {
    const table = buildComparisonTable(details);
    expect(table.columns.length).toBe(details.length);
    expect(table.periods.length).toBe(details[0].stand_counts.length);
    for (const [i, col] of table.columns.entries()) {
      expect(col.cells.map((c) => c.count)).toEqual(details[i].stand_counts);
      for (const cell of col.cells) {
        expect(cell.flagged).toBe(
          details.length > 1 && cell.count < 0.5 * col.medianCount
        );
      }
    }
  });
});
