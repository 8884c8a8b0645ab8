/**
 * Shortlist comparison: side-by-side per-period robustness and the
 * stands-per-period table, flagging periods whose stand count drops below a
 * configurable fraction (default 50%) of that solution's median period
 * count.  Very low counts usually mean a few large stands carry a whole
 * month, which planners treat as operationally fragile.
 */

import { SolutionDetail } from "./types.js";

export const DEFAULT_FLAG_FRACTION = 0.5;
export const MAX_COMPARED = 5;

export interface CountCell {
  count: number;
  flagged: boolean;
}

export interface ComparisonColumn {
  id: number;
  labelText: string;
  medianCount: number;
  cells: CountCell[];
  robustness: number[][] | null;
}

export interface ComparisonTable {
  periods: number[];
  columns: ComparisonColumn[];
}

export function median(values: number[]): number {
  if (values.length === 0) return 0;
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
}

export function buildComparisonTable(
  details: SolutionDetail[],
  flagFraction: number = DEFAULT_FLAG_FRACTION
): ComparisonTable {
  if (details.length === 0 || details.length > MAX_COMPARED) {
    throw new Error(`compare between 1 and ${MAX_COMPARED} solutions`);
  }
  const nPeriods = details[0].stand_counts.length;
  // A single column has no comparison context: show counts, flag nothing.
  const flaggingActive = details.length > 1;
  const columns: ComparisonColumn[] = details.map((d) => {
    const med = median(d.stand_counts);
    return {
      id: d.id,
      labelText: d.label_text,
      medianCount: med,
      cells: d.stand_counts.map((count) => ({
        count,
        flagged: flaggingActive && count < flagFraction * med,
      })),
      robustness: d.robustness,
    };
  });
  return { periods: Array.from({ length: nPeriods }, (_, i) => i + 1), columns };
}

export function renderComparisonHtml(table: ComparisonTable): string {
  const head = table.columns
    .map((c) => `<th scope="col">solution ${c.id}</th>`)
    .join("");
  const rows = table.periods
    .map((t) => {
      const cells = table.columns
        .map((c) => {
          const cell = c.cells[t - 1];
          const cls = cell.flagged ? ' class="flagged"' : "";
          return `<td${cls} data-id="${c.id}" data-period="${t}">${cell.count}</td>`;
        })
        .join("");
      return `<tr><th scope="row">${t}</th>${cells}</tr>`;
    })
    .join("");
  return (
    `<table class="shortlist-table"><thead><tr><th>period</th>${head}</tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}
