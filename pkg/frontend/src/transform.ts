/**
 * Service payloads -> plot series.  All numbers pass through untouched: the
 * client rescales for screen space but never recomputes deviations or
 * robustness.
 */

import { SeriesInput } from "./pcp.js";
import { SolutionScores, SolutionSeries } from "./types.js";

/** Objective-value series keyed like the axes from objectiveAxes(). */
export function objectiveSeries(solutions: SolutionSeries[]): SeriesInput[] {
  return solutions.map((sol) => {
    const values: Record<string, number> = {};
    for (const v of sol.values) {
      values[`d:${v.assortment}:${v.period}:${v.scenario}`] = v.deviation_m3;
    }
    return { id: sol.id, label: `#${sol.id} (${sol.label_text})`, values };
  });
}

/** Robustness series keyed like the axes from robustnessAxes(). */
export function robustnessSeries(scores: SolutionScores[]): SeriesInput[] {
  return scores.map((s) => {
    const values: Record<string, number> = {};
    s.robustness.forEach((row, aIdx) => {
      row.forEach((score, tIdx) => {
        values[`r:${aIdx + 1}:${tIdx + 1}`] = score;
      });
    });
    return { id: s.id, label: `#${s.id}`, values };
  });
}
