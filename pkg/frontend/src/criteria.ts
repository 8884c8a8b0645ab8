/**
 * Criteria panel model: one slider per assortment (maximum acceptable
 * deviation as a fraction of demand), with optional per-period overrides.
 * Values are validated client-side; committing posts the payload and the
 * robustness view re-renders from the response without a page reload.
 */

import { CriteriaPayload } from "./types.js";

export interface CriteriaState {
  /** slider value per assortment, as a fraction of demand (0.3 = 30%). */
  perAssortment: number[];
  /** optional per-(assortment, period) override grid. */
  overrides: number[][] | null;
  mode: "fraction" | "absolute";
  strict: boolean;
}

export function initialCriteria(nAssortments: number): CriteriaState {
  return {
    perAssortment: new Array(nAssortments).fill(0.3),
    overrides: null,
    mode: "fraction",
    strict: true,
  };
}

/** Reject out-of-range slider input; thresholds are never negative. */
export function validateThreshold(raw: number): { ok: boolean; reason?: string } {
  if (!isFinite(raw)) return { ok: false, reason: "not a number" };
  if (raw < 0) return { ok: false, reason: "threshold must be >= 0" };
  return { ok: true };
}

export function setAssortmentThreshold(
  state: CriteriaState,
  index: number,
  value: number
): CriteriaState {
  const check = validateThreshold(value);
  if (!check.ok) throw new Error(check.reason);
  const perAssortment = [...state.perAssortment];
  perAssortment[index] = value;
  return { ...state, perAssortment };
}

export function setPeriodOverride(
  state: CriteriaState,
  assortment: number,
  period: number,
  value: number,
  nPeriods: number
): CriteriaState {
  const check = validateThreshold(value);
  if (!check.ok) throw new Error(check.reason);
  const overrides =
    state.overrides !== null
      ? state.overrides.map((row) => [...row])
      : state.perAssortment.map((v) => new Array(nPeriods).fill(v));
  overrides[assortment - 1][period - 1] = value;
  return { ...state, overrides };
}

/** The exact JSON body for PUT criteria. */
export function buildCriteriaPayload(state: CriteriaState): CriteriaPayload {
  return {
    thresholds: state.overrides ?? state.perAssortment,
    mode: state.mode,
    strict: state.strict,
  };
}
