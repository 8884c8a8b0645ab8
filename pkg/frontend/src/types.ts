/** Payload shapes of the decision-service JSON API. */

export interface Meta {
  assortments: string[];
  n_periods: number;
  n_stands: number;
  archive_size: number;
  cohort_size: number;
  demand_m3: number[][];
  scenario_ids: string[];
  instance_fingerprint: string;
}

export interface SessionInfo {
  id: string;
  criteria_set: boolean;
  current_ids: number[] | null;
  shortlist: number[];
  final_choice: number | null;
  closed: boolean;
  journal_length: number;
}

export interface ObjectiveRange {
  assortment: number;
  period: number;
  min: number;
  max: number;
  mean: number;
  percentiles: Record<string, number>;
}

export interface SolutionValue {
  assortment: number;
  period: number;
  scenario: number;
  deviation_m3: number;
}

export interface SolutionSeries {
  id: number;
  label: string;
  label_text: string;
  values: SolutionValue[];
}

export interface Overview {
  session: string;
  periods: number[];
  archive_size: number;
  cohort_size: number;
  demand_m3: number[][];
  assortments: string[];
  objective_ranges: ObjectiveRange[];
  solutions?: SolutionSeries[];
}

export interface SolutionScores {
  id: number;
  /** robustness[assortment-1][period-1], fractions in [0, 1] */
  robustness: number[][];
}

export interface CriteriaResponse {
  session: string;
  n_scenarios: number;
  scores: SolutionScores[];
}

export interface FilterResponse {
  session: string;
  ids: number[];
  scores: SolutionScores[];
}

export interface SolutionDetail {
  id: number;
  label: string;
  label_text: string;
  status: string;
  objective: number;
  duplicate_of: number | null;
  assignment: number[];
  stand_counts: number[];
  robustness: number[][] | null;
  deviations_m3: number[][][];
}

export interface CriteriaPayload {
  thresholds: number[] | number[][];
  mode: "fraction" | "absolute";
  strict: boolean;
}

export interface FilterClausePayload {
  floor: number;
  periods?: number[];
  objectives?: number[][];
}
