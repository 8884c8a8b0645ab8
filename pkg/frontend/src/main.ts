/**
 * App shell: wires the overview plot, criteria sliders, filtering, shortlist
 * comparison and final-choice confirmation to the service API.
 *
 * The client never recomputes a domain number: every plotted value comes
 * from the service.  Brushing the plots only hides polylines locally; only
 * the explicit panel actions (criteria, filter, shortlist, finalize) touch
 * the session journal.  At most one mutation is in flight at a time.
 */

import { ApiClient } from "./api.js";
import {
  buildCriteriaPayload,
  CriteriaState,
  initialCriteria,
  setAssortmentThreshold,
  validateThreshold,
} from "./criteria.js";
import {
  BrushMap,
  buildParallelCoordinates,
  objectiveAxes,
  renderSvg,
  robustnessAxes,
} from "./pcp.js";
import { buildComparisonTable, renderComparisonHtml } from "./shortlist.js";
import { objectiveSeries, robustnessSeries } from "./transform.js";
import { Meta, SolutionDetail, SolutionScores } from "./types.js";

/** Categorical palette for highlighted solutions (documented convention:
 * first highlight gold, second blue, third red, then teal/purple). */
export const HIGHLIGHT_PALETTE = ["#d4a017", "#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

interface ViewState {
  session: string | null;
  periodFocus: number[] | "all";
  criteria: CriteriaState;
  highlighted: number[];
  currentIds: number[] | null;
  scores: SolutionScores[] | null;
  shortlist: number[];
  brushes: BrushMap;
  busy: boolean;
}

const api = new ApiClient("");
let meta: Meta;
const state: ViewState = {
  session: null,
  periodFocus: [],
  criteria: initialCriteria(0),
  highlighted: [],
  currentIds: null,
  scores: null,
  shortlist: [],
  brushes: {},
  busy: false,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string, isError = false): void {
  const bar = el<HTMLDivElement>("status");
  bar.textContent = text;
  bar.className = isError ? "status error" : "status";
}

function focusPeriods(): number[] {
  if (state.periodFocus === "all") {
    return Array.from({ length: meta.n_periods }, (_, i) => i + 1);
  }
  return state.periodFocus as number[];
}

async function mutate<T>(label: string, fn: () => Promise<T>): Promise<T | null> {
  if (state.busy) {
    setStatus("another request is in flight", true);
    return null;
  }
  state.busy = true;
  try {
    const result = await fn();
    setStatus(label);
    return result;
  } catch (err) {
    setStatus(String(err instanceof Error ? err.message : err), true);
    return null;
  } finally {
    state.busy = false;
  }
}

async function renderObjectivePlot(): Promise<void> {
  if (!state.session) return;
  const periods = focusPeriods();
  const view = await api.overview(state.session, periods, true);
  const series = objectiveSeries(view.solutions ?? []);
  const axes = objectiveAxes(meta.assortments, periods, meta.scenario_ids.length);
  const host = el<HTMLDivElement>("objective-plot");
  const model = buildParallelCoordinates(series, axes, {
    brushes: state.brushes,
    highlighted: state.highlighted,
  });
  host.innerHTML = renderSvg(model);
  attachHover(host);
}

function renderRobustnessPlot(): void {
  const host = el<HTMLDivElement>("robustness-plot");
  if (!state.scores) {
    host.innerHTML = '<p class="placeholder">Set criteria to see robustness.</p>';
    return;
  }
  const keep = state.currentIds ? new Set(state.currentIds) : null;
  const scores = keep ? state.scores.filter((s) => keep.has(s.id)) : state.scores;
  if (scores.length === 0) {
    host.innerHTML = '<p class="placeholder">No solutions pass the current filter.</p>';
    return;
  }
  const series = robustnessSeries(scores);
  const axes = robustnessAxes(meta.assortments, focusPeriods());
  const model = buildParallelCoordinates(series, axes, {
    highlighted: state.highlighted,
  });
  host.innerHTML = renderSvg(model);
  attachHover(host);
}

function attachHover(host: HTMLElement): void {
  host.querySelectorAll<SVGPolylineElement>(".pcp-line").forEach((line) => {
    line.addEventListener("mouseenter", () => line.classList.add("hover"));
    line.addEventListener("mouseleave", () => line.classList.remove("hover"));
    line.addEventListener("click", () => {
      const id = Number(line.dataset.id);
      const idx = state.highlighted.indexOf(id);
      if (idx >= 0) state.highlighted.splice(idx, 1);
      else state.highlighted.push(id);
      void renderObjectivePlot();
      renderRobustnessPlot();
    });
  });
}

function renderCriteriaPanel(): void {
  const host = el<HTMLDivElement>("criteria-sliders");
  host.innerHTML = "";
  meta.assortments.forEach((name, i) => {
    const row = document.createElement("label");
    row.className = "slider-row";
    const value = state.criteria.perAssortment[i];
    row.innerHTML =
      `<span class="slider-name">${name}</span>` +
      `<input type="range" min="0" max="1" step="0.01" value="${value}" data-index="${i}">` +
      `<input type="number" min="0" step="0.01" value="${value}" data-index="${i}">` +
      `<span class="slider-pct">${Math.round(value * 100)}% of demand</span>`;
    host.appendChild(row);
  });
  host.querySelectorAll<HTMLInputElement>("input").forEach((input) => {
    input.addEventListener("change", () => {
      const raw = Number(input.value);
      const check = validateThreshold(raw);
      if (!check.ok) {
        setStatus(`rejected: ${check.reason}`, true);
        renderCriteriaPanel();
        return;
      }
      const index = Number(input.dataset.index);
      state.criteria = setAssortmentThreshold(state.criteria, index, raw);
      renderCriteriaPanel();
    });
  });
}

async function commitCriteria(): Promise<void> {
  if (!state.session) return;
  const response = await mutate("criteria set; robustness updated", () =>
    api.setCriteria(state.session as string, buildCriteriaPayload(state.criteria))
  );
  if (!response) return;
  state.scores = response.scores;
  state.currentIds = null;
  renderRobustnessPlot();
}

async function commitFilter(): Promise<void> {
  if (!state.session) return;
  const floor = Number(el<HTMLInputElement>("filter-floor").value);
  if (!(floor >= 0 && floor <= 1)) {
    setStatus("floor must be in [0, 1]", true);
    return;
  }
  const response = await mutate(`filter at ${Math.round(floor * 100)}%`, () =>
    api.applyFilter(state.session as string, [
      { floor, periods: focusPeriods() },
    ])
  );
  if (!response) return;
  state.currentIds = response.ids;
  setStatus(`${response.ids.length} solutions pass the filter`);
  renderRobustnessPlot();
}

async function renderShortlist(): Promise<void> {
  const host = el<HTMLDivElement>("shortlist-host");
  if (!state.session || state.shortlist.length === 0) {
    host.innerHTML = '<p class="placeholder">Shortlist solutions to compare them.</p>';
    return;
  }
  const details: SolutionDetail[] = [];
  for (const id of state.shortlist) {
    details.push(await api.solutionDetail(state.session, id));
  }
  host.innerHTML = renderComparisonHtml(buildComparisonTable(details));
}

async function commitShortlist(): Promise<void> {
  if (!state.session) return;
  const raw = el<HTMLInputElement>("shortlist-ids").value;
  const ids = raw
    .split(",")
    .map((s) => Number(s.trim()))
    .filter((n) => Number.isInteger(n) && n > 0);
  if (ids.length === 0 || ids.length > 5) {
    setStatus("enter 1-5 solution ids, comma-separated", true);
    return;
  }
  const response = await mutate("shortlist saved", () =>
    api.shortlist(state.session as string, ids)
  );
  if (!response) return;
  state.shortlist = response.ids;
  state.highlighted = [...response.ids];
  await renderShortlist();
  renderRobustnessPlot();
}

async function commitFinalize(): Promise<void> {
  if (!state.session) return;
  const id = Number(el<HTMLInputElement>("finalize-id").value);
  const report = await mutate(`final choice recorded: solution ${id}`, () =>
    api.finalize(state.session as string, id)
  );
  if (report) {
    el<HTMLDivElement>("report-host").textContent = JSON.stringify(report, null, 2);
  }
}

async function boot(): Promise<void> {
  meta = await api.meta();
  state.criteria = initialCriteria(meta.assortments.length);
  state.periodFocus = [1, 2, 3].filter((t) => t <= meta.n_periods);
  const info = await api.createSession();
  state.session = info.id;
  el<HTMLSpanElement>("bundle-info").textContent =
    `${meta.archive_size} solutions, ${meta.cohort_size} scenarios, ` +
    `${meta.n_stands} stands, session ${info.id}`;

  const focus = el<HTMLSelectElement>("period-focus");
  focus.innerHTML =
    `<option value="first3">first 3 periods</option>` +
    `<option value="all">all ${meta.n_periods} periods</option>`;
  focus.addEventListener("change", () => {
    state.periodFocus =
      focus.value === "all" ? "all" : [1, 2, 3].filter((t) => t <= meta.n_periods);
    void renderObjectivePlot();
    renderRobustnessPlot();
  });

  renderCriteriaPanel();
  el<HTMLButtonElement>("apply-criteria").addEventListener("click", () => void commitCriteria());
  el<HTMLButtonElement>("apply-filter").addEventListener("click", () => void commitFilter());
  el<HTMLButtonElement>("apply-shortlist").addEventListener("click", () => void commitShortlist());
  el<HTMLButtonElement>("apply-finalize").addEventListener("click", () => void commitFinalize());

  await renderObjectivePlot();
  renderRobustnessPlot();
  await renderShortlist();
  setStatus("ready");
}

if (typeof document !== "undefined" && document.getElementById("status")) {
  void boot();
}
