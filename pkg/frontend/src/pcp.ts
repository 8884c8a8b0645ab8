/**
 * Parallel-coordinates model and SVG rendering.
 *
 * The model layer is pure: it turns per-solution values over a set of axes
 * into normalized polyline geometry, applies axis brushes client-side, and
 * never recomputes domain numbers (every plotted value comes straight from
 * the service payload; only the per-axis [min, max] screen scaling is local).
 * A right-most index axis tracks the solution number.
 */

export interface AxisSpec {
  key: string;
  label: string;
}

export interface SeriesInput {
  id: number;
  label: string;
  values: Record<string, number>;
}

export interface AxisModel extends AxisSpec {
  x: number;
  min: number;
  max: number;
  isIndex: boolean;
}

export interface PointModel {
  axis: string;
  value: number;
  x: number;
  y: number;
}

export interface PolylineModel {
  id: number;
  label: string;
  points: PointModel[];
  visible: boolean;
  highlighted: boolean;
}

export interface PcpModel {
  axes: AxisModel[];
  polylines: PolylineModel[];
  width: number;
  height: number;
  margin: { top: number; bottom: number; left: number; right: number };
}

export type BrushMap = Record<string, [number, number]>;

export const INDEX_AXIS_KEY = "__solution__";

const DEFAULT_WIDTH = 1060;
const DEFAULT_HEIGHT = 420;
const MARGIN = { top: 36, bottom: 16, left: 46, right: 60 };

/** Ids of series passing every active brush (brushing never mutates session state). */
export function applyBrushes(series: SeriesInput[], brushes: BrushMap): number[] {
  return series
    .filter((s) =>
      Object.entries(brushes).every(([axis, [lo, hi]]) => {
        const v = axis === INDEX_AXIS_KEY ? s.id : s.values[axis];
        return v !== undefined && v >= lo && v <= hi;
      })
    )
    .map((s) => s.id);
}

export function buildParallelCoordinates(
  series: SeriesInput[],
  axes: AxisSpec[],
  options: {
    brushes?: BrushMap;
    highlighted?: number[];
    width?: number;
    height?: number;
  } = {}
): PcpModel {
  if (axes.length === 0) throw new Error("at least one axis required");
  if (series.length === 0) throw new Error("at least one solution required");
  const width = options.width ?? DEFAULT_WIDTH;
  const height = options.height ?? DEFAULT_HEIGHT;
  const brushes = options.brushes ?? {};
  const highlighted = new Set(options.highlighted ?? []);
  const visibleIds = new Set(applyBrushes(series, brushes));

  const allAxes: AxisSpec[] = [
    ...axes,
    { key: INDEX_AXIS_KEY, label: "solution #" },
  ];
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;
  const step = allAxes.length > 1 ? innerW / (allAxes.length - 1) : 0;

  // Per-axis scaling to [min, max] over the visible set; raw values stay on
  // the points for tooltips.
  const axisModels: AxisModel[] = allAxes.map((spec, i) => {
    const values = series
      .filter((s) => visibleIds.has(s.id))
      .map((s) => (spec.key === INDEX_AXIS_KEY ? s.id : s.values[spec.key]))
      .filter((v): v is number => v !== undefined);
    const pool = values.length ? values : [0];
    let min = Math.min(...pool);
    let max = Math.max(...pool);
    if (min === max) {
      min -= 0.5;
      max += 0.5;
    }
    return {
      ...spec,
      x: MARGIN.left + i * step,
      min,
      max,
      isIndex: spec.key === INDEX_AXIS_KEY,
    };
  });

  const polylines: PolylineModel[] = series.map((s) => ({
    id: s.id,
    label: s.label,
    visible: visibleIds.has(s.id),
    highlighted: highlighted.has(s.id),
    points: axisModels.map((axis) => {
      const value = axis.isIndex ? s.id : s.values[axis.key] ?? NaN;
      const t = (value - axis.min) / (axis.max - axis.min);
      return {
        axis: axis.key,
        value,
        x: axis.x,
        y: MARGIN.top + (1 - t) * innerH,
      };
    }),
  }));

  return { axes: axisModels, polylines, width, height, margin: MARGIN };
}

function fmt(v: number): string {
  if (!isFinite(v)) return "";
  const a = Math.abs(v);
  if (a !== 0 && (a >= 10000 || a < 0.01)) return v.toExponential(1);
  return String(Math.round(v * 100) / 100);
}

/** Render the model as an SVG string; one <polyline> per solution. */
export function renderSvg(model: PcpModel): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${model.width} ${model.height}" class="pcp">`
  );
  for (const axis of model.axes) {
    const y0 = model.margin.top;
    const y1 = model.height - model.margin.bottom;
    parts.push(
      `<g class="pcp-axis" data-axis="${axis.key}">` +
        `<line x1="${axis.x}" y1="${y0}" x2="${axis.x}" y2="${y1}"/>` +
        `<text class="pcp-axis-label" x="${axis.x}" y="${y0 - 18}" text-anchor="middle">${axis.label}</text>` +
        `<text class="pcp-tick" x="${axis.x}" y="${y0 - 5}" text-anchor="middle">${fmt(axis.max)}</text>` +
        `<text class="pcp-tick" x="${axis.x}" y="${y1 + 12}" text-anchor="middle">${fmt(axis.min)}</text>` +
        `</g>`
    );
  }
  // Draw non-highlighted first so highlighted lines sit on top.
  const ordered = [...model.polylines].sort(
    (a, b) => Number(a.highlighted) - Number(b.highlighted)
  );
  for (const line of ordered) {
    if (!line.visible) continue;
    const pts = line.points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");
    const cls = line.highlighted ? "pcp-line highlight" : "pcp-line";
    parts.push(
      `<polyline class="${cls}" data-id="${line.id}" fill="none" points="${pts}">` +
        `<title>${line.label}</title></polyline>`
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Axis specs for objective values: assortment x period x scenario. */
export function objectiveAxes(
  assortments: string[],
  periods: number[],
  scenarios: number
): AxisSpec[] {
  const axes: AxisSpec[] = [];
  for (let a = 1; a <= assortments.length; a++) {
    for (const t of periods) {
      for (let p = 1; p <= scenarios; p++) {
        axes.push({
          key: `d:${a}:${t}:${p}`,
          label: `${assortments[a - 1].slice(0, 4)} t${t} s${p}`,
        });
      }
    }
  }
  return axes;
}

/** Axis specs for robustness scores: assortment x period. */
export function robustnessAxes(assortments: string[], periods: number[]): AxisSpec[] {
  const axes: AxisSpec[] = [];
  for (let a = 1; a <= assortments.length; a++) {
    for (const t of periods) {
      axes.push({
        key: `r:${a}:${t}`,
        label: `${assortments[a - 1].slice(0, 4)} t${t}`,
      });
    }
  }
  return axes;
}
