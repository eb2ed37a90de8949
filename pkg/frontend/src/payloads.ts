/** Wire payload shapes served by the session API, with runtime guards.
 *
 * Every number displayed anywhere in the UI comes from these payloads;
 * the client computes nothing statistical beyond overlay counts of
 * already-delivered row indices.
 */

export interface ScatterPoint {
  row: number;
  x: number;
  y: number;
}

export interface ScatterPayload {
  chart: "scatter";
  x: string;
  y: string;
  points: ScatterPoint[];
}

export interface HistogramPayload {
  chart: "histogram";
  variable: string;
  bin_edges: number[];
  counts: number[];
  bin_rows?: number[][];
  n: number;
}

export interface BarCountsPayload {
  chart: "bar_counts";
  variable: string;
  levels: string[];
  counts: number[];
  rows_by_level?: Record<string, number[]>;
  n: number;
}

export interface GroupMeansPayload {
  chart: "group_means";
  group: string;
  value: string;
  levels: string[];
  means: number[];
  counts: number[];
  rows_by_level?: Record<string, number[]>;
}

export interface GroupPoint {
  row: number;
  level: string;
  value: number;
}

export interface GroupPointsPayload {
  chart: "group_points";
  group: string;
  value: string;
  levels: string[];
  points: GroupPoint[];
}

export type ChartPayload =
  | ScatterPayload
  | HistogramPayload
  | BarCountsPayload
  | GroupMeansPayload
  | GroupPointsPayload;

export class SchemaMismatchError extends Error {}

function fail(reason: string): never {
  throw new SchemaMismatchError(`chart payload rejected: ${reason}`);
}

function isNumberArray(value: unknown): value is number[] {
  return Array.isArray(value) && value.every((v) => typeof v === "number");
}

function isStringArray(value: unknown): value is string[] {
  return Array.isArray(value) && value.every((v) => typeof v === "string");
}

/** Validate a chart payload from the wire; throws SchemaMismatchError. */
export function validateChartPayload(raw: unknown): ChartPayload {
  if (typeof raw !== "object" || raw === null) fail("not an object");
  const obj = raw as Record<string, unknown>;
  switch (obj.chart) {
    case "scatter": {
      if (typeof obj.x !== "string" || typeof obj.y !== "string") {
        fail("scatter needs x and y names");
      }
      if (
        !Array.isArray(obj.points) ||
        !obj.points.every(
          (p: unknown) =>
            typeof p === "object" &&
            p !== null &&
            typeof (p as ScatterPoint).row === "number" &&
            typeof (p as ScatterPoint).x === "number" &&
            typeof (p as ScatterPoint).y === "number",
        )
      ) {
        fail("scatter points must be {row, x, y}");
      }
      return obj as unknown as ScatterPayload;
    }
    case "histogram": {
      if (!isNumberArray(obj.bin_edges) || !isNumberArray(obj.counts)) {
        fail("histogram needs bin_edges and counts");
      }
      if (obj.bin_edges.length !== obj.counts.length + 1) {
        fail("histogram needs one more edge than counts");
      }
      return obj as unknown as HistogramPayload;
    }
    case "bar_counts": {
      if (!isStringArray(obj.levels) || !isNumberArray(obj.counts)) {
        fail("bar_counts needs levels and counts");
      }
      if (obj.levels.length !== obj.counts.length) {
        fail("bar_counts levels/counts length mismatch");
      }
      return obj as unknown as BarCountsPayload;
    }
    case "group_means": {
      if (
        !isStringArray(obj.levels) ||
        !isNumberArray(obj.means) ||
        obj.levels.length !== obj.means.length
      ) {
        fail("group_means needs aligned levels and means");
      }
      return obj as unknown as GroupMeansPayload;
    }
    case "group_points": {
      if (!isStringArray(obj.levels) || !Array.isArray(obj.points)) {
        fail("group_points needs levels and points");
      }
      return obj as unknown as GroupPointsPayload;
    }
    default:
      fail(`unknown chart kind ${String(obj.chart)}`);
  }
}

export interface CoefficientRow {
  name: string;
  estimate: number;
  se: number;
  t: number | null;
  p: number | null;
  degenerate?: boolean;
}

export interface ModelSummary {
  formula: string;
  family: string;
  coefficients: CoefficientRow[];
  n_used: number;
  df_residual: number;
  aic: number | null;
  sigma_or_dispersion: number;
}

export interface HopsPayload {
  seed: number;
  algorithm: string;
  n_draws: number;
  coefficients: number[][];
}

export interface CurvesPayload {
  focus_var: string;
  seed: number;
  grid: number[];
  curves: number[][];
  point_estimate: number[];
}

export interface TranscriptEntry {
  role: "user" | "system";
  text: string;
  action: Record<string, unknown> | null;
  result: Record<string, unknown> | null;
  guidance: string[];
  timestamp: number;
}
