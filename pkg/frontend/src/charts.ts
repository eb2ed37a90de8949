/** Chart view models: hit testing for brushes, selection overlays, and
 * SVG rendering. All statistics (bins, counts, means) arrive in the
 * payload; the client only positions them and counts selected rows.
 */

import {
  BarCountsPayload,
  ChartPayload,
  GroupMeansPayload,
  GroupPointsPayload,
  HistogramPayload,
  ScatterPayload,
  SchemaMismatchError,
  validateChartPayload,
} from "./payloads.js";
import { BrushRect } from "./selection.js";

export const CHART_WIDTH = 480;
export const CHART_HEIGHT = 300;
const PAD = { left: 52, right: 14, top: 16, bottom: 36 };

export interface LinearScale {
  (value: number): number;
  invert(pixel: number): number;
}

export function linearScale(
  domainLo: number,
  domainHi: number,
  rangeLo: number,
  rangeHi: number,
): LinearScale {
  const span = domainHi - domainLo || 1;
  const scale = ((value: number) =>
    rangeLo + ((value - domainLo) / span) * (rangeHi - rangeLo)) as LinearScale;
  scale.invert = (pixel: number) =>
    domainLo + ((pixel - rangeLo) / (rangeHi - rangeLo || 1)) * span;
  return scale;
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function svgOpen(title: string): string {
  return (
    `<svg viewBox="0 0 ${CHART_WIDTH} ${CHART_HEIGHT}" role="img" ` +
    `aria-label="${esc(title)}" class="sq-chart">`
  );
}

export interface ChartView {
  readonly id: string;
  readonly payload: ChartPayload;
  /** Rows inside a data-coordinate region (point charts only). */
  rowsInRect(rect: BrushRect): number[];
  /** SVG markup styled for the given shared selection. */
  render(selected: ReadonlySet<number>): string;
  /** All rows this chart can address (for linking assertions). */
  rows(): number[];
}

export class ScatterChart implements ChartView {
  readonly xScale: LinearScale;
  readonly yScale: LinearScale;

  constructor(
    readonly payload: ScatterPayload,
    readonly id: string = `scatter:${payload.x}:${payload.y}`,
  ) {
    const xs = payload.points.map((p) => p.x);
    const ys = payload.points.map((p) => p.y);
    this.xScale = linearScale(
      Math.min(...xs),
      Math.max(...xs),
      PAD.left,
      CHART_WIDTH - PAD.right,
    );
    this.yScale = linearScale(
      Math.min(...ys),
      Math.max(...ys),
      CHART_HEIGHT - PAD.bottom,
      PAD.top,
    );
  }

  rows(): number[] {
    return this.payload.points.map((p) => p.row);
  }

  rowsInRect(rect: BrushRect): number[] {
    const xLo = Math.min(rect.x0, rect.x1);
    const xHi = Math.max(rect.x0, rect.x1);
    const yLo = Math.min(rect.y0, rect.y1);
    const yHi = Math.max(rect.y0, rect.y1);
    return this.payload.points
      .filter((p) => p.x >= xLo && p.x <= xHi && p.y >= yLo && p.y <= yHi)
      .map((p) => p.row);
  }

  render(selected: ReadonlySet<number>): string {
    const dots = this.payload.points
      .map((p) => {
        const cls = selected.has(p.row) ? "dot selected" : "dot";
        return (
          `<circle class="${cls}" data-row="${p.row}" ` +
          `cx="${this.xScale(p.x).toFixed(1)}" ` +
          `cy="${this.yScale(p.y).toFixed(1)}" r="3"/>`
        );
      })
      .join("");
    return (
      svgOpen(`${this.payload.y} vs ${this.payload.x}`) +
      `<g class="points">${dots}</g>` +
      axisLabels(this.payload.x, this.payload.y) +
      "</svg>"
    );
  }
}

export class GroupPointsChart implements ChartView {
  readonly valueScale: LinearScale;

  constructor(
    readonly payload: GroupPointsPayload,
    readonly id: string = `group_points:${payload.group}:${payload.value}`,
  ) {
    const values = payload.points.map((p) => p.value);
    this.valueScale = linearScale(
      Math.min(...values),
      Math.max(...values),
      CHART_HEIGHT - PAD.bottom,
      PAD.top,
    );
  }

  rows(): number[] {
    return this.payload.points.map((p) => p.row);
  }

  private levelCenter(level: string): number {
    const i = this.payload.levels.indexOf(level);
    const width = (CHART_WIDTH - PAD.left - PAD.right) / this.payload.levels.length;
    return PAD.left + width * (i + 0.5);
  }

  /** Brush in (level-band x, value y) space. */
  rowsInRect(rect: BrushRect): number[] {
    const xLo = Math.min(rect.x0, rect.x1);
    const xHi = Math.max(rect.x0, rect.x1);
    const vLo = Math.min(rect.y0, rect.y1);
    const vHi = Math.max(rect.y0, rect.y1);
    return this.payload.points
      .filter((p) => {
        const cx = this.levelCenter(p.level);
        return cx >= xLo && cx <= xHi && p.value >= vLo && p.value <= vHi;
      })
      .map((p) => p.row);
  }

  render(selected: ReadonlySet<number>): string {
    const dots = this.payload.points
      .map((p) => {
        const cls = selected.has(p.row) ? "dot selected" : "dot";
        const jitter = ((p.row % 17) - 8) * 1.5;
        return (
          `<circle class="${cls}" data-row="${p.row}" ` +
          `cx="${(this.levelCenter(p.level) + jitter).toFixed(1)}" ` +
          `cy="${this.valueScale(p.value).toFixed(1)}" r="3"/>`
        );
      })
      .join("");
    return (
      svgOpen(`${this.payload.value} by ${this.payload.group}`) +
      `<g class="points">${dots}</g>` +
      axisLabels(this.payload.group, this.payload.value) +
      "</svg>"
    );
  }
}

abstract class AggregatedChart implements ChartView {
  abstract readonly id: string;
  abstract readonly payload: ChartPayload;

  rowsInRect(): number[] {
    return []; // aggregated charts are linked targets, not brush sources
  }

  abstract rows(): number[];
  abstract render(selected: ReadonlySet<number>): string;
}

export class BarCountsChart extends AggregatedChart {
  constructor(
    readonly payload: BarCountsPayload,
    readonly id: string = `bar_counts:${payload.variable}`,
  ) {
    super();
  }

  rows(): number[] {
    return Object.values(this.payload.rows_by_level ?? {}).flat();
  }

  /** Selected rows per level; the selected-subset overlay. */
  highlightCounts(selected: ReadonlySet<number>): Record<string, number> {
    const out: Record<string, number> = {};
    for (const level of this.payload.levels) {
      const rows = this.payload.rows_by_level?.[level] ?? [];
      out[level] = rows.filter((r) => selected.has(r)).length;
    }
    return out;
  }

  /** Exact selected row ids per level (linking invariant checks). */
  highlightedRows(selected: ReadonlySet<number>): Record<string, number[]> {
    const out: Record<string, number[]> = {};
    for (const level of this.payload.levels) {
      out[level] = (this.payload.rows_by_level?.[level] ?? []).filter((r) =>
        selected.has(r),
      );
    }
    return out;
  }

  render(selected: ReadonlySet<number>): string {
    const maxCount = Math.max(...this.payload.counts, 1);
    const band =
      (CHART_WIDTH - PAD.left - PAD.right) / this.payload.levels.length;
    const yScale = linearScale(0, maxCount, CHART_HEIGHT - PAD.bottom, PAD.top);
    const overlay = this.highlightCounts(selected);
    const bars = this.payload.levels
      .map((level, i) => {
        const count = this.payload.counts[i];
        const x = PAD.left + i * band + band * 0.1;
        const w = band * 0.8;
        const y = yScale(count);
        const base =
          `<rect class="bar" data-level="${esc(level)}" x="${x.toFixed(1)}" ` +
          `y="${y.toFixed(1)}" width="${w.toFixed(1)}" ` +
          `height="${(CHART_HEIGHT - PAD.bottom - y).toFixed(1)}"/>`;
        const hi = overlay[level];
        const overlayRect = hi
          ? `<rect class="bar overlay" x="${x.toFixed(1)}" ` +
            `y="${yScale(hi).toFixed(1)}" width="${w.toFixed(1)}" ` +
            `height="${(CHART_HEIGHT - PAD.bottom - yScale(hi)).toFixed(1)}"/>`
          : "";
        return base + overlayRect;
      })
      .join("");
    return (
      svgOpen(`counts of ${this.payload.variable}`) +
      `<g class="bars">${bars}</g>` +
      axisLabels(this.payload.variable, "count") +
      "</svg>"
    );
  }
}

export class HistogramChart extends AggregatedChart {
  constructor(
    readonly payload: HistogramPayload,
    readonly id: string = `histogram:${payload.variable}`,
  ) {
    super();
  }

  rows(): number[] {
    return (this.payload.bin_rows ?? []).flat();
  }

  highlightCounts(selected: ReadonlySet<number>): number[] {
    return (this.payload.bin_rows ?? this.payload.counts.map(() => [])).map(
      (rows) => rows.filter((r) => selected.has(r)).length,
    );
  }

  render(selected: ReadonlySet<number>): string {
    const edges = this.payload.bin_edges;
    const maxCount = Math.max(...this.payload.counts, 1);
    const xScale = linearScale(
      edges[0],
      edges[edges.length - 1],
      PAD.left,
      CHART_WIDTH - PAD.right,
    );
    const yScale = linearScale(0, maxCount, CHART_HEIGHT - PAD.bottom, PAD.top);
    const overlay = this.highlightCounts(selected);
    const bars = this.payload.counts
      .map((count, i) => {
        const x = xScale(edges[i]);
        const w = Math.max(xScale(edges[i + 1]) - x - 1, 1);
        const y = yScale(count);
        const base =
          `<rect class="bar" x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
          `width="${w.toFixed(1)}" ` +
          `height="${(CHART_HEIGHT - PAD.bottom - y).toFixed(1)}"/>`;
        const hi = overlay[i];
        const over = hi
          ? `<rect class="bar overlay" x="${x.toFixed(1)}" ` +
            `y="${yScale(hi).toFixed(1)}" width="${w.toFixed(1)}" ` +
            `height="${(CHART_HEIGHT - PAD.bottom - yScale(hi)).toFixed(1)}"/>`
          : "";
        return base + over;
      })
      .join("");
    return (
      svgOpen(`distribution of ${this.payload.variable}`) +
      `<g class="bars">${bars}</g>` +
      axisLabels(this.payload.variable, "count") +
      "</svg>"
    );
  }
}

export class GroupMeansChart extends AggregatedChart {
  constructor(
    readonly payload: GroupMeansPayload,
    readonly id: string = `group_means:${payload.group}:${payload.value}`,
  ) {
    super();
  }

  rows(): number[] {
    return Object.values(this.payload.rows_by_level ?? {}).flat();
  }

  highlightCounts(selected: ReadonlySet<number>): Record<string, number> {
    const out: Record<string, number> = {};
    for (const level of this.payload.levels) {
      const rows = this.payload.rows_by_level?.[level] ?? [];
      out[level] = rows.filter((r) => selected.has(r)).length;
    }
    return out;
  }

  render(selected: ReadonlySet<number>): string {
    const maxMean = Math.max(...this.payload.means, 1);
    const band =
      (CHART_WIDTH - PAD.left - PAD.right) / this.payload.levels.length;
    const yScale = linearScale(0, maxMean, CHART_HEIGHT - PAD.bottom, PAD.top);
    const overlay = this.highlightCounts(selected);
    const bars = this.payload.levels
      .map((level, i) => {
        const mean = this.payload.means[i];
        const x = PAD.left + i * band + band * 0.1;
        const w = band * 0.8;
        const y = yScale(mean);
        const selectedCount = overlay[level];
        const marker = selectedCount
          ? `<text class="overlay-note" x="${(x + w / 2).toFixed(1)}" ` +
            `y="${(y - 4).toFixed(1)}" text-anchor="middle">` +
            `${selectedCount} selected</text>`
          : "";
        return (
          `<rect class="bar${selectedCount ? " has-selection" : ""}" ` +
          `data-level="${esc(level)}" x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
          `width="${w.toFixed(1)}" ` +
          `height="${(CHART_HEIGHT - PAD.bottom - y).toFixed(1)}"/>` +
          marker
        );
      })
      .join("");
    return (
      svgOpen(`mean ${this.payload.value} by ${this.payload.group}`) +
      `<g class="bars">${bars}</g>` +
      axisLabels(this.payload.group, `mean ${this.payload.value}`) +
      "</svg>"
    );
  }
}

function axisLabels(x: string, y: string): string {
  return (
    `<text class="axis-label x" x="${CHART_WIDTH / 2}" ` +
    `y="${CHART_HEIGHT - 8}" text-anchor="middle">${esc(x)}</text>` +
    `<text class="axis-label y" x="14" y="${CHART_HEIGHT / 2}" ` +
    `text-anchor="middle" transform="rotate(-90 14 ${CHART_HEIGHT / 2})">` +
    `${esc(y)}</text>`
  );
}

/** Build the right view model for a validated payload. */
export function chartViewFor(payload: ChartPayload): ChartView {
  switch (payload.chart) {
    case "scatter":
      return new ScatterChart(payload);
    case "histogram":
      return new HistogramChart(payload);
    case "bar_counts":
      return new BarCountsChart(payload);
    case "group_means":
      return new GroupMeansChart(payload);
    case "group_points":
      return new GroupPointsChart(payload);
  }
}

/** Render any payload; schema mismatches become a visible error card. */
export function renderChart(
  raw: unknown,
  selected: ReadonlySet<number> = new Set(),
): { html: string; view: ChartView | null } {
  try {
    const view = chartViewFor(validateChartPayload(raw));
    return { html: view.render(selected), view };
  } catch (err) {
    if (err instanceof SchemaMismatchError) {
      return {
        html:
          `<div class="error-card" role="alert">` +
          `<strong>Chart unavailable</strong><p>${esc(err.message)}</p></div>`,
        view: null,
      };
    }
    throw err;
  }
}
