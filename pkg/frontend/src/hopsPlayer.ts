/** Animation state for hypothetical-outcome curves.
 *
 * Cycles one draw per frame at a fixed cadence with pause/step
 * controls. A single draw renders statically. Timing is injected so
 * the state machine is testable without real timers.
 */

import { CurvesPayload } from "./payloads.js";

export type ScheduleFn = (callback: () => void, intervalMs: number) => () => void;

const defaultSchedule: ScheduleFn = (callback, intervalMs) => {
  const handle = setInterval(callback, intervalMs);
  return () => clearInterval(handle);
};

export class HopsPlayer {
  frame = 0;
  playing = false;
  readonly intervalMs: number;
  private cancel: (() => void) | null = null;
  private schedule: ScheduleFn;
  private listeners = new Set<(frame: number) => void>();

  constructor(
    readonly payload: CurvesPayload,
    intervalMs = 250,
    schedule: ScheduleFn = defaultSchedule,
  ) {
    this.intervalMs = intervalMs;
    this.schedule = schedule;
  }

  get frameCount(): number {
    return this.payload.curves.length;
  }

  /** One curve: nothing to animate. */
  get isStatic(): boolean {
    return this.frameCount <= 1;
  }

  get seed(): number {
    return this.payload.seed;
  }

  currentCurve(): number[] {
    return this.payload.curves[this.frame];
  }

  play(): void {
    if (this.playing || this.isStatic) return;
    this.playing = true;
    this.cancel = this.schedule(() => this.advance(), this.intervalMs);
  }

  pause(): void {
    this.playing = false;
    if (this.cancel) {
      this.cancel();
      this.cancel = null;
    }
  }

  /** Advance one frame (the scheduler tick). */
  advance(): void {
    this.frame = (this.frame + 1) % this.frameCount;
    this.emit();
  }

  /** Manual stepping works only while paused. */
  step(delta = 1): void {
    if (this.playing) return;
    const n = this.frameCount;
    this.frame = ((this.frame + delta) % n + n) % n;
    this.emit();
  }

  onFrame(listener: (frame: number) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.frame);
  }
}

/** SVG for the current frame over the faint ensemble. */
export function renderHopsFrame(player: HopsPlayer): string {
  const { grid, curves, point_estimate } = player.payload;
  const width = 480;
  const height = 300;
  const pad = { left: 52, right: 14, top: 16, bottom: 36 };
  const xs = grid;
  const all = curves.flat().concat(point_estimate);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = Math.min(...all);
  const yHi = Math.max(...all);
  const sx = (v: number) =>
    pad.left + ((v - xLo) / (xHi - xLo || 1)) * (width - pad.left - pad.right);
  const sy = (v: number) =>
    height - pad.bottom - ((v - yLo) / (yHi - yLo || 1)) * (height - pad.top - pad.bottom);
  const path = (ys: number[]) =>
    ys.map((y, i) => `${i ? "L" : "M"}${sx(xs[i]).toFixed(1)},${sy(y).toFixed(1)}`).join("");

  const ghost = curves
    .map((ys) => `<path class="ghost" d="${path(ys)}"/>`)
    .join("");
  const current = `<path class="current" d="${path(player.currentCurve())}"/>`;
  const status = player.isStatic
    ? "single draw (static)"
    : `draw ${player.frame + 1}/${player.frameCount}`;
  return (
    `<svg viewBox="0 0 ${width} ${height}" class="sq-chart hops">` +
    `<g>${ghost}${current}</g>` +
    `<text class="hops-status" x="${width - pad.right}" y="${pad.top + 4}" ` +
    `text-anchor="end">${status} &#183; seed ${player.seed}</text>` +
    `</svg>`
  );
}
