/** Shared selection state for brushing and linking.
 *
 * The store is the single source of truth: charts never hold a private
 * selection. A brush on one chart replaces the shared selection with
 * the rows inside its region; clearing a brush (or brushing an empty
 * region) clears the shared selection for every chart.
 */

export interface BrushRect {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export type SelectionListener = (selected: ReadonlySet<number>) => void;

export class SelectionStore {
  private validRows: Set<number>;
  private current = new Set<number>();
  private brushRects = new Map<string, BrushRect>();
  private listeners = new Set<SelectionListener>();

  constructor(validRows: Iterable<number> = []) {
    this.validRows = new Set(validRows);
  }

  /** Replace the set of rows a selection may reference (new dataset). */
  resetRows(validRows: Iterable<number>): void {
    this.validRows = new Set(validRows);
    this.clear();
  }

  get selected(): ReadonlySet<number> {
    return this.current;
  }

  brushOf(chartId: string): BrushRect | null {
    return this.brushRects.get(chartId) ?? null;
  }

  /** Apply a brush: rows inside the region become the shared selection. */
  setBrush(chartId: string, rect: BrushRect | null, rows: number[]): void {
    if (rect === null || rows.length === 0) {
      this.clearBrush(chartId);
      return;
    }
    const filtered = rows.filter((r) => this.validRows.has(r));
    this.brushRects.clear(); // older brushes on other charts are stale
    this.brushRects.set(chartId, rect);
    this.current = new Set(filtered);
    this.emit();
  }

  clearBrush(chartId: string): void {
    this.brushRects.delete(chartId);
    this.clear();
  }

  clear(): void {
    if (this.current.size === 0 && this.brushRects.size === 0) return;
    this.brushRects.clear();
    this.current = new Set();
    this.emit();
  }

  subscribe(listener: SelectionListener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.current);
  }
}
