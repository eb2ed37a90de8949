/** Query console state: transcript cards, pending-offer affordances,
 * and retriable failures. At most one query is in flight; input stays
 * disabled until the response lands. A network failure never drops the
 * query silently: it is kept for retry and surfaced as a toast.
 */

import { NetworkError } from "./api.js";
import { TranscriptEntry } from "./payloads.js";

/** An offer is pending when the guidance asks a yes/no question. */
export function hasPendingOffer(entry: TranscriptEntry | null): boolean {
  if (!entry) return false;
  return entry.guidance.some((g) => g.trimEnd().endsWith("Would you like to try it?"));
}

export interface ConsoleState {
  busy: boolean;
  cards: TranscriptEntry[];
  pendingOffer: boolean;
  failedQuery: string | null; // retriable
  toast: string | null;
}

export interface QueryPort {
  postQuery(text: string): Promise<TranscriptEntry>;
}

export class QueryConsole {
  readonly state: ConsoleState = {
    busy: false,
    cards: [],
    pendingOffer: false,
    failedQuery: null,
    toast: null,
  };
  private listeners = new Set<(state: ConsoleState) => void>();

  constructor(private api: QueryPort) {}

  subscribe(listener: (state: ConsoleState) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** Submit one query; resolves to the system entry or null on failure. */
  async submit(text: string): Promise<TranscriptEntry | null> {
    const trimmed = text.trim();
    if (!trimmed || this.state.busy) return null;
    this.state.busy = true;
    this.state.toast = null;
    this.state.cards = [
      ...this.state.cards,
      {
        role: "user",
        text: trimmed,
        action: null,
        result: null,
        guidance: [],
        timestamp: Date.now() / 1000,
      },
    ];
    this.emit();
    try {
      const entry = await this.api.postQuery(trimmed);
      this.state.cards = [...this.state.cards, entry];
      this.state.pendingOffer = hasPendingOffer(entry);
      this.state.failedQuery = null;
      return entry;
    } catch (err) {
      if (err instanceof NetworkError) {
        // keep the query for retry; never silently dropped
        this.state.failedQuery = trimmed;
        this.state.toast = "Connection failed. The query was not sent - retry?";
        this.state.cards = this.state.cards.slice(0, -1);
        return null;
      }
      throw err;
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  /** Retry the last failed query, if any. */
  async retry(): Promise<TranscriptEntry | null> {
    const failed = this.state.failedQuery;
    if (!failed) return null;
    this.state.failedQuery = null;
    return this.submit(failed);
  }

  /** Answer a pending yes/no offer. */
  async answerOffer(accept: boolean): Promise<TranscriptEntry | null> {
    if (!this.state.pendingOffer) return null;
    this.state.pendingOffer = false;
    if (!accept) return null; // declining is local: the offer just lapses
    return this.submit("yes");
  }
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

/** HTML for one transcript card (tables included when present). */
export function renderCard(entry: TranscriptEntry): string {
  const cls = entry.role === "user" ? "card user" : "card system";
  let body = `<p>${esc(entry.text)}</p>`;
  const result = entry.result ?? {};
  const model = result["model"] as
    | { coefficients?: Record<string, unknown>[] }
    | undefined;
  if (model?.coefficients) {
    body += renderTable(model.coefficients, ["name", "estimate", "se", "t", "p"]);
  }
  const contrasts = result["contrasts"] as
    | { rows?: Record<string, unknown>[] }
    | undefined;
  if (contrasts?.rows) {
    body += renderTable(contrasts.rows, [
      "label",
      "estimate",
      "se",
      "t",
      "p_raw",
      "p_adj",
    ]);
  }
  const slopes = result["slopes"] as
    | { rows?: Record<string, unknown>[] }
    | undefined;
  if (slopes?.rows) {
    body += renderTable(slopes.rows, ["level", "slope", "se", "t", "p"]);
  }
  const guidance = entry.guidance
    .map((g) => `<p class="guidance">${esc(g)}</p>`)
    .join("");
  return `<div class="${cls}">${body}${guidance}</div>`;
}

function formatCell(value: unknown): string {
  if (typeof value === "number") {
    return Math.abs(value) >= 1e4 || (value !== 0 && Math.abs(value) < 1e-3)
      ? value.toExponential(3)
      : value.toPrecision(5);
  }
  return value === null || value === undefined ? "" : esc(String(value));
}

export function renderTable(
  rows: Record<string, unknown>[],
  columns: string[],
): string {
  const head = columns.map((c) => `<th>${esc(c)}</th>`).join("");
  const body = rows
    .map(
      (row) =>
        `<tr>${columns.map((c) => `<td>${formatCell(row[c])}</td>`).join("")}</tr>`,
    )
    .join("");
  return `<table class="result"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}
