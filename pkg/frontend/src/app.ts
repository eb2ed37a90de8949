/** Browser bootstrap: wires the API client, variable picker, linked
 * charts, query console, model panel, and hops player into the page.
 */

import { ApiError, SessionApi } from "./api.js";
import { chartTypeFor, hasModeToggle, UnsupportedChartError, VariableKind } from "./chartRules.js";
import { renderChart, ScatterChart } from "./charts.js";
import { QueryConsole, renderCard } from "./console.js";
import { HopsPlayer, renderHopsFrame } from "./hopsPlayer.js";
import { renderModelPanel } from "./modelPanel.js";
import { CurvesPayload, ModelSummary } from "./payloads.js";
import { SelectionStore } from "./selection.js";

interface ColumnInfo {
  name: string;
  kind: VariableKind;
}

const $ = <T extends HTMLElement>(selector: string): T => {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as T;
};

/** API origin: same-origin by default, overridable with ?api=http://... */
function apiBase(): string {
  if (typeof window === "undefined") return "";
  return new URLSearchParams(window.location.search).get("api") ?? "";
}

class App {
  api = new SessionApi(apiBase());
  selection = new SelectionStore();
  columns: ColumnInfo[] = [];
  picks: string[] = [];
  mode: "aggregated" | "points" = "aggregated";
  chartRaw: unknown = null;
  chartView: ReturnType<typeof renderChart>["view"] = null;
  linkedRaw: unknown = null; // companion categorical chart for linking
  console = new QueryConsole({
    postQuery: (text) => this.api.postQuery(text),
  });
  player: HopsPlayer | null = null;
  playerStop: (() => void) | null = null;

  async start(): Promise<void> {
    await this.api.createSession();
    $("#session-label").textContent = `session ${this.api.sessionId?.slice(0, 8)}`;

    $("#csv-input").addEventListener("change", (event) => {
      const input = event.target as HTMLInputElement;
      const file = input.files?.[0];
      if (file) void this.uploadFile(file);
    });

    const form = $("#query-form") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const box = $("#query-input") as HTMLInputElement;
      const text = box.value;
      box.value = "";
      void this.console.submit(text).then(() => this.afterQuery());
    });
    this.console.subscribe(() => this.renderConsole());

    $("#retry-button").addEventListener("click", () => {
      void this.console.retry().then(() => this.afterQuery());
    });
    $("#offer-yes").addEventListener("click", () => {
      void this.console.answerOffer(true).then(() => this.afterQuery());
    });
    $("#offer-no").addEventListener("click", () => {
      void this.console.answerOffer(false);
      this.renderConsole();
    });

    $("#mode-toggle").addEventListener("change", (event) => {
      this.mode = (event.target as HTMLInputElement).checked
        ? "points"
        : "aggregated";
      void this.refreshChart();
    });

    $("#hops-button").addEventListener("click", () => void this.loadHops());
    $("#hops-play").addEventListener("click", () => this.player?.play());
    $("#hops-pause").addEventListener("click", () => this.player?.pause());
    $("#hops-step").addEventListener("click", () => this.player?.step());

    this.selection.subscribe(() => this.renderCharts());
  }

  async uploadFile(file: File): Promise<void> {
    const text = await file.text();
    const summary = await this.api.uploadDataset(text, file.name);
    this.columns = summary.columns as ColumnInfo[];
    this.selection.resetRows(
      Array.from({ length: summary.n_rows }, (_, i) => i),
    );
    const picker = $("#variable-picker");
    picker.innerHTML = this.columns
      .map(
        (c) =>
          `<label><input type="checkbox" value="${c.name}"> ` +
          `${c.name} <em>(${c.kind})</em></label>`,
      )
      .join("");
    picker.querySelectorAll("input").forEach((box) =>
      box.addEventListener("change", () => {
        this.picks = Array.from(picker.querySelectorAll("input:checked")).map(
          (el) => (el as HTMLInputElement).value,
        );
        while (this.picks.length > 2) {
          const dropped = this.picks.shift();
          const el = picker.querySelector(`input[value="${dropped}"]`);
          if (el) (el as HTMLInputElement).checked = false;
        }
        void this.refreshChart();
      }),
    );
    $("#dataset-label").textContent = `${file.name}: ${summary.n_rows} rows`;
  }

  kindsOf(names: string[]): VariableKind[] {
    return names.map(
      (n) => this.columns.find((c) => c.name === n)?.kind ?? "continuous",
    );
  }

  async refreshChart(): Promise<void> {
    const slot = $("#chart-slot");
    if (this.picks.length === 0) {
      slot.innerHTML = `<p class="hint">Pick one or two variables.</p>`;
      return;
    }
    const kinds = this.kindsOf(this.picks);
    $("#mode-toggle-wrap").style.display = hasModeToggle(kinds) ? "" : "none";
    try {
      chartTypeFor(kinds, this.mode); // local rule check mirrors the server
    } catch (err) {
      if (err instanceof UnsupportedChartError) {
        slot.innerHTML = `<div class="error-card">${err.message}</div>`;
        return;
      }
      throw err;
    }
    this.chartRaw = await this.api.getChart(this.picks, this.mode);
    // companion chart: first categorical column not already on display,
    // so brushing has a linked target
    const companion = this.columns.find(
      (c) => c.kind === "categorical" && !this.picks.includes(c.name),
    );
    this.linkedRaw = companion ? await this.api.getChart([companion.name]) : null;
    this.renderCharts();
  }

  renderCharts(): void {
    const slot = $("#chart-slot");
    if (!this.chartRaw) return;
    const { html, view } = renderChart(this.chartRaw, this.selection.selected);
    this.chartView = view;
    slot.innerHTML = html;
    if (view instanceof ScatterChart) this.wireBrush(slot, view);

    const linkedSlot = $("#linked-slot");
    linkedSlot.innerHTML = this.linkedRaw
      ? renderChart(this.linkedRaw, this.selection.selected).html
      : "";
  }

  wireBrush(slot: HTMLElement, view: ScatterChart): void {
    const svg = slot.querySelector("svg");
    if (!svg) return;
    let start: { x: number; y: number } | null = null;
    const toData = (event: PointerEvent) => {
      const rect = svg.getBoundingClientRect();
      const px = ((event.clientX - rect.left) / rect.width) * 480;
      const py = ((event.clientY - rect.top) / rect.height) * 300;
      return { x: view.xScale.invert(px), y: view.yScale.invert(py) };
    };
    svg.addEventListener("pointerdown", (event) => {
      start = toData(event as PointerEvent);
    });
    svg.addEventListener("pointerup", (event) => {
      if (!start) return;
      const end = toData(event as PointerEvent);
      const rect = { x0: start.x, x1: end.x, y0: start.y, y1: end.y };
      const rows = view.rowsInRect(rect);
      this.selection.setBrush(view.id, rows.length ? rect : null, rows);
      start = null;
    });
  }

  async afterQuery(): Promise<void> {
    try {
      const model = (await this.api.getModel()) as ModelSummary;
      $("#model-panel").innerHTML = renderModelPanel(model);
    } catch (err) {
      if (err instanceof ApiError && err.errorClass === "NoModelError") {
        $("#model-panel").innerHTML = renderModelPanel(null);
      } else if (!(err instanceof ApiError)) {
        throw err;
      }
    }
  }

  renderConsole(): void {
    const feed = $("#transcript");
    feed.innerHTML = this.console.state.cards.map(renderCard).join("");
    feed.scrollTop = feed.scrollHeight;
    ($("#query-input") as HTMLInputElement).disabled = this.console.state.busy;
    $("#offer-bar").style.display = this.console.state.pendingOffer ? "" : "none";
    const toast = $("#toast");
    toast.style.display = this.console.state.toast ? "" : "none";
    toast.textContent = this.console.state.toast ?? "";
    $("#retry-button").style.display = this.console.state.failedQuery
      ? ""
      : "none";
  }

  async loadHops(): Promise<void> {
    const body = await this.api.getHops(100);
    const curves = body["curves"] as CurvesPayload | undefined;
    if (!curves) return;
    this.playerStop?.();
    this.player = new HopsPlayer(curves);
    const redraw = () =>
      ($("#hops-slot").innerHTML = renderHopsFrame(this.player!));
    this.player.onFrame(redraw);
    redraw();
    this.player.play();
  }
}

if (typeof document !== "undefined" && document.getElementById("chart-slot")) {
  const app = new App();
  void app.start();
}
