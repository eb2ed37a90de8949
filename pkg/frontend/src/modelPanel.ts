/** Model panel: formula text, family, AIC, and the coefficient table.
 * The 0.05 marker is explicitly labeled a convention, not a verdict.
 */

import { renderTable } from "./console.js";
import { ModelSummary } from "./payloads.js";

export function renderModelPanel(model: ModelSummary | null): string {
  if (!model) {
    return `<div class="model-panel empty">No model fitted yet.</div>`;
  }
  const rows = model.coefficients.map((c) => ({
    name: c.name,
    estimate: c.estimate,
    se: c.se,
    t: c.t,
    p: c.p,
    "": c.p !== null && c.p < 0.05 ? "*" : "",
  }));
  const aic = model.aic === null ? "undefined" : model.aic.toFixed(2);
  return (
    `<div class="model-panel">` +
    `<code class="formula">${model.formula}</code>` +
    `<span class="family">family: ${model.family}</span>` +
    `<span class="aic">AIC: ${aic}</span>` +
    renderTable(rows, ["name", "estimate", "se", "t", "p", ""]) +
    `<p class="footnote">* p &lt; 0.05, a conventional threshold &mdash; ` +
    `not a statement of practical importance.</p>` +
    `</div>`
  );
}
