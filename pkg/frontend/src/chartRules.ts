/** The variable-kind to chart-type rule table.
 *
 * One continuous variable: histogram. One categorical: level counts.
 * Two continuous: scatter. Continuous paired with categorical: average
 * bar chart, or a vertical per-level scatter when the points toggle is
 * on. Two categorical variables have no rule and are rejected.
 */

export type VariableKind = "continuous" | "categorical";
export type ChartType =
  | "histogram"
  | "bar_counts"
  | "scatter"
  | "group_means"
  | "group_points";
export type MixedMode = "aggregated" | "points";

export class UnsupportedChartError extends Error {}

export function chartTypeFor(
  kinds: VariableKind[],
  mode: MixedMode = "aggregated",
): ChartType {
  if (kinds.length === 1) {
    return kinds[0] === "continuous" ? "histogram" : "bar_counts";
  }
  if (kinds.length === 2) {
    const [a, b] = kinds;
    if (a === "continuous" && b === "continuous") return "scatter";
    if (a === "categorical" && b === "categorical") {
      throw new UnsupportedChartError(
        "no chart rule exists for two categorical variables",
      );
    }
    return mode === "points" ? "group_points" : "group_means";
  }
  throw new UnsupportedChartError("select one or two variables");
}

/** Whether the mixed-pair aggregated/points toggle applies. */
export function hasModeToggle(kinds: VariableKind[]): boolean {
  return (
    kinds.length === 2 &&
    kinds.includes("continuous") &&
    kinds.includes("categorical")
  );
}
