import { describe, expect, it } from "vitest";

import {
  chartTypeFor,
  hasModeToggle,
  UnsupportedChartError,
  VariableKind,
} from "../src/chartRules.js";

const C: VariableKind = "continuous";
const K: VariableKind = "categorical";

describe("chart-type rule table", () => {
  it("maps every variable-kind combination to its chart", () => {
    // the full rule table: single variables and all four pairs
    expect(chartTypeFor([C])).toBe("histogram");
    expect(chartTypeFor([K])).toBe("bar_counts");
    expect(chartTypeFor([C, C])).toBe("scatter");
    expect(chartTypeFor([C, K])).toBe("group_means");
    expect(chartTypeFor([K, C])).toBe("group_means");
    expect(() => chartTypeFor([K, K])).toThrow(UnsupportedChartError);
  });

  it("mixed pairs honor the points toggle", () => {
    expect(chartTypeFor([C, K], "points")).toBe("group_points");
    expect(chartTypeFor([K, C], "points")).toBe("group_points");
    // the toggle changes nothing for the other combinations
    expect(chartTypeFor([C, C], "points")).toBe("scatter");
    expect(chartTypeFor([C], "points")).toBe("histogram");
  });

  it("rejects empty and oversized selections", () => {
    expect(() => chartTypeFor([])).toThrow(UnsupportedChartError);
    expect(() => chartTypeFor([C, C, C])).toThrow(UnsupportedChartError);
  });

  it("exposes the toggle only for mixed pairs", () => {
    expect(hasModeToggle([C, K])).toBe(true);
    expect(hasModeToggle([K, C])).toBe(true);
    expect(hasModeToggle([C, C])).toBe(false);
    expect(hasModeToggle([K])).toBe(false);
  });
});
