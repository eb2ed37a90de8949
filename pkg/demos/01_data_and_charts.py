"""Load a CSV, inspect inferred column kinds, and build chart payloads.

Run from the repository root:  python3 demos/01_data_and_charts.py
"""

from statquery import chart_data, load_csv, new_session
from statquery.flights import FLIGHT_SYNONYMS
from statquery.session import attach_dataset

csv_text = open("fixtures/flights.csv").read()
dataset = load_csv(csv_text, source_name="flights.csv")

print(f"loaded {dataset.source_name}: {dataset.n_rows} rows")
for column in dataset.columns:
    extra = f" levels={list(column.levels)}" if column.levels else ""
    print(f"  {column.name:10s} {column.kind}{extra}")

# 'stops' is numeric in the file but has only three distinct integer
# values, so it is usable as a grouping variable; 'days_left' is also
# integer-valued but with dozens of distinct values stays continuous.

session = new_session(synonyms=FLIGHT_SYNONYMS)
attach_dataset(session, csv_text, source_name="flights.csv")

print("\none continuous variable -> histogram (Sturges bins)")
hist = chart_data(session, ["price"])
for lo, hi, count in zip(hist["bin_edges"], hist["bin_edges"][1:], hist["counts"]):
    print(f"  [{lo:8.2f}, {hi:8.2f})  {'#' * (count // 2)} {count}")

print("\none categorical variable -> level counts")
bars = chart_data(session, ["class"])
for level, count in zip(bars["levels"], bars["counts"]):
    print(f"  {level:10s} {count}")

print("\ntwo continuous variables -> scatter (first three points, row-indexed)")
scatter = chart_data(session, ["duration", "price"])
for point in scatter["points"][:3]:
    print(f"  row {point['row']:3d}  duration={point['x']:6.2f}  price={point['y']:8.2f}")

print("\ncontinuous + categorical -> per-level means (or points with mode='points')")
means = chart_data(session, ["class", "price"])
for level, mean, count in zip(means["levels"], means["means"], means["counts"]):
    print(f"  {level:10s} mean price {mean:8.2f}  (n={count})")
