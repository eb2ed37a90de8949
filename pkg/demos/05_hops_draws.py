"""Hypothetical-outcome-plot draws: seeded, reproducible fit ensembles.

Writes hops_curves.png when matplotlib is available.
Run from the repository root:  python3 demos/05_hops_draws.py
"""

import numpy as np

from statquery import draw_coefficients, fit_model, load_csv, parse_formula, predict_curves

dataset = load_csv(open("fixtures/flights.csv").read())
model = fit_model(parse_formula("price ~ duration"), dataset)

drawset = draw_coefficients(model, n_draws=100, seed=2718)
print(f"{drawset.n_draws} draws from N(beta, cov_beta), seed={drawset.seed}, "
      f"rng={drawset.algorithm}")
print(f"point estimate: {np.round(model.beta, 3)}")
print(f"draw mean:      {np.round(drawset.draws.mean(axis=0), 3)}")
print(f"draw sd:        {np.round(drawset.draws.std(axis=0), 3)}")

again = draw_coefficients(model, n_draws=100, seed=2718)
print(f"same seed reproduces draws bit-for-bit: {np.array_equal(drawset.draws, again.draws)}")

curves = predict_curves(drawset, dataset, "duration")
print(f"\n{curves.curves.shape[0]} curves over a {len(curves.grid)}-point "
      f"duration grid [{curves.grid[0]:.2f}, {curves.grid[-1]:.2f}]")
mid = len(curves.grid) // 2
spread = np.percentile(curves.curves[:, mid], [5, 50, 95])
print(f"predicted price at duration={curves.grid[mid]:.2f}: "
      f"5%={spread[0]:.1f} 50%={spread[1]:.1f} 95%={spread[2]:.1f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the plot")
else:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for row in curves.curves:
        ax.plot(curves.grid, row, color="tab:blue", alpha=0.08)
    ax.plot(curves.grid, curves.point_estimate, color="black", lw=2,
            label="point estimate")
    ax.set_xlabel("duration (h)")
    ax.set_ylabel("predicted price")
    ax.set_title(f"100 plausible fits (seed {drawset.seed})")
    ax.legend()
    fig.tight_layout()
    fig.savefig("hops_curves.png", dpi=120)
    print("wrote hops_curves.png (animate by cycling the curves)")
