"""Cooperation on the three-link channel at 12 dB.

The Pareto search maximizes the sum rate and is free to starve a link; the
Nash bargaining search maximizes the product of gains over a fallback point
and keeps the links close to each other. Runs take a few seconds each.

    python demos/pareto_and_bargaining.py
"""
import numpy as np

from powergame import bundled_config
from powergame.experiments import fairness_table, run_job

config = bundled_config("example1")
rows = []
for seed in range(3):
    for algorithm in ("pareto", "nb"):
        row = run_job(config, 12, seed, algorithm).row
        rows.append(row)
        print(f"seed {seed} {algorithm:>6}: per-user rates {np.round(row.rates, 3)}  sum {row.sum_rate:.3f}  "
              f"settled after {row.iterations} slots")

print()
print(fairness_table(rows))
