"""
Checking NSGA-II against brute force
====================================

The two-bus fixture has only four genes, so every genome on a 5-level grid
can be evaluated.  A short NSGA-II run should land on the same trade-offs.
"""

import numpy as np

from codnopt import RunConfig, bundled_path, load_scenario, nsga2_run, oracle_front
from codnopt.metrics import coverage_gaps

sc = load_scenario(bundled_path("tiny2.json"))
oracle = oracle_front(sc, levels=5)
print("oracle front (f1, -DER kWh):")
print(oracle.points)

res = nsga2_run(sc, RunConfig(pop_size=20, generations=50, seed=42))
print(len(res.final_front), "points found in", round(res.wall_time, 3), "s")

gaps, ok = coverage_gaps(oracle, res.final_front.points, eps=0.02)
for p, g in zip(oracle.points, gaps):
    print(np.round(p, 4), "gap", round(float(g), 4))
print("all covered:", bool(ok.all()))
