"""
Voltage rise and drop on a radial feeder
========================================

A two-bus line first, then a generated 12-bus feeder over one day.
"""

import numpy as np

from codnopt import Branch, Bus, FeederNetwork, bundled_path, evaluate, load_scenario, solve_distflow

# two buses, one line; injections are per-unit, positive means export
line = FeederNetwork([Bus(0), Bus(1)], [Branch(0, 1, r=0.01, x=0.02)])
print("load   ->", solve_distflow(line, [0, -1.0], [0, -0.5]).voltages)
print("export ->", solve_distflow(line, [0, 1.0], [0, 0.0]).voltages)

sc = load_scenario(bundled_path("feeder12.json"))
print(sc.n_buses, "buses,", len(sc.ders), "PV sites,", len(sc.batteries), "batteries")

# batteries idle (gene 0.5), PV fully used (gene 1.0)
n_bat = sc.horizon_t * len(sc.batteries)
genome = np.r_[np.full(n_bat, 0.5), np.ones(sc.n_genes - n_bat)]
ev = evaluate(genome, sc)

np.set_printoptions(precision=3, suppress=True, linewidth=120)
print("hour  min V  max V  grid kW")
for t in range(0, 24, 3):
    print(f"{t:4d}  {ev.voltages[t].min():.3f}  {ev.voltages[t].max():.3f}  {ev.grid_p[t]:8.1f}")
print("f1 =", round(ev.f1, 3), " DER energy =", -ev.f2_neg, "kWh", " violation =", round(ev.cv, 4))
