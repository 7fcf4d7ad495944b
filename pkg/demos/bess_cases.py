"""
With and without community batteries
====================================

Paired NSGA-II runs on the bundled 12-bus feeder.  Pass a generation count
on the command line for a quicker look, e.g. ``python bess_cases.py 200``.
"""

import sys

import numpy as np

from codnopt import RunConfig, bundled_path, evaluate, load_scenario, run
from codnopt.cli import extreme_indices
from codnopt.metrics import attainment_surfaces, normalized_hypervolumes, voltage_stats

gens = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
seeds = range(3)

sc = load_scenario(bundled_path("feeder12.json"))
cases = {"with BESS": sc, "without BESS": sc.without_batteries()}
results = {name: [run(s, RunConfig(generations=gens, seed=k)) for k in seeds]
           for name, s in cases.items()}

fronts = [r.final_front.points for rs in results.values() for r in rs]
hv = normalized_hypervolumes(fronts).reshape(len(cases), -1)
for (name, rs), h in zip(results.items(), hv):
    best = attainment_surfaces([r.final_front.points for r in rs]).best
    print(f"{name:13s} HV {np.round(h, 3)}  best f1 {best[:, 0].min():.3f}  best DER {-best[:, 1].min():.0f} kWh")

# voltage profile at the lowest-variance schedule of the first seed
for name, rs in results.items():
    f = rs[0].final_front
    i = extreme_indices(f.points)["voltage_variance"]
    mean, std, med = voltage_stats(evaluate(f.genomes[i], cases[name]))
    print(f"{name:13s} mean {mean:.4f}  std {std:.4f}  median {med:.4f}")

# SOC at both ends of the with-BESS front
f = results["with BESS"][0].final_front
for label, i in extreme_indices(f.points).items():
    ev = evaluate(f.genomes[i], sc)
    for b, tr in enumerate(ev.trajectories):
        print(f"{label:16s} battery {b}: SOC", np.round(tr.soc[::3], 2), f"throughput {tr.throughput:.0f} kWh")
