"""Command-line front end: ``codnopt run|compare|oracle|gen``.

Exit codes: 0 success, 1 bad flags or parameters, 2 scenario or artifact
problems, 3 oracle grid too large, 4 oracle coverage gap.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .evaluate import evaluate, objective_names
from .metrics import (
    OracleTooLarge,
    attainment_surfaces,
    coverage_gaps,
    hypervolume_2d,
    is_nested,
    normalize,
    objective_bounds,
    oracle_front,
    read_front_csv,
    voltage_stats,
    write_eaf_csv,
    write_front_csv,
    write_stats_json,
)
from .moea import ALGORITHMS, RunConfig, RunResult, run_batch
from .scenario import Scenario, ScenarioError, SynthParams, generate_synthetic, load_scenario, save_scenario

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_TOO_LARGE, EXIT_GAP = 0, 1, 2, 3, 4

ARTIFACTS = {
    "front": "front.csv",
    "history": "history.csv",
    "soc": "soc.csv",
    "stats": "stats.json",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default; bad flags are exit 1 here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="codnopt", description="Battery scheduling on radial feeders.")
    parser.add_argument("--version", action="version", version=f"codnopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="optimize one scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--pop", type=int, default=100)
    p.add_argument("--gens", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-bess", action="store_true", help="drop all batteries")
    p.add_argument("--repeat", type=_positive(int), default=1,
                   help="run seeds seed..seed+N-1 into OUT/seed_<s>/")

    p = sub.add_parser("compare", help="compare groups of finished runs")
    p.add_argument("--runs", action="append", nargs="+", required=True, metavar="DIR",
                   help="run directories of one group; repeat the flag per group")
    p.add_argument("--label", action="append", default=None,
                   help="group name, one per --runs in the same order")
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle", help="check a front against grid enumeration")
    p.add_argument("--scenario", required=True)
    p.add_argument("--levels", type=_positive(int), required=True)
    p.add_argument("--front", required=True)
    p.add_argument("--eps", type=float, default=0.0)

    p = sub.add_parser("gen", help="write a synthetic scenario")
    p.add_argument("--buses", type=int, default=118)
    p.add_argument("--prosumer-ratio", type=float, default=0.4)
    p.add_argument("--peak-p", type=float, default=22709.7)
    p.add_argument("--peak-q", type=float, default=17041.1)
    p.add_argument("--batteries", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    return parser


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def history_hypervolumes(history) -> np.ndarray:
    """Per-generation hypervolume under one normalization over the whole run."""
    filled = [h for h in history if len(h)]
    if not filled:
        return np.zeros(len(history))
    lo, hi = objective_bounds(*filled)
    return np.array([hypervolume_2d(normalize(h, lo, hi)) if len(h) else 0.0 for h in history])


def extreme_indices(points) -> dict[str, int]:
    """Front members minimizing each objective, keyed by objective label."""
    pts = np.asarray(points)
    return {name: int(np.lexsort((pts[:, 1 - j], pts[:, j]))[0])
            for j, name in enumerate(objective_names())}


def _write_history(path, history) -> None:
    hv = history_hypervolumes(history)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation", "hv", "front_size"])
        for g, (h, v) in enumerate(zip(history, hv)):
            w.writerow([g, repr(float(v)), len(h)])


def _write_soc(path, scenario: Scenario, extremes) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["extreme", "battery", "bus", "step", "energy_kwh", "soc", "p_chg_kw", "p_dis_kw"])
        for name, ev in extremes.items():
            for b, (spec, tr) in enumerate(zip(scenario.batteries, ev.trajectories)):
                for t in range(len(tr.energy)):
                    last = t == len(tr.p_chg)
                    w.writerow([name, b, spec.bus, t, repr(float(tr.energy[t])), repr(float(tr.soc[t])),
                                "" if last else repr(float(tr.p_chg[t])),
                                "" if last else repr(float(tr.p_dis[t]))])


def write_run(out: Path, result: RunResult, scenario: Scenario, scenario_path: str,
              no_bess: bool) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    front = result.final_front
    write_front_csv(out / ARTIFACTS["front"], front.points)
    _write_history(out / ARTIFACTS["history"], result.history)

    extremes = {}
    if len(front):
        extremes = {name: evaluate(front.genomes[i], scenario)
                    for name, i in extreme_indices(front.points).items()}
    _write_soc(out / ARTIFACTS["soc"], scenario, extremes)
    if extremes:
        write_stats_json(out / ARTIFACTS["stats"], voltage_stats(extremes[objective_names()[0]]))
    else:
        print("warning: no feasible solution found", file=sys.stderr)
        (out / ARTIFACTS["stats"]).write_text(
            json.dumps({"mean": None, "std": None, "median": None}, indent=2) + "\n")

    manifest = {
        "scenario": scenario_path,
        "no_bess": no_bess,
        "n_batteries": len(scenario.batteries),
        "config": result.config.to_dict(),
        "seed": result.config.seed,
        "artifacts": dict(ARTIFACTS),
        "front_size": len(front),
        "n_evaluations": result.n_evaluations,
        "wall_time": result.wall_time,
        "version": __version__,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def _load(path) -> Scenario:
    try:
        return load_scenario(path)
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror or exc}") from exc


def cmd_run(args) -> int:
    scenario = _load(args.scenario)
    if args.no_bess:
        scenario = scenario.without_batteries()
    try:
        configs = [RunConfig(algorithm=args.algo, pop_size=args.pop, generations=args.gens,
                             seed=args.seed + k) for k in range(args.repeat)]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    results = run_batch([(scenario, c) for c in configs])
    out = Path(args.out)
    for cfg, res in zip(configs, results):
        target = out if args.repeat == 1 else out / f"seed_{cfg.seed}"
        write_run(target, res, scenario, args.scenario, args.no_bess)
        print(f"{target}: {len(res.final_front)} front points in {res.wall_time:.1f} s")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def _read_run(run_dir: Path):
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.is_file():
        raise ScenarioError(f"{run_dir}: missing manifest.json")
    try:
        manifest = json.loads(manifest_path.read_text())
        front_path = run_dir / manifest["artifacts"]["front"]
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"{manifest_path}: unreadable manifest") from exc
    if not front_path.is_file():
        raise ScenarioError(f"{run_dir}: missing {front_path.name}")
    points, _ = read_front_csv(front_path)
    return manifest, points


def _group_label(manifests) -> str:
    algo = manifests[0]["config"]["algorithm"]
    with_bess = any(m["n_batteries"] for m in manifests)
    return f"{algo}-{'bess' if with_bess else 'nobess'}"


def cmd_compare(args) -> int:
    groups = args.runs
    if args.label is not None and len(args.label) != len(groups):
        raise UsageError("give one --label per --runs group")

    loaded = []
    for dirs in groups:
        runs = [_read_run(Path(d)) for d in dirs]
        algos = {m["config"]["algorithm"] for m, _ in runs}
        if len(algos) > 1:
            raise UsageError(f"group mixes algorithms {sorted(algos)}")
        loaded.append(runs)

    labels = list(args.label) if args.label else [_group_label([m for m, _ in r]) for r in loaded]
    if len(set(labels)) < len(labels):
        labels = [f"{name}-{i}" for i, name in enumerate(labels)]

    fronts = [pts for runs in loaded for _, pts in runs]
    nonempty = [f for f in fronts if len(f)]
    if not nonempty:
        raise ScenarioError("no run has a feasible front")
    lo, hi = objective_bounds(*nonempty)
    hv = [hypervolume_2d(normalize(f, lo, hi)) if len(f) else 0.0 for f in fronts]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary, k = [], 0
    with open(out / "hv.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "run", "seed", "hv"])
        for label, dirs, runs in zip(labels, groups, loaded):
            group_hv = hv[k:k + len(runs)]
            k += len(runs)
            for d, (m, _), v in zip(dirs, runs, group_hv):
                w.writerow([label, d, m["seed"], repr(float(v))])
            surfaces = attainment_surfaces([pts for _, pts in runs])
            write_eaf_csv(out / f"eaf_{label}.csv", surfaces)
            summary.append({
                "label": label,
                "algorithm": runs[0][0]["config"]["algorithm"],
                "n_runs": len(runs),
                "n_batteries": runs[0][0]["n_batteries"],
                "median_hv": float(np.median(group_hv)),
                "nested": bool(is_nested(surfaces)),
                "eaf": f"eaf_{label}.csv",
            })

    best = max(summary, key=lambda g: g["median_hv"])
    ties = [g["label"] for g in summary if g["median_hv"] == best["median_hv"]]
    report = {
        "groups": summary,
        "hv_dominant": best["label"] if len(ties) == 1 else None,
        "normalization": {"lo": lo.tolist(), "hi": hi.tolist()},
    }
    (out / "comparison.json").write_text(json.dumps(report, indent=2) + "\n")
    for g in summary:
        print(f"{g['label']}: median HV {g['median_hv']:.4f} over {g['n_runs']} runs, nested={g['nested']}")
    print(f"HV-dominant group: {report['hv_dominant']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle, gen
# ---------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    scenario = _load(args.scenario)
    try:
        points, _ = read_front_csv(args.front)
    except (OSError, ValueError) as exc:
        raise ScenarioError(f"{args.front}: {exc}") from exc
    try:
        oracle = oracle_front(scenario, args.levels)
    except OracleTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    gaps, covered = coverage_gaps(oracle, points, args.eps)
    print(f"oracle points: {len(oracle)}, covered within eps={args.eps}: {int(covered.sum())}")
    if covered.all():
        return EXIT_OK
    for (f1, f2), gap, ok in zip(oracle.points, gaps, covered):
        if not ok:
            print(f"  gap {gap:.6g} at f1={f1:.6g} f2_neg={f2:.6g}")
    return EXIT_GAP


def cmd_gen(args) -> int:
    try:
        params = SynthParams(n_buses=args.buses, prosumer_ratio=args.prosumer_ratio,
                             peak_load_p=args.peak_p, peak_load_q=args.peak_q,
                             n_batteries=args.batteries, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    save_scenario(generate_synthetic(params), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "oracle": cmd_oracle, "gen": cmd_gen}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
