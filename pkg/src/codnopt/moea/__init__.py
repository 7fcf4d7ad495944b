"""NSGA-II and SPEA-2 with constrained dominance on the unit box."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

from ..scenario import Scenario
from .core import ALGORITHMS, EliteArchive, Individual, RunConfig, RunResult
from .dominance import (
    constrained_dominates,
    crowding_distance,
    dominance_matrix,
    non_dominated_sort,
)
from .nsga2 import nsga2_run
from .operators import polynomial_mutation, sbx_crossover
from .spea2 import spea2_fitness, spea2_run, strength_and_raw


def run(scenario: Scenario, config: RunConfig) -> RunResult:
    if config.algorithm == "nsga2":
        return nsga2_run(scenario, config)
    return spea2_run(scenario, config)


def worker_count(requested: int | None = None) -> int:
    """Worker cap from ``CODNOPT_THREADS`` (0 or unset means one per CPU)."""
    if requested is None:
        requested = int(os.environ.get("CODNOPT_THREADS", "0") or 0)
    return requested if requested > 0 else (os.cpu_count() or 1)


def _run_pair(args):
    return run(*args)


def run_batch(jobs, workers: int | None = None) -> list[RunResult]:
    """Run independent ``(scenario, config)`` jobs, in parallel when allowed.

    Results come back in job order and are identical to sequential runs.
    """
    jobs = list(jobs)
    workers = min(worker_count(workers), len(jobs)) if jobs else 1
    if workers <= 1:
        return [run(sc, cfg) for sc, cfg in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_pair, jobs))


__all__ = [
    "ALGORITHMS",
    "EliteArchive",
    "Individual",
    "RunConfig",
    "RunResult",
    "constrained_dominates",
    "crowding_distance",
    "dominance_matrix",
    "non_dominated_sort",
    "nsga2_run",
    "polynomial_mutation",
    "run",
    "run_batch",
    "sbx_crossover",
    "spea2_fitness",
    "spea2_run",
    "strength_and_raw",
    "worker_count",
]
