"""Run configuration, results and the feasible elite archive."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..evaluate import Evaluation, PopulationEvaluator, evaluate
from ..metrics import FrontSet, pareto_filter
from ..scenario import Scenario
from .operators import mutate_population, sbx_population

ALGORITHMS = ("nsga2", "spea2")


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "nsga2"
    pop_size: int = 100
    generations: int = 1000
    archive_size: int = 100
    crossover_prob: float = 0.9
    crossover_eta: float = 15.0
    mutation_prob: float | None = None  # None means 1 / n_genes
    mutation_eta: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.pop_size < 4 or self.pop_size % 2:
            raise ValueError("pop_size must be even and at least 4")
        if self.archive_size < 1:
            raise ValueError("archive_size must be positive")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        probs = [self.crossover_prob] + ([] if self.mutation_prob is None else [self.mutation_prob])
        if any(not 0 <= p <= 1 for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.crossover_eta <= 0 or self.mutation_eta <= 0:
            raise ValueError("distribution indices must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Individual:
    genome: np.ndarray
    eval: Evaluation
    rank: int = 0
    crowding: float = 0.0
    fitness: float = 0.0


@dataclass
class RunResult:
    """Outcome of one optimizer run.

    ``history[g]`` holds the objective vectors of the feasible elite front
    after generation ``g`` (``history[0]`` is the initial population).
    """

    final_front: FrontSet
    history: list[np.ndarray]
    wall_time: float
    config: RunConfig
    n_evaluations: int = 0
    extras: dict = field(default_factory=dict)

    def individuals(self, scenario: Scenario) -> list[Individual]:
        return [Individual(g, evaluate(g, scenario)) for g in self.final_front.genomes]


class EliteArchive:
    """Every feasible, mutually non-dominated solution seen so far.

    Only ever replaces points by ones that weakly dominate them, so the
    dominated region (and any hypervolume of it) cannot shrink.
    """

    def __init__(self, n_genes: int):
        self.front = FrontSet.empty(n_genes)

    def update(self, X, F, cv) -> None:
        ok = cv <= 0
        if not ok.any():
            return
        self.front = pareto_filter(
            np.vstack([self.front.points, F[ok]]), np.vstack([self.front.genomes, X[ok]])
        )

    def snapshot(self) -> np.ndarray:
        return self.front.points.copy()


class Engine:
    """State shared by both algorithms: RNG, evaluator, variation, archive."""

    def __init__(self, scenario: Scenario, config: RunConfig):
        self.scenario = scenario
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.evaluator = PopulationEvaluator(scenario)
        self.n_genes = scenario.n_genes
        self.p_m = (config.mutation_prob if config.mutation_prob is not None
                    else 1.0 / max(1, self.n_genes))
        self.archive = EliteArchive(self.n_genes)
        self.history: list[np.ndarray] = []
        self.n_evaluations = 0

    def evaluate(self, X):
        F, cv = self.evaluator(X)
        self.n_evaluations += len(X)
        self.archive.update(X, F, cv)
        return F, cv

    def random_population(self, n: int) -> np.ndarray:
        return self.rng.random((n, self.n_genes))

    def vary(self, parents: np.ndarray) -> np.ndarray:
        c = self.config
        kids = sbx_population(parents, c.crossover_eta, c.crossover_prob, self.rng)
        return mutate_population(kids, c.mutation_eta, self.p_m, self.rng)

    def record(self) -> None:
        self.history.append(self.archive.snapshot())
