from __future__ import annotations

import time

import numpy as np

from ..scenario import Scenario
from .core import Engine, RunConfig, RunResult
from .dominance import crowding_distance, non_dominated_sort


def survival(F, cv, n: int):
    """Pick ``n`` survivors by front, breaking the last front on crowding.

    Returns ``(indices, rank, crowding)`` for the survivors.  Ranks carry
    over unchanged because every front ahead of a survivor is kept whole.
    """
    keep, rank, crowd = [], [], []
    for r, front in enumerate(non_dominated_sort(F, cv)):
        room = n - len(keep)
        if room <= 0:
            break
        cd = crowding_distance(F[front])
        if len(front) > room:
            order = np.argsort(-cd, kind="stable")[:room]
            front, cd = front[order], cd[order]
        keep.extend(front)
        rank.extend([r] * len(front))
        crowd.extend(cd)
    return np.asarray(keep), np.asarray(rank), np.asarray(crowd)


class Nsga2(Engine):
    def initialize(self) -> None:
        n = self.config.pop_size
        X = self.random_population(n)
        F, cv = self.evaluate(X)
        self._survive(X, F, cv)
        self.record()

    def _survive(self, X, F, cv) -> None:
        keep, self.rank, self.crowd = survival(F, cv, self.config.pop_size)
        self.X, self.F, self.cv = X[keep], F[keep], cv[keep]

    def tournament(self) -> np.ndarray:
        n = self.config.pop_size
        a, b = self.rng.integers(0, n, size=(2, n))
        better_b = (self.rank[b] < self.rank[a]) | (
            (self.rank[b] == self.rank[a]) & (self.crowd[b] > self.crowd[a])
        )
        return np.where(better_b, b, a)

    def step(self) -> None:
        kids = self.vary(self.X[self.tournament()])
        kF, kcv = self.evaluate(kids)
        self._survive(np.vstack([self.X, kids]), np.vstack([self.F, kF]),
                      np.concatenate([self.cv, kcv]))
        self.record()


def nsga2_run(scenario: Scenario, config: RunConfig) -> RunResult:
    """Elitist non-dominated sorting GA with constrained dominance."""
    if config.algorithm != "nsga2":
        raise ValueError("config.algorithm must be 'nsga2'")
    start = time.perf_counter()
    eng = Nsga2(scenario, config)
    eng.initialize()
    for _ in range(config.generations):
        eng.step()
    return RunResult(
        final_front=eng.archive.front,
        history=eng.history,
        wall_time=time.perf_counter() - start,
        config=config,
        n_evaluations=eng.n_evaluations,
    )
