from __future__ import annotations

import math
import time

import numpy as np

from ..scenario import Scenario
from .core import Engine, RunConfig, RunResult
from .dominance import dominance_matrix


def _normalized_distances(F) -> np.ndarray:
    lo, hi = F.min(axis=0), F.max(axis=0)
    Z = (F - lo) / np.where(hi > lo, hi - lo, 1.0)
    d = np.sqrt(((Z[:, None, :] - Z[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(d, np.inf)
    return d


def strength_and_raw(F, cv=None):
    """Strength ``S(i)`` (how many ``i`` dominates) and raw fitness ``R(i)``."""
    dom = dominance_matrix(F, cv)
    S = dom.sum(axis=1)
    R = S @ dom
    return S, R


def spea2_fitness(F, cv=None):
    """Raw fitness plus k-th nearest-neighbour density, ``k = floor(sqrt(n))``.

    Returns ``(fitness, distance_matrix)``; non-dominated individuals have
    fitness below one.
    """
    F = np.asarray(F, dtype=float)
    n = len(F)
    _, R = strength_and_raw(F, cv)
    d = _normalized_distances(F)
    if n > 1:
        k = min(max(1, math.isqrt(n)), n - 1)
        sigma = np.partition(d, k - 1, axis=1)[:, k - 1]
    else:
        sigma = np.zeros(n)
    return R + 1.0 / (sigma + 2.0), d


def truncate(d: np.ndarray, size: int) -> np.ndarray:
    """Iteratively drop the member closest to its neighbours until ``size`` remain.

    ``d`` is the pairwise distance matrix of the candidates (``inf`` on the
    diagonal).  Ties on the nearest distance are resolved on the next
    nearest, and so on; full ties remove the lower index.
    """
    alive = np.arange(len(d))
    sub = d.copy()
    while len(alive) > size:
        nearest = sub.min(axis=1)
        cand = np.flatnonzero(nearest == nearest.min())
        if len(cand) > 1:
            rows = np.sort(sub[cand], axis=1)
            cand = cand[np.lexsort(rows.T[::-1])]
        drop = cand[0]
        alive = np.delete(alive, drop)
        sub = np.delete(np.delete(sub, drop, axis=0), drop, axis=1)
    return alive


def environmental_selection(F, cv, size: int):
    """Indices forming the next archive, and their fitness values."""
    fit, d = spea2_fitness(F, cv)
    nd = np.flatnonzero(fit < 1.0)
    if len(nd) > size:
        keep = nd[truncate(d[np.ix_(nd, nd)], size)]
    elif len(nd) < size:
        dominated = np.flatnonzero(fit >= 1.0)
        fill = dominated[np.argsort(fit[dominated], kind="stable")[: size - len(nd)]]
        keep = np.concatenate([nd, fill])
    else:
        keep = nd
    return keep, fit[keep]


class Spea2(Engine):
    def initialize(self) -> None:
        X = self.random_population(self.config.pop_size)
        F, cv = self.evaluate(X)
        self._select(X, F, cv)
        self.record()

    def _select(self, X, F, cv) -> None:
        keep, fit = environmental_selection(F, cv, self.config.archive_size)
        self.X, self.F, self.cv, self.fit = X[keep], F[keep], cv[keep], fit

    def tournament(self) -> np.ndarray:
        n = self.config.pop_size
        a, b = self.rng.integers(0, len(self.X), size=(2, n))
        return np.where(self.fit[b] < self.fit[a], b, a)

    def step(self) -> None:
        kids = self.vary(self.X[self.tournament()])
        kF, kcv = self.evaluate(kids)
        self._select(np.vstack([self.X, kids]), np.vstack([self.F, kF]),
                     np.concatenate([self.cv, kcv]))
        self.record()


def spea2_run(scenario: Scenario, config: RunConfig) -> RunResult:
    """Strength Pareto EA with fixed-size archive and constrained dominance."""
    if config.algorithm != "spea2":
        raise ValueError("config.algorithm must be 'spea2'")
    start = time.perf_counter()
    eng = Spea2(scenario, config)
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
