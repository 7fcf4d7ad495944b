"""Constrained Pareto dominance, non-dominated sorting and crowding."""

from __future__ import annotations

import numpy as np


def _key(e):
    if hasattr(e, "f1"):
        return (e.f1, e.f2_neg), e.cv
    *f, cv = e
    return tuple(f), cv


def constrained_dominates(a, b) -> bool:
    """Deb's feasibility-first dominance.

    ``a`` and ``b`` are evaluations (anything with ``f1``, ``f2_neg`` and
    ``cv``) or plain ``(f1, f2_neg, cv)`` tuples.
    """
    fa, ca = _key(a)
    fb, cb = _key(b)
    if ca <= 0 < cb:
        return True
    if ca > 0 and cb > 0:
        return ca < cb
    if ca > 0:
        return False
    return all(x <= y for x, y in zip(fa, fb)) and any(x < y for x, y in zip(fa, fb))


def pareto_matrix(F) -> np.ndarray:
    """``M[i, j]`` is true when ``F[i]`` Pareto-dominates ``F[j]``."""
    F = np.asarray(F, dtype=float)
    le = np.ones((len(F), len(F)), dtype=bool)
    lt = np.zeros_like(le)
    for j in range(F.shape[1]):
        a, b = F[:, j, None], F[None, :, j]
        le &= a <= b
        lt |= a < b
    return le & lt


def dominance_matrix(F, cv=None) -> np.ndarray:
    """``M[i, j]`` is true when individual ``i`` constrained-dominates ``j``."""
    F = np.asarray(F, dtype=float)
    cv = np.zeros(len(F)) if cv is None else np.asarray(cv, dtype=float)
    feas = cv <= 0
    fi, fj = feas[:, None], feas[None, :]
    return ((fi & ~fj)
            | (~fi & ~fj & (cv[:, None] < cv[None, :]))
            | (fi & fj & pareto_matrix(F)))


def _peel(dom: np.ndarray) -> list[np.ndarray]:
    count = dom.sum(axis=0)
    remaining = np.ones(len(dom), dtype=bool)
    fronts = []
    while remaining.any():
        front = np.flatnonzero(remaining & (count == 0))
        fronts.append(front)
        remaining[front] = False
        count = count - dom[front].sum(axis=0)
    return fronts


def non_dominated_sort(F, cv=None) -> list[np.ndarray]:
    """Partition indices into successive constrained non-dominated fronts.

    Feasible individuals are peeled by Pareto dominance; infeasible ones
    follow, one front per distinct violation level.
    """
    F = np.asarray(F, dtype=float)
    cv = np.zeros(len(F)) if cv is None else np.asarray(cv, dtype=float)
    feas = np.flatnonzero(cv <= 0)
    fronts = [feas[f] for f in _peel(pareto_matrix(F[feas]))] if feas.size else []
    infeas = np.flatnonzero(cv > 0)
    if infeas.size:
        levels, inverse = np.unique(cv[infeas], return_inverse=True)
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(len(levels) + 1))
        fronts.extend(infeas[order[bounds[i]:bounds[i + 1]]] for i in range(len(levels)))
    return fronts


def crowding_distance(F) -> np.ndarray:
    """NSGA-II crowding distance of the points of one front."""
    F = np.asarray(F, dtype=float)
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        col = F[order, j]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = col[-1] - col[0]
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist
