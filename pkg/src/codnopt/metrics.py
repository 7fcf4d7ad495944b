"""Front-quality indicators, attainment surfaces and the brute-force oracle.

All objective pairs are ``(f1, f2_neg)`` and both are minimized.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .evaluate import Evaluation, PopulationEvaluator
from .scenario import Scenario

REF_POINT = (1.1, 1.1)
ORACLE_LIMIT = 10**7


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class FrontSet:
    """Mutually non-dominated feasible points, optionally with their genomes."""

    points: np.ndarray  # (n, 2)
    genomes: np.ndarray | None = None  # (n, D)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def empty(cls, n_genes: int | None = None) -> FrontSet:
        g = None if n_genes is None else np.empty((0, n_genes))
        return cls(np.empty((0, 2)), g)


def _points(front) -> np.ndarray:
    if isinstance(front, FrontSet):
        return front.points
    return np.asarray(front, dtype=float).reshape(-1, 2)


def pareto_filter(points, genomes=None) -> FrontSet:
    """Non-dominated subset of 2-D points; duplicates keep one representative."""
    pts = _points(points)
    if len(pts) == 0:
        return FrontSet(pts, None if genomes is None else np.asarray(genomes)[:0])
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    f2 = pts[order, 1]
    # a point survives if its f2 beats every point with smaller-or-equal f1
    prev_best = np.concatenate(([np.inf], np.minimum.accumulate(f2)[:-1]))
    keep = order[f2 < prev_best]
    return FrontSet(pts[keep], None if genomes is None else np.asarray(genomes)[keep])


def hypervolume_2d(front, ref_point=REF_POINT) -> float:
    """Exact area dominated by ``front`` and bounded by ``ref_point``."""
    pts = _points(front)
    ref = np.asarray(ref_point, dtype=float)
    if len(pts) == 0:
        return 0.0
    if np.any(pts >= ref):
        raise ValueError("every front point must strictly dominate the reference point")
    nd = pareto_filter(pts).points  # sorted by f1 ascending, f2 descending
    widths = np.diff(np.append(nd[:, 0], ref[0]))
    return float(np.sum(widths * (ref[1] - nd[:, 1])))


def objective_bounds(*fronts) -> tuple[np.ndarray, np.ndarray]:
    """Ideal and nadir corners over the union of the given point sets."""
    pts = [_points(f) for f in fronts]
    pts = [p for p in pts if len(p)]
    if not pts:
        return np.zeros(2), np.ones(2)
    allp = np.vstack(pts)
    return allp.min(axis=0), allp.max(axis=0)


def normalize(points, lo, hi) -> np.ndarray:
    span = np.where(hi > lo, hi - lo, 1.0)
    return (_points(points) - lo) / span


def normalized_hypervolumes(fronts, ref_point=REF_POINT) -> np.ndarray:
    """Hypervolume of each front after shared min-max normalization."""
    lo, hi = objective_bounds(*fronts)
    return np.array([hypervolume_2d(normalize(f, lo, hi), ref_point) for f in fronts])


# ---------------------------------------------------------------------------
# Attainment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttainmentSurfaces:
    """Best, median and worst attainment staircases of ``k`` runs.

    Each surface is stored as its minimal vertices sorted by ``f1``.
    """

    best: np.ndarray
    median: np.ndarray
    worst: np.ndarray
    k: int

    def levels(self) -> dict[int, np.ndarray]:
        return {1: self.best, -(-self.k // 2): self.median, self.k: self.worst}


def attainment_surface(fronts, level: int) -> np.ndarray:
    """Minimal points attained by at least ``level`` of the given fronts."""
    fronts = [_points(f) for f in fronts]
    if not 1 <= level <= len(fronts):
        raise ValueError("level must lie between 1 and the number of fronts")
    xs = np.unique(np.concatenate([f[:, 0] for f in fronts]))
    if xs.size == 0:
        return np.empty((0, 2))
    # best f2 each run reaches using points with f1 <= x
    reach = np.full((len(fronts), xs.size), np.inf)
    for r, f in enumerate(fronts):
        if len(f) == 0:
            continue
        order = np.argsort(f[:, 0], kind="stable")
        running = np.minimum.accumulate(f[order, 1])
        pos = np.searchsorted(f[order, 0], xs, side="right") - 1
        ok = pos >= 0
        reach[r, ok] = running[pos[ok]]
    h = np.sort(reach, axis=0)[level - 1]
    finite = np.isfinite(h)
    return pareto_filter(np.column_stack([xs[finite], h[finite]])).points


def attainment_surfaces(fronts) -> AttainmentSurfaces:
    k = len(fronts)
    if k < 1:
        raise ValueError("need at least one front")
    return AttainmentSurfaces(
        best=attainment_surface(fronts, 1),
        median=attainment_surface(fronts, -(-k // 2)),
        worst=attainment_surface(fronts, k),
        k=k,
    )


def attained(surface, points, tol: float = 0.0) -> np.ndarray:
    """Whether each point is weakly dominated by some vertex of ``surface``."""
    s = _points(surface)
    p = _points(points)
    if len(s) == 0:
        return np.zeros(len(p), dtype=bool)
    return np.all(s[None, :, :] <= p[:, None, :] + tol, axis=2).any(axis=1)


def is_nested(surfaces: AttainmentSurfaces) -> bool:
    return bool(attained(surfaces.best, surfaces.median).all()
                and attained(surfaces.median, surfaces.worst).all())


# ---------------------------------------------------------------------------
# Voltage statistics
# ---------------------------------------------------------------------------


def voltage_stats(evaluation: Evaluation | np.ndarray) -> tuple[float, float, float]:
    """Mean, population standard deviation and median of all voltage samples."""
    v = evaluation.voltages if isinstance(evaluation, Evaluation) else evaluation
    v = np.asarray(v, dtype=float).ravel()
    return float(v.mean()), float(v.std()), float(np.median(v))


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------


def oracle_front(scenario: Scenario, levels: int, chunk: int = 65536) -> FrontSet:
    """Pareto front of every feasible genome on a uniform grid.

    ``levels == 1`` places the single grid value at the gene midpoint.
    """
    D = scenario.n_genes
    if levels < 1:
        raise ValueError("levels must be at least 1")
    total = levels**D
    if total > ORACLE_LIMIT:
        raise OracleTooLarge(f"{levels}^{D} grid points exceed the limit of {ORACLE_LIMIT}")
    grid = np.array([0.5]) if levels == 1 else np.linspace(0.0, 1.0, levels)
    evaluator = PopulationEvaluator(scenario)

    pts, genomes = [np.empty((0, 2))], [np.empty((0, D))]
    radix = levels ** np.arange(D - 1, -1, -1)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = (idx[:, None] // radix) % levels
        X = grid[digits]
        F, cv = evaluator(X)
        ok = cv == 0.0
        cand = pareto_filter(np.vstack([pts[-1], F[ok]]), np.vstack([genomes[-1], X[ok]]))
        pts.append(cand.points)
        genomes.append(cand.genomes)
    return FrontSet(pts[-1], genomes[-1])


def coverage_gaps(oracle, front, eps: float = 0.0):
    """Additive epsilon gap of each oracle point against ``front``.

    Both sets are normalized over their union.  A gap ``<= eps`` means some
    front point is within ``eps`` of the oracle point in both objectives.
    """
    o, f = _points(oracle), _points(front)
    if len(o) == 0:
        return np.zeros(0), np.zeros(0, dtype=bool)
    if len(f) == 0:
        gaps = np.full(len(o), np.inf)
        return gaps, gaps <= eps
    lo, hi = objective_bounds(o, f)
    on, fn = normalize(o, lo, hi), normalize(f, lo, hi)
    gaps = (fn[None, :, :] - on[:, None, :]).max(axis=2).min(axis=1)
    return gaps, gaps <= eps + 1e-12


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def write_front_csv(path, points, cv=None) -> None:
    pts = _points(points)
    cv = np.zeros(len(pts)) if cv is None else np.asarray(cv, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f1", "f2_neg", "cv"])
        for (a, b), c in zip(pts, cv):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(c))])


def read_front_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(rows[0]) != {"f1", "f2_neg", "cv"}:
        raise ValueError(f"{path}: expected header f1,f2_neg,cv")
    pts = np.array([[float(r["f1"]), float(r["f2_neg"])] for r in rows]).reshape(-1, 2)
    cv = np.array([float(r["cv"]) for r in rows])
    return pts, cv


def write_eaf_csv(path, surfaces: AttainmentSurfaces) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "f1", "f2_neg"])
        for level, pts in surfaces.levels().items():
            for a, b in pts:
                w.writerow([level, repr(float(a)), repr(float(b))])


def read_eaf_csv(path) -> dict[int, np.ndarray]:
    out: dict[int, list] = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            out.setdefault(int(r["level"]), []).append((float(r["f1"]), float(r["f2_neg"])))
    return {k: np.array(v) for k, v in out.items()}


def write_stats_json(path, stats) -> None:
    mean, std, median = stats
    Path(path).write_text(json.dumps({"mean": mean, "std": std, "median": median}, indent=2) + "\n")

