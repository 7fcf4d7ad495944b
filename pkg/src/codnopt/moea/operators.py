"""Real-coded variation on the unit box: SBX and polynomial mutation.

Both follow the bounded formulations used in Deb's reference NSGA-II code.
Random numbers are drawn as whole arrays in a fixed order, so results depend
only on the generator state.
"""

from __future__ import annotations

import numpy as np

_EPS = 1e-14


def _sbx_betaq(beta, u, eta_c):
    alpha = 2.0 - beta ** -(eta_c + 1.0)
    ua = u * alpha
    low = ua <= 1.0
    base = np.where(low, ua, 1.0 / np.where(low, 1.0, 2.0 - ua))
    return base ** (1.0 / (eta_c + 1.0))


def sbx_population(parents, eta_c: float, prob: float, rng: np.random.Generator) -> np.ndarray:
    """Recombine consecutive rows ``(0, 1), (2, 3), ...`` of ``parents``."""
    P = np.asarray(parents, dtype=float)
    n, D = P.shape
    if n % 2:
        raise ValueError("need an even number of parents")
    k = n // 2
    p1, p2 = P[0::2], P[1::2]

    do_pair = rng.random(k) < prob
    do_var = rng.random((k, D)) < 0.5
    u = rng.random((k, D))
    swap = rng.random((k, D)) < 0.5

    out = P.copy()
    y1 = np.minimum(p1, p2)
    y2 = np.maximum(p1, p2)
    active = do_pair[:, None] & do_var & (y2 - y1 > _EPS)
    if not active.any():
        return out
    a1, a2, ua = y1[active], y2[active], u[active]
    diff = a2 - a1
    c1 = 0.5 * (a1 + a2 - _sbx_betaq(1.0 + 2.0 * a1 / diff, ua, eta_c) * diff)
    c2 = 0.5 * (a1 + a2 + _sbx_betaq(1.0 + 2.0 * (1.0 - a2) / diff, ua, eta_c) * diff)
    c1 = np.clip(c1, 0.0, 1.0)
    c2 = np.clip(c2, 0.0, 1.0)
    sw = swap[active]
    kid1, kid2 = out[0::2], out[1::2]  # views into out
    kid1[active] = np.where(sw, c2, c1)
    kid2[active] = np.where(sw, c1, c2)
    return out


def mutate_population(X, eta_m: float, p_m: float, rng: np.random.Generator) -> np.ndarray:
    X = np.array(X, dtype=float)
    hit = rng.random(X.shape) < p_m
    r = rng.random(int(hit.sum()))
    y = X[hit]
    expo = 1.0 / (eta_m + 1.0)
    low = r < 0.5
    # on the unit box delta1 = y and delta2 = 1 - y
    xy = np.where(low, 1.0 - y, y)
    val = np.where(low,
                   2.0 * r + (1.0 - 2.0 * r) * xy ** (eta_m + 1.0),
                   2.0 * (1.0 - r) + 2.0 * (r - 0.5) * xy ** (eta_m + 1.0))
    deltaq = np.where(low, val**expo - 1.0, 1.0 - val**expo)
    X[hit] = np.clip(y + deltaq, 0.0, 1.0)
    return X


def sbx_crossover(parent1, parent2, eta_c: float, rng: np.random.Generator, prob: float = 1.0):
    """Simulated binary crossover of two genomes; returns two children."""
    kids = sbx_population(np.vstack([parent1, parent2]), eta_c, prob, rng)
    return kids[0], kids[1]


def polynomial_mutation(genome, eta_m: float, p_m: float, rng: np.random.Generator) -> np.ndarray:
    return mutate_population(np.atleast_2d(genome), eta_m, p_m, rng)[0]
