"""Genome decoding, per-period power flow and the objective/violation image.

A genome is a flat array of genes in ``[0, 1]``.  The first
``T * n_batteries`` genes are battery set-points, period-major
(``genes[t * B + b]``), followed by ``T * n_ders`` DER set-points in the same
layout.  Voltages and flows are derived from these through DistFlow, so only
bound-type constraints can ever be violated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assets import BessTrajectory, simulate_schedule
from .feeder import solve_distflow
from .scenario import Scenario

OBJECTIVE_NAMES = ("voltage_variance", "neg_der_energy")


def objective_names() -> tuple[str, str]:
    return OBJECTIVE_NAMES


@dataclass(frozen=True)
class Dispatch:
    bess_signed_power: np.ndarray  # (n_batteries, T) kW, positive = charging
    der_power: np.ndarray  # (n_ders, T) kW


@dataclass(frozen=True)
class Evaluation:
    f1: float
    f2_neg: float
    cv: float
    voltages: np.ndarray  # (T, n_buses) p.u.
    grid_p: np.ndarray  # (T,) kW drawn from the upstream grid
    trajectories: tuple[BessTrajectory, ...] = ()

    @property
    def objectives(self) -> np.ndarray:
        return np.array([self.f1, self.f2_neg])

    @property
    def feasible(self) -> bool:
        return self.cv == 0.0


def _check_length(genes: np.ndarray, sc: Scenario) -> None:
    if genes.shape[-1] != sc.n_genes:
        raise ValueError(
            f"genome length {genes.shape[-1]} does not match scenario ({sc.n_genes} genes)"
        )


def decode(genome, scenario: Scenario) -> Dispatch:
    """Map genes onto battery signed powers and DER outputs."""
    genes = np.asarray(genome, dtype=float)
    _check_length(genes, scenario)
    T, B = scenario.horizon_t, len(scenario.batteries)
    bat = genes[: T * B].reshape(T, B).T
    der = genes[T * B:].reshape(T, len(scenario.ders)).T
    p_max = np.array([b.p_max for b in scenario.batteries]).reshape(-1, 1)
    signed = (2.0 * bat - 1.0) * p_max
    der_power = np.empty_like(der)
    for i, d in enumerate(scenario.ders):
        der_power[i] = d.p_min + der[i] * (d.p_avail - d.p_min)
    return Dispatch(bess_signed_power=signed, der_power=der_power)


def _grid_violation(grid_p, sc: Scenario):
    scale = max(abs(sc.grid_p_max), abs(sc.grid_p_min)) or 1.0
    excess = np.maximum(0.0, np.maximum(grid_p - sc.grid_p_max, sc.grid_p_min - grid_p))
    return excess.sum(axis=-1) / scale


def _voltage_violation(v, sc: Scenario):
    net = sc.network
    excess = np.maximum(0.0, np.maximum(v - net.v_max, net.v_min - v))
    return (excess / (net.v_max - net.v_min)).sum(axis=(-2, -1))


def _voltage_objective(v, sc: Scenario):
    net = sc.network
    return (((v - net.v0) / (net.v_max - net.v_min)) ** 2).sum(axis=(-2, -1))


def evaluate(genome, scenario: Scenario) -> Evaluation:
    """Evaluate one genome period by period.

    This is the reference route: each period is solved with
    :func:`~codnopt.feeder.solve_distflow` and each battery is rolled forward
    with :func:`~codnopt.assets.simulate_schedule`.
    """
    sc = scenario
    dispatch = decode(genome, sc)
    n, T = sc.n_buses, sc.horizon_t

    inj_kw = np.zeros((n, T))
    for i, d in enumerate(sc.ders):
        inj_kw[d.bus] += dispatch.der_power[i]
    for b, spec in enumerate(sc.batteries):
        inj_kw[spec.bus] -= dispatch.bess_signed_power[b]
    inj_kw -= sc.load_p

    voltages = np.empty((T, n))
    for t in range(T):
        flow = solve_distflow(sc.network, inj_kw[:, t] / sc.s_base, -sc.load_q[:, t] / sc.s_base)
        voltages[t] = flow.voltages
    grid_p = -inj_kw.sum(axis=0)

    trajectories = []
    cv = 0.0
    for b, spec in enumerate(sc.batteries):
        traj, viol = simulate_schedule(spec, dispatch.bess_signed_power[b], sc.dt)
        trajectories.append(traj)
        cv += viol
    cv += float(_voltage_violation(voltages, sc)) + float(_grid_violation(grid_p, sc))

    return Evaluation(
        f1=float(_voltage_objective(voltages, sc)),
        f2_neg=-float(dispatch.der_power.sum() * sc.dt),
        cv=cv,
        voltages=voltages,
        grid_p=grid_p,
        trajectories=tuple(trajectories),
    )


class PopulationEvaluator:
    """Vectorized evaluation of many genomes against one scenario.

    Uses the shared-path impedance matrices of the feeder instead of a
    sweep, so a whole population is one batched matrix product.  Results
    match :func:`evaluate` to rounding.
    """

    def __init__(self, scenario: Scenario):
        sc = self.scenario = scenario
        n, T = sc.n_buses, sc.horizon_t
        B, G = len(sc.batteries), len(sc.ders)
        self.n_genes = sc.n_genes
        self._T, self._B, self._G = T, B, G
        Rs, Xs = sc.network.sensitivity
        self._RsT = np.ascontiguousarray(Rs.T)
        # reactive injections are load only, so their voltage effect is fixed
        self._v_base = sc.network.v0 + (-sc.load_q.T / sc.s_base) @ Xs.T / sc.network.v0

        self._bat_bus = np.zeros((B, n))
        self._bat_bus[np.arange(B), [b.bus for b in sc.batteries]] = 1.0
        self._der_bus = np.zeros((G, n))
        self._der_bus[np.arange(G), [d.bus for d in sc.ders]] = 1.0
        self._p_max = np.array([b.p_max for b in sc.batteries])
        self._der_min = np.array([d.p_min for d in sc.ders]).reshape(G, 1)
        self._der_span = (
            np.array([d.p_avail for d in sc.ders]).reshape(G, T) - self._der_min
        ).T  # (T, G)
        self._load_T = sc.load_p.T  # (T, n)

        # energy[t] = a^t e_init + sum_{s<t} a^(t-1-s) net[s], with a = 1 - leak dt
        self._eta = np.array([b.eta for b in sc.batteries])
        steps = np.arange(T + 1)
        lag = steps[:, None] - 1 - np.arange(T)[None, :]
        self._roll = np.zeros((B, T + 1, T))
        self._e_free = np.zeros((T + 1, B))
        for i, b in enumerate(sc.batteries):
            a = 1.0 - b.leak * sc.dt
            self._roll[i] = np.where(lag >= 0, a ** np.maximum(lag, 0), 0.0)
            self._e_free[:, i] = b.e_init * a**steps

    def dispatch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _check_length(X, self.scenario)
        P, T, B, G = X.shape[0], self._T, self._B, self._G
        signed = (2.0 * X[:, : T * B].reshape(P, T, B) - 1.0) * self._p_max
        der = self._der_min.T + X[:, T * B:].reshape(P, T, G) * self._der_span
        return signed, der  # (P, T, B), (P, T, G)

    def voltages(self, signed, der):
        inj = der @ self._der_bus - signed @ self._bat_bus - self._load_T  # (P, T, n) kW
        v = self._v_base + (inj / self.scenario.s_base) @ self._RsT / self.scenario.network.v0
        return v, -inj.sum(axis=-1)

    def energy(self, signed):
        """Stored energy, shape ``(P, T + 1, B)``."""
        chg = np.maximum(signed, 0.0)
        dis = np.maximum(-signed, 0.0)
        net = chg * self._eta * self.scenario.dt - dis * self.scenario.dt / self._eta
        e = np.empty((signed.shape[0], self._T + 1, self._B))
        for b in range(self._B):
            e[:, :, b] = self._e_free[:, b] + net[:, :, b] @ self._roll[b].T
        return e

    def battery_violation(self, energy):
        sc = self.scenario
        if not sc.batteries:
            return np.zeros(energy.shape[0])
        cap = np.array([b.capacity for b in sc.batteries])
        hi = np.array([b.soc_max for b in sc.batteries]) * cap
        lo = np.array([b.soc_min for b in sc.batteries]) * cap
        end = np.array([b.e_end_min for b in sc.batteries])
        over = np.maximum(0.0, energy - hi).sum(axis=1)
        under = np.maximum(0.0, lo - energy).sum(axis=1)
        short = np.maximum(0.0, end - energy[:, -1])
        return ((over + under + short) / cap).sum(axis=1)

    def __call__(self, X):
        """Return objectives ``(P, 2)`` and violations ``(P,)``."""
        sc = self.scenario
        signed, der = self.dispatch(X)
        v, grid_p = self.voltages(signed, der)
        f1 = _voltage_objective(v, sc)
        f2 = -der.sum(axis=(1, 2)) * sc.dt
        cv = (self.battery_violation(self.energy(signed))
              + _voltage_violation(v, sc) + _grid_violation(grid_p, sc))
        return np.column_stack([f1, f2]), cv


def evaluate_population(X, scenario: Scenario):
    return PopulationEvaluator(scenario)(X)


__all__ = [
    "Dispatch",
    "Evaluation",
    "PopulationEvaluator",
    "decode",
    "evaluate",
    "evaluate_population",
    "objective_names",
]
