"""Community battery dynamics and DER availability."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BessSpec:
    """Ratings of one community battery.

    Energies are in kWh, powers in kW.  ``eta`` multiplies charged energy and
    divides discharged energy; ``leak`` is the fraction of stored energy lost
    per hour.
    """

    bus: int
    capacity: float
    p_max: float
    eta: float = 0.95
    leak: float = 0.0
    soc_min: float = 0.1
    soc_max: float = 0.9
    e_init: float | None = None
    e_end_min: float | None = None

    def __post_init__(self):
        half = 0.5 * self.capacity
        if self.e_init is None:
            object.__setattr__(self, "e_init", half)
        if self.e_end_min is None:
            object.__setattr__(self, "e_end_min", half)
        if self.capacity <= 0:
            raise ValueError(f"battery at bus {self.bus}: capacity must be positive")
        if self.p_max <= 0:
            raise ValueError(f"battery at bus {self.bus}: p_max must be positive")
        if not 0 < self.eta <= 1:
            raise ValueError(f"battery at bus {self.bus}: eta must lie in (0, 1]")
        if self.leak < 0:
            raise ValueError(f"battery at bus {self.bus}: leak must be non-negative")
        if not 0 <= self.soc_min < self.soc_max <= 1:
            raise ValueError(f"battery at bus {self.bus}: need 0 <= soc_min < soc_max <= 1")
        lo, hi = self.soc_min * self.capacity, self.soc_max * self.capacity
        if not lo - 1e-9 <= self.e_init <= hi + 1e-9:
            raise ValueError(f"battery at bus {self.bus}: e_init outside SOC bounds")
        if self.e_end_min > hi + 1e-9:
            raise ValueError(f"battery at bus {self.bus}: e_end_min above soc_max * capacity")


@dataclass(frozen=True)
class BessTrajectory:
    energy: np.ndarray
    soc: np.ndarray
    p_chg: np.ndarray
    p_dis: np.ndarray

    @property
    def throughput(self) -> float:
        """Total charged plus discharged power, summed over periods (kW)."""
        return float(self.p_chg.sum() + self.p_dis.sum())


@dataclass(frozen=True)
class DerSpec:
    bus: int
    p_avail: np.ndarray
    p_min: float = 0.0

    def __post_init__(self):
        avail = np.asarray(self.p_avail, dtype=float)
        object.__setattr__(self, "p_avail", avail)
        if self.p_min < 0 or np.any(avail < self.p_min):
            raise ValueError(f"DER at bus {self.bus}: need 0 <= p_min <= p_avail")


def step_soc(energy: float, p_chg: float, p_dis: float, spec: BessSpec, dt: float = 1.0) -> float:
    """Advance stored energy by one period of length ``dt`` hours."""
    if p_chg < 0 or p_dis < 0:
        raise ValueError("charging and discharging powers must be non-negative")
    if p_chg > 0 and p_dis > 0:
        raise ValueError("simultaneous charging and discharging")
    if dt <= 0:
        raise ValueError("dt must be positive")
    return energy + p_chg * spec.eta * dt - p_dis * dt / spec.eta - energy * dt * spec.leak


def energy_violation(spec: BessSpec, energy) -> float:
    """Dimensionless SOC-band and terminal-energy shortfall of a trajectory."""
    energy = np.asarray(energy, dtype=float)
    over = np.maximum(0.0, energy - spec.soc_max * spec.capacity).sum()
    under = np.maximum(0.0, spec.soc_min * spec.capacity - energy).sum()
    end = max(0.0, spec.e_end_min - energy[-1])
    return float((over + under + end) / spec.capacity)


def simulate_schedule(spec: BessSpec, signed_power, dt: float = 1.0) -> tuple[BessTrajectory, float]:
    """Roll a signed power schedule forward from ``e_init``.

    Positive entries charge the battery, negative entries discharge it.
    Returns the trajectory and its aggregate (dimensionless) violation.
    """
    signed = np.asarray(signed_power, dtype=float)
    p_chg = np.maximum(signed, 0.0)
    p_dis = np.maximum(-signed, 0.0)
    energy = np.empty(signed.size + 1)
    energy[0] = spec.e_init
    for t in range(signed.size):
        energy[t + 1] = step_soc(energy[t], p_chg[t], p_dis[t], spec, dt)
    traj = BessTrajectory(
        energy=energy, soc=energy / spec.capacity, p_chg=p_chg, p_dis=p_dis
    )
    return traj, energy_violation(spec, energy)
