"""Radial feeder representation and linearized DistFlow.

Injections follow the generator convention: a positive value is power
produced at the bus (export), a negative value is consumption.  Branch
flows are positive when power moves downstream, away from the root.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

ROOT = 0


class TopologyError(ValueError):
    """Raised when a branch set is not a root-oriented spanning tree."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class Bus:
    id: int
    v_min: float = 0.95
    v_max: float = 1.05

    def __post_init__(self):
        if not 0 < self.v_min < self.v_max:
            raise ValueError(
                f"bus {self.id}: need 0 < v_min < v_max, got [{self.v_min}, {self.v_max}]"
            )


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float
    x: float

    def __post_init__(self):
        if self.r < 0 or self.x < 0:
            raise ValueError(f"branch {self.from_bus}->{self.to_bus}: negative impedance")


@dataclass(frozen=True)
class FlowSolution:
    branch_p: np.ndarray
    branch_q: np.ndarray
    voltages: np.ndarray


@dataclass(frozen=True)
class FeederNetwork:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    v0: float = 1.0
    root: int = ROOT

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "branches", tuple(self.branches))

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @cached_property
    def v_min(self) -> np.ndarray:
        return np.array([b.v_min for b in self.buses])

    @cached_property
    def v_max(self) -> np.ndarray:
        return np.array([b.v_max for b in self.buses])

    @cached_property
    def r(self) -> np.ndarray:
        return np.array([br.r for br in self.branches], dtype=float)

    @cached_property
    def x(self) -> np.ndarray:
        return np.array([br.x for br in self.branches], dtype=float)

    @cached_property
    def _topology(self):
        validate_radial(self)
        n = self.n_buses
        parent = np.full(n, -1)
        parent_branch = np.full(n, -1)
        children: list[list[int]] = [[] for _ in range(n)]
        for k, br in enumerate(self.branches):
            parent[br.to_bus] = br.from_bus
            parent_branch[br.to_bus] = k
            children[br.from_bus].append(br.to_bus)
        order = [self.root]
        for bus in order:
            order.extend(children[bus])
        return parent, parent_branch, np.array(order)

    @property
    def parent(self) -> np.ndarray:
        return self._topology[0]

    @property
    def parent_branch(self) -> np.ndarray:
        """Index of the branch feeding each bus (-1 for the root)."""
        return self._topology[1]

    @property
    def order(self) -> np.ndarray:
        """Buses in breadth-first order from the root."""
        return self._topology[2]

    @cached_property
    def path_incidence(self) -> np.ndarray:
        """``A[i, k] = 1`` when branch ``k`` lies on the root-to-``i`` path."""
        A = np.zeros((self.n_buses, len(self.branches)))
        for bus in self.order[1:]:
            A[bus] = A[self.parent[bus]]
            A[bus, self.parent_branch[bus]] = 1.0
        return A

    @cached_property
    def sensitivity(self) -> tuple[np.ndarray, np.ndarray]:
        """Shared-path resistance and reactance matrices.

        With these, ``V = v0 + (Rs @ p + Xs @ q) / v0`` reproduces the sweep
        in :func:`solve_distflow` for any injection vector.
        """
        A = self.path_incidence
        return (A * self.r) @ A.T, (A * self.x) @ A.T

    def depth(self) -> np.ndarray:
        return self.path_incidence.sum(axis=1).astype(int)


def validate_radial(network: FeederNetwork) -> None:
    """Check that the branches form a spanning tree oriented away from the root.

    Raises:
        TopologyError: with ``kind`` one of ``"bus-index"``, ``"duplicate"``,
            ``"cycle"``, ``"disconnected"`` or ``"orientation"``.
    """
    n = network.n_buses
    for i, bus in enumerate(network.buses):
        if bus.id != i:
            raise TopologyError("bus-index", f"bus at position {i} has id {bus.id}")
    if not 0 <= network.root < n:
        raise TopologyError("bus-index", f"root {network.root} is not a bus")

    seen = set()
    for br in network.branches:
        for end in (br.from_bus, br.to_bus):
            if not 0 <= end < n:
                raise TopologyError("bus-index", f"branch references unknown bus {end}")
        key = frozenset((br.from_bus, br.to_bus))
        if key in seen:
            raise TopologyError(
                "duplicate", f"duplicate branch between {br.from_bus} and {br.to_bus}"
            )
        seen.add(key)

    # union-find over the undirected edges
    link = list(range(n))

    def find(a):
        while link[a] != a:
            link[a] = link[link[a]]
            a = link[a]
        return a

    for br in network.branches:
        a, b = find(br.from_bus), find(br.to_bus)
        if a == b:
            raise TopologyError(
                "cycle", f"cycle detected through branch {br.from_bus}->{br.to_bus}"
            )
        link[a] = b

    top = find(network.root)
    for i in range(n):
        if find(i) != top:
            raise TopologyError("disconnected", f"bus {i} is not connected to the root")

    incoming = np.zeros(n, dtype=int)
    for br in network.branches:
        incoming[br.to_bus] += 1
    if incoming[network.root]:
        raise TopologyError("orientation", "a branch is oriented toward the root")
    bad = np.flatnonzero(incoming != 1)
    bad = bad[bad != network.root]
    if bad.size:
        raise TopologyError(
            "orientation", f"bus {bad[0]} is not fed by exactly one upstream branch"
        )


def solve_distflow(
    network: FeederNetwork, net_injection_p, net_injection_q
) -> FlowSolution:
    """Linearized DistFlow for one period.

    Each branch carries the negated sum of the net injections below it, and
    voltages follow from a single root-to-leaf sweep
    ``V_child = V_parent - (r * P + x * Q) / v0``.
    """
    p = np.asarray(net_injection_p, dtype=float)
    q = np.asarray(net_injection_q, dtype=float)
    n = network.n_buses
    if p.shape != (n,) or q.shape != (n,):
        raise ValueError(f"injections must have shape ({n},)")

    parent, parent_branch, order = network._topology
    sub_p = -p.copy()
    sub_q = -q.copy()
    for bus in order[:0:-1]:
        sub_p[parent[bus]] += sub_p[bus]
        sub_q[parent[bus]] += sub_q[bus]

    m = len(network.branches)
    branch_p = np.zeros(m)
    branch_q = np.zeros(m)
    children = order[1:]
    branch_p[parent_branch[children]] = sub_p[children]
    branch_q[parent_branch[children]] = sub_q[children]

    v = np.empty(n)
    v[network.root] = network.v0
    r, x = network.r, network.x
    for bus in children:
        k = parent_branch[bus]
        v[bus] = v[parent[bus]] - (r[k] * branch_p[k] + x[k] * branch_q[k]) / network.v0
    return FlowSolution(branch_p=branch_p, branch_q=branch_q, voltages=v)
