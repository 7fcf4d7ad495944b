"""Problem instances: JSON ingestion, per-unit helpers and a seeded generator."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .assets import BessSpec, DerSpec
from .feeder import Branch, Bus, FeederNetwork, TopologyError, validate_radial


class ScenarioError(ValueError):
    """A scenario file could not be parsed or failed validation."""


def to_pu(value, s_base: float):
    return np.asarray(value, dtype=float) / s_base


def from_pu(value, s_base: float):
    return np.asarray(value, dtype=float) * s_base


@dataclass(frozen=True, eq=False)
class Scenario:
    """A complete problem instance.

    ``load_p`` and ``load_q`` have shape ``(n_buses, horizon_t)`` in kW and
    kvar; conversion to per-unit happens at evaluation time.
    """

    network: FeederNetwork
    horizon_t: int
    dt: float
    load_p: np.ndarray
    load_q: np.ndarray
    ders: tuple[DerSpec, ...] = ()
    batteries: tuple[BessSpec, ...] = ()
    grid_p_min: float | None = None
    grid_p_max: float | None = None
    s_base: float = 1000.0

    def __post_init__(self):
        object.__setattr__(self, "ders", tuple(self.ders))
        object.__setattr__(self, "batteries", tuple(self.batteries))
        lp = np.asarray(self.load_p, dtype=float)
        lq = np.asarray(self.load_q, dtype=float)
        object.__setattr__(self, "load_p", lp)
        object.__setattr__(self, "load_q", lq)
        peak = float(lp.sum(axis=0).max()) if lp.size else 0.0
        if self.grid_p_max is None:
            object.__setattr__(self, "grid_p_max", 2.0 * peak)
        if self.grid_p_min is None:
            object.__setattr__(self, "grid_p_min", -2.0 * peak)
        self._validate()

    def _validate(self):
        n, T = self.network.n_buses, self.horizon_t
        if T < 1:
            raise ScenarioError("horizon_t must be at least 1")
        if self.dt <= 0:
            raise ScenarioError("dt_hours must be positive")
        if self.s_base <= 0:
            raise ScenarioError("s_base_kva must be positive")
        try:
            validate_radial(self.network)
        except TopologyError as exc:
            raise ScenarioError(f"invalid topology: {exc}") from exc
        for name in ("load_p", "load_q"):
            if getattr(self, name).shape != (n, T):
                raise ScenarioError(
                    f"{name} must cover every bus and period: expected {(n, T)}, "
                    f"got {getattr(self, name).shape}"
                )
        for d in self.ders:
            if not 0 <= d.bus < n:
                raise ScenarioError(f"DER references unknown bus {d.bus}")
            if d.p_avail.shape != (T,):
                raise ScenarioError(f"DER at bus {d.bus}: p_avail must have length {T}")
        for b in self.batteries:
            if not 0 <= b.bus < n:
                raise ScenarioError(f"battery references unknown bus {b.bus}")
        if self.grid_p_min > self.grid_p_max:
            raise ScenarioError("grid p_min exceeds p_max")

    @property
    def n_buses(self) -> int:
        return self.network.n_buses

    @property
    def n_genes(self) -> int:
        return self.horizon_t * (len(self.batteries) + len(self.ders))

    def without_batteries(self) -> Scenario:
        return replace(self, batteries=())


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _get(obj, key, where, default=...):
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected an object")
    if key not in obj:
        if default is ...:
            raise ScenarioError(f"{where}: missing field '{key}'")
        return default
    return obj[key]


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and validate a :class:`Scenario` from the parsed JSON document."""
    try:
        buses = [
            Bus(int(_get(b, "id", f"buses[{i}]")),
                float(_get(b, "v_min", f"buses[{i}]")),
                float(_get(b, "v_max", f"buses[{i}]")))
            for i, b in enumerate(_get(doc, "buses", "document"))
        ]
        branches = [
            Branch(int(_get(b, "from", f"branches[{i}]")),
                   int(_get(b, "to", f"branches[{i}]")),
                   float(_get(b, "r_pu", f"branches[{i}]")),
                   float(_get(b, "x_pu", f"branches[{i}]")))
            for i, b in enumerate(_get(doc, "branches", "document"))
        ]
        network = FeederNetwork(buses, branches, v0=float(_get(doc, "v0", "document")))
        load_p = np.array(_get(doc, "load_p_kw", "document"), dtype=float)
        load_q = np.array(_get(doc, "load_q_kvar", "document"), dtype=float)
        if load_p.ndim != 2:
            raise ScenarioError("load_p_kw must be a list of per-bus arrays")
        horizon = load_p.shape[1]

        ders = []
        for i, d in enumerate(_get(doc, "ders", "document", [])):
            where = f"ders[{i}]"
            ders.append(DerSpec(int(_get(d, "bus", where)),
                                np.array(_get(d, "p_avail_kw", where), dtype=float),
                                float(_get(d, "p_min_kw", where, 0.0))))
        batteries = []
        for i, b in enumerate(_get(doc, "batteries", "document", [])):
            where = f"batteries[{i}]"
            e_init = _get(b, "e_init_kwh", where, None)
            e_end = _get(b, "e_end_min_kwh", where, None)
            batteries.append(BessSpec(
                bus=int(_get(b, "bus", where)),
                capacity=float(_get(b, "capacity_kwh", where)),
                p_max=float(_get(b, "p_max_kw", where)),
                eta=float(_get(b, "eta", where)),
                leak=float(_get(b, "leak_per_hour", where)),
                soc_min=float(_get(b, "soc_min", where)),
                soc_max=float(_get(b, "soc_max", where)),
                e_init=None if e_init is None else float(e_init),
                e_end_min=None if e_end is None else float(e_end),
            ))
        grid = doc.get("grid", {}) or {}
        g_min, g_max = grid.get("p_min_kw"), grid.get("p_max_kw")
        return Scenario(
            network=network,
            horizon_t=horizon,
            dt=float(_get(doc, "dt_hours", "document")),
            load_p=load_p,
            load_q=load_q,
            ders=ders,
            batteries=batteries,
            grid_p_min=None if g_min is None else float(g_min),
            grid_p_max=None if g_max is None else float(g_max),
            s_base=float(_get(doc, "s_base_kva", "document")),
        )
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"validation error: {exc}") from exc


def load_scenario(path) -> Scenario:
    """Read and validate a scenario JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return scenario_from_dict(doc)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def scenario_to_dict(sc: Scenario) -> dict:
    net = sc.network
    return {
        "v0": net.v0,
        "s_base_kva": sc.s_base,
        "dt_hours": sc.dt,
        "buses": [{"id": b.id, "v_min": b.v_min, "v_max": b.v_max} for b in net.buses],
        "branches": [
            {"from": b.from_bus, "to": b.to_bus, "r_pu": b.r, "x_pu": b.x}
            for b in net.branches
        ],
        "load_p_kw": sc.load_p.tolist(),
        "load_q_kvar": sc.load_q.tolist(),
        "ders": [
            {"bus": d.bus, "p_avail_kw": d.p_avail.tolist(), "p_min_kw": d.p_min}
            for d in sc.ders
        ],
        "batteries": [
            {
                "bus": b.bus, "capacity_kwh": b.capacity, "p_max_kw": b.p_max,
                "eta": b.eta, "leak_per_hour": b.leak, "soc_min": b.soc_min,
                "soc_max": b.soc_max, "e_init_kwh": b.e_init, "e_end_min_kwh": b.e_end_min,
            }
            for b in sc.batteries
        ],
        "grid": {"p_min_kw": sc.grid_p_min, "p_max_kw": sc.grid_p_max},
    }


def dumps_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=1) + "\n"


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(sc))


def bundled_path(name: str) -> Path:
    """Location of a scenario file shipped with the package."""
    return Path(__file__).parent / "data" / name


# ---------------------------------------------------------------------------
# Synthetic instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SynthParams:
    """Knobs of :func:`generate_synthetic`.

    The first six fields describe the instance; the rest fix the shape of the
    generated profiles and equipment and rarely need changing.
    """

    n_buses: int = 118
    prosumer_ratio: float = 0.4
    peak_load_p: float = 22709.7
    peak_load_q: float = 17041.1
    n_batteries: int = 5
    seed: int = 1
    horizon_t: int = 24
    dt: float = 1.0
    v0: float = 1.0
    v_min: float = 0.95
    v_max: float = 1.05
    main_fraction: float = 0.5  # share of buses on the trunk
    peak_drop: float = 0.04  # worst voltage drop at coincident peak, p.u.
    pv_peak_ratio: float = 3.0  # installed PV relative to peak_load_p
    battery_power_ratio: float = 0.25  # total battery p_max relative to peak_load_p
    battery_hours: float = 4.0
    battery_leak: float = 0.0005  # self-discharge per hour
    export_limit_ratio: float = 2.0  # grid export cap relative to peak_load_p
    import_limit_ratio: float = 2.0
    s_base: float = 1000.0

    def __post_init__(self):
        if self.n_buses < 2:
            raise ValueError("n_buses must be at least 2")
        if not 0 <= self.prosumer_ratio <= 1:
            raise ValueError("prosumer_ratio must lie in [0, 1]")
        if not 0 <= self.n_batteries <= self.n_buses - 1:
            raise ValueError("n_batteries must lie in [0, n_buses - 1]")
        if self.peak_load_p < 0 or self.peak_load_q < 0:
            raise ValueError("peak loads must be non-negative")
        if self.export_limit_ratio < 0 or self.import_limit_ratio < 0:
            raise ValueError("grid limit ratios must be non-negative")


def daily_load_shape(hours: np.ndarray) -> np.ndarray:
    """Residential double-peak curve with maximum 1 (morning and evening peaks)."""
    shape = (0.40
             + 0.30 * np.exp(-0.5 * ((hours - 8.0) / 1.5) ** 2)
             + 0.60 * np.exp(-0.5 * ((hours - 19.0) / 2.0) ** 2))
    return shape / shape.max()


def pv_shape(hours: np.ndarray) -> np.ndarray:
    """Clear-sky PV bell centred at 12:30, zero outside 06:00-19:00."""
    shape = np.exp(-0.5 * ((hours - 12.5) / 2.5) ** 2)
    shape[(hours < 6.0) | (hours > 19.0)] = 0.0
    return shape


def _build_tree(n: int, main_fraction: float,
                rng: np.random.Generator) -> tuple[list[tuple[int, int]], list[int]]:
    main_len = max(1, min(n - 1, round((n - 1) * main_fraction)))
    edges = [(i, i + 1) for i in range(main_len)]
    main = list(range(1, main_len + 1))
    nxt = main_len + 1
    while nxt < n:
        anchor = int(rng.choice(main))
        length = int(min(rng.integers(1, 4), n - nxt))
        prev = anchor
        for _ in range(length):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
    return edges, main


def generate_synthetic(params: SynthParams) -> Scenario:
    """Deterministic path-with-laterals feeder with daily load and PV profiles.

    Impedances are scaled so that the worst bus sits ``peak_drop`` below
    ``v0`` at the coincident load peak with no generation, which keeps the
    no-DER operating point feasible for any size.
    """
    p = params
    rng = np.random.default_rng(p.seed)
    n, T = p.n_buses, p.horizon_t

    edges, main = _build_tree(n, p.main_fraction, rng)
    main_set = set(main)
    r_raw = np.array([
        (1.0 if b in main_set else 1.5) * rng.uniform(0.8, 1.2) for _, b in edges
    ])
    xr = rng.uniform(0.8, 1.4, size=len(edges))

    hours = (np.arange(T) + 0.5) * p.dt
    weights = np.zeros(n)
    weights[1:] = rng.uniform(0.5, 1.5, size=n - 1)
    weights /= weights.sum()
    shape = daily_load_shape(hours % 24.0)
    load_p = p.peak_load_p * np.outer(weights, shape)
    load_q = p.peak_load_q * np.outer(weights, shape)

    order = rng.permutation(np.arange(1, n))
    n_pros = math.ceil(p.prosumer_ratio * (n - 1) - 1e-9)
    prosumers = sorted(int(b) for b in order[:n_pros])
    pv = pv_shape(hours % 24.0)
    sizes = rng.uniform(0.5, 1.5, size=len(prosumers))
    if sizes.size:
        sizes *= p.pv_peak_ratio * p.peak_load_p / sizes.sum()
    ders = [DerSpec(bus, np.round(cap * pv, 6)) for bus, cap in zip(prosumers, sizes)]

    batteries = []
    if p.n_batteries:
        depth = len(main)
        idx = [max(0, round((k + 1) * depth / p.n_batteries) - 1)
               for k in range(p.n_batteries)]
        # evenly spaced depths may collide on short feeders
        used, picks = set(), []
        for i in idx:
            while main[i] in used and i + 1 < depth:
                i += 1
            if main[i] in used:
                i = next(j for j in range(depth) if main[j] not in used)
            used.add(main[i])
            picks.append(main[i])
        p_each = p.battery_power_ratio * p.peak_load_p / p.n_batteries
        for bus in picks:
            cap = round(p_each * p.battery_hours, 6)
            batteries.append(BessSpec(bus=bus, capacity=cap, p_max=round(p_each, 6),
                                      eta=0.95, leak=p.battery_leak, soc_min=0.1, soc_max=0.9))

    # scale impedances so the peak-load drop equals peak_drop
    buses = [Bus(i, p.v_min, p.v_max) for i in range(n)]
    unit = FeederNetwork(buses, [Branch(a, b, r, r * k) for (a, b), r, k in zip(edges, r_raw, xr)], v0=p.v0)
    Rs, Xs = unit.sensitivity
    peak_t = int(np.argmax(load_p.sum(axis=0)))
    drop = (Rs @ load_p[:, peak_t] + Xs @ load_q[:, peak_t]) / p.s_base / p.v0
    scale = p.peak_drop / drop.max() if drop.max() > 0 else 1.0
    branches = [
        Branch(a, b, float(np.round(r * scale, 12)), float(np.round(r * k * scale, 12)))
        for (a, b), r, k in zip(edges, r_raw, xr)
    ]
    network = FeederNetwork(buses, branches, v0=p.v0)

    return Scenario(
        network=network,
        horizon_t=T,
        dt=p.dt,
        load_p=np.round(load_p, 6),
        load_q=np.round(load_q, 6),
        ders=ders,
        batteries=batteries,
        grid_p_min=-p.export_limit_ratio * p.peak_load_p,
        grid_p_max=p.import_limit_ratio * p.peak_load_p,
        s_base=p.s_base,
    )
