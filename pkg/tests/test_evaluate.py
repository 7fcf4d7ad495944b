import dataclasses

import numpy as np
import pytest

from codnopt import Branch, Bus, DerSpec, FeederNetwork, Scenario, decode, evaluate, objective_names
from codnopt.evaluate import evaluate_population
from codnopt.metrics import voltage_stats


def one_bus_scenario(der_kw=500.0, load_kw=0.0):
    net = FeederNetwork([Bus(0), Bus(1)], [Branch(0, 1, 0.01, 0.01)])
    return Scenario(network=net, horizon_t=1, dt=1.0, load_p=np.array([[0.0], [load_kw]]),
                    load_q=np.zeros((2, 1)), ders=[DerSpec(1, np.array([der_kw]))], batteries=[],
                    grid_p_min=-1e4, grid_p_max=1e4, s_base=100.0)


def test_objective_labels():
    assert objective_names() == ("voltage_variance", "neg_der_energy")


def test_decode_mapping(tiny2):
    d = decode([0.5, 1.0, 1.0, 0.0], tiny2)
    np.testing.assert_allclose(d.bess_signed_power, [[0.0, 20.0]])
    np.testing.assert_allclose(d.der_power, [[150.0, 0.0]])
    with pytest.raises(ValueError):
        decode([0.5] * 3, tiny2)


def test_voltage_at_upper_limit_hand_case():
    ev = evaluate([1.0], one_bus_scenario())
    assert ev.voltages[0, 1] == pytest.approx(1.05, abs=1e-12)
    assert ev.f1 == pytest.approx(0.25, abs=1e-12)
    assert ev.cv == 0.0


def test_flat_system():
    ev = evaluate([0.0], one_bus_scenario(der_kw=10.0))
    assert ev.f1 == 0.0 and ev.f2_neg == 0.0 and ev.cv == 0.0


def test_full_der_energy(tiny2):
    ev = evaluate([0.5, 0.5, 1.0, 1.0], tiny2)
    assert ev.f2_neg == -(150.0 + 10.0) * tiny2.dt
    # idle battery ends at 50 >= 45, so only network terms could add violation
    assert ev.trajectories[0].energy[-1] == 50.0


def test_batch_matches_reference(feeder12, tiny2):
    rng = np.random.default_rng(0)
    for sc in (tiny2, feeder12, feeder12.without_batteries()):
        X = rng.random((40, sc.n_genes))
        X[:5] = np.round(X[:5])
        F, cv = evaluate_population(X, sc)
        for x, f, c in zip(X, F, cv):
            ev = evaluate(x, sc)
            np.testing.assert_allclose(f, ev.objectives, rtol=1e-10, atol=1e-9)
            assert c == pytest.approx(ev.cv, rel=1e-9, abs=1e-12)


def test_nodal_balance(feeder12):
    rng = np.random.default_rng(1)
    sc = feeder12
    for _ in range(10):
        x = rng.random(sc.n_genes)
        ev, d = evaluate(x, sc), decode(x, sc)
        chg = np.maximum(d.bess_signed_power, 0).sum(axis=0)
        dis = np.maximum(-d.bess_signed_power, 0).sum(axis=0)
        expected = sc.load_p.sum(axis=0) + chg - dis - d.der_power.sum(axis=0)
        np.testing.assert_allclose(ev.grid_p, expected, atol=1e-9)


def test_der_monotonicity(feeder12):
    rng = np.random.default_rng(2)
    sc = feeder12
    first_der = 24 * len(sc.batteries)
    for _ in range(50):
        x = rng.random(sc.n_genes)
        j = int(rng.integers(first_der, sc.n_genes))
        y = x.copy()
        y[j] = min(1.0, x[j] + rng.random())
        assert evaluate(y, sc).f2_neg <= evaluate(x, sc).f2_neg


def test_direct_formula_oracle(feeder12):
    sc = feeder12
    x = np.concatenate([np.full(24 * len(sc.batteries), 0.5), np.ones(24 * len(sc.ders))])
    ev = evaluate(x, sc)
    net = sc.network
    par = {b.to_bus: (b.from_bus, b) for b in net.branches}
    p = -sc.load_p.copy()
    for d in sc.ders:
        p[d.bus] += d.p_avail
    p /= sc.s_base
    q = -sc.load_q / sc.s_base
    # voltage drop as a sum over the path to the root of r * (downstream load)
    for t in range(sc.horizon_t):
        for bus in range(1, sc.n_buses):
            v, node = 1.0, bus
            while node in par:
                up, br = par[node]
                below = [k for k in range(sc.n_buses) if _under(k, node, par)]
                v -= (br.r * -p[below, t].sum() + br.x * -q[below, t].sum()) / net.v0
                node = up
            assert ev.voltages[t, bus] == pytest.approx(v, abs=1e-12)
    span = net.v_max - net.v_min
    assert ev.f1 == pytest.approx((((ev.voltages - 1.0) / span) ** 2).sum(), rel=1e-12)
    assert ev.f2_neg == pytest.approx(-sum(d.p_avail.sum() for d in sc.ders), rel=1e-12)


def _under(k, node, par):
    while True:
        if k == node:
            return True
        if k not in par:
            return False
        k = par[k][0]


def test_feasible_means_rescan_clean(feeder12):
    rng = np.random.default_rng(3)
    sc = feeder12
    X = rng.random((400, sc.n_genes))
    X[:, : 24 * len(sc.batteries)] = 0.5 + 0.1 * (X[:, : 24 * len(sc.batteries)] - 0.5)
    seen_feasible = 0
    for x in X:
        ev = evaluate(x, sc)
        clean = (np.all(ev.voltages >= sc.network.v_min - 1e-12)
                 and np.all(ev.voltages <= sc.network.v_max + 1e-12)
                 and np.all(ev.grid_p >= sc.grid_p_min) and np.all(ev.grid_p <= sc.grid_p_max))
        for spec, tr in zip(sc.batteries, ev.trajectories):
            clean &= bool(np.all(tr.energy >= spec.soc_min * spec.capacity - 1e-9)
                          and np.all(tr.energy <= spec.soc_max * spec.capacity + 1e-9)
                          and tr.energy[-1] >= spec.e_end_min - 1e-9)
        if ev.cv == 0:
            seen_feasible += 1
            assert clean
        else:
            assert not clean
    assert seen_feasible > 0


def test_per_unit_invariance(feeder12):
    sc = feeder12
    k = 7.5
    net = sc.network
    scaled_net = FeederNetwork(net.buses, [Branch(b.from_bus, b.to_bus, b.r * k, b.x * k) for b in net.branches],
                               v0=net.v0)
    scaled = dataclasses.replace(sc, network=scaled_net, s_base=sc.s_base * k)
    rng = np.random.default_rng(4)
    for x in rng.random((10, sc.n_genes)):
        a, b = evaluate(x, sc), evaluate(x, scaled)
        assert b.f1 == pytest.approx(a.f1, rel=1e-10)
        assert b.f2_neg == pytest.approx(a.f2_neg, rel=1e-12)
        assert b.cv == pytest.approx(a.cv, rel=1e-9, abs=1e-12)


def test_voltage_stats_examples():
    assert voltage_stats(np.ones((3, 4))) == (1.0, 0.0, 1.0)
    mean, std, median = voltage_stats(np.array([0.98, 1.02]))
    assert (mean, std, median) == pytest.approx((1.0, 0.02, 1.0), abs=1e-15)
