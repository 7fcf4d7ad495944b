import itertools

import numpy as np
import pytest

from codnopt import Branch, Bus, FeederNetwork, Scenario, evaluate
from codnopt.metrics import (
    OracleTooLarge,
    attained,
    attainment_surfaces,
    coverage_gaps,
    hypervolume_2d,
    is_nested,
    oracle_front,
    pareto_filter,
    read_eaf_csv,
    read_front_csv,
    write_eaf_csv,
    write_front_csv,
)


def test_pareto_filter_examples():
    assert sorted(map(tuple, pareto_filter([(1, 2), (2, 1), (2, 2)]).points)) == [(1, 2), (2, 1)]
    assert pareto_filter([(3, 3)]).points.tolist() == [[3, 3]]
    assert pareto_filter([(3, 3)] * 4).points.tolist() == [[3, 3]]


def test_hypervolume_examples():
    assert hypervolume_2d([(1, 1)], (2, 2)) == 1.0
    assert hypervolume_2d([(1, 2), (2, 1)], (3, 3)) == 3.0
    assert hypervolume_2d([(1, 2), (2, 1), (2, 2)], (3, 3)) == 3.0
    with pytest.raises(ValueError):
        hypervolume_2d([(1, 3)], (3, 3))


def test_hypervolume_monotone():
    rng = np.random.default_rng(0)
    for _ in range(100):
        front = pareto_filter(rng.random((20, 2))).points
        full = hypervolume_2d(front, (1.1, 1.1))
        for i in range(len(front)):
            assert hypervolume_2d(np.delete(front, i, axis=0), (1.1, 1.1)) <= full


def test_hypervolume_monte_carlo():
    rng = np.random.default_rng(1)
    n = 10**6
    for _ in range(3):
        front = pareto_filter(rng.random((15, 2))).points
        exact = hypervolume_2d(front, (1.1, 1.1))
        u = rng.random((n, 2)) * 1.1
        hit = np.zeros(n, dtype=bool)
        for p in front:
            hit |= (u[:, 0] >= p[0]) & (u[:, 1] >= p[1])
        frac = hit.mean()
        se = np.sqrt(frac * (1 - frac) / n) * 1.21
        assert abs(frac * 1.21 - exact) <= 3 * se


def test_attainment_two_runs():
    s = attainment_surfaces([[(1, 2)], [(2, 1)]])
    assert sorted(map(tuple, s.best)) == [(1, 2), (2, 1)]
    assert s.worst.tolist() == [[2, 2]]
    assert s.median.tolist() == s.best.tolist()


def test_attainment_degenerate_cases():
    front = [(1, 5), (2, 3), (4, 1)]
    s = attainment_surfaces([front])
    for surf in (s.best, s.median, s.worst):
        assert sorted(map(tuple, surf)) == front
    s = attainment_surfaces([front] * 3)
    assert s.best.tolist() == s.median.tolist() == s.worst.tolist()


def test_attainment_nested_and_counts():
    rng = np.random.default_rng(2)
    for _ in range(50):
        k = int(rng.integers(1, 8))
        fronts = [pareto_filter(rng.random((int(rng.integers(1, 10)), 2))).points for _ in range(k)]
        s = attainment_surfaces(fronts)
        assert is_nested(s)
        # every median vertex is reached by at least ceil(k/2) runs
        need = -(-k // 2)
        for v in s.median:
            reached = sum(bool(attained(f, v[None, :])[0]) for f in fronts)
            assert reached >= need


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(17, 2))
    write_front_csv(tmp_path / "f.csv", pts, np.zeros(17))
    back, cv = read_front_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(back, pts)
    assert np.all(cv == 0)
    s = attainment_surfaces([pareto_filter(rng.random((6, 2))).points for _ in range(4)])
    write_eaf_csv(tmp_path / "e.csv", s)
    levels = read_eaf_csv(tmp_path / "e.csv")
    np.testing.assert_array_equal(levels[1], s.best)
    np.testing.assert_array_equal(levels[2], s.median)
    np.testing.assert_array_equal(levels[4], s.worst)


def test_oracle_tiny2(tiny2):
    a, b = oracle_front(tiny2, 5), oracle_front(tiny2, 5)
    np.testing.assert_array_equal(a.points, b.points)
    assert len(pareto_filter(a.points)) == len(a)
    grid = np.linspace(0, 1, 5)
    evs = [evaluate(np.array(g), tiny2) for g in itertools.product(grid, repeat=4)]
    assert len(evs) == 625
    feas = np.array([e.objectives for e in evs if e.cv == 0])
    for p in feas:
        assert np.any(np.all(a.points <= p + 1e-12, axis=1))
    np.testing.assert_allclose(np.sort(a.points, axis=0), np.sort(pareto_filter(feas).points, axis=0))


def test_oracle_levels_one(tiny2):
    f = oracle_front(tiny2, 1)
    ev = evaluate(np.full(4, 0.5), tiny2)
    if ev.cv == 0:
        np.testing.assert_allclose(f.points, [ev.objectives])
    else:
        assert len(f) == 0


def test_oracle_empty_decision_space():
    net = FeederNetwork([Bus(0), Bus(1)], [Branch(0, 1, 0.01, 0.01)])
    sc = Scenario(network=net, horizon_t=2, dt=1.0, load_p=np.array([[0, 0], [5.0, 8.0]]),
                  load_q=np.zeros((2, 2)), ders=[], batteries=[], s_base=100.0)
    f = oracle_front(sc, 5)
    assert len(f) == 1
    np.testing.assert_allclose(f.points[0], evaluate(np.empty(0), sc).objectives)


def test_oracle_guard(tiny2):
    with pytest.raises(OracleTooLarge):
        oracle_front(tiny2, 57)


def test_coverage_gaps():
    oracle = np.array([[0.0, 1.0], [1.0, 0.0]])
    gaps, ok = coverage_gaps(oracle, oracle, 0.0)
    assert np.all(gaps == 0) and ok.all()
    gaps, ok = coverage_gaps(oracle, [[0.0, 1.0]], 0.0)
    assert ok.tolist() == [True, False] and gaps[1] == pytest.approx(1.0)
