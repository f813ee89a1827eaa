import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import rel_close
from sopt.core import CostSpec, ValidationError
from sopt.oracle import oracle_dp
from sopt.sliced import (DirectionSet, project, sample_directions, sopt_estimate,
                         sopt_slice_displacement)
from sopt.solver import SolverConfig, solve


def test_directions_unit_norm_and_deterministic():
    ds = sample_directions(3, 500, seed=4)
    assert np.all(np.abs(np.linalg.norm(ds.directions, axis=1) - 1) <= 1e-12)
    assert np.array_equal(ds.directions, sample_directions(3, 500, seed=4).directions)


def test_directions_d1_are_signs():
    ds = sample_directions(1, 50, seed=0)
    assert set(np.unique(ds.directions)) <= {-1.0, 1.0}


def test_directions_mean_concentrates():
    # 5 sigma with per-coordinate variance 1/3 and N = 1e4
    ds = sample_directions(3, 10_000, seed=1)
    assert np.linalg.norm(ds.directions.mean(axis=0)) <= 0.05


def test_directions_validation():
    with pytest.raises(ValidationError):
        sample_directions(0, 5, 0)
    with pytest.raises(ValidationError):
        sample_directions(2, 0, 0)


def test_project_examples():
    rng = np.random.default_rng(0)
    P = rng.normal(size=(12, 3))
    vals, perm = project(P, [1.0, 0.0, 0.0])
    assert np.array_equal(vals, np.sort(P[:, 0]))
    theta = sample_directions(3, 1, 2).directions[0]
    vals, perm = project(P, theta)
    assert np.allclose((P @ theta)[perm], vals, rtol=0, atol=1e-14)
    neg, _ = project(P, -theta)
    assert np.allclose(neg, -vals[::-1], rtol=0, atol=1e-15)
    with pytest.raises(ValidationError):
        project(P, [1.0, 0.0])


def test_sopt_self_is_zero():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 2))
    assert sopt_estimate(X, X, 1.0, N=20, seed=5).value == 0.0
    assert sopt_estimate(X, X[::-1], 1.0, N=20, seed=5).value == 0.0


def test_sopt_d1_equals_opt():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=15), rng.normal(size=11) + 0.5
    est = sopt_estimate(x[:, None], y[:, None], 0.7, N=9, seed=3)
    want = solve(np.sort(x), np.sort(y), SolverConfig(lam=0.7)).value
    assert np.allclose(est.per_slice, want, rtol=1e-9, atol=1e-12)
    assert rel_close(est.value, want)


@pytest.mark.parametrize("seed", range(10))
def test_sopt_matches_per_slice_dp(seed):
    rng = np.random.default_rng(seed)
    X, Y = rng.normal(size=(6, 2)), rng.normal(size=(6, 2)) + 0.3
    est = sopt_estimate(X, Y, 0.5, N=8, seed=seed)
    dp = [oracle_dp(np.sort(X @ t), np.sort(Y @ t), 0.5) for t in est.directions.directions]
    assert rel_close(est.value, math.fsum(dp) / len(dp))


def test_sopt_parallel_deterministic():
    rng = np.random.default_rng(3)
    X, Y = rng.normal(size=(40, 3)), rng.normal(size=(35, 3))
    a = sopt_estimate(X, Y, 1.0, N=32, seed=7)
    b = sopt_estimate(X, Y, 1.0, N=32, seed=7, workers=4)
    assert a.value == b.value and np.array_equal(a.per_slice, b.per_slice)


def test_sopt_validation():
    with pytest.raises(ValidationError):
        sopt_estimate(np.zeros((3, 2)), np.zeros((3, 3)), 1.0)
    with pytest.raises(ValidationError):
        sopt_estimate(np.zeros((3, 2)), np.zeros((3, 2)), 0.0)
    ds = sample_directions(3, 4, 0)
    with pytest.raises(ValidationError):
        sopt_estimate(np.zeros((3, 2)), np.zeros((3, 2)), 1.0, directions=ds)


clouds = st.integers(1, 15).flatmap(lambda n: st.lists(
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=n, max_size=n))


@settings(max_examples=60, deadline=None)
@given(clouds, clouds, st.floats(0.05, 10))
def test_symmetry_and_upper_bound(a, b, lam):
    X, Y = np.array(a), np.array(b)
    ds = sample_directions(2, 16, seed=0)
    xy = sopt_estimate(X, Y, lam, directions=ds)
    yx = sopt_estimate(Y, X, lam, directions=ds)
    assert abs(xy.value - yx.value) <= 1e-12 * max(1.0, xy.value)
    assert np.all(xy.per_slice >= 0)
    assert np.all(xy.per_slice <= lam * (len(X) + len(Y)) * (1 + 1e-12))


def test_displacement_d1_moves_onto_targets():
    x = np.array([[0.0], [2.0], [9.0]])
    y = np.array([[0.5], [2.5]])
    disp, dom = sopt_slice_displacement(x, y, [1.0], 1.0)
    moved = x + disp
    assert np.allclose(moved[dom.source], y[dom.target])
    unmatched = np.setdiff1d(np.arange(3), dom.source)
    assert np.all(disp[unmatched] == 0)


def test_displacement_reprojection_identity():
    rng = np.random.default_rng(6)
    X, Y = rng.normal(size=(25, 3)), rng.normal(size=(30, 3))
    theta = sample_directions(3, 1, 8).directions[0]
    disp, dom = sopt_slice_displacement(X, Y, theta, 0.8)
    moved = X + disp
    assert np.allclose(moved[dom.source] @ theta, Y[dom.target] @ theta, atol=1e-12)
    assert np.all(np.diff(dom.source) > 0)
