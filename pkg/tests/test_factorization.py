import numpy as np
import pytest
from conftest import observe, random_mask_partial
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import dense_objective, grid_argmin_quartic

from dtwembed.factorization import (
    FactorizeConfig,
    ResidualState,
    dense_oracle_factorize,
    factorize,
    observed_error,
    psi,
    quartic_argmin,
    read_features,
    true_error,
    update_coordinate,
    write_features,
    write_trace,
)
from dtwembed.sampling import PartialSimilarityMatrix
from dtwembed.timeseries_io import DataError


@pytest.mark.parametrize("p, q, expected", [(0, 0, 0.0), (-1, 0, 1.0), (-3, 2, -2.0), (4, 0, 0.0)])
def test_quartic_examples(p, q, expected):
    assert quartic_argmin(p, q) == pytest.approx(expected, abs=1e-12)


def test_quartic_rejects_nonfinite():
    with pytest.raises(ValueError):
        quartic_argmin(np.nan, 1.0)
    with pytest.raises(ValueError):
        quartic_argmin(1.0, np.inf)


coef = st.floats(-1e4, 1e4, allow_nan=False, allow_infinity=False)


@settings(max_examples=500)
@given(coef, coef)
def test_quartic_stationary_and_global(p, q):
    x = quartic_argmin(p, q)
    scale = 1 + abs(p) + abs(q)
    assert abs(x**3 + p * x + q) <= 1e-9 * scale * max(1.0, x * x)
    # compare with every real root of the cubic found independently
    roots = np.roots([1.0, 0.0, p, q])
    real = roots[np.abs(roots.imag) < 1e-7 * scale].real
    best = min(psi(r, p, q) for r in real)
    assert psi(x, p, q) <= best + 1e-9 * (1 + abs(best))


def test_quartic_near_double_root():
    # discriminant is zero up to rounding; min is the simple root -2
    for eps in (0.0, 1e-14, -1e-14, 1e-9):
        assert quartic_argmin(-3.0 + eps, 2.0) == pytest.approx(-2.0, abs=1e-6)


def _state(A_dense, mask_pairs, X, i):
    """Residual with column i added back, as during its update pass."""
    rows, cols = mask_pairs
    P = observe(A_dense, np.asarray(rows, int), np.asarray(cols, int))
    state = ResidualState(P)
    state.refresh(X)
    state.add_column(np.ascontiguousarray(X[:, i]))
    return P, state


def test_update_zero_state():
    A = np.array([[4.0, 1.5, -2.0], [1.5, 1.0, 0.3], [-2.0, 0.3, 2.0]])
    X = np.zeros((3, 2))
    _, state = _state(A, ([0, 0, 1], [1, 2, 2]), X, 1)
    assert update_coordinate(state, X, 1, 0) == pytest.approx(2.0)
    assert X[0, 1] == pytest.approx(2.0)


@pytest.mark.parametrize("r", [2.5, 0.0, -1.0])
def test_update_diagonal_only(r):
    A = np.diag([r, 1.0])
    X = np.zeros((2, 1))
    _, state = _state(A, ([], []), X, 0)
    got = update_coordinate(state, X, 0, 0)
    expected = grid_argmin_quartic(-r, 0.0, -3, 3, 1e-4)[0]
    assert got == pytest.approx(expected, abs=1e-4)
    assert got == pytest.approx(np.sqrt(max(r, 0.0)))


def test_update_single_entry_nonzero_start():
    # objective (r - x^2)^2 regardless of the starting value v
    A = np.diag([3.0, 1.0])
    X = np.array([[0.7], [0.0]])
    _, state = _state(A, ([], []), X, 0)
    assert update_coordinate(state, X, 0, 0) == pytest.approx(np.sqrt(3.0))


def test_update_fixed_point():
    x = np.array([[1.0], [2.0], [2.0]])
    A = x @ x.T
    X = x.copy()
    _, state = _state(A, ([0, 0, 1], [1, 2, 2]), X, 0)
    for j in range(3):
        assert update_coordinate(state, X, 0, j) == pytest.approx(x[j, 0], abs=1e-12)


def test_rank1_full_recovery(backend):
    x = np.array([[1.0], [2.0], [2.0]])
    A = x @ x.T
    P = observe(A, np.array([0, 0, 1]), np.array([1, 2, 2]))
    X, trace = factorize(P, FactorizeConfig(d=1, iterations=5))
    np.testing.assert_allclose(np.abs(X), x, atol=1e-10)
    assert trace.observed_error[-1] <= 1e-10
    np.testing.assert_allclose(X @ X.T, A, atol=1e-10)


def test_decoupled_diagonal(backend):
    P = PartialSimilarityMatrix(2, [0, 1], [0, 1], [4.0, 9.0])
    X, trace = factorize(P, FactorizeConfig(d=1, iterations=3))
    np.testing.assert_allclose(np.abs(X[:, 0]), [2.0, 3.0])
    assert trace.observed_error[-1] == 0.0


def test_rejects_missing_diagonal_and_tiny_n():
    P = PartialSimilarityMatrix(3, [0, 0, 2], [0, 1, 2], [1.0, 0.5, 1.0])
    with pytest.raises(DataError, match=r"\(1, 1\)"):
        factorize(P, FactorizeConfig(d=1, iterations=1))
    with pytest.raises(ValueError):
        factorize(PartialSimilarityMatrix(1, [0], [0], [4.0]), FactorizeConfig(d=1, iterations=1))


@pytest.mark.parametrize("kw", [{"d": 0}, {"iterations": 0}, {"init_mode": "random"}, {"refresh_every": 0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        FactorizeConfig(**kw)


def _low_rank_problem(n, r, frac, seed):
    rng = np.random.default_rng(seed)
    Xs = rng.uniform(-1, 1, (n, r))
    A = Xs @ Xs.T
    return A, random_mask_partial(A, frac, rng)


def test_monotone_per_coordinate():
    A, P = _low_rank_problem(12, 2, 0.5, 0)
    mask = P.mask()
    X = np.random.default_rng(1).uniform(-0.5, 0.5, (12, 3))
    state = ResidualState(P)
    state.refresh(X)
    prev = dense_objective(A, mask, X)
    for _ in range(3):
        for i in range(3):
            state.add_column(np.ascontiguousarray(X[:, i]))
            for j in range(12):
                update_coordinate(state, X, i, j)
                cur = dense_objective(A, mask, X)
                assert cur <= prev + 1e-12
                prev = cur
            state.subtract_column(np.ascontiguousarray(X[:, i]))


def test_residual_consistency(backend):
    from dtwembed._backend import kernels

    A, P = _low_rank_problem(40, 3, 0.4, 2)
    X = np.zeros((40, 4))
    state = ResidualState(P)
    fresh = ResidualState(P)
    k = kernels()
    for _ in range(6):
        for i in range(4):
            col = np.ascontiguousarray(X[:, i])
            state.add_column(col)
            k.cd_sweep(state.indptr, state.indices, state.resid, state.diag_pos, col)
            state.subtract_column(col)
            X[:, i] = col
            fresh.refresh(X)
            err = np.linalg.norm(state.resid - fresh.resid) / np.linalg.norm(fresh.resid + 1e-300)
            assert err <= 1e-8 or np.linalg.norm(state.resid - fresh.resid) <= 1e-12


def test_ops_count_and_backends_reach_same_quality():
    from dtwembed import _backend

    A, P = _low_rank_problem(80, 3, 0.3, 5)
    slots = P.indptr[-1]
    results = {}
    prev = _backend.get_backend()
    try:
        for name in ("numba", "numpy"):
            _backend.set_backend(name)
            X, trace = factorize(P, FactorizeConfig(d=3, iterations=30))
            assert trace.ops == [3 * slots] * 30
            results[name] = trace.observed_error[-1]
    finally:
        _backend.set_backend(prev)
    assert max(results.values()) < 1e-6


def test_observed_error_examples():
    A, P = _low_rank_problem(30, 2, 0.5, 3)
    assert observed_error(P, np.zeros((30, 2))) == 1.0
    rng = np.random.default_rng(0)
    Xs = rng.uniform(-1, 1, (30, 2))
    P2 = PartialSimilarityMatrix.from_dense(Xs @ Xs.T, P.mask())
    assert observed_error(P2, Xs) == pytest.approx(0.0, abs=1e-14)
    X = rng.standard_normal((30, 4))
    mask = P.mask()
    dense = np.sqrt(dense_objective(A, mask, X) / dense_objective(A, mask, np.zeros((30, 1))))
    assert observed_error(P, X) == pytest.approx(dense, rel=1e-12)


def test_observed_error_zero_matrix():
    P = PartialSimilarityMatrix(2, [0, 1], [0, 1], [0.0, 0.0])
    with pytest.raises(ValueError):
        observed_error(P, np.ones((2, 1)))


def test_true_error_examples():
    A, _ = _low_rank_problem(20, 3, 0.5, 0)
    X = dense_oracle_factorize(A, 3)
    assert true_error(A, X) <= 1e-10
    assert true_error(A, np.zeros((20, 3))) == 1.0
    with pytest.raises(ValueError):
        true_error(np.zeros((3, 3)), np.zeros((3, 1)))


def test_dense_oracle_examples():
    X = dense_oracle_factorize(np.eye(3), 3)
    np.testing.assert_allclose(X @ X.T, np.eye(3), atol=1e-12)
    x = np.array([1.0, -2.0, 0.5])
    g = dense_oracle_factorize(np.outer(x, x), 1)[:, 0]
    assert np.allclose(g, x) or np.allclose(g, -x)
    A, _ = _low_rank_problem(50, 5, 1.0, 9)
    assert true_error(A, dense_oracle_factorize(A, 5)) <= 1e-8


def test_dense_oracle_clamps_negative_eigenvalues():
    A = np.diag([2.0, -1.0])
    X = dense_oracle_factorize(A, 2)
    np.testing.assert_allclose(X @ X.T, np.diag([2.0, 0.0]), atol=1e-12)


def test_perturbed_init_deterministic(backend):
    A, P = _low_rank_problem(30, 2, 0.5, 4)
    cfg = FactorizeConfig(d=2, iterations=4, init_mode="perturbed", seed=123)
    X1, _ = factorize(P, cfg)
    X2, _ = factorize(P, cfg)
    np.testing.assert_array_equal(X1, X2)


def test_early_stop():
    A, P = _low_rank_problem(60, 2, 0.5, 6)
    X, trace = factorize(P, FactorizeConfig(d=2, iterations=200, tol=1e-8))
    assert trace.stopped_early and trace.iterations < 200
    assert trace.relative_changes()[-1] < 1e-8


def test_true_error_trace():
    A, P = _low_rank_problem(40, 2, 0.6, 8)
    _, trace = factorize(P, FactorizeConfig(d=2, iterations=10), A_full=A)
    assert len(trace.true_error) == 10
    assert trace.true_error[-1] < 1e-3


def test_feature_and_trace_files(tmp_path):
    X = np.random.default_rng(0).standard_normal((5, 3)) * 1e3
    write_features(X, tmp_path / "f.csv")
    text = (tmp_path / "f.csv").read_text().splitlines()
    assert text[0] == "f0,f1,f2"
    np.testing.assert_array_equal(read_features(tmp_path / "f.csv"), X)
    write_features(X, tmp_path / "g.csv", header=False)
    np.testing.assert_array_equal(read_features(tmp_path / "g.csv"), X)
    A, P = _low_rank_problem(10, 1, 0.5, 0)
    _, trace = factorize(P, FactorizeConfig(d=1, iterations=2), A_full=A)
    write_trace(trace, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "iteration,observed_error,true_error" and len(lines) == 3
