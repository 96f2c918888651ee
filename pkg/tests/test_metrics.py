import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paofed.data_stream import ClientStream, DataGenConfig, build_population
from paofed.features import map_input, new_rff_map
from paofed.metrics import (
    MSE_DB_FLOOR,
    RunResult,
    estimate_mu_bound,
    mse_db,
    mse_db_from_features,
    power_iteration,
    tail_mean,
)
from paofed.rng import substream


def test_mse_db_known_values():
    # residual of constant 0.1 -> MSE 0.01 -> -20 dB; residual 1 -> 0 dB
    w = np.zeros(2)
    Z = np.zeros((4, 2))
    assert mse_db_from_features(w, Z, np.full(4, 0.1)) == pytest.approx(-20.0)
    assert mse_db_from_features(w, Z, np.ones(4)) == pytest.approx(0.0)
    assert mse_db_from_features(w, Z, np.full(4, 10.0)) == pytest.approx(20.0)


def test_exact_fit_is_minus_infinity():
    w = np.array([2.0])
    Z = np.array([[1.0], [3.0]])
    assert mse_db_from_features(w, Z, Z[:, 0] * 2.0) == float("-inf")
    assert MSE_DB_FLOOR < -300


def test_mse_db_maps_inputs_consistently():
    rff = new_rff_map(4, 16, 1.0, seed=0)
    rng = substream(5, "mse")
    X = rng.uniform(-1, 1, size=(10, 4))
    y = rng.normal(size=10)
    w = rng.normal(size=16)
    direct = mse_db_from_features(w, map_input(rff, X), y)
    assert mse_db(w, (X, y), rff) == direct


def test_mse_db_validates_test_set():
    rff = new_rff_map(2, 4, 1.0, seed=0)
    with pytest.raises(ValueError, match="empty"):
        mse_db(np.zeros(4), (np.zeros((0, 2)), np.zeros(0)), rff)
    with pytest.raises(ValueError, match="targets"):
        mse_db(np.zeros(4), (np.zeros((3, 2)), np.zeros(2)), rff)


def test_tail_mean_takes_last_entries():
    assert tail_mean([0.0, 2.0, 4.0], 2) == 3.0
    assert tail_mean([5.0], 1) == 5.0
    with pytest.raises(ValueError):
        tail_mean([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        tail_mean([1.0], 0)


# -- eigenvalue bound ---------------------------------------------------------


def test_power_iteration_matches_dense_solver():
    rng = substream(1, "eig")
    M = rng.normal(size=(12, 12))
    A = M @ M.T
    lam = power_iteration(A)
    assert lam == pytest.approx(float(np.linalg.eigvalsh(A)[-1]), rel=1e-5)


def test_power_iteration_diagonal_case():
    assert power_iteration(np.diag([1.0, 5.0, 3.0])) == pytest.approx(5.0, rel=1e-6)
    assert power_iteration(np.zeros((3, 3))) == 0.0


def test_power_iteration_rejects_non_square():
    with pytest.raises(ValueError, match="square"):
        power_iteration(np.zeros((3, 2)))


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 2**20), D=st.integers(2, 16))
def test_power_iteration_upper_bounded_by_trace(seed, D):
    rng = substream(seed, "eig-prop")
    M = rng.normal(size=(D, D))
    A = M @ M.T
    lam = power_iteration(A)
    assert 0 <= lam <= float(np.trace(A)) + 1e-9


def test_estimate_bound_is_two_over_worst_eigenvalue():
    cfg = DataGenConfig(seed=3)
    pop = build_population(cfg, K=4, sizes=[300, 300, 300, 300])
    rff = new_rff_map(4, 20, 1.0, seed=3)
    bound = estimate_mu_bound(pop, rff)
    worst = max(
        float(np.linalg.eigvalsh((lambda Z: Z.T @ Z / Z.shape[0])(map_input(rff, s.X)))[-1])
        for s in pop
    )
    assert bound == pytest.approx(2.0 / worst, rel=1e-4)


def test_estimate_bound_sample_cap_and_validation():
    cfg = DataGenConfig(seed=3)
    pop = build_population(cfg, K=4, sizes=[50, 50, 50, 50])
    rff = new_rff_map(4, 10, 1.0, seed=3)
    capped = estimate_mu_bound(pop, rff, samples_per_client=10)
    full = estimate_mu_bound(pop, rff)
    assert capped != full
    with pytest.raises(ValueError):
        estimate_mu_bound(pop, rff, samples_per_client=-1)


def test_estimate_bound_warns_when_undersampled(caplog):
    cfg = DataGenConfig(seed=3)
    pop = build_population(cfg, K=4, sizes=[50, 50, 50, 50])
    rff = new_rff_map(4, 30, 1.0, seed=3)
    with caplog.at_level("WARNING"):
        estimate_mu_bound(pop, rff, samples_per_client=5)
    assert any("noisy" in r.message for r in caplog.records)


def test_estimate_bound_rejects_population_without_data():
    empty = ClientStream(X=np.zeros((0, 4)), y=np.zeros(0), group_id=0)
    rff = new_rff_map(4, 8, 1.0, seed=0)
    with pytest.raises(ValueError, match="degenerate"):
        estimate_mu_bound([empty], rff)
    # an empty client is skipped when others carry data
    cfg = DataGenConfig(seed=3)
    pop = build_population(cfg, K=4, sizes=[50, 50, 50, 50])
    assert estimate_mu_bound([empty, *pop], rff) == estimate_mu_bound(pop, rff)


# -- run results --------------------------------------------------------------


def result(its, mses, ups=None):
    its = np.asarray(its)
    ups = np.asarray(ups if ups is not None else np.zeros_like(its))
    return RunResult(
        variant="pao_fed",
        seed=0,
        eval_iterations=its,
        mse_db=np.asarray(mses, dtype=float),
        uploads_series=ups,
        downloads_series=ups.copy(),
    )


def test_run_result_validates_alignment():
    with pytest.raises(ValueError, match="strictly increasing"):
        result([0, 5, 5], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="align"):
        RunResult(
            variant="x",
            seed=0,
            eval_iterations=np.array([0, 1]),
            mse_db=np.zeros(3),
            uploads_series=np.zeros(2),
            downloads_series=np.zeros(2),
        )


def test_run_result_series_and_totals():
    r = result([0, 10, 20], [-1.0, -5.0, -9.0], ups=[0, 40, 80])
    assert r.mse_db_series == [(0, -1.0), (10, -5.0), (20, -9.0)]
    assert r.uploads == 80
    assert r.downloads == 80
    assert r.final_mse_db() == -9.0
    assert r.final_mse_db(tail_points=2) == -7.0


def test_tail_mean_after_selects_by_iteration():
    r = result([0, 10, 20, 30], [0.0, -2.0, -4.0, -6.0])
    assert r.tail_mean_after(15) == -5.0
    assert r.tail_mean_after(0) == -3.0
    with pytest.raises(ValueError, match="no eval points"):
        r.tail_mean_after(31)
