import numpy as np
import pytest

from paofed.algorithms import AlgoConfig, DelayWeightSchedule
from paofed.data_stream import DataGenConfig
from paofed.engine import (
    ExperimentConfig,
    Simulation,
    SuiteResult,
    run_experiment,
    run_suite,
)

SMALL = dict(K=8, D=16, iterations=80, eval_every=20, test_size=200)


def small_config(**kwargs):
    merged = {**SMALL, **kwargs}
    return ExperimentConfig(**merged)


# -- configuration ------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        {"K": 0},
        {"D": 0},
        {"iterations": -1},
        {"eval_every": 0},
        {"test_size": 0},
        {"availability_group_probs": (0.5, 0.5)},
        {"algo": AlgoConfig(variant="pao_fed", m=32)},  # m > D
        {"algo": AlgoConfig(variant="online_fed", subsample_size=9)},
        {"group_sizes": (10,) * 7},
        {"delay_base": 1.0},
        {"l_max": 15, "delay_granularity": 10},
        {"overflow": "retry"},
    ],
)
def test_experiment_config_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        small_config(**kwargs)


def test_large_m_allowed_for_broadcast_variants():
    # m is a partial-sharing knob; broadcast variants ignore it
    small_config(algo=AlgoConfig(variant="online_fedsgd", m=500))


def test_alpha_schedule_must_cover_channel():
    with pytest.raises(ValueError, match="alpha schedule"):
        Simulation(
            small_config(
                algo=AlgoConfig(
                    variant="pao_fed", alpha_schedule=DelayWeightSchedule.flat(3)
                )
            )
        )


def test_fingerprint_records_override_and_seed():
    cfg = small_config()
    algo = AlgoConfig(variant="online_fedsgd", mu=0.7)
    fp = cfg.fingerprint(algo, seed=42)
    assert fp["algo"]["variant"] == "online_fedsgd"
    assert fp["run_seed"] == 42
    assert fp["K"] == 8
    sched = DelayWeightSchedule.geometric(0.5, 10)
    fp2 = cfg.fingerprint(AlgoConfig(variant="pao_fed", alpha_schedule=sched), 0)
    assert fp2["algo"]["alpha_schedule"]["weights"][1] == 0.5


# -- determinism and seed handling ---------------------------------------------


def test_identical_config_and_seed_reproduce_bitwise():
    cfg = small_config()
    a = run_experiment(cfg, seed=3)
    b = run_experiment(cfg, seed=3)
    np.testing.assert_array_equal(a.mse_db, b.mse_db)
    np.testing.assert_array_equal(a.uploads_series, b.uploads_series)


def test_different_seeds_differ():
    cfg = small_config()
    a = run_experiment(cfg, seed=0)
    b = run_experiment(cfg, seed=1)
    assert not np.array_equal(a.mse_db, b.mse_db)


def test_seed_argument_overrides_config_seed():
    cfg = small_config(seed=5)
    assert run_experiment(cfg).seed == 5
    assert run_experiment(cfg, seed=9).seed == 9


def test_availability_and_delays_shared_across_variants():
    # Common random numbers: the same seed must give every variant the same
    # participation pattern, which is what makes traffic ratios exact.
    cfg = small_config()
    pao = Simulation(cfg, algo=AlgoConfig(variant="pao_fed"), seed=4)
    sgd = Simulation(cfg, algo=AlgoConfig(variant="online_fedsgd"), seed=4)
    np.testing.assert_array_equal(pao.U, sgd.U)
    np.testing.assert_array_equal(pao.probs, sgd.probs)


# -- stepping and bookkeeping ---------------------------------------------------


def test_eval_grid_covers_start_every_and_end():
    r = run_experiment(small_config(iterations=50, eval_every=20), seed=0)
    assert r.eval_iterations.tolist() == [0, 20, 40, 50]


def test_step_beyond_end_rejected():
    sim = Simulation(small_config(iterations=1))
    sim.step()
    with pytest.raises(RuntimeError, match="finished"):
        sim.step()


def test_initial_model_is_zero_and_mse_positive_db():
    sim = Simulation(small_config())
    assert not sim.state.w.any()
    r = sim.run()
    assert r.mse_db[0] > -3.0  # zero model cannot explain the targets


def test_run_learns_on_small_problem():
    r = run_experiment(
        small_config(iterations=400, availability_group_probs=(1.0, 1.0, 1.0, 1.0)),
        seed=0,
    )
    assert r.mse_db[-1] < r.mse_db[0] - 5.0


def test_pso_variant_never_delays_messages():
    cfg = small_config(algo=AlgoConfig(variant="pso_fed", coordinated=True))
    sim = Simulation(cfg)
    assert not sim.delays.any()
    sim.run()
    assert sim.state.channel.pending() == 0
    assert sim.state.channel.delivered == sim.state.channel.sent


def test_channel_conservation_after_run():
    cfg = small_config(delay_base=0.6, l_max=4)
    sim = Simulation(cfg)
    sim.run()
    ch = sim.state.channel
    assert ch.sent == ch.delivered + ch.pending() + ch.dropped
    assert ch.dropped == 0  # clamp policy never drops


def test_drop_policy_counts_dropped_messages():
    cfg = small_config(delay_base=0.7, l_max=1, overflow="drop", iterations=200)
    sim = Simulation(cfg)
    sim.run()
    ch = sim.state.channel
    assert ch.dropped > 0
    assert ch.sent == ch.delivered + ch.pending() + ch.dropped


def test_partial_traffic_counts_m_per_participation():
    cfg = small_config(algo=AlgoConfig(variant="pao_fed", m=4))
    sim = Simulation(cfg)
    r = sim.run()
    assert r.uploads == 4 * sim.state.channel.sent
    assert r.downloads == r.uploads


def test_broadcast_traffic_counts_full_model():
    cfg = small_config(algo=AlgoConfig(variant="online_fedsgd"))
    r = run_experiment(cfg, seed=0)
    assert r.uploads % cfg.D == 0
    assert r.uploads > 0


def test_subsample_caps_participation():
    full = run_experiment(
        small_config(algo=AlgoConfig(variant="online_fedsgd")), seed=0
    )
    sub = run_experiment(
        small_config(algo=AlgoConfig(variant="online_fed", subsample_size=1)), seed=0
    )
    assert sub.uploads <= full.uploads
    assert sub.uploads <= small_config().D * small_config().iterations


def test_exhausted_population_stops_all_traffic():
    cfg = small_config(
        iterations=60, group_sizes=(5,) * 8, availability_group_probs=(1.0,) * 4
    )
    sim = Simulation(cfg)
    r = sim.run()
    # five samples per client, so uploads freeze once local sets run dry
    assert r.uploads_series[-1] == r.uploads_series[1]
    assert r.uploads == 8 * 5 * 4  # every client sent every sample, m=4 each


def test_zero_iterations_run_is_just_the_initial_point():
    r = run_experiment(small_config(iterations=0), seed=0)
    assert r.eval_iterations.tolist() == [0]
    assert r.uploads == 0


# -- suites ---------------------------------------------------------------------


def test_suite_averages_over_seeds():
    cfg = small_config(seeds=(0, 1, 2))
    out = run_suite({"base": cfg})
    suite = out["base"]
    assert len(suite.runs) == 3
    stacked = np.stack([r.mse_db for r in suite.runs])
    np.testing.assert_allclose(suite.mean_mse_db, stacked.mean(axis=0))
    np.testing.assert_allclose(suite.std_mse_db, stacked.std(axis=0))


def test_suite_seed_override_and_validation():
    cfg = small_config()
    out = run_suite({"x": cfg}, seeds=[7])
    assert out["x"].runs[0].seed == 7
    with pytest.raises(ValueError, match="empty seed"):
        run_suite({"x": cfg}, seeds=[])
    with pytest.raises(ValueError, match="at least one"):
        SuiteResult.from_runs("x", [])


def test_suite_rejects_mismatched_eval_grids():
    a = run_experiment(small_config(), seed=0)
    b = run_experiment(small_config(iterations=60), seed=0)
    with pytest.raises(ValueError, match="mismatched"):
        SuiteResult.from_runs("x", [a, b])


def test_suite_tail_mean_matches_hand_average():
    cfg = small_config(seeds=(0, 1))
    suite = run_suite({"s": cfg})["s"]
    keep = suite.eval_iterations >= 40
    assert suite.tail_mean_after(40) == pytest.approx(
        float(suite.mean_mse_db[keep].mean())
    )
