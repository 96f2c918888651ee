#!/usr/bin/env python3
"""Sweep the step size around the estimated stability bound.

Estimates the feature-space bound on a synchronous full-participation
configuration, then runs the same configuration at a few multiples of it.
Fractions of the bound should learn; multiples well above it should blow up.
"""

MULTIPLIERS = (0.25, 0.5, 0.9, 1.5, 4.0)
SEED = 0

from paofed.algorithms import AlgoConfig
from paofed.engine import ExperimentConfig, Simulation, run_experiment
from paofed.metrics import estimate_mu_bound

BASE = dict(
    K=16,
    D=50,
    bandwidth=2.0,
    test_size=500,
    eval_every=50,
    group_sizes=(2000,) * 16,
    availability_group_probs=(1.0, 1.0, 1.0, 1.0),
    delay_base=0.0,
)


def experiment(mu: float, iterations: int) -> ExperimentConfig:
    return ExperimentConfig(
        iterations=iterations,
        algo=AlgoConfig(variant="online_fedsgd", mu=mu),
        **BASE,
    )


if __name__ == "__main__":
    sim = Simulation(experiment(mu=1.0, iterations=10), seed=SEED)
    bound = estimate_mu_bound(sim.population, sim.rff)
    print(f"estimated step-size bound: {bound:.4f}\n")
    print(f"{'mu/bound':>9} {'mu':>8} {'start dB':>9} {'final dB':>9}")
    for mult in MULTIPLIERS:
        # Divergent settings overflow quickly; keep those runs short.
        n = 2000 if mult < 1.0 else 150
        result = run_experiment(experiment(mu=mult * bound, iterations=n), seed=SEED)
        print(
            f"{mult:>9.2f} {mult * bound:>8.3f} "
            f"{result.mse_db[0]:>9.2f} {result.mse_db[-1]:>9.2f}"
        )
