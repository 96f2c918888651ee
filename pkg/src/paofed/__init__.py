"""Simulator for partial-sharing asynchronous online federated learning.

Clients learn a shared nonlinear regression model in random Fourier feature
space from streaming data. Each message carries only m of the D model
coordinates, client participation is intermittent, and upstream messages can
arrive iterations late; the server weights arrivals by staleness and resolves
per-coordinate conflicts in favour of the most recent sender.
"""

from .algorithms import (
    AlgoConfig,
    Arrival,
    ArrivalBatch,
    DelayWeightSchedule,
    VARIANTS,
    alpha_weight,
    client_round,
    local_update,
    online_fed_aggregate,
    resolve_conflicts,
    server_aggregate,
)
from .asynchrony import (
    AsyncConfig,
    Channel,
    InFlightMessage,
    assign_availability,
    sample_availability,
    sample_delay,
)
from .data_stream import (
    DEFAULT_GROUP_SIZES,
    ClientStream,
    DataGenConfig,
    build_population,
    generate_labeled_set,
    make_test_set,
    next_sample,
)
from .engine import (
    ExperimentConfig,
    SimState,
    Simulation,
    SuiteResult,
    run_experiment,
    run_suite,
)
from .features import RffMap, map_input, new_rff_map
from .masking import Mask, MaskScheduler, circshift, client_mask, server_mask
from .metrics import (
    MSE_DB_FLOOR,
    RunResult,
    estimate_mu_bound,
    mse_db,
    power_iteration,
    tail_mean,
)
from .rng import derive_seed, substream

__version__ = "0.1.0"

__all__ = [
    "AlgoConfig",
    "Arrival",
    "ArrivalBatch",
    "AsyncConfig",
    "Channel",
    "ClientStream",
    "DataGenConfig",
    "DelayWeightSchedule",
    "DEFAULT_GROUP_SIZES",
    "ExperimentConfig",
    "InFlightMessage",
    "Mask",
    "MaskScheduler",
    "MSE_DB_FLOOR",
    "RffMap",
    "RunResult",
    "SimState",
    "Simulation",
    "SuiteResult",
    "VARIANTS",
    "alpha_weight",
    "assign_availability",
    "build_population",
    "circshift",
    "client_mask",
    "client_round",
    "derive_seed",
    "estimate_mu_bound",
    "generate_labeled_set",
    "local_update",
    "make_test_set",
    "map_input",
    "mse_db",
    "new_rff_map",
    "next_sample",
    "online_fed_aggregate",
    "power_iteration",
    "resolve_conflicts",
    "run_experiment",
    "run_suite",
    "sample_availability",
    "sample_delay",
    "server_aggregate",
    "server_mask",
    "substream",
    "tail_mean",
]
