"""Discrete-time simulation loop tying streams, masks, channel, and server together.

One iteration n has two phases. First the client phase: every client that
still has data consumes exactly one fresh sample. Participating clients pull
the current server fragment, run a blend-update, and push their own fragment
into the channel with a sampled delay; non-participating clients just run a
plain local update. Then the delivery phase: every message whose delivery
iteration equals n (including ones sent this very iteration with zero delay)
is handed to the server, deduplicated per coordinate, and aggregated. The
model evaluated at iteration n+1 is the server model after that aggregation,
and the fragments broadcast at n+1 come from the same model.

All randomness for a run derives from one integer seed. Availability and
delay draws are pregenerated as (K, N) matrices indexed by client and
iteration, so two runs with the same seed but different algorithms see
identical participation patterns and channel behaviour wherever they both
send a message. That alignment is what makes cross-variant traffic ratios
exact instead of statistical.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .algorithms import (
    AlgoConfig,
    DelayWeightSchedule,
    online_fed_aggregate,
    resolve_conflicts,
    server_aggregate,
)
from .asynchrony import AsyncConfig, Channel, InFlightMessage, assign_availability
from .data_stream import DataGenConfig, build_population, make_test_set
from .features import map_input, new_rff_map
from .masking import MaskScheduler, circshift
from .metrics import RunResult, mse_db_from_features
from .rng import derive_seed, substream

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "SimState",
    "Simulation",
    "SuiteResult",
    "run_experiment",
    "run_suite",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """One full experiment: population, features, channel law, and algorithm."""

    K: int = 256
    D: int = 200
    iterations: int = 2000
    eval_every: int = 10
    bandwidth: float = 1.0
    test_size: int = 2000
    seed: int = 0
    seeds: tuple[int, ...] = tuple(range(10))
    data: DataGenConfig = field(default_factory=DataGenConfig)
    algo: AlgoConfig = field(default_factory=AlgoConfig)
    group_sizes: Optional[tuple[int, ...]] = None  # per-client local set sizes
    availability_group_probs: tuple[float, ...] = (0.25, 0.1, 0.025, 0.005)
    delay_base: float = 0.2
    delay_granularity: int = 1
    l_max: int = 10
    overflow: str = "clamp"

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.D < 1:
            raise ValueError(f"D must be >= 1, got {self.D}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.test_size < 1:
            raise ValueError(f"test_size must be >= 1, got {self.test_size}")
        if len(self.availability_group_probs) != 4:
            raise ValueError(
                f"need 4 availability group probabilities, got "
                f"{len(self.availability_group_probs)}"
            )
        if self.algo.variant in ("pso_fed", "pao_fed") and self.algo.m > self.D:
            raise ValueError(
                f"fragment size m={self.algo.m} exceeds model dimension D={self.D}"
            )
        if (
            self.algo.subsample_size is not None
            and self.algo.subsample_size > self.K
        ):
            raise ValueError(
                f"subsample_size={self.algo.subsample_size} exceeds K={self.K}"
            )
        if self.group_sizes is not None and len(self.group_sizes) != self.K:
            raise ValueError(
                f"group_sizes needs one entry per client ({self.K}), got "
                f"{len(self.group_sizes)}"
            )
        # Delegate range checks on the channel parameters.
        AsyncConfig(
            availability_probs=self.availability_group_probs,
            delay_base=self.delay_base,
            delay_granularity=self.delay_granularity,
            l_max=self.l_max,
            overflow=self.overflow,
        )

    def fingerprint(self, algo: AlgoConfig, seed: int) -> dict:
        d = dataclasses.asdict(self)
        d["data"] = dataclasses.asdict(self.data)
        d["algo"] = dataclasses.asdict(algo)
        if algo.alpha_schedule is not None:
            d["algo"]["alpha_schedule"] = {
                "weights": list(algo.alpha_schedule.weights),
                "l_max": algo.alpha_schedule.l_max,
            }
        d["run_seed"] = seed
        return d


@dataclass
class SimState:
    """Mutable per-run state; everything the step function touches."""

    n: int
    w: np.ndarray  # (D,) server model
    W: np.ndarray  # (K, D) client models
    channel: Channel
    uploads: int = 0
    downloads: int = 0


class Simulation:
    """One configured run. Build once, call run(), read the RunResult.

    The constructor does all the precomputation: data streams, feature map,
    padded sample arrays, and the availability / delay matrices. step() is
    then a thin dispatch between the partial-sharing path and the
    broadcast-averaging path.
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        algo: Optional[AlgoConfig] = None,
        seed: Optional[int] = None,
    ):
        self.cfg = cfg
        self.algo = algo if algo is not None else cfg.algo
        self.seed = cfg.seed if seed is None else seed
        if algo is not None:
            # Re-check the cross-field constraints for the override.
            dataclasses.replace(cfg, algo=algo)

        data_cfg = dataclasses.replace(cfg.data, seed=derive_seed(self.seed, "data"))
        sizes = list(cfg.group_sizes) if cfg.group_sizes is not None else None
        self.population = build_population(data_cfg, cfg.K, sizes=sizes)
        self.rff = new_rff_map(
            data_cfg.input_dim, cfg.D, cfg.bandwidth, derive_seed(self.seed, "rff")
        )

        X_test, self.y_test = make_test_set(data_cfg, cfg.test_size)
        self.Z_test = map_input(self.rff, X_test)

        N, K = cfg.iterations, cfg.K
        self.lens = np.array([len(s) for s in self.population])
        Lp = int(min(self.lens.max(), N)) if N > 0 else 0
        d_in = data_cfg.input_dim
        self.X_pad = np.zeros((K, max(Lp, 1), d_in))
        self.y_pad = np.zeros((K, max(Lp, 1)))
        for k, s in enumerate(self.population):
            take = min(len(s), Lp)
            self.X_pad[k, :take] = s.X[:take]
            self.y_pad[k, :take] = s.y[:take]

        self.probs = np.array(assign_availability(K, cfg.availability_group_probs))
        self.U = np.empty((K, max(N, 1)))
        for k in range(K):
            self.U[k] = substream(self.seed, "avail", k).random(max(N, 1))

        units = (
            substream(self.seed, "delay").geometric(
                1.0 - cfg.delay_base, size=(K, max(N, 1))
            )
            - 1
        )
        raw = cfg.delay_granularity * units
        if cfg.overflow == "clamp":
            self.delays = np.minimum(raw, cfg.l_max)
        else:
            self.delays = raw
        if self.algo.variant == "pso_fed":
            # Synchronous exchange: the channel never holds a message back.
            self.delays = np.zeros_like(self.delays)

        self.scheduler = MaskScheduler(
            D=cfg.D,
            m=self.algo.m,
            K=K,
            mode="coordinated" if self.algo.coordinated else "uncoordinated",
            reuse_local=self.algo.reuse_local,
        )
        # All masks are rotations of the base mask; precompute the D possible
        # rotations once so the hot loop only indexes. Built with the same
        # function the public API uses, so values match it bit for bit.
        self._mask_table = [
            circshift(self.scheduler.base_mask, off, cfg.D) for off in range(cfg.D)
        ]
        if self.algo.alpha_schedule is not None:
            if self.algo.alpha_schedule.l_max != cfg.l_max:
                raise ValueError(
                    f"alpha schedule covers delays up to "
                    f"{self.algo.alpha_schedule.l_max} but the channel allows "
                    f"{cfg.l_max}"
                )
            self.schedule = self.algo.alpha_schedule
        else:
            self.schedule = DelayWeightSchedule.flat(cfg.l_max)

        self._select_rng = substream(self.seed, "select")

        self.state = SimState(
            n=0,
            w=np.zeros(cfg.D),
            W=np.zeros((K, cfg.D)),
            channel=Channel(cfg.l_max, cfg.overflow),
        )

    # -- stepping ---------------------------------------------------------

    def step(self) -> None:
        st = self.state
        n = st.n
        if n >= self.cfg.iterations:
            raise RuntimeError("simulation already finished")

        has_data = n < self.lens
        avail = (self.U[:, n] < self.probs) & has_data

        if self.algo.variant in ("online_fed", "online_fedsgd"):
            self._step_broadcast(n, avail)
        else:
            self._step_partial(n, avail, has_data)

        st.n = n + 1

    def _step_broadcast(self, n: int, avail: np.ndarray) -> None:
        """Full-model exchange: subsample, local step from the server model, average."""
        st = self.state
        act = np.nonzero(avail)[0]
        size = self.algo.subsample_size
        if self.algo.variant == "online_fed" and size is not None and act.size > size:
            sel = np.sort(self._select_rng.choice(act, size=size, replace=False))
        else:
            sel = act
        if sel.size == 0:
            return
        Z = map_input(self.rff, self.X_pad[sel, n, :])
        e = self.y_pad[sel, n] - Z @ st.w
        W_loc = st.w[None, :] + self.algo.mu * e[:, None] * Z
        st.w = online_fed_aggregate(st.w, list(W_loc))
        D = self.cfg.D
        st.downloads += D * int(sel.size)
        st.uploads += D * int(sel.size)

    def _step_partial(self, n: int, avail: np.ndarray, has_data: np.ndarray) -> None:
        """Fragment exchange: blend-update and send when participating.

        The loop body inlines client_round on in-place row views; the kernel
        functions stay the reference semantics and the equivalence is pinned
        by the algorithm-level oracle tests.
        """
        st = self.state
        mu = self.algo.mu
        m = self.algo.m
        D = self.cfg.D

        data_idx = np.nonzero(has_data)[0]
        if data_idx.size:
            Z = map_input(self.rff, self.X_pad[data_idx, n, :])
            act_flags = avail[data_idx]

            p_idx = data_idx[~act_flags]
            if p_idx.size:
                Zp = Z[~act_flags]
                e = self.y_pad[p_idx, n] - np.einsum("ij,ij->i", st.W[p_idx], Zp)
                st.W[p_idx] += mu * e[:, None] * Zp

            act = data_idx[act_flags]
            if act.size:
                Za = Z[act_flags]
                table = self._mask_table
                coordinated = self.algo.coordinated
                reuse = self.algo.reuse_local
                off_n = (m * n) % D
                for j, k in enumerate(act):
                    k = int(k)
                    off = off_n if coordinated else (off_n + m * k) % D
                    M = table[off]
                    S = table[(off + m) % D] if reuse else M
                    z = Za[j]
                    row = st.W[k]
                    row[M] = st.w[M]
                    eps = float(self.y_pad[k, n]) - row @ z
                    row += (mu * eps) * z
                    st.channel.send(
                        InFlightMessage(
                            client_id=k,
                            send_iteration=n,
                            mask=S,
                            values=row[S],
                            delivery_iteration=n + int(self.delays[k, n]),
                        )
                    )
                count = int(act.size)
                st.downloads += m * count
                st.uploads += m * count

        batch = resolve_conflicts(st.channel.deliver(n))
        st.w = server_aggregate(st.w, batch, self.schedule)

    def run(self) -> RunResult:
        N, every = self.cfg.iterations, self.cfg.eval_every
        its = [0]
        mses = [mse_db_from_features(self.state.w, self.Z_test, self.y_test)]
        ups = [0]
        downs = [0]
        while self.state.n < N:
            self.step()
            n = self.state.n
            if n % every == 0 or n == N:
                its.append(n)
                mses.append(mse_db_from_features(self.state.w, self.Z_test, self.y_test))
                ups.append(self.state.uploads)
                downs.append(self.state.downloads)
        return RunResult(
            variant=self.algo.variant,
            seed=self.seed,
            eval_iterations=np.array(its, dtype=np.int64),
            mse_db=np.array(mses),
            uploads_series=np.array(ups, dtype=np.int64),
            downloads_series=np.array(downs, dtype=np.int64),
            config=self.cfg.fingerprint(self.algo, self.seed),
        )


def run_experiment(
    cfg: ExperimentConfig,
    algo: Optional[AlgoConfig] = None,
    seed: Optional[int] = None,
) -> RunResult:
    return Simulation(cfg, algo=algo, seed=seed).run()


@dataclass
class SuiteResult:
    """Seed-averaged view of one labeled configuration, plus the raw runs."""

    label: str
    eval_iterations: np.ndarray
    mean_mse_db: np.ndarray
    std_mse_db: np.ndarray
    mean_uploads: np.ndarray
    mean_downloads: np.ndarray
    runs: list[RunResult]

    @classmethod
    def from_runs(cls, label: str, runs: list[RunResult]) -> "SuiteResult":
        if not runs:
            raise ValueError("need at least one run")
        its = runs[0].eval_iterations
        for r in runs[1:]:
            if not np.array_equal(r.eval_iterations, its):
                raise ValueError("runs have mismatched eval grids")
        mses = np.stack([r.mse_db for r in runs])
        return cls(
            label=label,
            eval_iterations=its,
            mean_mse_db=mses.mean(axis=0),
            std_mse_db=mses.std(axis=0),
            mean_uploads=np.stack([r.uploads_series for r in runs]).mean(axis=0),
            mean_downloads=np.stack([r.downloads_series for r in runs]).mean(axis=0),
            runs=runs,
        )

    def tail_mean_after(self, first_iteration: int) -> float:
        keep = self.eval_iterations >= first_iteration
        if not keep.any():
            raise ValueError(f"no eval points at or after iteration {first_iteration}")
        return float(np.mean(self.mean_mse_db[keep]))


def run_suite(
    configs: dict[str, ExperimentConfig],
    seeds: Optional[Sequence[int]] = None,
) -> dict[str, SuiteResult]:
    """Run every labeled config over the seeds; same seed means shared randomness.

    With seeds omitted, each config's own seed list is used (they normally
    coincide across a comparison suite).
    """
    out: dict[str, SuiteResult] = {}
    for label, cfg in configs.items():
        use = tuple(seeds) if seeds is not None else cfg.seeds
        if not use:
            raise ValueError(f"{label}: empty seed list")
        log.info("running %s over %d seeds", label, len(use))
        runs = [run_experiment(cfg, seed=s) for s in use]
        out[label] = SuiteResult.from_runs(label, runs)
    return out
