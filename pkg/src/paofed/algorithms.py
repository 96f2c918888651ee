"""Update kernels shared by all algorithm variants.

A client either refines its own model on a fresh sample (local step), or
blends a received server fragment into its model before the step (round with
fragment). The server folds arriving masked models back in, weighting each
arrival by how many iterations it spent in flight and averaging within each
same-delay group. When arrivals of different staleness claim the same
coordinate, only the most recent send keeps it.

Variants (Online-Fed, Online-FedSGD, PSO-Fed, PAO-Fed-*) are configurations
of these kernels, not separate code paths.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .masking import Mask

__all__ = [
    "DelayWeightSchedule",
    "AlgoConfig",
    "Arrival",
    "ArrivalBatch",
    "local_update",
    "client_round",
    "resolve_conflicts",
    "server_aggregate",
    "alpha_weight",
    "online_fed_aggregate",
    "VARIANTS",
]

log = logging.getLogger(__name__)

VARIANTS = ("online_fed", "online_fedsgd", "pso_fed", "pao_fed")


@dataclass(frozen=True)
class DelayWeightSchedule:
    """Weight alpha_l applied to an update delayed by l iterations.

    alpha_0 is pinned to 1; anything older than l_max gets weight 0.
    """

    weights: tuple[float, ...]
    l_max: int

    def __post_init__(self):
        if self.l_max < 0:
            raise ValueError(f"l_max must be >= 0, got {self.l_max}")
        if len(self.weights) != self.l_max + 1:
            raise ValueError(
                f"need l_max + 1 = {self.l_max + 1} weights, got {len(self.weights)}"
            )
        if self.weights[0] != 1.0:
            raise ValueError(f"weight at delay 0 must be 1, got {self.weights[0]}")
        if any(w < 0 or w > 1 for w in self.weights):
            raise ValueError("delay weights must lie in [0, 1]")

    @staticmethod
    def flat(l_max: int) -> "DelayWeightSchedule":
        return DelayWeightSchedule(weights=(1.0,) * (l_max + 1), l_max=l_max)

    @staticmethod
    def geometric(
        ratio: float, l_max: int, granularity: int = 1
    ) -> "DelayWeightSchedule":
        # Decay is per delay step: when delays land on a grid of spacing
        # `granularity`, a one-step-late arrival gets weight `ratio` no matter
        # how many iterations one step spans.
        if not 0 < ratio <= 1:
            raise ValueError(f"ratio must be in (0, 1], got {ratio}")
        if granularity < 1:
            raise ValueError(f"granularity must be >= 1, got {granularity}")
        if granularity == 1:
            weights = tuple(ratio**l for l in range(l_max + 1))
        else:
            weights = tuple(ratio ** (l / granularity) for l in range(l_max + 1))
        return DelayWeightSchedule(weights=weights, l_max=l_max)


def alpha_weight(schedule: DelayWeightSchedule, l: int) -> float:
    if l < 0:
        raise ValueError(f"delay must be >= 0, got {l}")
    if l > schedule.l_max:
        return 0.0
    return schedule.weights[l]


@dataclass(frozen=True)
class AlgoConfig:
    variant: str = "pao_fed"
    mu: float = 1.2
    m: int = 4
    coordinated: bool = False
    reuse_local: bool = True
    alpha_schedule: Optional[DelayWeightSchedule] = None
    subsample_size: Optional[int] = None  # online_fed only

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.subsample_size is not None and self.subsample_size < 1:
            raise ValueError(f"subsample_size must be >= 1, got {self.subsample_size}")


@dataclass
class Arrival:
    """One client's masked model fragment as seen by the server."""

    client_id: int
    mask: Mask
    values: np.ndarray  # model values on mask's indices, in mask order


@dataclass
class ArrivalBatch:
    """Everything reaching the server at one iteration, grouped by delay."""

    n: int
    groups: dict[int, list[Arrival]] = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not self.groups


def local_update(w_k: np.ndarray, z: np.ndarray, y: float, mu: float) -> np.ndarray:
    """One stochastic gradient step of the local model on a fresh sample."""
    if w_k.shape != z.shape:
        raise ValueError(f"shape mismatch: model {w_k.shape}, features {z.shape}")
    eps = y - w_k @ z
    return w_k + mu * eps * z


def client_round(
    w_k: np.ndarray,
    fragment: tuple[Mask, np.ndarray],
    z: np.ndarray,
    y: float,
    mu: float,
) -> np.ndarray:
    """Blend the server fragment into the local model, then take one step.

    The returned model holds the server's values on the fragment's
    coordinates (plus the gradient step); everything else stays local.
    """
    mask, values = fragment
    if len(mask) != len(values):
        raise ValueError(f"fragment carries {len(values)} values for {len(mask)} indices")
    if len(mask) and (mask.min() < 0 or mask.max() >= len(w_k)):
        raise ValueError("fragment mask index out of range")
    blend = w_k.copy()
    blend[mask] = values
    eps = y - blend @ z
    return blend + mu * eps * z


def resolve_conflicts(batch: ArrivalBatch) -> ArrivalBatch:
    """Give each coordinate to the most recent send that claims it.

    Arrivals from older sends lose contested coordinates; ties within one
    delay group are all kept (they average out in the aggregation). Arrivals
    left with no coordinates are dropped, as are emptied groups.
    """
    resolved: dict[int, list[Arrival]] = {}
    claimed: set[int] = set()
    for l in sorted(batch.groups):
        survivors = []
        group_claim: set[int] = set()
        for a in batch.groups[l]:
            indices = a.mask.tolist()
            group_claim.update(indices)
            kept = [i for i, idx in enumerate(indices) if idx not in claimed]
            if len(kept) == len(indices):
                survivors.append(a)
            elif kept:
                survivors.append(
                    Arrival(client_id=a.client_id, mask=a.mask[kept], values=a.values[kept])
                )
        claimed |= group_claim
        if survivors:
            resolved[l] = survivors
    return ArrivalBatch(n=batch.n, groups=resolved)


def server_aggregate(
    w: np.ndarray, batch: ArrivalBatch, schedule: DelayWeightSchedule
) -> np.ndarray:
    """Fold a conflict-resolved batch into the server model.

    Each delay group contributes the average innovation of its arrivals on
    their masked coordinates, scaled by that delay's weight. Coordinates no
    mask touches are left bit-identical.
    """
    if batch.is_empty():
        return w
    total = np.zeros_like(w)
    for l in sorted(batch.groups):
        arrivals = batch.groups[l]
        if l > schedule.l_max:
            raise RuntimeError(
                f"arrival delayed {l} > l_max={schedule.l_max} iterations; "
                "the channel should have dropped or clamped it"
            )
        acc = np.zeros_like(w)
        for a in arrivals:
            acc[a.mask] += a.values - w[a.mask]
        total += (alpha_weight(schedule, l) / len(arrivals)) * acc
    return w + total


def online_fed_aggregate(w: np.ndarray, updates: list[np.ndarray]) -> np.ndarray:
    """Plain coordinate-wise mean of full client models."""
    if not updates:
        log.debug("no client updates this iteration; server model unchanged")
        return w
    return np.mean(updates, axis=0)
