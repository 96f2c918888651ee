"""Client availability and the delayed upstream channel.

Participation is a Bernoulli trial per client and iteration, forced to zero
once a client's data runs out. Upstream messages spend a random number of
iterations in flight: the delay is g*i with P(i >= j) = delay_base**j, so
the survival function of the delay matches delay_base**(l/g) on the lattice.
Sampled delays past l_max are clamped to l_max by default (the message still
arrives and gets the l_max weight); a config flag switches to dropping them
instead, which coincides with clamping whenever alpha at l_max is zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algorithms import Arrival, ArrivalBatch
from .masking import Mask

__all__ = [
    "AsyncConfig",
    "InFlightMessage",
    "Channel",
    "sample_availability",
    "sample_delay",
    "delay_from_units",
    "assign_availability",
]


@dataclass(frozen=True)
class AsyncConfig:
    availability_probs: tuple[float, ...]  # per client
    delay_base: float = 0.0
    delay_granularity: int = 1
    l_max: int = 0
    overflow: str = "clamp"  # or "drop"

    def __post_init__(self):
        if any(p < 0 or p > 1 for p in self.availability_probs):
            raise ValueError("availability probabilities must lie in [0, 1]")
        if not 0 <= self.delay_base < 1:
            raise ValueError(f"delay_base must be in [0, 1), got {self.delay_base}")
        if self.delay_granularity < 1:
            raise ValueError(
                f"delay_granularity must be >= 1, got {self.delay_granularity}"
            )
        if self.l_max < 0 or self.l_max % self.delay_granularity != 0:
            raise ValueError(
                f"l_max={self.l_max} must be a nonnegative multiple of "
                f"delay_granularity={self.delay_granularity}"
            )
        if self.overflow not in ("clamp", "drop"):
            raise ValueError(f"unknown overflow policy {self.overflow!r}")


def assign_availability(K: int, group_probs: tuple[float, ...]) -> tuple[float, ...]:
    """Per-client participation probabilities from the four availability groups.

    Clients are already split into four data groups by index block; within
    each block the availability groups take four near-equal sub-blocks.
    """
    blocks = np.array_split(np.arange(K), 4)
    probs = np.empty(K)
    for block in blocks:
        for chunk, p in zip(np.array_split(block, 4), group_probs):
            probs[chunk] = p
    return tuple(float(p) for p in probs)


def sample_availability(p: float, has_new_data: bool, rng: np.random.Generator) -> bool:
    """Bernoulli participation trial; always False without fresh data."""
    if not 0 <= p <= 1:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if not has_new_data:
        return False
    return bool(rng.random() < p)


def delay_from_units(cfg: AsyncConfig, units: int) -> int:
    """Turn a raw delay draw (in granularity units) into an iteration delay."""
    raw = cfg.delay_granularity * int(units)
    if cfg.overflow == "clamp":
        return min(raw, cfg.l_max)
    return raw


def sample_delay(cfg: AsyncConfig, rng: np.random.Generator) -> int:
    """Sample an upstream delay in iterations.

    rng.geometric counts trials to first success, so success probability
    1 - delay_base gives P(units >= j) = delay_base**j exactly.
    """
    units = int(rng.geometric(1.0 - cfg.delay_base)) - 1
    return delay_from_units(cfg, units)


@dataclass(frozen=True)
class InFlightMessage:
    client_id: int
    send_iteration: int
    mask: Mask
    values: np.ndarray
    delivery_iteration: int


class Channel:
    """Upstream message queue keyed by delivery iteration.

    Owned by a single simulation run; the engine loop serializes all access.
    """

    def __init__(self, l_max: int, overflow: str = "clamp"):
        self.l_max = l_max
        self.overflow = overflow
        self._queue: dict[int, list[InFlightMessage]] = {}
        self.sent = 0
        self.delivered = 0
        self.dropped = 0

    def send(self, msg: InFlightMessage) -> None:
        self.sent += 1
        delay = msg.delivery_iteration - msg.send_iteration
        if delay > self.l_max:
            if self.overflow == "drop":
                self.dropped += 1
                return
            msg = InFlightMessage(
                client_id=msg.client_id,
                send_iteration=msg.send_iteration,
                mask=msg.mask,
                values=msg.values,
                delivery_iteration=msg.send_iteration + self.l_max,
            )
        self._queue.setdefault(msg.delivery_iteration, []).append(msg)

    def deliver(self, n: int) -> ArrivalBatch:
        """All messages due at iteration n, grouped by delay; removed from the queue."""
        batch = ArrivalBatch(n=n)
        for msg in self._queue.pop(n, []):
            l = n - msg.send_iteration
            batch.groups.setdefault(l, []).append(
                Arrival(client_id=msg.client_id, mask=msg.mask, values=msg.values)
            )
            self.delivered += 1
        return batch

    def pending(self) -> int:
        return sum(len(v) for v in self._queue.values())
