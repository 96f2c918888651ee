"""Synthetic nonlinear regression task and per-client progressive streams.

Targets follow y = f(x) + eta with Gaussian observation noise eta. Each
client owns a finite local set that becomes available one sample per global
iteration; once the set is exhausted the client never sees new data again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .rng import substream

__all__ = [
    "DataGenConfig",
    "ClientStream",
    "generate_labeled_set",
    "build_population",
    "next_sample",
    "make_test_set",
    "DEFAULT_GROUP_SIZES",
]

# Local-set sizes of the four data groups.
DEFAULT_GROUP_SIZES = (500, 1000, 1500, 2000)

INPUT_LAWS = ("uniform_pm1", "standard_normal")
TARGET_FNS = ("kaf4d", "linear")


@dataclass(frozen=True)
class DataGenConfig:
    input_dim: int = 4
    input_law: str = "uniform_pm1"
    target_fn: str = "kaf4d"
    coefficients: Optional[tuple[float, ...]] = None  # linear target only
    noise_variance: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.input_law not in INPUT_LAWS:
            raise ValueError(f"unknown input_law {self.input_law!r}")
        if self.target_fn not in TARGET_FNS:
            raise ValueError(f"unknown target_fn {self.target_fn!r}")
        if self.noise_variance < 0:
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance}")
        if self.target_fn == "kaf4d" and self.input_dim < 4:
            raise ValueError("kaf4d target needs input_dim >= 4")


def target_values(cfg: DataGenConfig, X: np.ndarray) -> np.ndarray:
    """Noiseless f(x) for each row of X."""
    if cfg.target_fn == "kaf4d":
        # Kernel-adaptive-filtering benchmark: continuous, nonlinear, bounded
        # on the unit cube.
        return np.sqrt(X[:, 0] ** 2 + np.sin(np.pi * X[:, 3]) ** 2) + (
            0.8 - 0.5 * np.exp(-(X[:, 1] ** 2))
        ) * X[:, 2]
    coeff = cfg.coefficients
    if coeff is None:
        coeff = tuple(1.0 for _ in range(cfg.input_dim))
    c = np.asarray(coeff, dtype=np.float64)
    if c.shape != (cfg.input_dim,):
        raise ValueError(f"need {cfg.input_dim} coefficients, got {c.shape}")
    return X @ c


def _draw_inputs(cfg: DataGenConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    if cfg.input_law == "uniform_pm1":
        return rng.uniform(-1.0, 1.0, size=(n, cfg.input_dim))
    return rng.standard_normal(size=(n, cfg.input_dim))


def generate_labeled_set(
    cfg: DataGenConfig, n: int, stream_tag: int
) -> tuple[np.ndarray, np.ndarray]:
    """n labeled pairs as (X, y) arrays, deterministic in (cfg.seed, stream_tag)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = substream(cfg.seed, "stream", stream_tag)
    X = _draw_inputs(cfg, n, rng)
    y = target_values(cfg, X)
    if cfg.noise_variance > 0:
        y = y + rng.normal(0.0, np.sqrt(cfg.noise_variance), size=n)
    return X, y


def make_test_set(cfg: DataGenConfig, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Fresh noiseless evaluation pairs; model error only, no observation noise."""
    if size < 1:
        raise ValueError(f"test size must be >= 1, got {size}")
    rng = substream(cfg.seed, "test")
    X = _draw_inputs(cfg, size, rng)
    return X, target_values(cfg, X)


@dataclass
class ClientStream:
    """One client's progressively available local set. Owned by a single run."""

    X: np.ndarray  # (size, input_dim)
    y: np.ndarray  # (size,)
    group_id: int
    cursor: int = 0

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def exhausted(self) -> bool:
        return self.cursor >= len(self)


def next_sample(stream: ClientStream, n: int) -> Optional[tuple[np.ndarray, float]]:
    """Next pair under one-arrival-per-iteration, or None once exhausted.

    The iteration index is accepted for alternative arrival schedules; the
    default schedule releases exactly one sample per call.
    """
    if stream.exhausted:
        return None
    pair = stream.X[stream.cursor], float(stream.y[stream.cursor])
    stream.cursor += 1
    return pair


def build_population(
    cfg: DataGenConfig, K: int, sizes: Optional[list[int]] = None
) -> list[ClientStream]:
    """K client streams split into four equal data groups (or explicit sizes).

    With the default grouping, clients k in [gK/4, (g+1)K/4) belong to data
    group g and draw local sets of DEFAULT_GROUP_SIZES[g] samples. An explicit
    per-client size list overrides the grouping and lifts the K % 4 == 0
    requirement.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if sizes is None:
        if K % 4 != 0:
            raise ValueError(
                f"K={K} is not divisible by 4; pass explicit sizes instead"
            )
        per_group = K // 4
        sizes = [DEFAULT_GROUP_SIZES[k // per_group] for k in range(K)]
        groups = [k // per_group for k in range(K)]
    else:
        if len(sizes) != K:
            raise ValueError(f"need {K} sizes, got {len(sizes)}")
        groups = [0] * K
    streams = []
    for k in range(K):
        X, y = generate_labeled_set(cfg, sizes[k], stream_tag=k)
        streams.append(ClientStream(X=X, y=y, group_id=groups[k]))
    return streams
