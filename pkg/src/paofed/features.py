"""Random Fourier feature map: raw inputs to the D-dimensional space where
every model in the simulation is linear.

The map approximates a Gaussian kernel of width ``bandwidth`` with cosine
features, z_i(x) = sqrt(2/D) * cos(<omega_i, x> + b_i), omega_i drawn from
N(0, I/bandwidth^2) and b_i uniform on [0, 2pi). Inner products of mapped
points then concentrate around exp(-||x - x'||^2 / (2 bandwidth^2)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import substream

__all__ = ["RffMap", "new_rff_map", "map_input"]


@dataclass(frozen=True)
class RffMap:
    """Immutable feature map; safe to share across concurrent readers."""

    input_dim: int
    D: int
    frequencies: np.ndarray  # (D, input_dim)
    phases: np.ndarray  # (D,), values in [0, 2pi)
    bandwidth: float
    seed: int

    @property
    def scale(self) -> float:
        return float(np.sqrt(2.0 / self.D))


def new_rff_map(input_dim: int, D: int, bandwidth: float, seed: int) -> RffMap:
    """Draw a feature map. Two calls with equal parameters are bit-identical."""
    if input_dim < 1:
        raise ValueError(f"input_dim must be >= 1, got {input_dim}")
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    rng = substream(seed, "rff")
    frequencies = rng.normal(0.0, 1.0 / bandwidth, size=(D, input_dim))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=D)
    return RffMap(
        input_dim=int(input_dim),
        D=int(D),
        frequencies=frequencies,
        phases=phases,
        bandwidth=float(bandwidth),
        seed=int(seed),
    )


def map_input(rff: RffMap, x: np.ndarray) -> np.ndarray:
    """Map one input (input_dim,) to (D,), or a batch (n, input_dim) to (n, D)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != rff.input_dim:
        raise ValueError(
            f"input has {x.shape[-1]} components, map expects {rff.input_dim}"
        )
    return rff.scale * np.cos(x @ rff.frequencies.T + rff.phases)
