"""Rotating index masks that decide which m of the D model coordinates travel
in each message.

Masks are kept as sorted index arrays rather than dense 0/1 diagonal
matrices; a message carries only the m selected scalars. The downstream
(server to client) mask rotates by m every iteration, and in uncoordinated
mode additionally by m per client id. The upstream mask either equals the
downstream one (local updates of unavailable clients never reach the server)
or is shifted one block further (locally refined coordinates get shared).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["Mask", "MaskScheduler", "circshift", "server_mask", "client_mask"]

Mask = np.ndarray  # sorted, distinct ints in [0, D)


def circshift(mask: Mask, offset: int, D: int) -> Mask:
    """Rotate every index by offset modulo D, returning a sorted index set."""
    return np.sort((mask + offset) % D)


@dataclass(frozen=True)
class MaskScheduler:
    D: int
    m: int
    K: int
    mode: str = "uncoordinated"  # or "coordinated"
    reuse_local: bool = True
    base_mask: Optional[np.ndarray] = None  # mask of (client 0, iteration 0)

    def __post_init__(self):
        if not 1 <= self.m <= self.D:
            raise ValueError(f"need 1 <= m <= D, got m={self.m}, D={self.D}")
        if self.mode not in ("coordinated", "uncoordinated"):
            raise ValueError(f"unknown mode {self.mode!r}")
        base = self.base_mask
        if base is None:
            base = np.arange(self.m, dtype=np.int64)
        else:
            base = np.sort(np.asarray(base, dtype=np.int64))
            if base.shape != (self.m,) or len(np.unique(base)) != self.m:
                raise ValueError("base_mask must hold m distinct indices")
            if base.min() < 0 or base.max() >= self.D:
                raise ValueError("base_mask indices must lie in [0, D)")
        object.__setattr__(self, "base_mask", base)


def server_mask(sched: MaskScheduler, k: int, n: int) -> Mask:
    """Downstream mask at (client k, iteration n)."""
    offset = sched.m * n
    if sched.mode == "uncoordinated":
        offset += sched.m * k
    return circshift(sched.base_mask, offset, sched.D)


def client_mask(sched: MaskScheduler, k: int, n: int) -> Mask:
    """Upstream mask: equals the downstream mask, or one block further."""
    if not sched.reuse_local:
        return server_mask(sched, k, n)
    return circshift(server_mask(sched, k, n), sched.m, sched.D)
