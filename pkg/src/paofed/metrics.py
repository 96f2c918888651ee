"""Error metrics, communication accounting, and the step-size bound."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data_stream import ClientStream
from .features import RffMap, map_input

log = logging.getLogger(__name__)

__all__ = [
    "RunResult",
    "mse_db",
    "mse_db_from_features",
    "tail_mean",
    "power_iteration",
    "estimate_mu_bound",
    "MSE_DB_FLOOR",
]

# CSV-safe stand-in for a mathematically zero test error.
MSE_DB_FLOOR = -400.0


def mse_db_from_features(w: np.ndarray, Z_test: np.ndarray, y_test: np.ndarray) -> float:
    """dB error against an already-mapped test set; the hot path."""
    err = y_test - Z_test @ w
    mse = float(np.mean(err * err))
    if mse == 0.0:
        return float("-inf")
    return 10.0 * np.log10(mse)


def mse_db(w: np.ndarray, test_set: tuple[np.ndarray, np.ndarray], rff: RffMap) -> float:
    """Mean squared prediction error of model w on (X, y) pairs, in dB.

    A perfect fit has -inf dB; serializers replace that with MSE_DB_FLOOR.
    """
    X, y = test_set
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("test set is empty")
    if y.shape != (X.shape[0],):
        raise ValueError(f"{X.shape[0]} inputs but {y.shape} targets")
    return mse_db_from_features(w, map_input(rff, X), y)


def tail_mean(series: Sequence[float], tail: int) -> float:
    """Mean of the last `tail` entries; the steady-state summary of a run."""
    arr = np.asarray(series, dtype=float)
    if tail < 1 or tail > arr.size:
        raise ValueError(f"tail must be in [1, {arr.size}], got {tail}")
    return float(np.mean(arr[-tail:]))


def power_iteration(
    A: np.ndarray, rel_tol: float = 1e-6, max_iter: int = 10_000
) -> float:
    """Largest eigenvalue of a symmetric PSD matrix.

    Stops once the Rayleigh quotient moves by less than rel_tol relatively.
    """
    D = A.shape[0]
    if A.shape != (D, D):
        raise ValueError(f"matrix must be square, got {A.shape}")
    rng = np.random.default_rng(0)
    v = rng.standard_normal(D)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        Av = A @ v
        norm = np.linalg.norm(Av)
        if norm == 0.0:
            return 0.0
        v = Av / norm
        lam_new = float(v @ A @ v)
        if abs(lam_new - lam) <= rel_tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    return lam


def estimate_mu_bound(
    streams: Sequence[ClientStream], rff: RffMap, samples_per_client: int = 0
) -> float:
    """Empirical step-size stability bound 2 / max_k lambda_max(R_k).

    R_k is the sample correlation matrix of client k's mapped features over
    its first samples_per_client samples (0 means the whole local set). This
    is a diagnostic estimate from data, not a guarantee.
    """
    if samples_per_client < 0:
        raise ValueError(f"samples_per_client must be >= 0, got {samples_per_client}")
    worst = 0.0
    for stream in streams:
        take = len(stream) if samples_per_client == 0 else samples_per_client
        take = min(take, len(stream))
        if take == 0:
            continue
        if take < rff.D:
            log.warning(
                "estimating a %d x %d correlation matrix from %d samples; "
                "the bound will be noisy",
                rff.D,
                rff.D,
                take,
            )
        Z = map_input(rff, stream.X[:take])
        R = (Z.T @ Z) / Z.shape[0]
        lam = power_iteration(R)
        worst = max(worst, lam)
    if worst == 0.0:
        raise ValueError("all clients have degenerate features; bound undefined")
    return 2.0 / worst


@dataclass
class RunResult:
    """One simulated run: server test error at eval points plus traffic counters.

    Counter entries are cumulative scalar coordinates exchanged up to and
    including the eval iteration, so the last entry is the run total.
    """

    variant: str
    seed: int
    eval_iterations: np.ndarray  # (E,) strictly increasing, starts at 0
    mse_db: np.ndarray  # (E,)
    uploads_series: np.ndarray  # (E,) cumulative upstream scalars
    downloads_series: np.ndarray  # (E,) cumulative downstream scalars
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        its = self.eval_iterations
        if its.size == 0 or np.any(np.diff(its) <= 0):
            raise ValueError("eval iterations must be nonempty and strictly increasing")
        for name in ("mse_db", "uploads_series", "downloads_series"):
            if getattr(self, name).shape != its.shape:
                raise ValueError(f"{name} must align with eval_iterations")

    @property
    def mse_db_series(self) -> list[tuple[int, float]]:
        return [(int(n), float(v)) for n, v in zip(self.eval_iterations, self.mse_db)]

    @property
    def uploads(self) -> int:
        return int(self.uploads_series[-1])

    @property
    def downloads(self) -> int:
        return int(self.downloads_series[-1])

    def final_mse_db(self, tail_points: int = 1) -> float:
        return tail_mean(self.mse_db, tail_points)

    def tail_mean_after(self, first_iteration: int) -> float:
        """Mean dB over eval points at iterations >= first_iteration."""
        keep = self.eval_iterations >= first_iteration
        if not keep.any():
            raise ValueError(f"no eval points at or after iteration {first_iteration}")
        return float(np.mean(self.mse_db[keep]))
