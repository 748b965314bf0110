"""Evaluation metrics for the synthetic and channel experiments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TrialRecord",
    "nmse",
    "srr",
    "support_indices",
    "angle_mse",
    "success_probability",
    "channel_nmse",
    "residual_energy",
]


@dataclass
class TrialRecord:
    """One algorithm run on one scenario, with its metric values."""

    scenario_id: str
    seed: int
    algorithm: str
    metrics: dict[str, float] = field(default_factory=dict)
    runtime_s: float = 0.0


def nmse(x_true, x_est) -> float:
    """Single-trial normalized squared error ||x - x_hat||^2 / ||x||^2."""
    x_true = np.asarray(x_true).reshape(-1)
    x_est = np.asarray(x_est).reshape(-1)
    if x_true.shape != x_est.shape:
        raise ValueError("length mismatch")
    denom = float(np.real(np.vdot(x_true, x_true)))
    if denom == 0.0:
        raise ValueError("true vector is zero")
    diff = x_true - x_est
    return float(np.real(np.vdot(diff, diff))) / denom


def support_indices(x, rel_threshold: float = 0.05, count: int | None = None):
    """Estimated support of a coefficient vector.

    By default, indices whose magnitude reaches rel_threshold times the
    largest one. With count given, the count largest-magnitude indices
    instead (oracle-size mode).
    """
    mag = np.abs(np.asarray(x).reshape(-1))
    if count is not None:
        return set(int(i) for i in np.argsort(mag)[::-1][:count])
    if mag.size == 0 or mag.max() == 0:
        return set()
    return set(int(i) for i in np.flatnonzero(mag >= rel_threshold * mag.max()))


def srr(supp_true, supp_est) -> float:
    """Support recovery rate: Jaccard index of the two index sets."""
    a, b = set(supp_true), set(supp_est)
    union = a | b
    if not union:
        raise ValueError("both supports are empty")
    return len(a & b) / len(union)


def angle_mse(psi_true, psi_est) -> float:
    """Mean squared parameter error under rank pairing.

    Both lists are sorted ascending and paired by rank, the optimal
    one-dimensional assignment for squared loss.
    """
    t = np.sort(np.asarray(psi_true, dtype=float).reshape(-1))
    e = np.sort(np.asarray(psi_est, dtype=float).reshape(-1))
    if t.size != e.size:
        raise ValueError("parameter count mismatch")
    return float(np.mean((t - e) ** 2))


def success_probability(mse_list, threshold: float = 1e-6) -> float:
    """Fraction of trials whose MSE falls below the threshold."""
    arr = np.asarray(mse_list, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValueError("empty list")
    return float(np.mean(arr < threshold))


def channel_nmse(true_channels, est_channels) -> float:
    """Average per-configuration normalized Frobenius channel error."""
    if len(true_channels) != len(est_channels):
        raise ValueError("configuration count mismatch")
    ratios = []
    for Ht, He in zip(true_channels, est_channels):
        Ht = np.asarray(Ht)
        He = np.asarray(He)
        if Ht.shape != He.shape:
            raise ValueError("channel shape mismatch")
        denom = float(np.linalg.norm(Ht) ** 2)
        if denom == 0.0:
            raise ValueError("true channel is zero")
        ratios.append(float(np.linalg.norm(Ht - He) ** 2) / denom)
    return float(np.mean(ratios))


def residual_energy(clean, processed) -> float:
    """Squared l2 distance between a processed vector and the clean one."""
    clean = np.asarray(clean).reshape(-1)
    processed = np.asarray(processed).reshape(-1)
    if clean.shape != processed.shape:
        raise ValueError("length mismatch")
    diff = processed - clean
    return float(np.real(np.vdot(diff, diff)))
