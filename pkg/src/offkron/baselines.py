"""Reference sparse-recovery baselines.

Classical on-grid SBL is available through the main solver with grid
updates disabled; this module adds orthogonal matching pursuit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .offsbl import run_sbl_dictionary

__all__ = ["OmpConfig", "omp", "run_sbl_dictionary"]


@dataclass
class OmpConfig:
    """Stopping rule: a target sparsity, a residual threshold, or both."""

    sparsity: int | None = None
    residual_threshold: float | None = None

    def __post_init__(self):
        if self.sparsity is None and self.residual_threshold is None:
            raise ValueError("need a sparsity target or a residual threshold")
        if self.sparsity is not None and self.sparsity < 1:
            raise ValueError("sparsity must be at least 1")
        if self.residual_threshold is not None and self.residual_threshold <= 0:
            raise ValueError("residual threshold must be positive")


def omp(y, H, cfg: OmpConfig) -> np.ndarray:
    """Orthogonal matching pursuit with per-step least-squares refit.

    Columns are normalized before correlation; ties break toward the
    smallest index. Returns the full-length coefficient vector with the
    refit values on the selected support. Raises numpy.linalg.LinAlgError
    if the selected set becomes rank deficient.
    """
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    H = np.asarray(H, dtype=np.complex128)
    m, n = H.shape
    norms = np.linalg.norm(H, axis=0)
    if np.any(norms == 0):
        raise ValueError("dictionary columns must be nonzero")
    Hn = H / norms

    x = np.zeros(n, dtype=np.complex128)
    support: list[int] = []
    residual = y.copy()
    max_steps = cfg.sparsity if cfg.sparsity is not None else min(m, n)
    for _ in range(max_steps):
        if cfg.residual_threshold is not None:
            if np.linalg.norm(residual) <= cfg.residual_threshold:
                break
        corr = np.abs(Hn.conj().T @ residual)
        corr[support] = 0.0
        k = int(np.argmax(corr))
        if corr[k] == 0.0:
            break
        support.append(k)
        Hs = H[:, support]
        coef, _, rank, _ = np.linalg.lstsq(Hs, y, rcond=None)
        if rank < len(support):
            raise np.linalg.LinAlgError("selected columns are rank deficient")
        residual = y - Hs @ coef
    if support:
        x[support] = coef
    return x
