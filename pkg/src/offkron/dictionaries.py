"""Parametric column functions and grid machinery for basis expansion.

The scalar parameter throughout is the spatial frequency u = cos(angle),
restricted to [-1, 1]. Working in the u domain keeps the steering map
injective (cos is not, over a full angle range) and matches how the
synthetic scenes draw their "angles".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SteeringColumns",
    "CompressedColumns",
    "ParamGrid",
    "steering_column",
    "build_dictionary",
    "init_uniform_grid",
    "uniform_grid",
]


def steering_column(Q: int, spacing: float, u) -> np.ndarray:
    """Unit-norm array steering vector(s) at spatial frequency u.

    Entry q is exp(j 2 pi spacing q u) / sqrt(Q) for q = 0..Q-1. A scalar
    u gives a (Q,) vector; a length-K array gives a (Q, K) matrix.
    """
    if Q < 1:
        raise ValueError("Q must be positive")
    u_arr = np.asarray(u, dtype=float)
    q = np.arange(Q)
    phase = 2.0 * np.pi * spacing * np.multiply.outer(q, u_arr)
    return np.exp(1j * phase) / np.sqrt(Q)


class SteeringColumns:
    """Continuous steering-vector column function u -> C^Q."""

    def __init__(self, Q: int, spacing: float = 0.5):
        if Q < 1:
            raise ValueError("Q must be positive")
        self.Q = int(Q)
        self.spacing = float(spacing)

    @property
    def output_dim(self) -> int:
        return self.Q

    def __call__(self, u) -> np.ndarray:
        return steering_column(self.Q, self.spacing, u)


class CompressedColumns:
    """Steering columns observed through a known mixing matrix B.

    h(u) = B a_Q(u) with B of size M x Q; the output dimension is M.
    """

    def __init__(self, B, inner: SteeringColumns):
        B = np.asarray(B, dtype=np.complex128)
        if B.ndim != 2 or B.shape[1] != inner.Q:
            raise ValueError(
                f"mixing matrix of shape {B.shape} does not match inner "
                f"steering dimension {inner.Q}"
            )
        self.B = B
        self.inner = inner

    @property
    def output_dim(self) -> int:
        return self.B.shape[0]

    def __call__(self, u) -> np.ndarray:
        return self.B @ self.inner(u)


@dataclass(frozen=True)
class ParamGrid:
    """Sorted grid of parameter values inside a closed interval."""

    points: np.ndarray
    bounds: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1)
        object.__setattr__(self, "points", pts)
        lo, hi = self.bounds
        if pts.size == 0:
            raise ValueError("grid must be nonempty")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if pts[0] < lo or pts[-1] > hi:
            raise ValueError("grid points must lie within bounds")

    def __len__(self) -> int:
        return self.points.size


def uniform_grid(N: int, bounds: tuple[float, float]) -> ParamGrid:
    """N uniform samples l + (r - l) (n - 1) / N, n = 1..N.

    The right endpoint is excluded, matching the angular sampling rule
    cos(theta_n) = 2 (n - 1) / N - 1 on [-1, 1].
    """
    if N < 2:
        raise ValueError("need at least two grid points")
    lo, hi = float(bounds[0]), float(bounds[1])
    pts = lo + (hi - lo) * np.arange(N) / N
    return ParamGrid(points=pts, bounds=(lo, hi))


def init_uniform_grid(N: int) -> ParamGrid:
    """Default N-point grid over the full spatial-frequency range [-1, 1]."""
    return uniform_grid(N, (-1.0, 1.0))


def build_dictionary(column_function, grid: ParamGrid) -> np.ndarray:
    """Evaluate a column function on every grid point, M x N."""
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    H = column_function(grid.points)
    return np.asarray(H, dtype=np.complex128)
