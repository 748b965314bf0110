"""Rank-(1,...,1) decomposition of a noisy Kronecker-structured vector.

Two methods are provided: a truncated higher-order SVD that takes the
leading left singular vector of every mode matricization, and a cheaper
recursive scheme that peels off one dimension at a time with successive
best rank-one matrix approximations. Both agree exactly on noiseless
rank-one input.

Scaling convention: factors 1..I-1 are unit norm with their largest-
magnitude entry rotated to be real positive; all remaining magnitude and
phase are absorbed into the last factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_core import (
    _phase_normalize,
    from_kron_vector,
    kron_vectors,
    leading_singular_pair,
    mode_matricize,
    mode_vector_product,
)

__all__ = ["DecompositionResult", "hosvd_rank1", "recursive_rank1", "recompose"]


@dataclass
class DecompositionResult:
    """Factors of a rank-(1,...,1) approximation.

    factors: per-dimension vectors, unit norm except the last one which
        carries the overall scale.
    method: "hosvd" or "recursive".
    core_scale: complex scale of the last factor relative to its
        phase-normalized unit direction.
    residual_norm: l2 distance between the input and the recomposed
        Kronecker vector.
    """

    factors: list[np.ndarray]
    method: str
    core_scale: complex
    residual_norm: float


def _check_input(ybar: np.ndarray, shape) -> tuple[np.ndarray, tuple[int, ...]]:
    ybar = np.asarray(ybar, dtype=np.complex128).reshape(-1)
    shape = tuple(int(m) for m in shape)
    if ybar.size != int(np.prod(shape)):
        raise ValueError(f"length {ybar.size} does not match shape {shape}")
    if not np.any(ybar):
        raise ValueError("cannot decompose a zero vector")
    return ybar, shape


def _finalize(ybar, factors, method) -> DecompositionResult:
    last = factors[-1]
    n = np.linalg.norm(last)
    direction = _phase_normalize(last / n) if n > 0 else last
    core_scale = complex(np.vdot(direction, last))
    residual = float(np.linalg.norm(kron_vectors(factors) - ybar))
    return DecompositionResult(
        factors=[np.asarray(f) for f in factors],
        method=method,
        core_scale=core_scale,
        residual_norm=residual,
    )


def hosvd_rank1(ybar, shape) -> DecompositionResult:
    """Truncated HOSVD at multilinear rank (1,...,1).

    Each factor i < I is the leading left singular vector of the i-th
    mode matricization; the last factor is the leading vector of mode I
    scaled by the core value obtained by contracting the measurement
    tensor with the conjugated singular vectors of every mode.
    """
    ybar, shape = _check_input(ybar, shape)
    tensor = from_kron_vector(ybar, shape)
    singvecs = [
        leading_singular_pair(mode_matricize(tensor, i))[0]
        for i in range(1, len(shape) + 1)
    ]
    core = tensor
    for e in singvecs:
        core = mode_vector_product(core, np.conj(e), 1)
    xi = complex(core.flat[0])
    factors = [e.copy() for e in singvecs[:-1]] + [xi * singvecs[-1]]
    return _finalize(ybar, factors, "hosvd")


def recursive_rank1(ybar, shape) -> DecompositionResult:
    """Recursive SVD-based rank-one peeling.

    At step i the current carry vector is rearranged into a matrix with
    prod_{j>i} M_j rows and M_i columns (column-major vec), its best
    rank-one approximation z_bar z^T is taken, z becomes factor i and
    z_bar is carried into the next step. The final carry is the last
    factor. Cheaper than HOSVD since later steps shrink, but errors can
    propagate between steps.
    """
    ybar, shape = _check_input(ybar, shape)
    factors: list[np.ndarray] = []
    carry = ybar
    for i, m in enumerate(shape[:-1]):
        rest = carry.size // m
        # vec(Ybar) = carry, column-major, Ybar of size rest x m.
        Ybar = carry.reshape(m, rest).T
        U, S, Vh = np.linalg.svd(Ybar, full_matrices=False)
        # Best rank-one zbar z^T = s1 u1 v1^H, so z is the conjugated
        # leading right singular vector, which is exactly the first row
        # of Vh.
        z = Vh[0, :].copy()
        zbar = S[0] * U[:, 0]
        # Rotate z to the phase convention and counter-rotate zbar so the
        # product z (x) zbar is unchanged.
        k = int(np.argmax(np.abs(z)))
        phase = z[k] / np.abs(z[k])
        factors.append(z * np.conj(phase))
        carry = zbar * phase
    factors.append(carry)
    return _finalize(ybar, factors, "recursive")


def recompose(result: DecompositionResult) -> np.ndarray:
    """Kronecker product of the decomposition factors."""
    if not result.factors:
        raise ValueError("empty factor list")
    return kron_vectors(result.factors)
