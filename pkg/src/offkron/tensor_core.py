"""Dense complex multiway arrays and the index conventions tying them to
Kronecker products and mode matricizations.

Layout convention: the flat index of a multi-index (m_1, ..., m_I) is
k = sum_i m_i * prod_{j>i} M_j, i.e. the *first* factor varies slowest.
This is numpy's C order, and it matches the Kronecker product rule
(y_1 (x) ... (x) y_I)[k] = prod_i y_i[m_i].
"""

from __future__ import annotations

from functools import reduce

import numpy as np

__all__ = [
    "ComplexTensor",
    "kron_vectors",
    "from_kron_vector",
    "mode_matricize",
    "mode_vector_product",
    "leading_singular_pair",
]

# Above this row count the leading singular pair falls back to power
# iteration instead of a full SVD.
_FULL_SVD_MAX_ROWS = 512
_POWER_ITER_TOL = 1e-12
_POWER_ITER_MAX = 500


class ComplexTensor:
    """An I-way complex array stored C-contiguously.

    The flat buffer, the multi-index view and any Kronecker vector built
    from per-dimension factors all agree entry by entry under the layout
    convention above.
    """

    def __init__(self, data, shape=None):
        arr = np.ascontiguousarray(data, dtype=np.complex128)
        if shape is not None:
            arr = arr.reshape(tuple(shape))
        if arr.ndim == 0:
            arr = arr.reshape(1)
        self.data = arr

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def flat(self) -> np.ndarray:
        """Flat buffer in layout order (length prod(shape))."""
        return self.data.reshape(-1)

    def flat_index(self, multi) -> int:
        """Map a multi-index to its flat index."""
        return int(np.ravel_multi_index(tuple(multi), self.shape))

    def multi_index(self, k: int) -> tuple[int, ...]:
        """Map a flat index back to its multi-index."""
        return tuple(int(i) for i in np.unravel_index(k, self.shape))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def __getitem__(self, idx):
        return self.data[idx]

    def __repr__(self):
        return f"ComplexTensor(shape={self.shape})"


def kron_vectors(factors) -> np.ndarray:
    """Kronecker product of a sequence of vectors, first factor slowest.

    Raises ValueError on an empty factor list or an empty factor.
    """
    factors = [np.asarray(f, dtype=np.complex128).reshape(-1) for f in factors]
    if not factors:
        raise ValueError("need at least one factor")
    if any(f.size == 0 for f in factors):
        raise ValueError("factors must be nonempty")
    return reduce(np.kron, factors)


def from_kron_vector(v, shape) -> ComplexTensor:
    """Reshape a flat Kronecker-layout vector into its tensor form.

    For v = kron_vectors(y_1, ..., y_I) the result equals the outer
    product of the factors entrywise.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    shape = tuple(int(m) for m in shape)
    if v.size != int(np.prod(shape)):
        raise ValueError(f"vector length {v.size} does not match shape {shape}")
    return ComplexTensor(v.reshape(shape))


def mode_matricize(tensor: ComplexTensor, mode: int) -> np.ndarray:
    """Unfold a tensor along one dimension (1-based mode index).

    For a rank-one tensor built from factors (y_1, ..., y_I) the result is
    y_mode times the transpose of the Kronecker product of the remaining
    factors taken in descending index order, trailing factors first.
    """
    ndim = tensor.ndim
    if not 1 <= mode <= ndim:
        raise IndexError(f"mode {mode} out of range for {ndim}-way tensor")
    ax = mode - 1
    # Column multi-index, slowest to fastest: (I-1, ..., ax+1, ax-1, ..., 0).
    perm = [ax] + list(range(ndim - 1, ax, -1)) + list(range(ax - 1, -1, -1))
    moved = np.transpose(tensor.data, perm)
    return np.ascontiguousarray(moved.reshape(tensor.shape[ax], -1))


def mode_vector_product(tensor: ComplexTensor, w, mode: int) -> ComplexTensor:
    """Contract one dimension of a tensor with a vector (1-based mode).

    The contraction is conjugate-free (w^T along the mode); pass the
    conjugated vector to apply w^H. The result has that dimension removed;
    a full contraction yields a 1-element tensor.
    """
    ndim = tensor.ndim
    if not 1 <= mode <= ndim:
        raise IndexError(f"mode {mode} out of range for {ndim}-way tensor")
    w = np.asarray(w, dtype=np.complex128).reshape(-1)
    if w.size != tensor.shape[mode - 1]:
        raise ValueError(
            f"vector length {w.size} does not match dimension "
            f"{tensor.shape[mode - 1]} of mode {mode}"
        )
    out = np.tensordot(tensor.data, w, axes=([mode - 1], [0]))
    return ComplexTensor(out)


def _phase_normalize(u: np.ndarray) -> np.ndarray:
    """Rotate a vector so its largest-magnitude entry is real positive."""
    k = int(np.argmax(np.abs(u)))
    pivot = u[k]
    if pivot == 0:
        return u
    return u * (np.conj(pivot) / np.abs(pivot))


def leading_singular_pair(matrix) -> tuple[np.ndarray, float]:
    """Leading left singular vector and singular value of a complex matrix.

    The vector's phase is fixed so that its largest-magnitude entry is
    real and positive. Raises ValueError for a zero matrix.
    """
    A = np.asarray(matrix, dtype=np.complex128)
    if not np.any(A):
        raise ValueError("zero matrix has no leading singular direction")
    if A.shape[0] <= _FULL_SVD_MAX_ROWS:
        U, S, _ = np.linalg.svd(A, full_matrices=False)
        u, s = U[:, 0], float(S[0])
    else:
        u, s = _power_iteration(A)
    return _phase_normalize(u), s


def _power_iteration(A: np.ndarray) -> tuple[np.ndarray, float]:
    # Power iteration on A A^H; adequate for the documented large-M fallback.
    rng = np.random.default_rng(0)
    u = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
    u /= np.linalg.norm(u)
    s_prev = 0.0
    for _ in range(_POWER_ITER_MAX):
        v = A.conj().T @ u
        w = A @ v
        s = np.linalg.norm(w)
        if s == 0:
            break
        u = w / s
        s = np.sqrt(s)
        if abs(s - s_prev) <= _POWER_ITER_TOL * max(1.0, s):
            s_prev = s
            break
        s_prev = s
    return u, float(s_prev)
