"""Seeded generators for the synthetic and IRS-channel experiments.

All parameters live in the spatial-frequency domain u = cos(angle); see
the dictionaries module. Generators are deterministic functions of the
supplied random generator, so independent streams give independent
trials and identical seeds reproduce scenarios bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictionaries import (
    CompressedColumns,
    SteeringColumns,
    build_dictionary,
    init_uniform_grid,
    steering_column,
)
from .tensor_core import kron_vectors

__all__ = [
    "GroundTruth",
    "IrsScenario",
    "add_noise_at_snr",
    "gen_kron_sparse",
    "gen_offgrid_scene",
    "gen_worst_case",
    "gen_irs_scene",
]

_MAX_REJECTION_DRAWS = 10_000


@dataclass
class GroundTruth:
    """True parameters and coefficients behind a generated measurement."""

    params: list[np.ndarray]
    coefs: list[np.ndarray]
    counts: list[int]
    clean_signal: np.ndarray
    supports: list[np.ndarray] | None = None
    noise_variance: float | None = None

    def to_dict(self) -> dict:
        return {
            "counts": [int(c) for c in self.counts],
            "params": [[float(p) for p in ps] for ps in self.params],
            "signal_length": int(self.clean_signal.size),
        }


@dataclass
class IrsScenario:
    """Geometry, pilots and path parameters of one IRS channel draw."""

    R: int
    T: int
    L: int
    K_I: int
    K_P: int
    P_MS: int
    P_BS: int
    Omega: np.ndarray
    G: np.ndarray
    beta_ms: np.ndarray
    beta_bs: np.ndarray
    alpha_ms: float
    phi_ms: np.ndarray
    phi_bs: float
    alpha_bs: float
    zeta: float
    spacing: float = 0.5

    @property
    def dim_truths(self) -> list[np.ndarray]:
        """Solver-domain true parameters per dimension.

        Dimension 1 holds the spread reflected-path frequencies, dimension
        2 the negated transmit frequency (the signal carries a conjugated
        steering vector there), dimension 3 the receive frequency.
        """
        return [
            np.sort(self.phi_ms - self.phi_bs),
            np.array([-self.alpha_ms]),
            np.array([self.alpha_bs]),
        ]

    def steering(self, Q: int, u) -> np.ndarray:
        return steering_column(Q, self.spacing, u)

    def channel_ms(self) -> np.ndarray:
        """MS-to-IRS channel matrix (L x T)."""
        scale = np.sqrt(self.L * self.T / self.P_MS)
        A = self.steering(self.L, self.phi_ms)
        aT = self.steering(self.T, self.alpha_ms)
        return scale * np.outer(A @ self.beta_ms, np.conj(aT))

    def channel_bs(self) -> np.ndarray:
        """IRS-to-BS channel matrix (R x L)."""
        scale = np.sqrt(self.R * self.L / self.P_BS)
        aR = self.steering(self.R, self.alpha_bs)
        aL = self.steering(self.L, self.phi_bs)
        return scale * self.beta_bs[0] * np.outer(aR, aL.conj())

    def true_channel(self, omega) -> np.ndarray:
        """Cascaded channel matrix (R x T) for one IRS configuration."""
        omega = np.asarray(omega).reshape(-1)
        return self.channel_bs() @ np.diag(omega) @ self.channel_ms()

    def factor_vectors(self) -> list[np.ndarray]:
        """The three Kronecker factors of the noiseless measurement."""
        A_spread = self.steering(self.L, self.phi_ms - self.phi_bs)
        f1 = self.Omega.T @ (A_spread @ self.beta_ms)
        f2 = self.zeta * (self.G.T @ np.conj(self.steering(self.T, self.alpha_ms)))
        f3 = self.steering(self.R, self.alpha_bs) * self.beta_bs[0]
        return [f1, f2, f3]

    def column_functions(self):
        """Per-dimension continuous dictionary column functions."""
        return [
            CompressedColumns(self.Omega.T, SteeringColumns(self.L, self.spacing)),
            CompressedColumns(self.G.T, SteeringColumns(self.T, self.spacing)),
            SteeringColumns(self.R, self.spacing),
        ]

    def to_dict(self) -> dict:
        return {
            "R": self.R, "T": self.T, "L": self.L,
            "K_I": self.K_I, "K_P": self.K_P,
            "P_MS": self.P_MS, "P_BS": self.P_BS,
            "alpha_ms": float(self.alpha_ms),
            "phi_ms": [float(p) for p in self.phi_ms],
            "phi_bs": float(self.phi_bs),
            "alpha_bs": float(self.alpha_bs),
            "dim_truths": [[float(u) for u in t] for t in self.dim_truths],
        }


def add_noise_at_snr(signal, snr_db, rng) -> tuple[np.ndarray, float]:
    """Add circularly-symmetric complex Gaussian noise at a target SNR.

    The per-entry variance is ||signal||^2 / (len * 10^(snr/10)); an
    infinite SNR returns the signal unchanged with zero variance.
    """
    signal = np.asarray(signal, dtype=np.complex128).reshape(-1)
    power = float(np.real(np.vdot(signal, signal)))
    if power == 0.0:
        raise ValueError("signal is zero")
    if np.isinf(snr_db):
        return signal.copy(), 0.0
    sigma2 = power / (signal.size * 10.0 ** (snr_db / 10.0))
    scale = np.sqrt(sigma2 / 2.0)
    noise = scale * (rng.standard_normal(signal.size)
                     + 1j * rng.standard_normal(signal.size))
    return signal + noise, sigma2


def gen_kron_sparse(M: int, rng, n_grid: int = 12, n_dims: int = 3,
                    n_nonzero: int = 4) -> tuple[GroundTruth, list[np.ndarray]]:
    """On-grid Kronecker-sparse scene: per-dimension steering dictionaries
    with a few real positive amplitudes on uniformly chosen grid columns.
    """
    grid = init_uniform_grid(n_grid)
    col = SteeringColumns(M)
    H = build_dictionary(col, grid)
    dictionaries = [H.copy() for _ in range(n_dims)]
    params, coefs, supports, factors = [], [], [], []
    for i in range(n_dims):
        support = np.sort(rng.choice(n_grid, size=n_nonzero, replace=False))
        amps = rng.uniform(0.5, 1.5, size=n_nonzero)
        x = np.zeros(n_grid)
        x[support] = amps
        params.append(grid.points[support].copy())
        coefs.append(amps.astype(np.complex128))
        supports.append(support)
        factors.append(dictionaries[i] @ x)
    clean = kron_vectors(factors)
    truth = GroundTruth(
        params=params, coefs=coefs, counts=[n_nonzero] * n_dims,
        clean_signal=clean, supports=supports,
    )
    return truth, dictionaries


def _draw_separated(rng, count, low, high, min_sep):
    """Sequential rejection sampling of separated values in [low, high]."""
    values: list[float] = []
    attempts = 0
    while len(values) < count:
        cand = rng.uniform(low, high)
        attempts += 1
        if attempts > _MAX_REJECTION_DRAWS:
            raise RuntimeError(
                f"could not place {count} values with separation {min_sep}"
            )
        if all(abs(cand - v) >= min_sep for v in values):
            values.append(float(cand))
    return np.sort(np.asarray(values))


def gen_offgrid_scene(M: int, S1: int, rng, L: int = 256,
                      min_sep: float = 0.1) -> tuple[GroundTruth, CompressedColumns]:
    """Off-grid scene: compressed steering columns observed through a
    random unit-modulus mixing matrix, with well-separated frequencies
    and circular Gaussian coefficients of variance 2.
    """
    phases = rng.uniform(0.0, np.pi, size=(L, M))
    Omega = np.exp(1j * phases)
    col = CompressedColumns(Omega.T, SteeringColumns(L))
    psi = _draw_separated(rng, S1, -0.9, 0.9, min_sep)
    # CN(0, 2): unit-variance real and imaginary parts.
    coefs = rng.standard_normal(S1) + 1j * rng.standard_normal(S1)
    clean = col(psi) @ coefs
    truth = GroundTruth(
        params=[psi], coefs=[coefs], counts=[S1], clean_signal=clean,
    )
    return truth, col


_WORST_CASE_TRUTHS = np.array([-0.5050, -0.1050, 0.1050, 0.5050])


def gen_worst_case(rng, M: int = 60, L: int = 256):
    """Grid-hostile scene: four unit coefficients at frequencies chosen
    to fall halfway between the default 180-point grid samples.
    """
    phases = rng.uniform(0.0, np.pi, size=(L, M))
    Omega = np.exp(1j * phases)
    col = CompressedColumns(Omega.T, SteeringColumns(L))
    psi = _WORST_CASE_TRUTHS.copy()
    coefs = np.ones(psi.size, dtype=np.complex128)
    clean = col(psi) @ coefs
    truth = GroundTruth(
        params=[psi], coefs=[coefs], counts=[psi.size], clean_signal=clean,
    )
    return truth, col


def gen_irs_scene(rng, R: int = 16, T: int = 6, L: int = 256,
                  K_I: int = 40, K_P: int = 20, P_MS: int = 3, P_BS: int = 1,
                  min_sep: float = 0.07) -> tuple[IrsScenario, np.ndarray]:
    """One IRS channel-estimation scene and its noiseless measurement.

    The measurement stacks the vectorized received blocks of every IRS
    configuration and equals the Kronecker product of the three factor
    vectors. Pilot entries are unit-power random phases (the pilot matrix
    is not otherwise prescribed); reflected-path frequencies are redrawn
    until their spread values keep the minimum separation.
    """
    Omega = np.exp(1j * rng.uniform(0.0, np.pi, size=(L, K_I))) / np.sqrt(L)
    G = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(T, K_P))) / np.sqrt(T)
    beta_ms = (rng.standard_normal(P_MS) + 1j * rng.standard_normal(P_MS)) / np.sqrt(2.0)
    beta_bs = (rng.standard_normal(P_BS) + 1j * rng.standard_normal(P_BS)) / np.sqrt(2.0)
    alpha_ms = float(rng.uniform(0.3, 0.5))
    phi_ms = _draw_separated(rng, P_MS, -0.2, 0.2, min_sep)
    phi_bs = float(rng.uniform(0.3, 0.5))
    alpha_bs = float(rng.uniform(0.0, 0.5))
    zeta = float(np.sqrt(L * R * T / (P_MS * P_BS)))
    scenario = IrsScenario(
        R=R, T=T, L=L, K_I=K_I, K_P=K_P, P_MS=P_MS, P_BS=P_BS,
        Omega=Omega, G=G, beta_ms=beta_ms, beta_bs=beta_bs,
        alpha_ms=alpha_ms, phi_ms=phi_ms, phi_bs=phi_bs, alpha_bs=alpha_bs,
        zeta=zeta,
    )
    ybar = kron_vectors(scenario.factor_vectors())
    return scenario, ybar
