"""Scenario generation for covariance-based activity detection.

Shapes follow the received-signal model ``Y = A diag(sqrt(gamma)) H + Z``:

    A      (D_c, K_c)  pilots, one column per user
    gamma  (K_c,)      activity pattern, gamma_k = b_k * g_k
    H      (K_c, M)    channels, row k is h_k^T
    Y      (D_c, M)    received pilot block
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from enum import Enum

import numpy as np


class ConfigError(ValueError):
    """Invalid scenario or solver configuration."""


class PilotKind(str, Enum):
    UNIT_MODULUS = "unit_modulus_random_phase"
    GAUSSIAN = "complex_gaussian_normalized"


class ChannelKind(str, Enum):
    WHITE = "spatially_white"
    ULA_BLOCK = "ula_block"


STREAMS = ("pilots", "activity", "channel", "noise")


@dataclass(frozen=True)
class ScenarioConfig:
    D_c: int
    K_c: int
    A_c: int
    M: int
    sigma2: float = 1.0
    snr_db_active: float = 10.0
    pilot_kind: PilotKind = PilotKind.UNIT_MODULUS
    channel_kind: ChannelKind = ChannelKind.WHITE
    m_eff_fraction: float = 1.0  # only read for ULA_BLOCK
    rng_seed: int = 0

    def __post_init__(self):
        # accept plain strings for the enum fields
        try:
            object.__setattr__(self, "pilot_kind", PilotKind(self.pilot_kind))
            object.__setattr__(self, "channel_kind", ChannelKind(self.channel_kind))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("D_c", "K_c", "M"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0 <= self.A_c <= self.K_c:
            raise ConfigError(f"need 0 <= A_c <= K_c, got A_c={self.A_c}, K_c={self.K_c}")
        if not self.sigma2 > 0:
            raise ConfigError(f"sigma2 must be positive, got {self.sigma2}")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must be an unsigned 64-bit integer")
        if self.channel_kind is ChannelKind.ULA_BLOCK:
            if not 0 < self.m_eff_fraction <= 1:
                raise ConfigError(f"m_eff_fraction must lie in (0, 1], got {self.m_eff_fraction}")
            if self.M_eff < 1:
                raise ConfigError("m_eff_fraction * M rounds to zero antennas")

    @property
    def gain(self) -> float:
        """Large-scale fading coefficient g_k of every active user."""
        return self.sigma2 * 10.0 ** (self.snr_db_active / 10.0)

    @property
    def M_eff(self) -> int:
        if self.channel_kind is ChannelKind.WHITE:
            return self.M
        return int(round(self.m_eff_fraction * self.M))

    def replace(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, Enum) else v
        return out

    def streams(self) -> dict[str, np.random.Generator]:
        """Independent generators for pilots, activity, channel and noise."""
        return spawn_streams(self.rng_seed)


def spawn_streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAMS, children)}


@dataclass(frozen=True)
class ActivityPattern:
    gamma: np.ndarray
    support: np.ndarray = field(repr=False)

    @classmethod
    def from_gamma(cls, gamma) -> "ActivityPattern":
        gamma = np.asarray(gamma, dtype=float)
        if np.any(gamma < 0):
            raise ValueError("activity pattern must be nonnegative")
        return cls(gamma, np.flatnonzero(gamma > 0))

    @property
    def K_c(self) -> int:
        return self.gamma.size

    @property
    def A_c(self) -> int:
        return self.support.size


def _crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circularly-symmetric complex Gaussian CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_pilots(cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw a ``(D_c, K_c)`` pilot matrix with every column of squared norm ``D_c``."""
    shape = (cfg.D_c, cfg.K_c)
    if cfg.pilot_kind is PilotKind.UNIT_MODULUS:
        A = np.exp(2j * np.pi * rng.random(shape))
    else:
        A = _crandn(rng, shape)
        A *= np.sqrt(cfg.D_c) / np.linalg.norm(A, axis=0)
    A.flags.writeable = False
    return A


def generate_activity(cfg: ScenarioConfig, rng: np.random.Generator) -> ActivityPattern:
    support = np.sort(rng.choice(cfg.K_c, size=cfg.A_c, replace=False))
    gamma = np.zeros(cfg.K_c)
    gamma[support] = cfg.gain
    gamma.flags.writeable = False
    return ActivityPattern(gamma, support)


def dft_matrix(M: int) -> np.ndarray:
    """Unitary DFT matrix of order M (columns of unit norm)."""
    return np.fft.fft(np.eye(M)) / np.sqrt(M)


def ula_block_powers(M: int, M_eff: int, start: int) -> np.ndarray:
    """Angular power profile: ``M / M_eff`` on a circularly wrapped block of length ``M_eff``."""
    beta = np.zeros(M)
    beta[(start + np.arange(M_eff)) % M] = M / M_eff
    return beta


def generate_channels(cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw the ``(K_c, M)`` channel matrix; E||h_k||^2 = M for both channel kinds."""
    K, M = cfg.K_c, cfg.M
    if cfg.channel_kind is ChannelKind.WHITE:
        H = _crandn(rng, (K, M))
    else:
        starts = rng.integers(0, M, size=K)
        # a full-rate draw keeps the stream layout independent of M_eff
        W = _crandn(rng, (K, M))
        for k in range(K):
            W[k] *= np.sqrt(ula_block_powers(M, cfg.M_eff, starts[k]))
        # h_k = F_M w_k, stacked as rows
        H = W @ dft_matrix(M).T
    H.flags.writeable = False
    return H


def synthesize_observation(A, activity, H, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Received block ``Y = A diag(sqrt(gamma)) H + Z`` with Z ~ CN(0, sigma2) entrywise."""
    gamma = activity.gamma if isinstance(activity, ActivityPattern) else np.asarray(activity)
    D, K = A.shape
    if gamma.shape != (K,) or H.shape[0] != K:
        raise ValueError(
            f"dimension mismatch: A {A.shape}, gamma {gamma.shape}, H {H.shape}"
        )
    Z = np.sqrt(sigma2) * _crandn(rng, (D, H.shape[1]))
    return A @ (np.sqrt(gamma)[:, None] * H) + Z


def true_covariance(A, gamma, sigma2: float) -> np.ndarray:
    """Sigma_y = A diag(gamma) A^H + sigma2 I."""
    gamma = gamma.gamma if isinstance(gamma, ActivityPattern) else np.asarray(gamma, dtype=float)
    if gamma.shape != (A.shape[1],):
        raise ValueError(f"gamma has shape {gamma.shape}, expected ({A.shape[1]},)")
    S = (A * gamma) @ A.conj().T
    S += sigma2 * np.eye(A.shape[0])
    return hermitize(S)


def sample_covariance(Y: np.ndarray) -> np.ndarray:
    """(1/M) Y Y^H."""
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[1] < 1:
        raise ValueError("need a 2-D observation block with at least one column")
    return hermitize(Y @ Y.conj().T / Y.shape[1])


def hermitize(S: np.ndarray) -> np.ndarray:
    return 0.5 * (S + S.conj().T)


def snr_of_user(gamma_k: float, sigma2: float) -> float:
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return gamma_k / sigma2


@dataclass(frozen=True)
class Scenario:
    """One realization: pilots, activity, channels, observation and its sample covariance."""

    config: ScenarioConfig
    A: np.ndarray
    activity: ActivityPattern
    H: np.ndarray
    Y: np.ndarray

    @property
    def sigma_hat(self) -> np.ndarray:
        return sample_covariance(self.Y)

    @property
    def sigma_true(self) -> np.ndarray:
        return true_covariance(self.A, self.activity, self.config.sigma2)


def draw_scenario(cfg: ScenarioConfig, pilots: np.ndarray | None = None) -> Scenario:
    """Generate every random component of ``cfg`` from its own stream of ``cfg.rng_seed``."""
    rng = cfg.streams()
    A = generate_pilots(cfg, rng["pilots"]) if pilots is None else pilots
    if A.shape != (cfg.D_c, cfg.K_c):
        raise ValueError(f"pilot matrix has shape {A.shape}, expected {(cfg.D_c, cfg.K_c)}")
    activity = generate_activity(cfg, rng["activity"])
    H = generate_channels(cfg, rng["channel"])
    Y = synthesize_observation(A, activity, H, cfg.sigma2, rng["noise"])
    Y.flags.writeable = False
    return Scenario(cfg, A, activity, H, Y)


def check_pilots(A: np.ndarray, rtol: float = 1e-10) -> None:
    """Raise if any column violates ||a_k||^2 = D_c."""
    D = A.shape[0]
    norms = np.sum(np.abs(A) ** 2, axis=0)
    bad = np.flatnonzero(np.abs(norms - D) > rtol * D)
    if bad.size:
        raise ValueError(f"{bad.size} pilot columns violate ||a_k||^2 = {D}, e.g. column {bad[0]}")
