"""Relay geometry, large/small-scale fading and CSI mismatch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig, db2lin


def crandn(rng: np.random.Generator, shape, var=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples, CN(0, var).

    ``var`` broadcasts against ``shape``.
    """
    scale = np.sqrt(np.asarray(var, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def path_loss(d, L_db: float, rho: float):
    """Distance-based amplitude attenuation ``sqrt(L) / sqrt(d**rho)``.

    Parameters
    ----------
    d : float or array_like
        Distance relative to the source-destination distance.
    L_db : float
        Known path loss at the destination, in dB.
    rho : float
        Path loss exponent, typically between 2 and 5.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("path_loss: distance must be positive")
    gamma = np.sqrt(db2lin(L_db)) / np.sqrt(d ** rho)
    return float(gamma) if gamma.ndim == 0 else gamma


def shadowing(sigma_s_db: float, rng: np.random.Generator, size=None):
    """Log-normal shadowing factor ``10**(sigma_s * N(0,1) / 10)``."""
    if sigma_s_db < 0:
        raise ValueError("shadowing: sigma_s_db must be nonnegative")
    return 10.0 ** (sigma_s_db * rng.standard_normal(size) / 10.0)


def relay_destination_distance(d_sr, theta):
    """Law of cosines with the source-destination distance fixed to 1."""
    d_sr = np.asarray(d_sr, dtype=float)
    return np.sqrt(d_sr ** 2 + 1.0 - 2.0 * d_sr * np.cos(theta))


@dataclass(frozen=True)
class RelayGeometry:
    source_relay_distances: np.ndarray
    relay_source_dest_angles: np.ndarray
    relay_dest_distances: np.ndarray

    @classmethod
    def from_polar(cls, d_sr, theta) -> "RelayGeometry":
        d_sr = np.atleast_1d(np.asarray(d_sr, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return cls(d_sr, theta, relay_destination_distance(d_sr, theta))

    @property
    def M(self) -> int:
        return len(self.source_relay_distances)


@dataclass(frozen=True)
class ChannelState:
    """True channels of one snapshot together with what the relays see."""

    F: np.ndarray
    g: np.ndarray
    F_mismatched: np.ndarray
    g_mismatched: np.ndarray
    epsilon_draw: float


def sample_geometry(config: ScenarioConfig, rng: np.random.Generator) -> RelayGeometry:
    d_sr = rng.uniform(0.5, 0.9, config.M)
    theta = rng.uniform(-np.pi / 2, np.pi / 2, config.M)
    return RelayGeometry.from_polar(d_sr, theta)


def sample_channels(geometry: RelayGeometry, config: ScenarioConfig,
                    rng: np.random.Generator):
    """Draw ``(F, g)`` with path loss, per-coefficient shadowing and Rayleigh fading.

    All K sources share the source-relay distance of each relay.
    """
    M, K = config.M, config.K
    if geometry.M != M:
        raise ValueError(f"geometry has {geometry.M} relays, config expects {M}")
    gamma_sr = path_loss(geometry.source_relay_distances, config.L_db, config.rho)
    gamma_rd = path_loss(geometry.relay_dest_distances, config.L_db, config.rho)
    beta_F = shadowing(config.sigma_s_db, rng, (M, K))
    F = gamma_sr[:, None] * beta_F * crandn(rng, (M, K))
    beta_g = shadowing(config.sigma_s_db, rng, M)
    g = gamma_rd * beta_g * crandn(rng, M)
    return F, g


def inject_mismatch(F, g, config: ScenarioConfig, R_f_norms, R_g_norm,
                    rng: np.random.Generator, epsilon=None) -> ChannelState:
    """Add i.i.d. Gaussian CSI errors scaled to ``epsilon * ||R||_F`` per element.

    One ``epsilon`` is drawn uniformly on ``(0, epsilon_max]`` and shared by
    every column of ``F`` and by ``g``. Passing ``epsilon`` pins the draw.
    ``g`` is only perturbed when ``config.g_mismatch`` is set.
    """
    R_f_norms = np.asarray(R_f_norms, dtype=float)
    if np.any(R_f_norms <= 0) or (config.g_mismatch and R_g_norm <= 0):
        raise ValueError("inject_mismatch: Frobenius norms must be positive")
    if epsilon is None:
        # (0, eps_max]: flip numpy's [0, 1) draw
        epsilon = config.epsilon_max * (1.0 - rng.random())
    F_hat = F + crandn(rng, F.shape, epsilon * R_f_norms[None, :])
    if config.g_mismatch:
        g_hat = g + crandn(rng, g.shape, epsilon * R_g_norm)
    else:
        g_hat = g.copy()
    return ChannelState(F, g, F_hat, g_hat, float(epsilon))
