"""Two-hop amplify-and-forward signal model and second-order statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import crandn


@dataclass(frozen=True)
class SecondOrderStats:
    """Matrices driving the SINR of a relay weight vector.

    Attributes
    ----------
    R : ndarray, shape (K, M, M)
        Per-source signal matrices; ``R[0]`` belongs to the desired source.
    Q : ndarray, shape (M, M)
        Relay noise forwarded through ``g``.
    D : ndarray, shape (M, M)
        Real diagonal relay input power matrix.
    noise_power : float
    """

    R: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    noise_power: float

    @property
    def interference(self) -> np.ndarray:
        """``Q + sum_{k>=2} R_k``."""
        return self.Q + self.R[1:].sum(axis=0)


@dataclass(frozen=True)
class BeamWeights:
    w: np.ndarray
    transmit_power: float
    predicted_sinr: float
    degenerate: bool = False


def qpsk_symbols(rng: np.random.Generator, size) -> np.ndarray:
    """Unit-modulus QPSK symbols."""
    bits = rng.integers(0, 4, size)
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * bits))


def _check_len(name, a, n):
    if a.shape[-1] != n:
        raise ValueError(f"{name} has length {a.shape[-1]}, expected {n}")


def transmit_hop(F, symbols, source_powers, noise):
    """Relay received vector ``x = F (sqrt(P_s) * b) + nu``.

    ``symbols`` and ``noise`` may carry a leading batch axis.
    """
    F = np.asarray(F)
    M, K = F.shape
    symbols = np.asarray(symbols)
    noise = np.asarray(noise)
    _check_len("symbols", symbols, K)
    _check_len("source_powers", np.asarray(source_powers), K)
    _check_len("noise", noise, M)
    s = np.sqrt(source_powers) * symbols
    return s @ F.T + noise


def relay_gains(w):
    """Physical relay gains for an optimization weight vector.

    The quadratic forms ``w^H R w`` measure ``|sum_m conj(w_m) f_m g_m|^2``,
    so the relays must apply ``conj(w)`` for the signal chain to realize the
    SINR computed from the statistics.
    """
    return np.conj(w)


def relay_forward(w, x):
    """``y = w * x`` with ``w`` the gains actually applied at the relays."""
    w = np.asarray(w)
    x = np.asarray(x)
    _check_len("x", x, w.shape[-1])
    return w * x


def destination_receive(g, y, n):
    """``z = g^T y + n``; plain transpose, no conjugation."""
    g = np.asarray(g)
    y = np.asarray(y)
    _check_len("y", y, g.shape[-1])
    return y @ g + n


def forwarded_noise(g, P_n):
    """Relay noise seen at the destination, ``P_n diag(|g|^2)``.

    Relay noise samples are independent across relays, so only the diagonal
    of ``g g^H`` survives the expectation even with ``g`` held fixed.
    """
    return P_n * np.diag(np.abs(np.asarray(g)) ** 2).astype(complex)


def exact_stats(F, g, source_powers, P_n) -> SecondOrderStats:
    """Statistics conditioned on one channel realization.

    Signal matrices are rank-one outer products of ``f_k * g``; the noise
    matrix is diagonal (see :func:`forwarded_noise`).
    """
    F = np.asarray(F)
    g = np.asarray(g)
    p = np.asarray(source_powers, dtype=float)
    h = F * g[:, None]  # column k is f_k ⊙ g
    R = p[:, None, None] * np.einsum("mk,nk->kmn", h, h.conj())
    Q = forwarded_noise(g, P_n)
    D = np.diag((np.abs(F) ** 2) @ p + P_n)
    return SecondOrderStats(R, Q, D, float(P_n))


def quadratic(w, A) -> float:
    return float(np.real(np.vdot(w, A @ w)))


def sinr(w, R1, U, P_n) -> float:
    """``w^H R1 w / (P_n + w^H U w)``."""
    num = quadratic(w, R1)
    den = P_n + quadratic(w, U)
    return max(num, 0.0) / den


def evaluate_sinr(w, stats: SecondOrderStats) -> float:
    return sinr(w, stats.R[0], stats.interference, stats.noise_power)


def transmit_power(w, D) -> float:
    D = np.asarray(D)
    d = np.diagonal(D).real if D.ndim == 2 else D
    return float(np.sum(d * np.abs(w) ** 2))


def measure_powers(w, F, g, source_powers, P_n, n_draws, rng, chunk=100_000):
    """Monte Carlo powers of the desired, interference and noise parts of ``z``.

    ``w`` is an optimization weight vector; the relays apply
    :func:`relay_gains` of it. Returns
    ``(P_desired, P_interference, P_noise, P_total)`` averaged over
    ``n_draws`` QPSK symbol and Gaussian noise draws for fixed channels.
    """
    M, K = F.shape
    gains = relay_gains(w)
    wg = gains * g
    sums = np.zeros(4)
    done = 0
    while done < n_draws:
        n_b = min(chunk, n_draws - done)
        b = qpsk_symbols(rng, (n_b, K))
        nu = crandn(rng, (n_b, M), P_n)
        n = crandn(rng, n_b, P_n)
        s = np.sqrt(source_powers) * b
        desired = (s[:, :1] @ F[:, :1].T) @ wg
        interf = (s[:, 1:] @ F[:, 1:].T) @ wg
        noise = nu @ wg + n
        x = transmit_hop(F, b, source_powers, nu)
        z = destination_receive(g, relay_forward(gains, x), n)
        for j, part in enumerate((desired, interf, noise, z)):
            sums[j] += np.sum(np.abs(part) ** 2)
        done += n_b
    return tuple(sums / n_draws)
