"""Power-constrained max-SINR relay beamforming.

The problem

    max_w  w^H R1 w / (P_n + w^H U w)   s.t.  w^H D w <= P_T

is solved by substituting ``w = sqrt(P_T) D^{-1/2} w~`` with ``||w~|| = 1``
(the constraint is always active) and taking ``w~`` as the principal
generalized eigenvector of the pencil ``(R~1, P_n I + P_T U~)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .airlink import BeamWeights, SecondOrderStats, forwarded_noise, sinr, transmit_power
from .estimator import fix_phase

D_FLOOR = 1e-15


@dataclass(frozen=True)
class SolveInputs:
    R1: np.ndarray
    U: np.ndarray
    D: np.ndarray
    P_T: float
    P_n: float
    # optional factor with R1 = r1_vector r1_vector^H, enables the rank-one path
    r1_vector: np.ndarray | None = None

    @classmethod
    def from_stats(cls, stats: SecondOrderStats, P_T: float, r1_vector=None):
        return cls(stats.R[0], stats.interference, stats.D, float(P_T),
                   stats.noise_power, r1_vector)


def perturbed_stats(stats: SecondOrderStats, epsilon: float) -> SecondOrderStats:
    """Diagonal loading by ``epsilon`` times each matrix's Frobenius norm."""
    M = stats.Q.shape[0]
    eye = np.eye(M)
    R_norms = np.linalg.norm(stats.R, "fro", axis=(1, 2))
    R = stats.R + epsilon * R_norms[:, None, None] * eye
    Q = stats.Q + epsilon * np.linalg.norm(stats.Q, "fro") * eye
    D = stats.D + epsilon * np.linalg.norm(stats.D, "fro") * eye
    return SecondOrderStats(R, Q, D, stats.noise_power)


def estimated_stats(f_estimates, g_estimate, source_powers, P_n, P_T,
                    f_gains=None, g_gain=None) -> SolveInputs:
    """Solve inputs built from channel estimates instead of true channels.

    ``f_estimates`` (M, K) and ``g_estimate`` (M,) are unit-norm directions.
    ``f_gains`` / ``g_gain`` optionally restore their norms; when omitted the
    directions are used as they are.
    """
    F = np.asarray(f_estimates)
    g = np.asarray(g_estimate)
    if f_gains is not None:
        F = F * np.asarray(f_gains)[None, :]
    if g_gain is not None:
        g = g * g_gain
    p = np.asarray(source_powers, dtype=float)
    h = F * g[:, None]
    R = p[:, None, None] * np.einsum("mk,nk->kmn", h, h.conj())
    Q = forwarded_noise(g, P_n)
    D = np.diag((np.abs(F) ** 2) @ p + P_n)
    U = Q + R[1:].sum(axis=0)
    return SolveInputs(R[0], U, D, float(P_T), float(P_n), np.sqrt(p[0]) * h[:, 0])


def _whitening(D):
    d = np.real(np.diagonal(D)).astype(float)
    if np.any(d <= 0):
        raise ValueError("D must have a strictly positive diagonal")
    return 1.0 / np.sqrt(np.maximum(d, D_FLOOR * d.max()))


def _pencil(inputs: SolveInputs, paper_literal_eq33=False):
    s = _whitening(inputs.D)
    M = len(s)
    R1t = s[:, None] * inputs.R1 * s[None, :]
    Ut = s[:, None] * inputs.U * s[None, :]
    load = 1.0 if paper_literal_eq33 else inputs.P_T
    B = inputs.P_n * np.eye(M) + load * Ut
    return s, R1t, (B + B.conj().T) / 2


def principal_generalized(A, B):
    """Largest eigenpair of the Hermitian-definite pencil ``A v = lam B v``.

    Cholesky-based, so eigenvalues are real. Returns a unit-norm vector.
    """
    A = (A + A.conj().T) / 2
    M = A.shape[0]
    lam, V = scipy.linalg.eigh(A, B, subset_by_index=[M - 1, M - 1])
    v = V[:, 0]
    return float(lam[0]), v / np.linalg.norm(v)


def principal_rank_one(v, B):
    """Closed form for ``A = v v^H``: ``lam = v^H B^{-1} v``, eigvec ``B^{-1} v``."""
    c, low = scipy.linalg.cho_factor(B)
    u = scipy.linalg.cho_solve((c, low), v)
    lam = float(np.real(np.vdot(v, u)))
    return lam, u / np.linalg.norm(u)


def solve_max_sinr(inputs: SolveInputs, paper_literal_eq33=False,
                   method="auto") -> BeamWeights:
    """Max-SINR weights meeting ``w^H D w = P_T``.

    Parameters
    ----------
    inputs : SolveInputs
    paper_literal_eq33 : bool
        Drop ``P_T`` from the denominator pencil, i.e. use
        ``P_n I + U~`` instead of ``P_n I + P_T U~``. The reported SINR is
        then ``P_T`` times the principal eigenvalue of that pencil and is
        no longer the SINR the weights achieve unless ``P_T = 1``.
    method : {"auto", "general", "rank_one"}
        ``auto`` takes the rank-one path when ``inputs.r1_vector`` is set.
    """
    s, R1t, B = _pencil(inputs, paper_literal_eq33)
    M = len(s)
    if not np.linalg.norm(R1t) > np.finfo(float).tiny:
        wt = np.zeros(M, complex)
        wt[0] = 1.0
        w = np.sqrt(inputs.P_T) * s * wt
        return BeamWeights(w, transmit_power(w, inputs.D), 0.0, degenerate=True)
    if method == "auto":
        method = "rank_one" if inputs.r1_vector is not None else "general"
    if method == "rank_one":
        lam, wt = principal_rank_one(s * inputs.r1_vector, B)
    else:
        lam, wt = principal_generalized(R1t, B)
    w = fix_phase(np.sqrt(inputs.P_T) * s * wt)
    lam = max(lam, 0.0)
    return BeamWeights(w, transmit_power(w, inputs.D), inputs.P_T * lam)


def predicted_vs_realized(weights: BeamWeights, inputs: SolveInputs) -> float:
    """Gap in dB between the solver's SINR and the SINR its weights achieve."""
    realized = sinr(weights.w, inputs.R1, inputs.U, inputs.P_n)
    if weights.predicted_sinr == 0 and realized == 0:
        return 0.0
    return abs(10 * np.log10(weights.predicted_sinr) - 10 * np.log10(realized))


def uniform_weights(D, P_T) -> np.ndarray:
    """Equal-gain weights scaled so ``w^H D w = P_T``."""
    d = np.real(np.diagonal(D))
    return np.full(len(d), np.sqrt(P_T / d.sum()), dtype=complex)
