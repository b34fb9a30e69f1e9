"""Cross-correlation and subspace-projection channel estimation.

The relays keep running averages of the cross-correlation between their
received vector and the destination output, and of the outer products of
the (mismatched) channels they observe. Each channel component is then
estimated by projecting the cross-correlation vector onto the principal
subspace of that component's error spectrum matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


class DegenerateProjectionError(ArithmeticError):
    """The cross-correlation vector is orthogonal to a projection subspace."""

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


@dataclass(frozen=True)
class EstimatorState:
    iteration: int
    scv: np.ndarray
    R_f_hat: np.ndarray  # (K, M, M)
    R_g_hat: np.ndarray
    epsilon_max: float
    n_components: int | str = 1

    @classmethod
    def initial(cls, M: int, K: int, epsilon_max: float, n_components=1):
        if not (n_components == "auto" or 1 <= int(n_components) <= M):
            raise ValueError(f"n_components must be 'auto' or in [1, {M}]")
        return cls(0, np.zeros(M, complex), np.zeros((K, M, M), complex),
                   np.zeros((M, M), complex), float(epsilon_max), n_components)

    @property
    def M(self) -> int:
        return len(self.scv)

    @property
    def K(self) -> int:
        return len(self.R_f_hat)


def update(state: EstimatorState, x, z, F_mismatched, g_mismatched) -> EstimatorState:
    """Fold snapshot ``i = state.iteration + 1`` into the running averages."""
    x = np.asarray(x)
    F_hat = np.asarray(F_mismatched)
    g_hat = np.asarray(g_mismatched)
    if x.shape != (state.M,) or F_hat.shape != (state.M, state.K) or g_hat.shape != (state.M,):
        raise ValueError("update: dimension mismatch with estimator state")
    i = state.iteration + 1
    a = (i - 1) / i
    scv = a * state.scv + x * np.conj(z) / i
    R_f = a * state.R_f_hat + np.einsum("mk,nk->kmn", F_hat, F_hat.conj()) / i
    R_g = a * state.R_g_hat + np.outer(g_hat, g_hat.conj()) / i
    return replace(state, iteration=i, scv=scv, R_f_hat=R_f, R_g_hat=R_g)


def error_spectrum(R_hat, epsilon_max: float) -> np.ndarray:
    """Closed-form integral of ``R + eps ||R||_F I`` over ``eps`` in ``(0, eps_max]``."""
    R_hat = np.asarray(R_hat)
    M = R_hat.shape[0]
    return (epsilon_max * R_hat
            + 0.5 * epsilon_max ** 2 * np.linalg.norm(R_hat, "fro") * np.eye(M))


def select_n_components(eigenvalues, energy=0.95) -> int:
    """Smallest N whose leading eigenvalues hold ``energy`` of the trace.

    ``eigenvalues`` must be sorted in descending order.
    """
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
    total = lam.sum()
    if total <= 0:
        return 1
    return int(np.searchsorted(np.cumsum(lam) / total, energy - 1e-12) + 1)


def principal_basis(C, N):
    """Top-``N`` eigenvectors of a Hermitian matrix, largest eigenvalue first.

    Ties keep the eigensolver's ascending-order position reversed, so the
    result is deterministic. ``N="auto"`` applies :func:`select_n_components`.
    Returns ``(V, eigenvalues_descending)``.
    """
    C = np.asarray(C)
    M = C.shape[0]
    lam, V = np.linalg.eigh(C)
    lam, V = lam[::-1], V[:, ::-1]
    if N == "auto":
        N = select_n_components(lam)
    if not 1 <= N <= M:
        raise ValueError(f"N must lie in [1, {M}], got {N}")
    return V[:, :N], lam


def principal_subspace(C, N) -> np.ndarray:
    """Orthogonal projector onto the ``N`` principal eigenvectors of ``C``."""
    V, _ = principal_basis(C, N)
    return V @ V.conj().T


def fix_phase(v):
    """Rotate ``v`` so its largest-magnitude entry is real and positive."""
    v = np.asarray(v)
    k = np.argmax(np.abs(v))
    if v[k] == 0:
        return v
    out = v * (np.abs(v[k]) / v[k])
    out[k] = np.abs(v[k])  # exact, no rounding residue in the imaginary part
    return out


def project_channel(P, scv) -> np.ndarray:
    """Unit-norm projection of the cross-correlation vector onto ``range(P)``."""
    scv = np.asarray(scv)
    u = np.asarray(P) @ scv
    nrm = np.linalg.norm(u)
    if not nrm >= 1e-12 * np.linalg.norm(scv) or nrm == 0:
        raise DegenerateProjectionError("cross-correlation vector is orthogonal "
                                        "to the projection subspace")
    return fix_phase(u / nrm)


def _estimate_component(R_hat, state, component):
    C = error_spectrum(R_hat, state.epsilon_max)
    V, lam = principal_basis(C, state.n_components)
    try:
        est = project_channel(V @ V.conj().T, state.scv)
    except DegenerateProjectionError as exc:
        raise DegenerateProjectionError(str(exc), component) from None
    return est, lam


def estimate_all(state: EstimatorState):
    """Projected unit-norm estimates of every ``f_k`` and of ``g``.

    Returns
    -------
    F_est : ndarray, shape (M, K)
    g_est : ndarray, shape (M,)

    Raises
    ------
    DegenerateProjectionError
        With ``component`` set to ``k`` (0-based) or ``"g"``.
    """
    if state.iteration < 1:
        raise ValueError("estimate_all needs at least one update")
    F_est = np.empty((state.M, state.K), complex)
    for k in range(state.K):
        F_est[:, k], _ = _estimate_component(state.R_f_hat[k], state, k)
    g_est, _ = _estimate_component(state.R_g_hat, state, "g")
    return F_est, g_est


def channel_gains(state: EstimatorState):
    """Norm estimates for the unit-norm channel estimates.

    The averaged outer products carry the error covariance as a floor on
    every eigenvalue; subtracting the mean of the non-principal eigenvalues
    from the principal one removes it. With a single relay there is no floor
    to measure and the principal eigenvalue is used as is.

    Returns ``(f_gains (K,), g_gain)``.
    """
    def gain(R):
        lam = np.linalg.eigvalsh(R)
        floor = lam[:-1].mean() if len(lam) > 1 else 0.0
        top = lam[-1]
        return np.sqrt(max(top - floor, 1e-12 * max(top, 1e-300)))

    f_gains = np.array([gain(R) for R in state.R_f_hat])
    return f_gains, gain(state.R_g_hat)
