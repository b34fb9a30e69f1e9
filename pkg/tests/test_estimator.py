import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relaybeam import channel, estimator
from relaybeam.validation import quadrature_error_spectrum, random_psd


def _state(M=4, K=2, **kw):
    return estimator.EstimatorState.initial(M, K, 0.5, **kw)


def test_first_update_is_single_sample(rng):
    x, z = channel.crandn(rng, 4), 0.3 - 1.2j
    s = estimator.update(_state(), x, z, channel.crandn(rng, (4, 2)), channel.crandn(rng, 4))
    np.testing.assert_array_equal(s.scv, x * np.conj(z))
    assert s.iteration == 1


def test_repeated_sample_average(rng):
    x, z = channel.crandn(rng, 4), 0.7 + 0.1j
    F, g = channel.crandn(rng, (4, 2)), channel.crandn(rng, 4)
    s = estimator.update(estimator.update(_state(), x, z, F, g), x, z, F, g)
    np.testing.assert_allclose(s.scv, x * np.conj(z), rtol=1e-15)


def test_recursion_matches_batch(rng):
    s = _state()
    xs, zs, Fs, gs = [], [], [], []
    for _ in range(50):
        x, z = channel.crandn(rng, 4), complex(channel.crandn(rng, ()))
        F, g = channel.crandn(rng, (4, 2)), channel.crandn(rng, 4)
        s = estimator.update(s, x, z, F, g)
        xs.append(x), zs.append(z), Fs.append(F), gs.append(g)
    batch = sum(x * np.conj(z) for x, z in zip(xs, zs)) / 50
    np.testing.assert_allclose(s.scv, batch, atol=1e-12)
    R_f1 = sum(np.outer(F[:, 1], F[:, 1].conj()) for F in Fs) / 50
    np.testing.assert_allclose(s.R_f_hat[1], R_f1, atol=1e-12)
    R_g = sum(np.outer(g, g.conj()) for g in gs) / 50
    np.testing.assert_allclose(s.R_g_hat, R_g, atol=1e-12)
    for R in list(s.R_f_hat) + [s.R_g_hat]:
        np.testing.assert_allclose(R, R.conj().T, atol=1e-14)
        assert np.linalg.eigvalsh(R).min() > -1e-12


def test_update_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        estimator.update(_state(), channel.crandn(rng, 3), 1.0, np.ones((4, 2)), np.ones(4))


def test_error_spectrum_identity():
    C = estimator.error_spectrum(np.eye(2), 0.5)
    np.testing.assert_allclose(C, 0.676776695296636881 * np.eye(2), rtol=1e-14)
    np.testing.assert_allclose(C, quadrature_error_spectrum(np.eye(2), 0.5), atol=1e-10)


def test_error_spectrum_vanishing_range(rng):
    C = estimator.error_spectrum(random_psd(rng, 3), 1e-14)
    assert np.abs(C).max() < 1e-12


@pytest.mark.parametrize("eps", [0.2, 0.5])
def test_error_spectrum_quadrature(rng, eps):
    R = random_psd(rng, 5)
    np.testing.assert_allclose(estimator.error_spectrum(R, eps),
                               quadrature_error_spectrum(R, eps), rtol=0, atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 100), st.floats(0.01, 1), st.integers(0, 2**32 - 1))
def test_error_spectrum_linearity(a, eps, seed):
    R = random_psd(np.random.default_rng(seed), 4)
    np.testing.assert_allclose(estimator.error_spectrum(a * R, eps),
                               a * estimator.error_spectrum(R, eps), rtol=1e-12, atol=1e-12)


def test_principal_subspace_axis_aligned():
    P = estimator.principal_subspace(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_allclose(P, np.diag([1, 1, 0]), atol=1e-14)


def test_principal_subspace_full_rank(rng):
    C = random_psd(rng, 4)
    np.testing.assert_allclose(estimator.principal_subspace(C, 4), np.eye(4), atol=1e-12)


def test_principal_subspace_separates_eigenvectors(rng):
    C = random_psd(rng, 5)
    lam, V = np.linalg.eigh(C)
    # residual cross-check of the reference eigensolver
    assert np.linalg.norm(C @ V - V * lam) <= 1e-10 * np.linalg.norm(C)
    P = estimator.principal_subspace(C, 1)
    assert np.linalg.norm(P @ V[:, -1] - V[:, -1]) <= 1e-10
    for j in range(4):
        assert np.linalg.norm(P @ V[:, j]) <= 1e-10


@pytest.mark.parametrize("N", [0, 5])
def test_principal_subspace_bad_N(N):
    with pytest.raises(ValueError):
        estimator.principal_subspace(np.eye(4), N)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.data())
def test_projector_laws(M, data):
    N = data.draw(st.integers(1, M))
    seed = data.draw(st.integers(0, 2**32 - 1))
    C = estimator.error_spectrum(random_psd(np.random.default_rng(seed), M), 0.3)
    P = estimator.principal_subspace(C, N)
    np.testing.assert_allclose(P, P.conj().T, atol=1e-10)
    np.testing.assert_allclose(P @ P, P, atol=1e-10)
    assert np.trace(P).real == pytest.approx(N, abs=1e-10)


def test_select_n_components():
    assert estimator.select_n_components([10, 0.1, 0.1]) == 1
    assert estimator.select_n_components([1, 1, 1, 1]) == 4
    assert estimator.principal_basis(np.diag([10.0, 0.2, 0.1]), "auto")[0].shape == (3, 1)


def test_project_channel_normalizes():
    out = estimator.project_channel(np.eye(2), np.array([3, 4j]))
    # equal to [0.6, 0.8i] up to the unit-modulus phase fixed by the convention
    np.testing.assert_allclose(out * 1j, [0.6, 0.8j], atol=1e-15)
    np.testing.assert_allclose(out, [-0.6j, 0.8], atol=1e-15)


def test_project_channel_degenerate():
    with pytest.raises(estimator.DegenerateProjectionError):
        estimator.project_channel(np.diag([1.0, 0.0]), np.array([0.0, 1.0]))


def test_project_channel_range(rng):
    V, _ = np.linalg.qr(channel.crandn(rng, (4, 2)))
    P = V @ V.conj().T
    out = estimator.project_channel(P, channel.crandn(rng, 4))
    assert np.linalg.norm(out - P @ out) <= 1e-10
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-14)
    k = np.argmax(np.abs(out))
    assert out[k].imag == 0 and out[k].real > 0


def _static_run(rng, n_snap, eps_max=0.5, snr_db=20.0):
    M = 6
    f = channel.crandn(rng, M)
    g = channel.crandn(rng, M)
    P_n = 10 ** (-snr_db / 10)
    s = estimator.EstimatorState.initial(M, 1, eps_max)
    nf = np.sum(np.abs(f) ** 2)
    w = np.ones(M)
    history = []
    for _ in range(n_snap):
        eps = eps_max * (1 - rng.random())
        f_hat = f + channel.crandn(rng, M, eps * nf)
        x = f * np.exp(1j * np.pi / 4) + channel.crandn(rng, M, P_n)
        z = (w * g) @ x + complex(channel.crandn(rng, (), P_n))
        s = estimator.update(s, x, z, f_hat[:, None], g)
        F_est, _ = estimator.estimate_all(s)
        history.append(abs(np.vdot(F_est[:, 0], f / np.linalg.norm(f))))
    return history


def test_static_channel_alignment(rng):
    # error-free channel observed repeatedly
    M = 6
    f = channel.crandn(rng, M)
    s = estimator.EstimatorState.initial(M, 1, 0.5)
    for _ in range(100):
        x = f + channel.crandn(rng, M, 0.01)
        s = estimator.update(s, x, np.vdot(np.ones(M), x).conj(), f[:, None], np.ones(M))
    F_est, g_est = estimator.estimate_all(s)
    assert abs(np.vdot(F_est[:, 0], f / np.linalg.norm(f))) >= 0.99
    assert np.linalg.norm(F_est[:, 0]) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(g_est) == pytest.approx(1.0, abs=1e-12)


def test_alignment_improves_with_snapshots(rng):
    runs = np.array([_static_run(rng, 100) for _ in range(100)])
    assert runs[:, 99].mean() > runs[:, 4].mean()


def test_identical_components_share_projector(rng):
    s = _state(M=4, K=3)
    for _ in range(10):
        f = channel.crandn(rng, 4)
        s = estimator.update(s, channel.crandn(rng, 4), 1.0, np.column_stack([f, f, f]),
                             channel.crandn(rng, 4))
    F_est, _ = estimator.estimate_all(s)
    np.testing.assert_allclose(F_est[:, 0], F_est[:, 1], atol=1e-12)
    np.testing.assert_allclose(F_est[:, 0], F_est[:, 2], atol=1e-12)


def test_estimate_all_requires_update():
    with pytest.raises(ValueError):
        estimator.estimate_all(_state())


def test_channel_gains_recover_norm(rng):
    M = 6
    f = channel.crandn(rng, M)
    s = estimator.EstimatorState.initial(M, 1, 0.5)
    nf = np.sum(np.abs(f) ** 2)
    for _ in range(2000):
        f_hat = f + channel.crandn(rng, M, 0.2 * nf)
        s = estimator.update(s, np.zeros(M), 0.0, f_hat[:, None], f)
    f_gain, g_gain = estimator.channel_gains(s)
    assert f_gain[0] == pytest.approx(np.sqrt(nf), rel=0.05)
    assert g_gain == pytest.approx(np.sqrt(nf), rel=1e-10)
