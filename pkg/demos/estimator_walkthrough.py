"""Step through the channel estimator on one static link.

A single desired source (K = 1) sends through M relays. Each snapshot the
relays see a fresh mismatched copy of the true channel. We watch the
alignment |<f_est, f/||f||>| of the projected estimate with the truth and
compare it with the alignment of the raw mismatched channel.
"""

import numpy as np

from relaybeam import airlink, channel, estimator

rng = np.random.default_rng(3)
M, eps_max, P_n = 8, 0.5, 0.01

f = channel.crandn(rng, M)
g = channel.crandn(rng, M)
f_unit = f / np.linalg.norm(f)
w = np.ones(M, complex)
state = estimator.EstimatorState.initial(M, 1, eps_max)

print(" snapshot  estimate  raw mismatched")
for i in range(1, 101):
    eps = eps_max * (1 - rng.random())
    f_hat = f + channel.crandn(rng, M, eps * np.sum(np.abs(f) ** 2))
    b = airlink.qpsk_symbols(rng, 1)
    x = airlink.transmit_hop(f[:, None], b, [1.0], channel.crandn(rng, M, P_n))
    z = airlink.destination_receive(g, airlink.relay_forward(airlink.relay_gains(w), x),
                                    channel.crandn(rng, (), P_n))
    state = estimator.update(state, x, z, f_hat[:, None], g)
    if i in (1, 2, 5, 10, 20, 50, 100):
        F_est, _ = estimator.estimate_all(state)
        est = abs(np.vdot(F_est[:, 0], f_unit))
        raw = abs(np.vdot(f_hat / np.linalg.norm(f_hat), f_unit))
        print(f"{i:>9}  {est:8.3f}  {raw:14.3f}")

C = estimator.error_spectrum(state.R_f_hat[0], eps_max)
lam = np.linalg.eigvalsh(C)[::-1]
print("\nerror spectrum eigenvalues:", np.array2string(lam, precision=2))
print("the leading one carries the channel direction, the flat rest is the loading floor")
