"""Output SINR against SNR when one interferer dominates.

INR is raised to 20 dB and the two interferers are split 10:1 while
keeping their total power. P_T = 1 dBW and epsilon_max = 0.2.

    python demos/fig5_snr_sweep.py --trials 20
"""

from _common import demo_config, print_table

from relaybeam.simulator import run_experiment

config, workers = demo_config("fig5.cfg", __doc__.splitlines()[0])
p = config.source_powers
print(f"source powers (W): desired {p[0]:.3g}, interferers {p[1]:.3g} and {p[2]:.3g}")
print_table(run_experiment(config, workers=workers))
