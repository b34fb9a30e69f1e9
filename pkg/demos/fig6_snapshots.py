"""How CCSP improves as snapshots accumulate.

The cross-correlation vector and the mismatched-channel covariances are
running averages, so the projected channel estimates sharpen over time.
The baselines use only the current snapshot, so they do not improve.

    python demos/fig6_snapshots.py --trials 20
"""

from _common import demo_config, print_table

from relaybeam.simulator import run_experiment

config, workers = demo_config("fig6.cfg", __doc__.splitlines()[0])
report = run_experiment(config, grid=[1, 2, 5, 10, 20, 50, 100], workers=workers)
print_table(report)
se = report.standard_error("ccsp")
print(f"\nccsp relative standard error at the last snapshot: "
      f"{se[-1] / report.trial_sinr['ccsp'][-1].mean():.1%}")
