"""Shared helpers for the demo scripts."""

import argparse
import os

from relaybeam.config import load_config

HERE = os.path.dirname(os.path.abspath(__file__))


def demo_config(name, description):
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--trials", type=int, help="override the trial count (quick look: 20)")
    parser.add_argument("--workers", type=int)
    args = parser.parse_args()
    config = load_config(os.path.join(HERE, "configs", name))
    if args.trials:
        config = config.replace(trials=args.trials)
    return config, args.workers


def print_table(report):
    algs = report.algorithms
    print(f"{report.axis_name:>10} " + " ".join(f"{a:>17}" for a in algs))
    for j, v in enumerate(report.axis_values):
        print(f"{v:>10g} " + " ".join(f"{report.sinr_db[a][j]:>14.2f} dB" for a in algs))
