"""``relaybeam {run|sweep|validate}`` command-line front end.

Exit codes: 0 success, 1 validation failure, 2 bad configuration,
3 numerical failure during a run.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import os
import sys

from . import __version__
from .config import (ConfigError, ScenarioConfig, config_from_mapping, dump_config,
                     load_config, parse_grid)
from .simulator import SimulationError, SinrReport, run_experiment
from .validation import run_checks

CSV_HEADER = ("algorithm", "axis_name", "axis_value", "sinr_db", "trials", "snapshots", "seed")


def _fmt(x) -> str:
    return format(float(x), ".9g")


def report_csv(report: SinrReport, config: ScenarioConfig) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for alg in report.algorithms:
        for v, s in zip(report.axis_values, report.sinr_db[alg]):
            writer.writerow((alg, report.axis_name, _fmt(v), _fmt(s),
                             config.trials, config.snapshots, config.seed))
    return buf.getvalue()


def report_dat(report: SinrReport) -> str:
    """Whitespace-separated mirror of the CSV for gnuplot."""
    lines = ["# " + " ".join([report.axis_name] + [f"{a}_sinr_db" for a in report.algorithms])]
    for j, v in enumerate(report.axis_values):
        lines.append(" ".join([_fmt(v)] + [_fmt(report.sinr_db[a][j]) for a in report.algorithms]))
    return "\n".join(lines) + "\n"


def _split_overrides(extra):
    """``['--key', 'value', '--k2=v2']`` -> ``{'key': 'value', 'k2': 'v2'}``."""
    out = {}
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise ConfigError(tok, "expected --key value")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            try:
                value = next(it)
            except StopIteration:
                raise ConfigError(key, "missing value") from None
        out[key] = value
    return out


def _resolve_config(args, extra, **forced) -> ScenarioConfig:
    overrides = _split_overrides(extra)
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    overrides.update({k: str(v) for k, v in forced.items()})
    if args.config:
        if not os.path.exists(args.config):
            raise ConfigError("config", f"file not found: {args.config}")
        return load_config(args.config, overrides)
    return config_from_mapping(overrides)


def _write_outputs(out_dir, config, report, started):
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, name)
             for name in ("results.csv", "results.dat", "manifest.txt")}
    for name, text in (("results.csv", report_csv(report, config)),
                       ("results.dat", report_dat(report))):
        with open(paths[name], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
    header = [
        "# relaybeam run manifest; replay with: relaybeam run --config <this file>",
        f"# tool_version: {__version__}",
        f"# seed: {config.seed}",
        f"# started: {started}",
        f"# finished: {finished}",
        f"# outputs: {paths['results.csv']} {paths['results.dat']}",
    ]
    with open(paths["manifest.txt"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(header) + "\n" + dump_config(config))
    return paths


def _experiment(config, out_dir, workers):
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    try:
        report = run_experiment(config, workers=workers)
    except SimulationError as exc:
        print(f"relaybeam: numerical failure at {exc}", file=sys.stderr)
        return 3
    paths = _write_outputs(out_dir, config, report, started)
    print(f"wrote {paths['results.csv']}")
    return 0


def cmd_run(args, extra):
    config = _resolve_config(args, extra)
    return _experiment(config, args.out, args.workers)


def cmd_sweep(args, extra):
    if args.axis == "snapshots" and not args.grid:
        grid = ""
    else:
        values = parse_grid(args.grid or "", key="grid")
        grid = ",".join(repr(float(v)) for v in values)
    config = _resolve_config(args, extra, sweep_axis=args.axis, sweep_grid=grid)
    return _experiment(config, args.out, args.workers)


def cmd_validate(args, extra):
    config = _resolve_config(args, extra)
    results = run_checks(config, fault=args.inject_fault)
    width = max(len(r.name) for r in results)
    print(f"{'check':<{width}}  result  detail")
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("FAILED: " + ", ".join(failed))
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="relaybeam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat 'key = value' config file")
        p.add_argument("--seed", type=int)
        return p

    for name, helptext in (("run", "run the experiment described by the config"),
                           ("sweep", "sweep one axis over a grid")):
        p = common(sub.add_parser(name, help=helptext))
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--workers", type=int,
                       help="process count (default: RELAYBEAM_THREADS or CPU count)")
        if name == "sweep":
            p.add_argument("--axis", required=True, choices=("pt_dbw", "snr_db", "snapshots"))
            p.add_argument("--grid", help="start:stop:step or comma list")

    p = common(sub.add_parser("validate", help="run the invariant and oracle suite"))
    p.add_argument("--inject-fault", choices=("projector",), help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    handler = {"run": cmd_run, "sweep": cmd_sweep, "validate": cmd_validate}[args.command]
    try:
        return handler(args, extra)
    except ConfigError as exc:
        print(f"relaybeam: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
