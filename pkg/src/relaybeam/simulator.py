"""Monte Carlo driver comparing CCSP against perfect-CSI and naive beamformers."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import airlink, beamformer, channel, estimator
from .config import ConfigError, ScenarioConfig, parse_grid
from .estimator import DegenerateProjectionError

ALGORITHMS = ("ccsp", "perfect_csi", "naive_mismatched")


class SimulationError(RuntimeError):
    """Numerical failure inside a trial, tagged with where it happened."""

    def __init__(self, message, trial=None, snapshot=None):
        super().__init__(message)
        self.trial = trial
        self.snapshot = snapshot

    def __str__(self):
        where = ", ".join(f"{k} {v}" for k, v in
                          (("trial", self.trial), ("snapshot", self.snapshot)) if v is not None)
        msg = super().__str__()
        return f"{where}: {msg}" if where else msg


@dataclass
class TrialResult:
    """Per-snapshot linear SINR of each algorithm for one trial."""

    sinr: dict  # algorithm -> (snapshots,) linear SINR
    max_power_ratio: float  # max over solves of w^H D w / P_T, D as solved with
    degenerate_snapshots: list = field(default_factory=list)


@dataclass
class SinrReport:
    axis_name: str
    axis_values: np.ndarray
    sinr_db: dict  # algorithm -> (n_points,) dB of trial-averaged linear SINR
    trial_sinr: dict  # algorithm -> (n_points, trials) linear SINR
    metadata: dict
    algorithms: tuple = ALGORITHMS

    def standard_error(self, algorithm):
        """Standard error of the trial-averaged linear SINR at each point."""
        x = self.trial_sinr[algorithm]
        if x.shape[1] < 2:
            return np.full(x.shape[0], np.nan)
        return x.std(axis=1, ddof=1) / np.sqrt(x.shape[1])


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for trial ``trial``.

    Equal to the ``trial``-th child of ``SeedSequence(seed).spawn(...)``.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


class _RunningNorms:
    """Frobenius norms of the running true-channel covariances."""

    def __init__(self, M, K):
        self.i = 0
        self.R_f = np.zeros((K, M, M), complex)
        self.R_g = np.zeros((M, M), complex)

    def update(self, F, g):
        self.i += 1
        a = (self.i - 1) / self.i
        self.R_f = a * self.R_f + np.einsum("mk,nk->kmn", F, F.conj()) / self.i
        self.R_g = a * self.R_g + np.outer(g, g.conj()) / self.i
        return (np.linalg.norm(self.R_f, "fro", axis=(1, 2)),
                np.linalg.norm(self.R_g, "fro"))


def _static_norms(F, g):
    # ||f f^H||_F = ||f||^2
    return np.sum(np.abs(F) ** 2, axis=0), float(np.sum(np.abs(g) ** 2))


def run_trial(config: ScenarioConfig, rng: np.random.Generator) -> TrialResult:
    """Run ``config.snapshots`` snapshots of one trial.

    The geometry is fixed for the trial. Small-scale fading is drawn once
    per trial unless ``config.block_fading`` is set, in which case it is
    redrawn every snapshot. CSI errors are always fresh per snapshot.
    """
    M, K, n_snap = config.M, config.K, config.snapshots
    p, P_n, P_T = config.source_powers, config.P_n, config.P_T
    literal = config.paper_literal_eq33

    geometry = channel.sample_geometry(config, rng)
    est = estimator.EstimatorState.initial(M, K, config.epsilon_max, config.n_components)
    running = _RunningNorms(M, K) if config.block_fading else None
    out = {a: np.empty(n_snap) for a in ALGORITHMS}
    max_ratio = 0.0
    degenerate = []
    w_prev = None
    last_estimate = None
    F = g = None

    i = 0
    try:
        for i in range(n_snap):
            if F is None or config.block_fading:
                F, g = channel.sample_channels(geometry, config, rng)
                norms = running.update(F, g) if running else _static_norms(F, g)
            cs = channel.inject_mismatch(F, g, config, norms[0], norms[1], rng)

            if w_prev is None:
                naive0 = airlink.exact_stats(cs.F_mismatched, cs.g_mismatched, p, P_n)
                D0 = beamformer.perturbed_stats(naive0, config.epsilon_max / 2).D
                w_boot = beamformer.uniform_weights(D0, P_T)
                w_prev = w_boot

            b = airlink.qpsk_symbols(rng, K)
            nu = channel.crandn(rng, M, P_n)
            n = channel.crandn(rng, (), P_n)
            x = airlink.transmit_hop(F, b, p, nu)
            y = airlink.relay_forward(airlink.relay_gains(w_prev), x)
            z = airlink.destination_receive(g, y, n)
            est = estimator.update(est, x, z, cs.F_mismatched, cs.g_mismatched)

            try:
                F_est, g_est = estimator.estimate_all(est)
                gains = (estimator.channel_gains(est) if config.restore_gains
                         else (None, None))
                last_estimate = (F_est, g_est, gains)
            except DegenerateProjectionError:
                degenerate.append(i)
            if last_estimate is None:
                w_ccsp = w_boot
            else:
                F_est, g_est, (f_gains, g_gain) = last_estimate
                inputs = beamformer.estimated_stats(F_est, g_est, p, P_n, P_T, f_gains, g_gain)
                sol = beamformer.solve_max_sinr(inputs, literal)
                max_ratio = max(max_ratio, sol.transmit_power / P_T)
                w_ccsp = sol.w

            true_stats = airlink.exact_stats(F, g, p, P_n)
            out["ccsp"][i] = airlink.evaluate_sinr(w_ccsp, true_stats)

            perfect = beamformer.solve_max_sinr(
                beamformer.SolveInputs.from_stats(true_stats, P_T, np.sqrt(p[0]) * F[:, 0] * g),
                literal)
            out["perfect_csi"][i] = airlink.evaluate_sinr(perfect.w, true_stats)

            Fh, gh = cs.F_mismatched, cs.g_mismatched
            naive_stats = airlink.exact_stats(Fh, gh, p, P_n)
            naive = beamformer.solve_max_sinr(
                beamformer.SolveInputs.from_stats(naive_stats, P_T, np.sqrt(p[0]) * Fh[:, 0] * gh),
                literal)
            out["naive_mismatched"][i] = airlink.evaluate_sinr(naive.w, true_stats)

            max_ratio = max(max_ratio, perfect.transmit_power / P_T, naive.transmit_power / P_T)
            w_prev = w_ccsp
            if not all(np.isfinite(out[a][i]) for a in ALGORITHMS):
                raise FloatingPointError("non-finite SINR")
    except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
        raise SimulationError(f"{type(exc).__name__}: {exc}", snapshot=i + 1) from exc

    return TrialResult(out, max_ratio, degenerate)


def _run_trials(args):
    config, trials = args
    results = []
    for t in trials:
        try:
            results.append(run_trial(config, trial_rng(config.seed, t)))
        except SimulationError as exc:
            exc.trial = t
            raise
    return results


def default_workers() -> int:
    env = os.environ.get("RELAYBEAM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_trials(config: ScenarioConfig, workers=None) -> list[TrialResult]:
    """All trials of ``config``, in trial order regardless of ``workers``."""
    workers = default_workers() if workers is None else max(1, int(workers))
    trials = list(range(config.trials))
    if workers == 1 or config.trials == 1:
        return _run_trials((config, trials))
    chunks = [trials[w::workers] for w in range(workers)]
    results = [None] * config.trials
    with ProcessPoolExecutor(workers) as pool:
        for chunk, res in zip(chunks, pool.map(_run_trials, [(config, c) for c in chunks])):
            for t, r in zip(chunk, res):
                results[t] = r
    return results


def _readout(result: TrialResult, algorithm, mode):
    s = result.sinr[algorithm]
    return s[-1] if mode == "final" else s.mean()


def run_experiment(config: ScenarioConfig, axis=None, grid=None, workers=None,
                   keep_trials=False) -> SinrReport:
    """Sweep one axis and average linear SINR over trials.

    Parameters
    ----------
    config : ScenarioConfig
    axis : {"pt_dbw", "snr_db", "snapshots"}, optional
        Defaults to ``config.sweep_axis``.
    grid : array_like or str, optional
        Sweep values; defaults to ``config.sweep_grid``. For the snapshot
        axis the grid selects 1-based snapshot indices (all when empty).
        Every sweep point reuses the same per-trial random streams.
    workers : int, optional
        Process count; defaults to ``RELAYBEAM_THREADS`` or the CPU count.
    keep_trials : bool
        Attach the raw :class:`TrialResult` list(s) to ``metadata["trials"]``.
    """
    axis = axis or config.sweep_axis
    if grid is None:
        grid = config.sweep_grid
    if isinstance(grid, str):
        grid = parse_grid(grid) if grid.strip() else None
    if grid is not None:
        grid = np.atleast_1d(np.asarray(grid, dtype=float))
        if grid.size == 0:
            raise ConfigError("sweep_grid", "empty sweep grid")

    raw = []
    if axis == "snapshots":
        results = run_trials(config, workers)
        raw.append(results)
        idx = (np.arange(1, config.snapshots + 1) if grid is None
               else grid.astype(int))
        if np.any(idx < 1) or np.any(idx > config.snapshots):
            raise ConfigError("sweep_grid", f"snapshot indices must lie in [1, {config.snapshots}]")
        trial_sinr = {a: np.array([r.sinr[a][idx - 1] for r in results]).T
                      for a in ALGORITHMS}
        values = idx.astype(float)
    elif axis in ("pt_dbw", "snr_db"):
        if grid is None:
            raise ConfigError("sweep_grid", f"axis {axis!r} needs a grid")
        per_point = []
        for v in grid:
            results = run_trials(config.replace(**{axis: float(v)}), workers)
            raw.append(results)
            per_point.append(results)
        trial_sinr = {a: np.array([[_readout(r, a, config.sinr_readout) for r in res]
                                   for res in per_point])
                      for a in ALGORITHMS}
        values = grid
    else:
        raise ConfigError("sweep_axis", f"unknown sweep axis {axis!r}")

    sinr_db = {a: 10 * np.log10(trial_sinr[a].mean(axis=1)) for a in ALGORITHMS}
    metadata = {"config": config.to_dict(), "seed": config.seed, "axis": axis}
    metadata["max_power_ratio"] = max(r.max_power_ratio for res in raw for r in res)
    if keep_trials:
        metadata["trials"] = raw
    return SinrReport(axis, values, sinr_db, trial_sinr, metadata)
