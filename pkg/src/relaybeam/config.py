"""Scenario configuration and the flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from typing import Any

import numpy as np

SWEEP_AXES = ("pt_dbw", "snr_db", "snapshots")
REQUIRED_FILE_KEYS = ("M", "K")


class ConfigError(ValueError):
    """Invalid configuration. ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def lin2db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class ScenarioConfig:
    """All parameters of one Monte Carlo experiment.

    Powers follow a transmit-referenced convention: the desired source
    transmits ``desired_power`` watts, the noise power is
    ``desired_power / SNR`` and every interferer sits at ``INR * P_n``
    (or a sum-preserving unbalanced split when
    ``interferer_power_ratio != 1``).
    """

    M: int = 8
    K: int = 3
    snr_db: float = 10.0
    inr_db: float = 10.0
    interferer_power_ratio: float = 1.0
    desired_power: float = 1.0
    pt_dbw: float = 1.0
    epsilon_max: float = 0.5
    rho: float = 2.0
    L_db: float = 10.0
    sigma_s_db: float = 3.0
    snapshots: int = 100
    trials: int = 500
    n_components: int | str = 1
    g_mismatch: bool = False
    restore_gains: bool = False
    block_fading: bool = False
    paper_literal_eq33: bool = False
    sinr_readout: str = "final"
    sweep_axis: str = "snapshots"
    sweep_grid: str = ""
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.M < 1:
            raise ConfigError("M", "must be >= 1")
        if self.K < 1:
            raise ConfigError("K", "must be >= 1")
        if self.snapshots < 1:
            raise ConfigError("snapshots", "must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if not self.epsilon_max > 0:
            raise ConfigError("epsilon_max", "must be > 0")
        if not self.interferer_power_ratio > 0:
            raise ConfigError("interferer_power_ratio", "must be > 0")
        if not self.desired_power > 0:
            raise ConfigError("desired_power", "must be > 0")
        if not 0 <= self.sigma_s_db <= 9:
            raise ConfigError("sigma_s_db", "must lie in [0, 9] dB")
        if not np.isfinite(self.pt_dbw):
            raise ConfigError("pt_dbw", "must be finite")
        if isinstance(self.n_components, str):
            if self.n_components != "auto":
                raise ConfigError("n_components", "must be 'auto' or an integer")
        elif not 1 <= self.n_components <= self.M:
            raise ConfigError("n_components", f"must lie in [1, M={self.M}]")
        if self.sinr_readout not in ("final", "mean"):
            raise ConfigError("sinr_readout", "must be 'final' or 'mean'")
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError("sweep_axis", f"must be one of {SWEEP_AXES}")
        if self.sweep_grid:
            parse_grid(self.sweep_grid, key="sweep_grid")

    # -- derived quantities ---------------------------------------------
    @property
    def P_T(self) -> float:
        return float(db2lin(self.pt_dbw))

    @property
    def P_n(self) -> float:
        return self.desired_power / float(db2lin(self.snr_db))

    @property
    def source_powers(self) -> np.ndarray:
        """Per-source transmit powers, desired source first."""
        p = np.empty(self.K)
        p[0] = self.desired_power
        n_int = self.K - 1
        if n_int:
            total = n_int * float(db2lin(self.inr_db)) * self.P_n
            shares = np.ones(n_int)
            shares[0] = self.interferer_power_ratio
            p[1:] = total * shares / shares.sum()
        return p

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def parse_grid(text: str, key: str = "grid") -> np.ndarray:
    """Parse ``start:stop:step`` (inclusive stop) or a comma list."""
    text = text.strip()
    if not text:
        raise ConfigError(key, "empty grid")
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            if n < 1:
                raise ValueError
            return start + step * np.arange(n)
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(key, f"cannot parse grid {text!r}") from None
    if not values:
        raise ConfigError(key, "empty grid")
    return np.array(values)


_BOOL = {"true": True, "1": True, "yes": True, "on": True,
         "false": False, "0": False, "no": False, "off": False}


def _coerce(name: str, raw: str, default: Any) -> Any:
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            return _BOOL[raw.lower()]
        if name == "n_components":
            return raw if raw == "auto" else int(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except (KeyError, ValueError):
        raise ConfigError(name, f"cannot parse value {raw!r}") from None
    return raw


def config_from_mapping(values: dict[str, str], require=()) -> ScenarioConfig:
    """Build a config from string values, coercing by field type."""
    defaults = ScenarioConfig.__dataclass_fields__
    for key in require:
        if key not in values:
            raise ConfigError(key, "missing required key")
    kwargs = {}
    for key, raw in values.items():
        if key not in defaults:
            raise ConfigError(key, "unknown key")
        kwargs[key] = _coerce(key, raw, defaults[key].default)
    return ScenarioConfig(**kwargs)


def read_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


def load_config(path, overrides: dict[str, str] | None = None) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        values = read_config_text(fh.read())
    values.update(overrides or {})
    return config_from_mapping(values, require=REQUIRED_FILE_KEYS)


def dump_config(config: ScenarioConfig) -> str:
    """Serialize every field so the text loads back to an equal config."""
    lines = []
    for name, value in config.to_dict().items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"
