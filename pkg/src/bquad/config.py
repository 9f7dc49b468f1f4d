"""Experiment-config parsing (flat TOML key-value files).

Recognized keys::

    kernels = ["se", "matern32"]        # config names, see kernels.CONFIG_NAMES
    samplers = ["legendre", "random"]   # random | lhs | sobol | legendre | grid
    family = "fourier"                  # fourier | brownian_kl
    T = 10                              # integrands per family
    n_min = 2
    n_max = 30
    n_step = 1
    seed = 0
    output = "scores.csv"
    fail_threshold = 0                  # exit code 3 if exceeded

    [nugget]
    fixed_a = 1e-10
    fixed_b = 1e-8
    ladder = [0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2]

    [ml]
    restarts = 3
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .bench import ExperimentConfig
from .gp import NuggetPolicy


class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


def nugget_from_dict(d: dict) -> NuggetPolicy:
    return NuggetPolicy(
        fixed_a=float(d.get("fixed_a", 1e-10)),
        fixed_b=float(d.get("fixed_b", 1e-8)),
        dynamic_multipliers=tuple(d.get("ladder",
                                        (0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2))))


def load_experiment_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        return ExperimentConfig(
            kernels=tuple(raw["kernels"]),
            samplers=tuple(raw["samplers"]),
            family=raw.get("family", "fourier"),
            T=int(raw.get("T", 10)),
            n_min=int(raw.get("n_min", 2)),
            n_max=int(raw.get("n_max", 30)),
            n_step=int(raw.get("n_step", 1)),
            seed=int(raw.get("seed", 0)),
            nugget=nugget_from_dict(raw.get("nugget", {})),
            ml_restarts=int(raw.get("ml", {}).get("restarts", 3)),
            output_path=str(raw.get("output", "scores.csv")),
            fail_threshold=int(raw.get("fail_threshold", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config {path!r}: {exc}") from exc
