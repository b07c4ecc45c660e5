"""Run configuration: a sectioned key/value file (INI) with strict validation.

Unknown sections or keys are rejected so typos cannot silently fall back to
defaults. Defaults match the documented module defaults (Adam 1e-3/0.9/0.999,
3x50 LSTM, 24h window and horizon, EWMA 120h, FedProx mu=0.01, 10 rounds).
"""

from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field

from .datasynth import LecConfig
from .federated import STRATEGY_NAMES, AggregationStrategy
from .scenarios import EvalConfig


class ConfigError(Exception):
    """Invalid, unknown, or missing configuration."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_names(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


@dataclass
class DatasetSection:
    n_users: int = 10
    consumer_fraction: float = 0.5
    prosumer_mix: tuple[float, ...] = (0.34, 0.33, 0.33)
    consumer_mix: tuple[float, ...] = (0.5, 0.5)
    ewma_window_hours: int = 120
    profiles: str = ""
    variants_per_cell: int = 3


@dataclass
class ModelSection:
    layers: int = 3
    hidden: int = 50
    window: int = 24
    horizon: int = 24


@dataclass
class TrainingSection:
    lr: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    local_epochs: int = 1
    rounds: int = 10
    train_fraction: float = 0.8
    stride: int = 8
    participation: float = 1.0


@dataclass
class StrategySection:
    name: str = "fedprox"
    mu: float = 0.01
    eta: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.99
    tau: float = 1e-3


@dataclass
class RunSection:
    seed: int = 42
    out: str = "runs/out"
    scenario: str = "federated"
    strategies: tuple[str, ...] = STRATEGY_NAMES
    fractions: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75)
    test_users: int = 100
    checkpoint: str = ""
    plot_stride: int = 1
    threads: int = 1


_SECTION_TYPES = {
    "dataset": DatasetSection,
    "model": ModelSection,
    "training": TrainingSection,
    "strategy": StrategySection,
    "run": RunSection,
}

_PARSERS = {
    int: lambda s: int(s.strip()),
    float: lambda s: float(s.strip()),
    str: lambda s: s.strip(),
    bool: _parse_bool,
}


@dataclass
class RunConfig:
    dataset: DatasetSection = field(default_factory=DatasetSection)
    model: ModelSection = field(default_factory=ModelSection)
    training: TrainingSection = field(default_factory=TrainingSection)
    strategy: StrategySection = field(default_factory=StrategySection)
    run: RunSection = field(default_factory=RunSection)

    def validate(self) -> None:
        d, m, t, s, r = self.dataset, self.model, self.training, self.strategy, self.run
        if d.n_users <= 0:
            raise ConfigError("dataset.n_users must be positive")
        if not 0.0 <= d.consumer_fraction <= 1.0:
            raise ConfigError("dataset.consumer_fraction must be in [0, 1]")
        if len(d.prosumer_mix) != 3 or len(d.consumer_mix) != 2:
            raise ConfigError("dataset.prosumer_mix needs 3 weights, consumer_mix 2")
        for name, mix in (("prosumer_mix", d.prosumer_mix),
                          ("consumer_mix", d.consumer_mix)):
            if any(w < 0 for w in mix) or abs(sum(mix) - 1.0) > 1e-9:
                raise ConfigError(f"dataset.{name} must be non-negative and sum to 1")
        if d.ewma_window_hours < 1:
            raise ConfigError("dataset.ewma_window_hours must be >= 1")
        if d.profiles and not os.path.isfile(d.profiles):
            raise ConfigError(f"dataset.profiles file not found: {d.profiles}")
        if d.variants_per_cell < 1:
            raise ConfigError("dataset.variants_per_cell must be >= 1")
        if m.layers < 1 or m.hidden < 1 or m.window < 1 or m.horizon < 1:
            raise ConfigError("model dimensions must be positive")
        if t.lr <= 0 or t.batch_size < 1 or t.local_epochs < 0 or t.rounds < 0:
            raise ConfigError("training.lr/batch_size/local_epochs/rounds out of range")
        if not 0.0 < t.train_fraction < 1.0:
            raise ConfigError("training.train_fraction must be in (0, 1)")
        if t.stride < 1:
            raise ConfigError("training.stride must be >= 1")
        if not 0.0 < t.participation <= 1.0:
            raise ConfigError("training.participation must be in (0, 1]")
        if s.name not in STRATEGY_NAMES:
            raise ConfigError(f"strategy.name must be one of {STRATEGY_NAMES}")
        if s.mu < 0 or s.eta <= 0 or s.tau <= 0:
            raise ConfigError("strategy.mu must be >= 0; eta and tau positive")
        if r.scenario not in ("standalone", "centralized", "federated"):
            raise ConfigError("run.scenario must be standalone, centralized, "
                              "or federated")
        for name in r.strategies:
            if name not in STRATEGY_NAMES:
                raise ConfigError(f"run.strategies contains unknown strategy {name!r}")
        if not r.strategies:
            raise ConfigError("run.strategies must not be empty")
        for frac in r.fractions:
            if not 0.0 <= frac <= 1.0:
                raise ConfigError("run.fractions entries must be in [0, 1]")
        if not r.fractions:
            raise ConfigError("run.fractions must not be empty")
        if r.test_users <= 0:
            raise ConfigError("run.test_users must be positive")
        if r.plot_stride < 1:
            raise ConfigError("run.plot_stride must be >= 1")
        if r.threads < 1:
            raise ConfigError("run.threads must be >= 1")
        if r.checkpoint and not os.path.isfile(r.checkpoint):
            raise ConfigError(f"run.checkpoint file not found: {r.checkpoint}")

    # adapters into the library-facing configs

    def lec_config(self, n_users: int | None = None,
                   consumer_fraction: float | None = None,
                   seed: int | None = None) -> LecConfig:
        d = self.dataset
        return LecConfig(
            n_users=n_users if n_users is not None else d.n_users,
            consumer_fraction=(consumer_fraction if consumer_fraction is not None
                               else d.consumer_fraction),
            prosumer_mix=tuple(d.prosumer_mix),
            consumer_mix=tuple(d.consumer_mix),
            seed=seed if seed is not None else self.run.seed,
            ewma_window_hours=d.ewma_window_hours,
        )

    def eval_config(self, threads: int | None = None) -> EvalConfig:
        m, t = self.model, self.training
        return EvalConfig(
            rounds=t.rounds, local_epochs=t.local_epochs, batch_size=t.batch_size,
            lr=t.lr, adam_beta1=t.adam_beta1, adam_beta2=t.adam_beta2,
            adam_eps=t.adam_eps, n_layers=m.layers, hidden=m.hidden,
            t_in=m.window, horizon=m.horizon, stride=t.stride,
            train_fraction=t.train_fraction, participation=t.participation,
            threads=threads if threads is not None else self.run.threads,
            seed=self.run.seed,
        )

    def aggregation_strategy(self, name: str | None = None) -> AggregationStrategy:
        s = self.strategy
        return AggregationStrategy(name=name or s.name, mu=s.mu, eta=s.eta,
                                   beta1=s.beta1, beta2=s.beta2, tau=s.tau)

    def to_dict(self) -> dict:
        return {name: asdict(getattr(self, name)) for name in _SECTION_TYPES}


def _coerce(section: str, key: str, text: str, default) -> object:
    try:
        if key in ("prosumer_mix", "consumer_mix", "fractions"):
            return _parse_floats(text)
        if key == "strategies":
            return _parse_names(text)
        return _PARSERS[type(default)](text)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {text!r} ({exc})") from None


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    """Parse and validate an INI run config; CLI overrides are applied last."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None

    config = RunConfig()
    for section_name in parser.sections():
        if section_name not in _SECTION_TYPES:
            raise ConfigError(f"{path}: unknown section [{section_name}]")
        target = getattr(config, section_name)
        for key, text in parser.items(section_name):
            if not hasattr(target, key):
                raise ConfigError(f"{path}: unknown key {key!r} in [{section_name}]")
            default = getattr(target, key)
            setattr(target, key, _coerce(section_name, key, text, default))

    for dotted, value in (overrides or {}).items():
        section_name, key = dotted.split(".", 1)
        setattr(getattr(config, section_name), key, value)

    config.validate()
    return config
