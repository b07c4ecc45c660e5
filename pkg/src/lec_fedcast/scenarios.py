"""Experiment drivers: Stand-Alone / Centralized / Federated comparison,
strategy sweep, community surplus forecasting, seasonal statistics, and
consumer-percentage composition sweeps.

All three scenarios share the same seeded initial model and per-user window
sets, so their test errors differ only because of how training is organized.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .datasynth import (
    DAYS_PER_SEASON,
    FEATURE_COLUMNS,
    HOURS_PER_DAY,
    SEASON_NAMES,
    TARGET_COLUMN,
    LecConfig,
    ProfileBank,
    UserDataset,
    UserSeries,
    build_lec,
    split_and_windowize,
    windowize,
)
from .federated import (
    AggregationStrategy,
    ClientState,
    SessionReport,
    default_strategy,
    evaluate_params,
    make_client,
    run_session,
    train_epochs,
)
from .seeding import derive_seed, make_rng


@dataclass(frozen=True)
class EvalConfig:
    """Model, training, and windowing knobs shared by every scenario."""

    rounds: int = 10
    local_epochs: int = 1
    batch_size: int = 32
    lr: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    n_layers: int = 3
    hidden: int = 50
    t_in: int = 24
    horizon: int = 24
    stride: int = 24
    train_fraction: float = 0.8
    participation: float = 1.0
    threads: int = 1
    seed: int = 0

    @property
    def model_shape(self) -> nn.ModelShape:
        return nn.ModelShape(n_layers=self.n_layers, hidden=self.hidden,
                             features=len(FEATURE_COLUMNS), horizon=self.horizon)

    @property
    def total_epochs(self) -> int:
        """Epoch budget for the non-federated scenarios.

        One federated round corresponds to one epoch of the Stand-Alone and
        Centralized baselines; ``local_epochs`` only sets how much work a
        client does inside a round.
        """
        return self.rounds


def build_user_datasets(users: list[UserSeries], cfg: EvalConfig) -> list[UserDataset]:
    return [split_and_windowize(u, cfg.t_in, cfg.horizon, cfg.stride,
                                cfg.train_fraction)
            for u in sorted(users, key=lambda u: u.user_id)]


def initial_params(cfg: EvalConfig) -> np.ndarray:
    return nn.flatten(nn.init_model(cfg.model_shape, make_rng(cfg.seed, "init")))


def _batch_seed(cfg: EvalConfig, *ids: int) -> int:
    return derive_seed(cfg.seed, "batching", *ids)


def make_clients(datasets: list[UserDataset], cfg: EvalConfig,
                 params0: np.ndarray) -> list[ClientState]:
    return [
        make_client(ds.user_id, ds, cfg.model_shape, params0,
                    batch_seed=_batch_seed(cfg, ds.user_id),
                    batch_size=cfg.batch_size, lr=cfg.lr, beta1=cfg.adam_beta1,
                    beta2=cfg.adam_beta2, epsilon=cfg.adam_eps)
        for ds in datasets
    ]


def window_fingerprint(datasets: list[UserDataset]) -> str:
    """Order-independent hash of the training-window multiset."""
    digests = []
    for ds in datasets:
        for k in range(ds.n_train):
            h = hashlib.sha256()
            h.update(np.ascontiguousarray(ds.train_x[k]).tobytes())
            h.update(np.ascontiguousarray(ds.train_y[k]).tobytes())
            digests.append(h.digest())
    outer = hashlib.sha256()
    for d in sorted(digests):
        outer.update(d)
    return outer.hexdigest()


@dataclass
class ScenarioReport:
    """Per-round (or per-epoch) test errors for one training scenario."""

    scenario: str
    per_round_user_mse: list[dict[int, float]]
    train_losses: dict[int, list[float]] = field(default_factory=dict)
    session: SessionReport | None = None
    final_params: np.ndarray | dict[int, np.ndarray] | None = None

    @property
    def final_user_mse(self) -> dict[int, float]:
        return self.per_round_user_mse[-1] if self.per_round_user_mse else {}

    @property
    def mean_mse(self) -> float:
        final = self.final_user_mse
        return float(np.mean(list(final.values()))) if final else float("nan")

    @property
    def mean_trace(self) -> list[float]:
        return [float(np.mean(list(r.values()))) for r in self.per_round_user_mse]


def _eval_all(params: np.ndarray, datasets: list[UserDataset],
              cfg: EvalConfig) -> dict[int, float]:
    shape = cfg.model_shape
    return {ds.user_id: evaluate_params(params, shape, ds.test_x, ds.test_y)
            for ds in datasets}


def run_standalone(users: list[UserSeries], cfg: EvalConfig,
                   datasets: list[UserDataset] | None = None) -> ScenarioReport:
    """One independent model per user (single-user communities)."""
    datasets = datasets or build_user_datasets(users, cfg)
    if not datasets:
        raise ValueError("run_standalone needs at least one user")
    params0 = initial_params(cfg)
    shape = cfg.model_shape

    per_round: list[dict[int, float]] = [dict() for _ in range(cfg.total_epochs)]
    train_losses: dict[int, list[float]] = {}
    final_params: dict[int, np.ndarray] = {}
    for ds in datasets:
        params = params0.copy()
        adam = nn.adam_init(shape.n_params(), lr=cfg.lr, beta1=cfg.adam_beta1,
                            beta2=cfg.adam_beta2, epsilon=cfg.adam_eps)
        rng = np.random.default_rng(_batch_seed(cfg, ds.user_id))
        losses: list[float] = []
        for epoch in range(cfg.total_epochs):
            params, adam, ep_loss = train_epochs(
                params, adam, rng, ds.train_x, ds.train_y, shape,
                epochs=1, batch_size=cfg.batch_size, client_id=ds.user_id)
            losses.extend(ep_loss)
            per_round[epoch][ds.user_id] = evaluate_params(
                params, shape, ds.test_x, ds.test_y)
        train_losses[ds.user_id] = losses
        final_params[ds.user_id] = params
    return ScenarioReport("standalone", per_round, train_losses,
                          final_params=final_params)


def run_centralized(users: list[UserSeries], cfg: EvalConfig,
                    datasets: list[UserDataset] | None = None) -> ScenarioReport:
    """One model on the concatenation of every user's training windows."""
    datasets = datasets or build_user_datasets(users, cfg)
    if not datasets:
        raise ValueError("run_centralized needs at least one user")
    params = initial_params(cfg)
    shape = cfg.model_shape

    train_x = np.concatenate([ds.train_x for ds in datasets])
    train_y = np.concatenate([ds.train_y for ds in datasets])
    adam = nn.adam_init(shape.n_params(), lr=cfg.lr, beta1=cfg.adam_beta1,
                        beta2=cfg.adam_beta2, epsilon=cfg.adam_eps)
    rng = np.random.default_rng(_batch_seed(cfg, *[ds.user_id for ds in datasets]))

    per_round: list[dict[int, float]] = []
    losses: list[float] = []
    for _ in range(cfg.total_epochs):
        params, adam, ep_loss = train_epochs(
            params, adam, rng, train_x, train_y, shape,
            epochs=1, batch_size=cfg.batch_size)
        losses.extend(ep_loss)
        per_round.append(_eval_all(params, datasets, cfg))
    return ScenarioReport("centralized", per_round, {-1: losses},
                          final_params=params)


def run_federated(users: list[UserSeries], cfg: EvalConfig,
                  strategy: AggregationStrategy | None = None,
                  datasets: list[UserDataset] | None = None) -> ScenarioReport:
    """Federated session under the given strategy (default FedProx mu=0.01)."""
    strategy = strategy or default_strategy("fedprox")
    datasets = datasets or build_user_datasets(users, cfg)
    clients = make_clients(datasets, cfg, initial_params(cfg))
    session = run_session(clients, strategy, cfg.rounds, cfg.local_epochs,
                          initial_params(cfg), participation=cfg.participation,
                          seed=cfg.seed, threads=cfg.threads)
    per_round = [dict(r.test_mse) for r in session.rounds]
    train_losses = {cid: [loss for r in session.rounds
                          for loss in r.train_losses.get(cid, [])]
                    for cid in sorted(c.client_id for c in clients)}
    return ScenarioReport(f"federated:{strategy.name}", per_round,
                          train_losses, session=session,
                          final_params=session.final_params)


def compare_strategies(users: list[UserSeries], cfg: EvalConfig,
                       strategies: list[AggregationStrategy] | None = None,
                       ) -> dict[str, ScenarioReport]:
    """One federated session per strategy from bit-identical initial state."""
    if strategies is None:
        strategies = [default_strategy(name) for name in
                      ("fedavg", "fedmedian", "fedprox", "fedadam", "fedyogi")]
    datasets = build_user_datasets(users, cfg)
    out: dict[str, ScenarioReport] = {}
    for strategy in strategies:
        # fresh clients per strategy: same seeds, same init -> fair comparison
        out[strategy.name] = run_federated(users, cfg, strategy, datasets=datasets)
    return out


# --- community surplus and seasonal statistics ---------------------------------

@dataclass
class SurplusForecast:
    """Hourly community net energy: truth, prediction, per-user contributions."""

    hours: np.ndarray
    true: np.ndarray
    predicted: np.ndarray
    user_ids: list[int]
    per_user_true: np.ndarray
    per_user_pred: np.ndarray


def community_surplus(params: np.ndarray | dict[int, np.ndarray],
                      users: list[UserSeries], cfg: EvalConfig) -> SurplusForecast:
    """Tile non-overlapping 24h forecasts across each user-year and sum.

    ``params`` is either one global parameter vector or a per-user mapping
    (stand-alone models). Inputs are standardized with each user's training
    statistics; predictions are mapped back to kWh before summation.
    """
    users = sorted(users, key=lambda u: u.user_id)
    if not users:
        raise ValueError("community_surplus needs at least one user")
    shape = cfg.model_shape

    per_user_pred = []
    per_user_true = []
    hours = None
    for user in users:
        ds = split_and_windowize(user, cfg.t_in, cfg.horizon, cfg.stride,
                                 cfg.train_fraction)
        rows_std = ds.standardizer.transform(user.features)
        x, _ = windowize(rows_std, cfg.t_in, cfg.horizon, stride=cfg.horizon)
        p = params[user.user_id] if isinstance(params, dict) else params
        model = nn.unflatten(p, shape)
        preds = []
        for start in range(0, len(x), 512):
            block, _ = nn.forward_batch(model, x[start:start + 512])
            preds.append(block)
        pred_std = np.concatenate(preds).ravel()
        pred_kwh = ds.standardizer.inverse_target(pred_std)

        covered = np.arange(cfg.t_in, cfg.t_in + pred_kwh.size)
        if hours is None:
            hours = covered
        elif not np.array_equal(hours, covered):
            raise ValueError(f"user {user.user_id} covers a different hour range")
        per_user_pred.append(pred_kwh)
        per_user_true.append(user.features[covered, TARGET_COLUMN])

    per_user_pred = np.stack(per_user_pred)
    per_user_true = np.stack(per_user_true)
    return SurplusForecast(
        hours=hours,
        true=per_user_true.sum(axis=0),
        predicted=per_user_pred.sum(axis=0),
        user_ids=[u.user_id for u in users],
        per_user_true=per_user_true,
        per_user_pred=per_user_pred,
    )


@dataclass
class SeasonalStats:
    """Box-plot numbers for one season's value distribution."""

    season: int
    n: int
    q1: float
    median: float
    q3: float
    outliers: np.ndarray

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    @property
    def lo_whisker(self) -> float:
        return self.q1 - 1.5 * self.iqr

    @property
    def hi_whisker(self) -> float:
        return self.q3 + 1.5 * self.iqr

    @property
    def season_name(self) -> str:
        return SEASON_NAMES[self.season]


def boxplot_stats(values: np.ndarray) -> tuple[float, float, float, np.ndarray]:
    """Quartiles by linear interpolation; outliers via the 1.5 IQR rule."""
    values = np.asarray(values, dtype=float)
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    outliers = values[(values < lo) | (values > hi)]
    return float(q1), float(median), float(q3), outliers


def seasonal_boxplot(values: np.ndarray, hours: np.ndarray) -> dict[int, SeasonalStats]:
    """Group an hourly series by season block and compute box-plot stats."""
    values = np.asarray(values, dtype=float)
    hours = np.asarray(hours)
    if values.shape != hours.shape:
        raise ValueError(f"values/hours length mismatch: {values.shape} vs {hours.shape}")
    seasons = (hours // HOURS_PER_DAY) // DAYS_PER_SEASON
    stats: dict[int, SeasonalStats] = {}
    for season in range(4):
        mask = seasons == season
        if not np.any(mask):
            continue
        sel = values[mask]
        q1, median, q3, outliers = boxplot_stats(sel)
        stats[season] = SeasonalStats(season, int(sel.size), q1, median, q3, outliers)
    return stats


# --- composition sweep ----------------------------------------------------------

@dataclass
class SweepEntry:
    consumer_fraction: float
    forecast: SurplusForecast
    stats_pred: dict[int, SeasonalStats]
    stats_true: dict[int, SeasonalStats]

    @property
    def spring_winter_iqr_ratio(self) -> float:
        winter = self.stats_pred[0].iqr
        return self.stats_pred[1].iqr / winter if winter > 0 else float("inf")


@dataclass
class SweepResult:
    train_report: ScenarioReport
    entries: list[SweepEntry]


def composition_sweep(fractions: list[float], bank: ProfileBank,
                      train_config: LecConfig, cfg: EvalConfig,
                      strategy: AggregationStrategy | None = None,
                      n_test_users: int = 100,
                      trained_params: np.ndarray | None = None) -> SweepResult:
    """Train once on the 50/50 training LEC, then score test LECs per fraction.

    Test communities are generated from seeds disjoint from the training LEC
    (derived from the master seed and the fraction percentage).
    """
    strategy = strategy or default_strategy("fedprox")
    if trained_params is None:
        train_users = build_lec(train_config, bank)
        train_report = run_federated(train_users, cfg, strategy)
        trained_params = train_report.session.final_params
    else:
        train_report = ScenarioReport(f"federated:{strategy.name}", [])

    entries = []
    for fraction in fractions:
        pct = int(round(fraction * 100))
        test_config = LecConfig(
            n_users=n_test_users,
            consumer_fraction=fraction,
            prosumer_mix=train_config.prosumer_mix,
            consumer_mix=train_config.consumer_mix,
            seed=derive_seed(cfg.seed, "dataset-test", pct),
            ewma_window_hours=train_config.ewma_window_hours,
        )
        test_users = build_lec(test_config, bank)
        forecast = community_surplus(trained_params, test_users, cfg)
        entries.append(SweepEntry(
            consumer_fraction=fraction,
            forecast=forecast,
            stats_pred=seasonal_boxplot(forecast.predicted, forecast.hours),
            stats_true=seasonal_boxplot(forecast.true, forecast.hours),
        ))
    return SweepResult(train_report, entries)
