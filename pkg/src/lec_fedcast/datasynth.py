"""Synthetic LEC user-year generation and feature encoding.

Pipeline: a profile bank (one 24-hour production/consumption/temperature
profile set per season x day-kind x archetype cell) -> random day joining
into a 336-day year -> exported/imported channels -> EWMA smoothing ->
net-energy target -> 8-feature hourly rows -> standardized sliding windows.

The year is 336 days (day index 0-335) in four equal 84-day season blocks,
calendar order winter, spring, summer, autumn.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .seeding import derive_seed, make_rng

SEASON_NAMES = ("winter", "spring", "summer", "autumn")
DAY_KIND_NAMES = ("weekday", "weekend_holiday")
HOURS_PER_DAY = 24
DAYS_PER_SEASON = 84
DAYS_PER_YEAR = 4 * DAYS_PER_SEASON
HOURS_PER_YEAR = DAYS_PER_YEAR * HOURS_PER_DAY
WEEKDAY_PROB = 5.0 / 7.0

FEATURE_COLUMNS = (
    "day",
    "index",
    "temperature_median",
    "temperature_std",
    "season",
    "type",
    "type2",
    "sum_total_ewm_balance",
)
TARGET_COLUMN = FEATURE_COLUMNS.index("sum_total_ewm_balance")

PROFILE_CSV_HEADER = ("season", "day_kind", "archetype", "hour",
                      "production_kwh", "consumption_kwh", "temperature_c")


class ProfileError(ValueError):
    """Malformed or incomplete profile data."""


def season_of_day(day: int) -> int:
    return day // DAYS_PER_SEASON


@dataclass(frozen=True)
class UserArchetype:
    """One of the five user types; 3 and 4 are pure consumers."""

    type_id: int
    description: str

    @property
    def is_consumer(self) -> bool:
        return self.type_id in (3, 4)


ARCHETYPES = (
    UserArchetype(0, "prosumer with a PV system"),
    UserArchetype(1, "prosumer with PV and an energy storage system"),
    UserArchetype(2, "prosumer with PV and an electric vehicle"),
    UserArchetype(3, "consumer with an electric vehicle"),
    UserArchetype(4, "vanilla consumer"),
)
PROSUMER_TYPES = (0, 1, 2)
CONSUMER_TYPES = (3, 4)


@dataclass
class DayProfile:
    """24 hourly values per channel for one (season, day kind, archetype) cell."""

    season: int
    day_kind: int
    production: np.ndarray
    consumption: np.ndarray
    temperature: np.ndarray

    def validate(self) -> None:
        for name, ch in (("production", self.production),
                         ("consumption", self.consumption),
                         ("temperature", self.temperature)):
            if ch.shape != (HOURS_PER_DAY,):
                raise ProfileError(f"{name} channel has {ch.size} values, expected 24")
            if not np.all(np.isfinite(ch)):
                raise ProfileError(f"{name} channel contains non-finite values")
        if np.any(self.production < 0) or np.any(self.consumption < 0):
            raise ProfileError("production and consumption must be non-negative")


class ProfileBank:
    """Profiles indexed by (season, day_kind, type_id); every archetype present
    must cover all 8 season x day-kind cells."""

    def __init__(self, cells: dict[tuple[int, int, int], list[DayProfile]]):
        self.cells = cells
        self.archetype_ids = sorted({key[2] for key in cells})
        self._check_complete()

    def _check_complete(self) -> None:
        if not self.cells:
            raise ProfileError("profile bank is empty")
        for type_id in self.archetype_ids:
            for season in range(4):
                for kind in range(2):
                    key = (season, kind, type_id)
                    if not self.cells.get(key):
                        raise ProfileError(
                            "missing profiles for cell "
                            f"({SEASON_NAMES[season]}, {DAY_KIND_NAMES[kind]}, "
                            f"archetype {type_id})")

    def profiles(self, season: int, day_kind: int, type_id: int) -> list[DayProfile]:
        key = (season, day_kind, type_id)
        if key not in self.cells:
            raise ProfileError(
                f"no profiles for cell ({SEASON_NAMES[season]}, "
                f"{DAY_KIND_NAMES[day_kind]}, archetype {type_id})")
        return self.cells[key]

    def n_cells(self) -> int:
        return len(self.cells)


@dataclass
class LecConfig:
    """Composition and preprocessing knobs for one generated community.

    ``prosumer_mix`` weights types (0, 1, 2) and ``consumer_mix`` types (3, 4);
    each group must sum to 1. The consumer head-count is
    floor(n_users * consumer_fraction).
    """

    n_users: int
    consumer_fraction: float = 0.5
    prosumer_mix: tuple[float, float, float] = (0.34, 0.33, 0.33)
    consumer_mix: tuple[float, float] = (0.5, 0.5)
    seed: int = 0
    ewma_window_hours: int = 120

    def validate(self) -> None:
        if self.n_users <= 0:
            raise ValueError("n_users must be positive")
        if not 0.0 <= self.consumer_fraction <= 1.0:
            raise ValueError("consumer_fraction must be in [0, 1]")
        for name, mix in (("prosumer_mix", self.prosumer_mix),
                          ("consumer_mix", self.consumer_mix)):
            if any(w < 0 for w in mix) or abs(sum(mix) - 1.0) > 1e-9:
                raise ValueError(f"{name} weights must be non-negative and sum to 1")
        if self.ewma_window_hours < 1:
            raise ValueError("ewma_window_hours must be >= 1")


# --- parametric profile generator -------------------------------------------

# per-season constants: PV amplitude kW (summer > spring > autumn > winter),
# daylight window, temperature mean / diurnal amplitude, consumption scale
_PV_AMPLITUDE = (0.9, 2.6, 3.2, 1.4)
_DAYLIGHT = ((8.0, 16.0), (6.0, 19.0), (5.0, 21.0), (7.0, 17.0))
_TEMP_MEAN = (0.5, 8.0, 17.5, 9.0)
_TEMP_DIURNAL = (2.5, 4.0, 5.0, 3.0)
_CONSUMPTION_SCALE = (1.25, 1.0, 0.9, 1.1)


def _bump(hours: np.ndarray, center: float, width: float, amp: float) -> np.ndarray:
    return amp * np.exp(-0.5 * ((hours - center) / width) ** 2)


def _pv_curve(season: int, hours: np.ndarray) -> np.ndarray:
    rise, set_ = _DAYLIGHT[season]
    frac = (hours - rise) / (set_ - rise)
    curve = np.sin(np.pi * np.clip(frac, 0.0, 1.0))
    return _PV_AMPLITUDE[season] * np.where((frac > 0) & (frac < 1), curve, 0.0)


def _base_consumption(season: int, day_kind: int, hours: np.ndarray) -> np.ndarray:
    load = np.full(HOURS_PER_DAY, 0.30)
    if day_kind == 0:
        load = load + _bump(hours, 7.5, 1.2, 0.9) + _bump(hours, 19.0, 2.0, 1.3)
        load = load + _bump(hours, 13.0, 3.0, 0.25)
    else:
        load = load + _bump(hours, 9.5, 2.0, 0.85) + _bump(hours, 19.2, 2.1, 1.25)
        load = load + _bump(hours, 14.0, 3.0, 0.4)
    return _CONSUMPTION_SCALE[season] * load


def _ev_charging(day_kind: int, hours: np.ndarray) -> np.ndarray:
    if day_kind == 0:
        return _bump(hours, 20.0, 1.5, 1.0)
    return _bump(hours, 14.0, 2.0, 0.7)


def _make_profile(season: int, day_kind: int, type_id: int,
                  rng: np.random.Generator) -> DayProfile:
    hours = np.arange(HOURS_PER_DAY, dtype=float)

    production = np.zeros(HOURS_PER_DAY)
    if type_id in PROSUMER_TYPES:
        production = _pv_curve(season, hours)
        if type_id == 1:
            # storage exports part of the midday surplus ~3h later
            production = 0.65 * production + 0.35 * np.roll(production, 3)
        production = production * rng.uniform(0.92, 1.08)
        production = production * (1.0 + rng.normal(0.0, 0.03, HOURS_PER_DAY))
        production = np.maximum(production, 0.0)

    consumption = _base_consumption(season, day_kind, hours)
    if type_id in (2, 3):
        consumption = consumption + _ev_charging(day_kind, hours)
    consumption = consumption * rng.uniform(0.92, 1.08)
    consumption = consumption * (1.0 + rng.normal(0.0, 0.03, HOURS_PER_DAY))
    consumption = np.maximum(consumption, 0.02)

    temperature = (_TEMP_MEAN[season]
                   + _TEMP_DIURNAL[season] * np.sin(np.pi * (hours - 8.0) / 12.0)
                   + rng.uniform(-1.0, 1.0)
                   + rng.normal(0.0, 1.2, HOURS_PER_DAY))

    profile = DayProfile(season, day_kind, production, consumption, temperature)
    profile.validate()
    return profile


def generate_parametric_profiles(seed: int, variants_per_cell: int = 3) -> ProfileBank:
    """Self-contained seeded profile bank covering all five archetypes."""
    cells: dict[tuple[int, int, int], list[DayProfile]] = {}
    for type_id in range(len(ARCHETYPES)):
        for season in range(4):
            for kind in range(2):
                rng = make_rng(seed, "profiles", type_id, season, kind)
                cells[(season, kind, type_id)] = [
                    _make_profile(season, kind, type_id, rng)
                    for _ in range(variants_per_cell)
                ]
    return ProfileBank(cells)


# --- profile CSV I/O ---------------------------------------------------------

def load_profiles(path) -> ProfileBank:
    """Read a profile CSV (see PROFILE_CSV_HEADER); 24 consecutive rows with
    hours 0..23 form one profile of their (season, day_kind, archetype) cell."""
    groups: dict[tuple[int, int, int], list[list[tuple[float, float, float]]]] = {}
    open_rows: dict[tuple[int, int, int], list[tuple[float, float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != PROFILE_CSV_HEADER:
            raise ProfileError(f"{path}: header must be {','.join(PROFILE_CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                season = SEASON_NAMES.index(row[0].strip())
                kind = DAY_KIND_NAMES.index(row[1].strip())
                type_id = int(row[2])
                hour = int(row[3])
                values = (float(row[4]), float(row[5]), float(row[6]))
            except (IndexError, ValueError) as exc:
                raise ProfileError(f"{path}:{lineno}: malformed row ({exc})") from None
            if type_id not in range(len(ARCHETYPES)):
                raise ProfileError(f"{path}:{lineno}: unknown archetype {type_id}")
            key = (season, kind, type_id)
            pending = open_rows.setdefault(key, [])
            if hour != len(pending):
                raise ProfileError(f"{path}:{lineno}: expected hour {len(pending)} "
                                   f"for cell {key}, got {hour}")
            pending.append(values)
            if len(pending) == HOURS_PER_DAY:
                groups.setdefault(key, []).append(pending)
                open_rows[key] = []
    for key, pending in open_rows.items():
        if pending:
            raise ProfileError(f"{path}: incomplete profile for cell {key} "
                               f"({len(pending)} of 24 hours)")

    cells: dict[tuple[int, int, int], list[DayProfile]] = {}
    for (season, kind, type_id), profiles in groups.items():
        bucket = []
        for rows in profiles:
            arr = np.array(rows, dtype=float)
            profile = DayProfile(season, kind, arr[:, 0].copy(), arr[:, 1].copy(),
                                 arr[:, 2].copy())
            profile.validate()
            bucket.append(profile)
        cells[(season, kind, type_id)] = bucket
    return ProfileBank(cells)


def save_profiles(bank: ProfileBank, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PROFILE_CSV_HEADER)
        for key in sorted(bank.cells):
            season, kind, type_id = key
            for profile in bank.cells[key]:
                for hour in range(HOURS_PER_DAY):
                    writer.writerow((
                        SEASON_NAMES[season], DAY_KIND_NAMES[kind], type_id, hour,
                        repr(float(profile.production[hour])),
                        repr(float(profile.consumption[hour])),
                        repr(float(profile.temperature[hour])),
                    ))


# --- user-year synthesis -----------------------------------------------------

@dataclass
class RawSeries:
    """Hourly production/consumption/temperature for one 336-day user-year."""

    production: np.ndarray
    consumption: np.ndarray
    temperature: np.ndarray


def sample_day_kinds(rng: np.random.Generator, n_days: int) -> np.ndarray:
    """0 = weekday (p = 5/7), 1 = weekend/holiday (p = 2/7)."""
    return (rng.random(n_days) >= WEEKDAY_PROB).astype(int)


# multi-day weather episodes layered over the joined day profiles:
# cloudiness scales PV output, cold snaps shift temperature and raise the
# heating share of consumption (cloudy spells also run a little cooler);
# heating load follows a morning/evening hourly shape
_CLOUD_RANGE = (0.25, 1.0)
_TEMP_SHIFT_RANGE = (-4.0, 4.0)
_EPISODE_DAYS = (3, 8)
_CLOUD_COOLING = 4.0
_HEATING_GAIN = 0.10


def _episode_levels(rng: np.random.Generator, n_days: int,
                    lo: float, hi: float) -> np.ndarray:
    levels = np.empty(n_days)
    day = 0
    while day < n_days:
        span = int(rng.integers(_EPISODE_DAYS[0], _EPISODE_DAYS[1] + 1))
        levels[day:day + span] = rng.uniform(lo, hi)
        day += span
    return levels


def _heating_shape() -> np.ndarray:
    hours = np.arange(HOURS_PER_DAY, dtype=float)
    return 0.4 + _bump(hours, 7.0, 1.5, 0.8) + _bump(hours, 20.0, 2.5, 1.0)


def synthesize_user_year(bank: ProfileBank, archetype: UserArchetype,
                         seed: int) -> RawSeries:
    """Join 336 randomly chosen day profiles in calendar season order and
    modulate them with seeded multi-day weather episodes."""
    rng = np.random.default_rng(seed)
    kinds = sample_day_kinds(rng, DAYS_PER_YEAR)
    cloud = _episode_levels(rng, DAYS_PER_YEAR, *_CLOUD_RANGE)
    temp_shift = _episode_levels(rng, DAYS_PER_YEAR, *_TEMP_SHIFT_RANGE)
    temp_shift = temp_shift - _CLOUD_COOLING * (1.0 - cloud)
    heat_shape = _heating_shape()

    production = np.empty(HOURS_PER_YEAR)
    consumption = np.empty(HOURS_PER_YEAR)
    temperature = np.empty(HOURS_PER_YEAR)
    for day in range(DAYS_PER_YEAR):
        pool = bank.profiles(season_of_day(day), int(kinds[day]), archetype.type_id)
        profile = pool[int(rng.integers(len(pool)))]
        sl = slice(day * HOURS_PER_DAY, (day + 1) * HOURS_PER_DAY)
        cold = max(0.0, -float(temp_shift[day]))
        production[sl] = profile.production * cloud[day]
        consumption[sl] = profile.consumption * (1.0 + _HEATING_GAIN * cold * heat_shape)
        temperature[sl] = profile.temperature + temp_shift[day]
    return RawSeries(production, consumption, temperature)


def ewma(series: np.ndarray, window: int) -> np.ndarray:
    """Span-form EWMA: y_0 = x_0, y_t = a*x_t + (1-a)*y_{t-1}, a = 2/(window+1)."""
    if window < 1:
        raise ValueError(f"ewma window must be >= 1, got {window}")
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("ewma input must be non-empty")
    alpha = 2.0 / (window + 1.0)
    out = np.empty_like(series)
    out[0] = series[0]
    acc = series[0]
    one_minus = 1.0 - alpha
    for idx in range(1, series.size):
        acc = alpha * series[idx] + one_minus * acc
        out[idx] = acc
    return out


def net_energy(exported: np.ndarray, imported: np.ndarray) -> np.ndarray:
    """Hourly surplus: exported - imported (positive means surplus)."""
    exported = np.asarray(exported, dtype=float)
    imported = np.asarray(imported, dtype=float)
    if exported.shape != imported.shape:
        raise ValueError(f"length mismatch: {exported.shape} vs {imported.shape}")
    if np.any(exported < 0) or np.any(imported < 0):
        raise ValueError("energy channels must be non-negative")
    return exported - imported


@dataclass
class FeatureRow:
    """The 8-feature schema of one user-hour."""

    day: int
    index: int
    temperature_median: float
    temperature_std: float
    season: int
    type: int
    type2: int
    sum_total_ewm_balance: float


@dataclass
class UserSeries:
    """One synthetic user-year: an [8064 x 8] feature matrix plus audit channels."""

    user_id: int
    archetype: UserArchetype
    features: np.ndarray
    raw: RawSeries | None = None
    seed: int | None = None

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def targets(self) -> np.ndarray:
        return self.features[:, TARGET_COLUMN]

    def row(self, idx: int) -> FeatureRow:
        r = self.features[idx]
        return FeatureRow(int(r[0]), int(r[1]), float(r[2]), float(r[3]),
                          int(r[4]), int(r[5]), int(r[6]), float(r[7]))


def _rolling_median_std(values: np.ndarray, half: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """Median/std over a centered 24-hour window [t-12, t+12), clipped at the ends."""
    n = values.size
    med = np.empty(n)
    std = np.empty(n)
    win = 2 * half
    if n >= win:
        view = np.lib.stride_tricks.sliding_window_view(values, win)
        med[half:n - half + 1] = np.median(view, axis=1)
        std[half:n - half + 1] = np.std(view, axis=1)
        edges = list(range(half)) + list(range(n - half + 1, n))
    else:
        edges = range(n)
    for t in edges:
        lo, hi = max(0, t - half), min(n, t + half)
        med[t] = np.median(values[lo:hi])
        std[t] = np.std(values[lo:hi])
    return med, std


def build_feature_rows(raw: RawSeries, archetype: UserArchetype,
                       config: LecConfig, user_id: int = 0,
                       seed: int | None = None) -> UserSeries:
    """Encode a raw user-year into the 8-feature hourly schema.

    The target is net_energy applied to the EWMA-smoothed exported/imported
    channels, where exported = max(production - consumption, 0) and
    imported = max(consumption - production, 0) per hour.
    """
    n = raw.production.size
    balance = raw.production - raw.consumption
    exported = np.maximum(balance, 0.0)
    imported = np.maximum(-balance, 0.0)
    target = net_energy(ewma(exported, config.ewma_window_hours),
                        ewma(imported, config.ewma_window_hours))

    hours = np.arange(n)
    days = hours // HOURS_PER_DAY
    med, std = _rolling_median_std(raw.temperature)

    features = np.empty((n, len(FEATURE_COLUMNS)))
    features[:, 0] = days
    features[:, 1] = hours % HOURS_PER_DAY
    features[:, 2] = med
    features[:, 3] = std
    features[:, 4] = days // DAYS_PER_SEASON
    features[:, 5] = 1 if archetype.is_consumer else 0
    features[:, 6] = archetype.type_id
    features[:, 7] = target
    return UserSeries(user_id, archetype, features, raw=raw, seed=seed)


def _allocate_counts(total: int, weights: tuple[float, ...]) -> list[int]:
    """Largest-remainder allocation; deterministic for fixed inputs."""
    if total == 0:
        return [0] * len(weights)
    raw = [w * total for w in weights]
    counts = [int(np.floor(r)) for r in raw]
    remainder = total - sum(counts)
    order = sorted(range(len(weights)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


def build_lec(config: LecConfig, bank: ProfileBank) -> list[UserSeries]:
    """Generate a community; prosumers first, then consumers, ids 0..n-1."""
    config.validate()
    n_consumers = int(np.floor(config.n_users * config.consumer_fraction))
    n_prosumers = config.n_users - n_consumers
    type_counts: list[tuple[int, int]] = []
    for type_id, count in zip(PROSUMER_TYPES,
                              _allocate_counts(n_prosumers, config.prosumer_mix)):
        type_counts.append((type_id, count))
    for type_id, count in zip(CONSUMER_TYPES,
                              _allocate_counts(n_consumers, config.consumer_mix)):
        type_counts.append((type_id, count))

    users = []
    user_id = 0
    for type_id, count in type_counts:
        archetype = ARCHETYPES[type_id]
        for _ in range(count):
            seed = derive_seed(config.seed, "user", user_id)
            raw = synthesize_user_year(bank, archetype, seed)
            users.append(build_feature_rows(raw, archetype, config,
                                            user_id=user_id, seed=seed))
            user_id += 1
    return users


# --- windows and standardization ---------------------------------------------

# fixed affine encodings for the categorical type columns: identical for every
# user (the flags are per-user constants, so per-user statistics would erase
# them) and scaled to the +/-2 range of the standardized continuous features
_TYPE_COLUMN = FEATURE_COLUMNS.index("type")
_TYPE2_COLUMN = FEATURE_COLUMNS.index("type2")
_FIXED_ENCODINGS = {_TYPE_COLUMN: (0.5, 0.25), _TYPE2_COLUMN: (2.0, 1.0)}


@dataclass
class Standardizer:
    """Per-feature affine transform fitted on training rows only.

    The type columns use the fixed encodings above; any other column with
    (near-)zero variance passes through unscaled.
    """

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, rows: np.ndarray) -> "Standardizer":
        mean = rows.mean(axis=0)
        std = rows.std(axis=0)
        constant = std < 1e-12
        std = np.where(constant, 1.0, std)
        mean = np.where(constant, 0.0, mean)
        for column, (enc_mean, enc_std) in _FIXED_ENCODINGS.items():
            mean[column] = enc_mean
            std[column] = enc_std
        return cls(mean, std)

    def transform(self, rows: np.ndarray) -> np.ndarray:
        return (rows - self.mean) / self.std

    def transform_target(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean[TARGET_COLUMN]) / self.std[TARGET_COLUMN]

    def inverse_target(self, values: np.ndarray) -> np.ndarray:
        return values * self.std[TARGET_COLUMN] + self.mean[TARGET_COLUMN]


def windowize(rows: np.ndarray, t_in: int = 24, horizon: int = 24,
              stride: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Cut [N x 8] rows into ([K x t_in x 8] inputs, [K x horizon] targets).

    Window k reads rows [k*stride, k*stride + t_in) and predicts the target
    column over the following ``horizon`` rows;
    K = floor((N - t_in - horizon) / stride) + 1.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    n = rows.shape[0]
    if n < t_in + horizon:
        raise ValueError(f"series of {n} rows is too short for "
                         f"t_in={t_in} + horizon={horizon}")
    count = (n - t_in - horizon) // stride + 1
    x = np.empty((count, t_in, rows.shape[1]))
    y = np.empty((count, horizon))
    for k in range(count):
        start = k * stride
        x[k] = rows[start:start + t_in]
        y[k] = rows[start + t_in:start + t_in + horizon, TARGET_COLUMN]
    return x, y


@dataclass
class UserDataset:
    """Chronological train/test windows for one user, standardized with the
    training-split statistics (the split descriptor the windows carry)."""

    user_id: int
    archetype: UserArchetype
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    standardizer: Standardizer
    split_row: int

    @property
    def n_train(self) -> int:
        return self.train_x.shape[0]


def split_and_windowize(series: UserSeries, t_in: int = 24, horizon: int = 24,
                        stride: int = 24, train_fraction: float = 0.8) -> UserDataset:
    split_row = int(series.n_rows * train_fraction)
    train_rows = series.features[:split_row]
    test_rows = series.features[split_row:]
    standardizer = Standardizer.fit(train_rows)

    train_x, train_y = windowize(standardizer.transform(train_rows), t_in, horizon, stride)
    test_x, test_y = windowize(standardizer.transform(test_rows), t_in, horizon, stride)
    return UserDataset(series.user_id, series.archetype, train_x, train_y,
                       test_x, test_y, standardizer, split_row)


# --- dataset CSV export -------------------------------------------------------

DATASET_CSV_HEADER = ("user_id",) + FEATURE_COLUMNS


def write_dataset_csv(users: list[UserSeries], path) -> None:
    """One row per user-hour: user_id plus the 8 feature columns."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_CSV_HEADER)
        for user in users:
            for r in user.features:
                writer.writerow((
                    user.user_id, int(r[0]), int(r[1]), repr(float(r[2])),
                    repr(float(r[3])), int(r[4]), int(r[5]), int(r[6]),
                    repr(float(r[7])),
                ))
