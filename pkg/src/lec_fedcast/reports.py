"""Run artifacts: CSV reports, JSON manifests, and parameter checkpoints.

Floats are written with repr() (shortest round-trip form), so reruns of the
same seeded configuration produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os

import numpy as np

from .datasynth import SEASON_NAMES, UserSeries
from .scenarios import SeasonalStats


def _fmt(value: float) -> str:
    return repr(float(value))


def dataset_hash(users: list[UserSeries]) -> str:
    """Content hash of the generated dataset (order-sensitive by user id)."""
    h = hashlib.sha256()
    for user in sorted(users, key=lambda u: u.user_id):
        h.update(str(user.user_id).encode())
        h.update(np.ascontiguousarray(user.features).tobytes())
    return h.hexdigest()


def write_manifest(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_mse_by_round(path: str, rows) -> None:
    """rows: iterable of (round, scenario, client_id, mse)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("round", "scenario", "client_id", "mse"))
        for round_idx, scenario, client_id, mse in rows:
            writer.writerow((round_idx, scenario, client_id, _fmt(mse)))


def scenario_mse_rows(report) -> list[tuple[int, str, object, float]]:
    """Flatten a ScenarioReport into (round, scenario, client_id, mse) rows,
    appending a per-round 'mean' row."""
    rows = []
    for round_idx, per_user in enumerate(report.per_round_user_mse, start=1):
        for client_id in sorted(per_user):
            rows.append((round_idx, report.scenario, client_id, per_user[client_id]))
        if per_user:
            rows.append((round_idx, report.scenario, "mean",
                         float(np.mean(list(per_user.values())))))
    return rows


def write_surplus_hourly(path: str, hours: np.ndarray,
                         groups: list[tuple[str, np.ndarray, np.ndarray]],
                         stride: int = 1) -> None:
    """groups: (label, true, predicted) per column group; label '' for a
    single group gives the plain hour,true,predicted layout."""
    header = ["hour"]
    for label, _, _ in groups:
        suffix = f"_{label}" if label else ""
        header.extend((f"true{suffix}", f"predicted{suffix}"))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for idx in range(0, hours.size, stride):
            row = [int(hours[idx])]
            for _, true, pred in groups:
                row.extend((_fmt(true[idx]), _fmt(pred[idx])))
            writer.writerow(row)


def write_seasonal_stats(path: str, stats: dict[int, SeasonalStats]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("season", "q1", "median", "q3", "iqr",
                         "lo_whisker", "hi_whisker", "n_outliers"))
        for season in sorted(stats):
            s = stats[season]
            writer.writerow((SEASON_NAMES[season], _fmt(s.q1), _fmt(s.median),
                             _fmt(s.q3), _fmt(s.iqr), _fmt(s.lo_whisker),
                             _fmt(s.hi_whisker), len(s.outliers)))


def save_checkpoint(directory: str, tag: str, params: np.ndarray,
                    meta: dict) -> str:
    """Flat parameter vector (.npy) plus a JSON sidecar with the same stem."""
    os.makedirs(directory, exist_ok=True)
    stem = os.path.join(directory, tag)
    np.save(stem + ".npy", np.asarray(params, dtype=float))
    write_manifest(stem + ".json", meta)
    return stem + ".npy"


def load_checkpoint(path: str) -> np.ndarray:
    params = np.load(path)
    if params.ndim != 1:
        raise ValueError(f"{path}: checkpoint must hold a flat parameter vector")
    return params.astype(float)
