"""Command-line entry point: synth, train, evaluate, compare.

Exit codes: 0 success, 1 configuration error, 2 runtime/numeric failure.
The worker-thread count from the config can be capped with the
LEC_FEDCAST_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__, reports
from .config import ConfigError, RunConfig, load_config
from .datasynth import (
    ProfileBank,
    build_lec,
    generate_parametric_profiles,
    load_profiles,
    write_dataset_csv,
)
from .scenarios import (
    community_surplus,
    composition_sweep,
    compare_strategies as _compare_strategies,
    run_centralized,
    run_federated,
    run_standalone,
    seasonal_boxplot,
)
from .seeding import derive_seed


def _effective_threads(config: RunConfig) -> int:
    threads = config.run.threads
    cap = os.environ.get("LEC_FEDCAST_THREADS")
    if cap:
        try:
            threads = min(threads, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"LEC_FEDCAST_THREADS is not an integer: {cap!r}")
    return threads


def _profile_bank(config: RunConfig) -> ProfileBank:
    if config.dataset.profiles:
        return load_profiles(config.dataset.profiles)
    return generate_parametric_profiles(
        derive_seed(config.run.seed, "profiles"),
        variants_per_cell=config.dataset.variants_per_cell)


def _manifest_payload(config: RunConfig, command: str, extra: dict) -> dict:
    payload = {
        "command": command,
        "version": __version__,
        "config": config.to_dict(),
        "seed": config.run.seed,
        "derived_seeds": {
            "profiles": derive_seed(config.run.seed, "profiles"),
            "init": derive_seed(config.run.seed, "init"),
        },
    }
    payload.update(extra)
    return payload


def cmd_synth(config: RunConfig) -> int:
    out = config.run.out
    bank = _profile_bank(config)
    users = build_lec(config.lec_config(), bank)
    os.makedirs(out, exist_ok=True)
    write_dataset_csv(users, os.path.join(out, "dataset.csv"))
    reports.write_manifest(
        os.path.join(out, "manifest.json"),
        _manifest_payload(config, "synth", {
            "dataset_hash": reports.dataset_hash(users),
            "n_rows": sum(u.n_rows for u in users),
        }))
    print(f"wrote {len(users)} users to {out}/dataset.csv")
    return 0


def cmd_train(config: RunConfig) -> int:
    out = config.run.out
    threads = _effective_threads(config)
    bank = _profile_bank(config)
    users = build_lec(config.lec_config(), bank)
    cfg = config.eval_config(threads=threads)
    scenario = config.run.scenario

    if scenario == "standalone":
        report = run_standalone(users, cfg)
    elif scenario == "centralized":
        report = run_centralized(users, cfg)
    else:
        report = run_federated(users, cfg, config.aggregation_strategy())

    os.makedirs(out, exist_ok=True)
    reports.write_mse_by_round(os.path.join(out, "mse_by_round.csv"),
                               reports.scenario_mse_rows(report))

    checkpoint_dir = os.path.join(out, "checkpoints")
    strategy = config.aggregation_strategy()
    checkpoint_meta = {
        "scenario": report.scenario,
        "strategy": strategy.name,
        "hyperparameters": {"mu": strategy.mu, "eta": strategy.eta,
                            "beta1": strategy.beta1, "beta2": strategy.beta2,
                            "tau": strategy.tau},
        "seed": config.run.seed,
    }
    if report.session is not None:
        for round_report in report.session.rounds:
            reports.save_checkpoint(
                checkpoint_dir, f"round_{round_report.round:03d}",
                round_report.global_params,
                {**checkpoint_meta, "round": round_report.round})
    elif isinstance(report.final_params, dict):
        for user_id, params in sorted(report.final_params.items()):
            reports.save_checkpoint(checkpoint_dir, f"user_{user_id:03d}_final",
                                    params, {**checkpoint_meta, "user_id": user_id})
    elif report.final_params is not None:
        reports.save_checkpoint(checkpoint_dir, "final", report.final_params,
                                checkpoint_meta)

    reports.write_manifest(
        os.path.join(out, "manifest.json"),
        _manifest_payload(config, "train", {
            "scenario": report.scenario,
            "dataset_hash": reports.dataset_hash(users),
            "final_mean_mse": report.mean_mse,
        }))
    print(f"{report.scenario}: mean test MSE {report.mean_mse:.6f} -> {out}")
    return 0


def cmd_evaluate(config: RunConfig) -> int:
    out = config.run.out
    if not config.run.checkpoint:
        raise ConfigError("evaluate requires run.checkpoint (or --checkpoint)")
    params = reports.load_checkpoint(config.run.checkpoint)
    bank = _profile_bank(config)
    cfg = config.eval_config(threads=_effective_threads(config))
    result = composition_sweep(
        list(config.run.fractions), bank, config.lec_config(), cfg,
        strategy=config.aggregation_strategy(),
        n_test_users=config.run.test_users, trained_params=params)

    os.makedirs(out, exist_ok=True)
    hours = result.entries[0].forecast.hours
    groups = []
    for entry in result.entries:
        label = (f"f{int(round(entry.consumer_fraction * 100)):02d}"
                 if len(result.entries) > 1 else "")
        groups.append((label, entry.forecast.true, entry.forecast.predicted))
    reports.write_surplus_hourly(os.path.join(out, "surplus_hourly.csv"),
                                 hours, groups)
    if config.run.plot_stride > 1:
        reports.write_surplus_hourly(os.path.join(out, "surplus_hourly_plot.csv"),
                                     hours, groups, stride=config.run.plot_stride)

    if len(result.entries) == 1:
        reports.write_seasonal_stats(os.path.join(out, "seasonal_stats.csv"),
                                     result.entries[0].stats_pred)
    else:
        for entry in result.entries:
            pct = int(round(entry.consumer_fraction * 100))
            reports.write_seasonal_stats(
                os.path.join(out, f"seasonal_stats_f{pct:02d}.csv"),
                entry.stats_pred)

    reports.write_manifest(
        os.path.join(out, "manifest.json"),
        _manifest_payload(config, "evaluate", {
            "checkpoint": config.run.checkpoint,
            "fractions": list(config.run.fractions),
            "test_users": config.run.test_users,
        }))
    print(f"evaluated {len(result.entries)} fraction(s) -> {out}")
    return 0


def cmd_compare(config: RunConfig) -> int:
    out = config.run.out
    threads = _effective_threads(config)
    bank = _profile_bank(config)
    users = build_lec(config.lec_config(), bank)
    cfg = config.eval_config(threads=threads)
    strategies = [config.aggregation_strategy(name) for name in config.run.strategies]
    results = _compare_strategies(users, cfg, strategies)

    rows = []
    for name in config.run.strategies:
        rows.extend(reports.scenario_mse_rows(results[name]))
    os.makedirs(out, exist_ok=True)
    reports.write_mse_by_round(os.path.join(out, "mse_by_round.csv"), rows)
    reports.write_manifest(
        os.path.join(out, "manifest.json"),
        _manifest_payload(config, "compare", {
            "strategies": list(config.run.strategies),
            "dataset_hash": reports.dataset_hash(users),
            "final_mse": {name: results[name].mean_mse
                          for name in config.run.strategies},
        }))
    for name in config.run.strategies:
        print(f"{name}: final mean test MSE {results[name].mean_mse:.6f}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lec-fedcast",
        description="Federated LSTM forecasting simulator for local energy "
                    "communities")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("synth", "generate a synthetic LEC dataset CSV"),
        ("train", "train one scenario (standalone/centralized/federated)"),
        ("evaluate", "community surplus + seasonal stats from a checkpoint"),
        ("compare", "run every aggregation strategy from identical state"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the INI run config")
        cmd.add_argument("--seed", type=int, help="override [run] seed")
        cmd.add_argument("--out", help="override [run] out directory")
        cmd.add_argument("--plot-stride", type=int, dest="plot_stride",
                         help="override [run] plot_stride")
        if name == "evaluate":
            cmd.add_argument("--checkpoint", help="override [run] checkpoint path")
    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["run.seed"] = args.seed
    if args.out is not None:
        overrides["run.out"] = args.out
    if args.plot_stride is not None:
        overrides["run.plot_stride"] = args.plot_stride
    if getattr(args, "checkpoint", None):
        overrides["run.checkpoint"] = args.checkpoint
    try:
        config = load_config(args.config, overrides)
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
