"""Command-line experiment runner.

Subcommands: ``run`` executes an experiment from a JSON config file,
``sweep`` builds the config from flags, and ``validate-config`` checks a
config file without running anything. Exit status is nonzero with a
diagnostic on any configuration error.
"""

from __future__ import annotations

import json
import sys

import click

from .experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    run_experiment,
    write_csv,
    write_scenario_sidecar,
)


@click.group()
def main():
    """Seeded Monte-Carlo benchmarks for Kronecker-structured off-grid
    sparse estimation."""


def _apply_overrides(cfg: ExperimentConfig, seed, trials, out, threads):
    if seed is not None:
        cfg.seed = seed
    if trials is not None:
        cfg.trials = trials
    if out is not None:
        cfg.out = out
    if threads is not None:
        cfg.threads = threads
    return cfg


def _execute(cfg: ExperimentConfig):
    rows = run_experiment(cfg)
    out = cfg.out or f"{cfg.experiment}_results.csv"
    write_csv(out, cfg.experiment, rows)
    click.echo(f"wrote {len(rows)} rows to {out}")
    if cfg.write_sidecar:
        sidecar = out.rsplit(".", 1)[0] + ".scenarios.json"
        write_scenario_sidecar(sidecar, cfg)
        click.echo(f"wrote scenario sidecar to {sidecar}")


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the base seed.")
@click.option("--trials", type=int, default=None, help="Override the trial count.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Override the output CSV path.")
@click.option("--threads", type=int, default=None,
              help="Worker processes for trial execution.")
def run(config_path, seed, trials, out, threads):
    """Run the experiment described by a JSON config file."""
    try:
        cfg = ExperimentConfig.from_json(config_path)
        cfg = _apply_overrides(cfg, seed, trials, out, threads)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"invalid config: {exc}") from exc
    _execute(cfg)


@main.command()
@click.option("--experiment", type=click.Choice(EXPERIMENTS), required=True)
@click.option("--snr", "snr_db", default="20", show_default=True,
              help="Comma-separated SNR values in dB ('inf' for noiseless).")
@click.option("--m", "m_values", default="", help="Comma-separated measurement sizes.")
@click.option("--s", "s_values", default="", help="Comma-separated source counts.")
@click.option("--algorithms", default="",
              help="Comma-separated algorithm names (default: all).")
@click.option("--solver", "solver_json", default="{}",
              help="JSON object of solver overrides.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trials", type=int, default=10, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--threads", type=int, default=1, show_default=True)
def sweep(experiment, snr_db, m_values, s_values, algorithms, solver_json,
          seed, trials, out, threads):
    """Run a sweep configured entirely from flags."""
    def split(text, cast):
        return [cast(v) for v in text.split(",") if v.strip()]

    try:
        cfg = ExperimentConfig.from_dict({
            "experiment": experiment,
            "snr_db_list": split(snr_db, str),
            "m_list": split(m_values, int),
            "s_list": split(s_values, int),
            "algorithms": split(algorithms, str),
            "solver": json.loads(solver_json),
            "seed": seed,
            "trials": trials,
            "out": out,
            "threads": threads,
        })
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"invalid sweep options: {exc}") from exc
    _execute(cfg)


@main.command("validate-config")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
def validate_config(config_path):
    """Check a JSON config file; exit nonzero with a diagnostic if invalid."""
    try:
        cfg = ExperimentConfig.from_json(config_path)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"invalid config: {exc}") from exc
    algos = ", ".join(cfg.algorithms)
    click.echo(f"ok: {cfg.experiment} x {len(cfg.snr_db_list)} SNR points, "
               f"{cfg.trials} trials, algorithms: {algos}")


if __name__ == "__main__":
    sys.exit(main())
