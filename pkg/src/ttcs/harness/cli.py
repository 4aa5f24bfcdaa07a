"""ttsim: replay-evaluation command line."""

from __future__ import annotations

import datetime as _dt
import json
import sys

import click

from .. import ledger as ledger_mod
from ..ledger_http import LedgerClient
from . import replay
from .dataset import DatasetError, gen_synthetic, load_dataset

EXIT_VALIDATION = 2


def _load(path):
    try:
        return load_dataset(path)
    except (DatasetError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


@click.group()
def main():
    """Traffic-replay harness for the throttled commenting system."""


@main.command()
@click.option("--dataset", "dataset_path", required=True, type=click.Path())
@click.option("--tau", default=20, show_default=True, help="comments per period per user")
@click.option("--cores", default="1", show_default=True, help="worker count or 'auto'")
@click.option("--latency-target", default=0.1, show_default=True)
@click.option("--extended/--base", default=False, help="include genesis membership proofs")
@click.option("--report", "report_path", default=None, type=click.Path())
@click.option("--ledger", "ledger_arg", default="embedded", show_default=True,
              help="'embedded' or a ledger service URL")
@click.option("--seed", default=1, show_default=True)
@click.option("--base-date", default="2020-01-27", show_default=True)
@click.option("--anonymity-set", default=replay.DEFAULT_ANONYMITY_SET, show_default=True)
def run(dataset_path, tau, cores, latency_target, extended, report_path,
        ledger_arg, seed, base_date, anonymity_set):
    """Replay a dataset against the ledger and report the measures."""
    events = _load(dataset_path)
    if tau < 1 or latency_target <= 0:
        click.echo("error: tau must be >= 1 and latency-target positive", err=True)
        sys.exit(EXIT_VALIDATION)
    backing = None
    if ledger_arg != "embedded":
        backing = LedgerClient(ledger_arg)
    env = replay.ReplayEnv(
        tau=tau,
        extended=extended,
        ledger=backing,
        base_date=_dt.date.fromisoformat(base_date),
        anonymity_set=anonymity_set,
        seed=seed,
    )
    jobs, stats = replay.precompute(events, env)
    if cores == "auto":
        n_cores = replay.estimate_cores(events, latency_target, env=env)
    else:
        try:
            n_cores = int(cores)
        except ValueError:
            click.echo("error: --cores must be an integer or 'auto'", err=True)
            sys.exit(EXIT_VALIDATION)
    report = replay.simulate(jobs, n_cores, env, stats=stats, latency_target=latency_target)
    cost = replay.cost_report(report)
    doc = report.as_dict()
    doc["daily_cost_dollars"] = replay.cost_report(report, hours=24.0)
    doc["cost_dollars"] = cost
    click.echo(report.render_table())
    click.echo(f"\ndaily cost (24h): ${doc['daily_cost_dollars']:.2f}")
    if report_path:
        with open(report_path, "w") as fh:
            json.dump(doc, fh, indent=2)
        click.echo(f"report written to {report_path}")


@main.command("estimate-cores")
@click.option("--dataset", "dataset_path", required=True, type=click.Path())
@click.option("--latency-target", default=0.1, show_default=True)
@click.option("--tau", default=20, show_default=True)
@click.option("--extended/--base", default=False)
def estimate_cores_cmd(dataset_path, latency_target, tau, extended):
    """Estimate the FCFS worker count needed for the latency target."""
    events = _load(dataset_path)
    env = replay.ReplayEnv(tau=tau, extended=extended)
    n = replay.estimate_cores(events, latency_target, env=env)
    click.echo(str(n))


@main.command("gen-synthetic")
@click.option("--users", default=100, show_default=True)
@click.option("--comments", default=1000, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", default=1, show_default=True)
@click.option("--span-hours", default=24.0, show_default=True)
def gen_synthetic_cmd(users, comments, out, seed, span_hours):
    """Write a synthetic (t, u, m) dataset in JSONL form."""
    if users < 1 or comments < 0:
        click.echo("error: users must be >= 1 and comments >= 0", err=True)
        sys.exit(EXIT_VALIDATION)
    gen_synthetic(users, comments, out, seed=seed, span_hours=span_hours)
    click.echo(f"wrote {comments} events for {users} users to {out}")


@main.command()
@click.option("--reps", default=10, show_default=True)
def bench(reps):
    """Compare the compiled curve backend against the pure fallback."""
    from .. import bench as bench_mod

    click.echo(bench_mod.run(reps=reps))


@main.command("serve-ledger")
@click.option("--path", default=None, type=click.Path(), help="persistence path prefix")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8400, show_default=True)
def serve_ledger(path, host, port):
    """Run the append-only ledger as an HTTP service."""
    import uvicorn

    from ..ledger_http import build_app

    uvicorn.run(build_app(ledger_mod.Ledger(path)), host=host, port=port)


if __name__ == "__main__":
    main()
