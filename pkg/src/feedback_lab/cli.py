"""Command-line interface for the feedback lab."""

import functools
import math
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np
from rich import print as rprint
from rich.console import Console
from rich.table import Table

from . import __version__
from .channel.spec import awgn
from .coding.encoder import EncoderSpec
from .coding.montecarlo import SchemeConfig, monte_carlo_error_rate, montecarlo_to_csv
from .coding.transmission import control_system, sk_transmit, transcript_to_csv
from .config.settings import ExperimentConfig, LogBase
from .errors import FeedbackLabError
from .kalman.steady import check_assumption_a2
from .limits.report import (
    convergence_rows,
    convergence_to_csv,
    finite_report,
    steady_report,
    to_bits,
)
from .limits.search import capacity_search
from .properties.suite import run_property_suite
from .utils.exports import write_json
from .utils.logging import TimedOperation, get_logger, setup_logging

# Force UTF-8 encoding for Windows console
if sys.platform == 'win32':
    import codecs
    sys.stdout = codecs.getwriter('utf-8')(sys.stdout.buffer, errors='replace')
    sys.stderr = codecs.getwriter('utf-8')(sys.stderr.buffer, errors='replace')

console = Console()
logger = get_logger("cli")

EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 2
VERIFY_TOLERANCE = 1e-9


class RunContext:
    """Resolved config plus command-line overrides for one run."""

    def __init__(self, config: ExperimentConfig, seed: Optional[int], out: Optional[Path],
                 bits: bool, tol: Optional[float]):
        self.config = config
        self.seed = seed if seed is not None else config.seed
        self.out = Path(out) if out is not None else Path(config.output.directory)
        self.bits = bits or config.output.log_base == LogBase.BITS
        self.tol = tol

    def conv(self, value: float) -> float:
        return to_bits(value) if self.bits else value

    @property
    def unit(self) -> str:
        return "bits" if self.bits else "nats"


def _common_options(command):
    """--config/--seed/--out/--bits/--tol, resolved into a RunContext."""

    @click.option('--config', '-c', 'config_path',
                  type=click.Path(dir_okay=False, path_type=Path),
                  default=None,
                  help='Path to a JSON or YAML experiment config (defaults apply when omitted)')
    @click.option('--seed', type=int, default=None, help='Master seed (overrides the config)')
    @click.option('--out', '-o', type=click.Path(file_okay=False, path_type=Path), default=None,
                  help='Output directory (overrides output.directory)')
    @click.option('--bits', is_flag=True, help='Emit information quantities in bits')
    @click.option('--tol', type=float, default=None, help='Tolerance override')
    @functools.wraps(command)
    def wrapper(config_path, seed, out, bits, tol, **kwargs):
        try:
            config = (ExperimentConfig.from_file(config_path) if config_path is not None
                      else ExperimentConfig())
        except FeedbackLabError as e:
            _fail(e)
        setup_logging(config.output.log_level,
                      Path(config.output.log_file) if config.output.log_file else None)
        run = RunContext(config, seed, out, bits, tol)
        try:
            return command(run, **kwargs)
        except FeedbackLabError as e:
            _fail(e)
        except ValueError as e:
            _fail(e)

    return wrapper


def _fail(error: Exception):
    logger.error(str(error))
    console.print(f"❌ Error: {error}", style="red bold")
    sys.exit(EXIT_ERROR)


def _saved(path: Path):
    console.print(f"✅ Wrote {path}", style="green")


@click.group()
@click.version_option(version=__version__)
def cli():
    """Feedback Lab

    Kalman-filter feedback coding over Gaussian channels with memory: finite
    and steady-state limits, structural property checks, Monte Carlo
    transmission and capacity search.
    """
    pass


@cli.command()
@click.option('--config', '-c',
              type=click.Path(dir_okay=False, path_type=Path),
              default=Path('config/experiment.yaml'),
              help='Path to save configuration file')
def init(config: Path):
    """Initialize a new configuration file."""
    if config.exists():
        if not click.confirm(f"Configuration file {config} already exists. Overwrite?"):
            return

    console.print("🚀 Creating new configuration file...")
    sample = ExperimentConfig.from_dict({
        'channel': {'f': [0.5], 'g': [0.3]},
        'encoder': {'a': 2.0, 'c': 1.0},
        'horizon': 60,
        'power_budget': 3.0,
        'seed': 7,
        'convergence_horizons': [10, 20, 40, 60],
    })
    sample.to_yaml(config)

    console.print(f"✅ Configuration saved to {config}", style="green")
    console.print("\n📝 Next steps:")
    console.print("1. Edit the channel and encoder to match your experiment")
    console.print("2. Run 'feedback-lab validate --config <file>' to check the channel")
    console.print("3. Run 'feedback-lab limits --config <file>' for the rate report")


@cli.command()
@_common_options
def validate(run: RunContext):
    """Check the channel (minimum phase, stable) and the encoder (observable)."""
    channel = run.config.channel.to_spec()
    encoder = run.config.encoder.to_spec()

    table = Table(title="Channel")
    table.add_column("Polynomial", style="cyan")
    table.add_column("Root", justify="right")
    table.add_column("Modulus", justify="right")
    for name, roots in (("numerator", channel.zeros), ("denominator", channel.poles)):
        for root in roots:
            table.add_row(name, f"{root:.6g}", f"{abs(root):.6g}")
    console.print(table)

    rprint(f"   • m = {channel.m}, n = {encoder.n}")
    rprint(f"   • DI(A) = {encoder.degree_of_instability():.10g}")
    try:
        check_assumption_a2(encoder, channel)
        rprint("   • steady-state analysis: [green]available[/green]")
    except FeedbackLabError as e:
        rprint(f"   • steady-state analysis: [yellow]unavailable ({e})[/yellow]")
    console.print("🎉 Configuration is valid", style="green bold")


@cli.command()
@_common_options
def simulate(run: RunContext):
    """Run the closed loop once (control form) and write the transcript CSV."""
    cfg = run.config
    channel, encoder = cfg.channel.to_spec(), cfg.encoder.to_spec()
    T = cfg.horizon
    rng = np.random.default_rng(np.random.SeedSequence([run.seed, T]))
    W = rng.standard_normal(encoder.dim)
    noise = rng.standard_normal(T + 1)

    with TimedOperation(logger, f"Simulation T={T}"):
        transcript = control_system(encoder, channel, W, noise, T)
    path = transcript_to_csv(transcript, run.out / "transcript.csv")

    rprint(f"📊 [bold]Simulation T={T}:[/bold]")
    rprint(f"   • empirical power: {transcript.power_empirical:.6g}")
    rprint(f"   • |W - xhat0_T|: {float(np.linalg.norm(W - transcript.xhat0_path[-1])):.3e}")
    _saved(path)


def _rates_table(title: str, rates: dict, run: RunContext) -> Table:
    table = Table(title=title)
    table.add_column("Formula", style="cyan")
    table.add_column(f"Rate ({run.unit}/use)", justify="right")
    for key, value in rates.items():
        table.add_row(key, f"{run.conv(value):.12g}")
    return table


@cli.command()
@_common_options
def limits(run: RunContext):
    """Finite-horizon rate chain (JSON) and per-T convergence rows (CSV)."""
    cfg = run.config
    channel, encoder = cfg.channel.to_spec(), cfg.encoder.to_spec()
    T = cfg.horizon
    tol = run.tol if run.tol is not None else cfg.tolerance

    with TimedOperation(logger, f"Limits report T={T}"):
        report = finite_report(encoder, channel, T)
        horizons = cfg.convergence_horizons or list(range(T + 1))
        rows = convergence_rows(encoder, channel, horizons)

    payload = report.to_dict(run.bits)
    payload["tolerance"] = tol
    payload["max_relative_residual"] = report.max_relative_residual()
    payload["power_residual"] = report.power_residual()
    json_path = write_json(run.out / "limits.json", payload)
    csv_path = convergence_to_csv(rows, run.out / "convergence.csv", run.bits)

    console.print(_rates_table(f"Rates at T={T}", report.rates, run))
    rprint(f"   • power (analytic): {report.power_analytic:.12g}")
    rprint(f"   • power (PMMSE trace): {report.pmmse_trace:.12g}")
    rel = report.max_relative_residual()
    style = "green" if rel <= tol else "yellow"
    rprint(f"   • max relative residual: [{style}]{rel:.3e}[/{style}] (tol {tol:g})")
    if rel > tol:
        logger.warning(f"Rate chain residual {rel:.3e} exceeds tolerance {tol:g}")
    _saved(json_path)
    _saved(csv_path)


@cli.command()
@_common_options
def steady(run: RunContext):
    """Steady-state report: rate against log DI(A), Bode integral, all-pass check."""
    cfg = run.config
    channel, encoder = cfg.channel.to_spec(), cfg.encoder.to_spec()

    with TimedOperation(logger, "Steady-state report"):
        report = steady_report(encoder, channel)
    path = write_json(run.out / "steady.json", report.to_dict(run.bits))

    console.print(_rates_table("Steady-state rates", report.rates, run))
    table = Table(title="Steady-state structure")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    for key, value in report.extras.items():
        table.add_row(key, f"{value:.10g}")
    table.add_row("power", f"{report.power_analytic:.12g}")
    console.print(table)
    _saved(path)


@cli.command()
@_common_options
def verify(run: RunContext):
    """Run the property suite; exits 2 when any check fails."""
    tol = run.tol if run.tol is not None else VERIFY_TOLERANCE
    summary = run_property_suite(tolerance=tol, max_workers=run.config.search.max_workers,
                                 seed=run.seed)
    path = write_json(run.out / "verify.json", summary)

    table = Table(title="Property checks")
    table.add_column("Case", style="cyan")
    table.add_column("Check")
    table.add_column("Value", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Status", style="magenta")
    for case in summary["cases"]:
        for name, check in case["checks"].items():
            ok = check["passed"]
            status_style = "green" if ok else "red"
            table.add_row(case["case"], name, f"{check['value']:.3e}", f"{check['tolerance']:g}",
                          f"[{status_style}]{'passed' if ok else 'FAILED'}[/{status_style}]")
    console.print(table)
    _saved(path)

    if not summary["passed"]:
        console.print("\n⚠️ Some property checks failed.", style="yellow bold")
        sys.exit(EXIT_VERIFY_FAILED)
    console.print("\n🎉 All property checks passed!", style="green bold")


@cli.command()
@_common_options
def montecarlo(run: RunContext):
    """Monte Carlo error probability table (CSV)."""
    cfg = run.config
    mc = cfg.montecarlo
    scheme = SchemeConfig(c=mc.c, channel=cfg.channel.to_spec(), zero_noise=mc.zero_noise,
                          chunk_size=mc.chunk_size, max_workers=mc.max_workers)

    with TimedOperation(logger, f"Monte Carlo P={mc.power} eps={mc.eps}"):
        rows = monte_carlo_error_rate(scheme, mc.power, mc.eps, mc.horizons,
                                      cfg.effective_trials, run.seed)
    path = montecarlo_to_csv(rows, run.out / "montecarlo.csv")

    table = Table(title=f"Error probability (P={mc.power}, eps={mc.eps}, seed={run.seed})")
    table.add_column("T", justify="right", style="cyan")
    table.add_column("M_T", justify="right")
    table.add_column("Pe", justify="right", style="magenta")
    table.add_column("Power", justify="right")
    table.add_column("Errors", justify="right", style="red")
    for row in rows:
        table.add_row(str(row.T), str(row.M_T), f"{row.Pe:.4g}",
                      f"{row.power_hat:.4g} ± {row.power_se:.2g}", str(row.errors))
    console.print(table)
    _saved(path)


@cli.command()
@_common_options
def search(run: RunContext):
    """Multi-start capacity search (JSON)."""
    cfg = run.config
    channel = cfg.channel.to_spec()
    settings = cfg.search
    if run.seed != cfg.seed:
        settings = settings.model_copy(update={"seed": run.seed})
    target = cfg.search_target()

    result = capacity_search(channel, cfg.horizon, settings.n, search_config=settings, **target)
    payload = result.as_dict()
    payload["log_base"] = "2" if run.bits else "e"
    payload["rate"] = run.conv(result.rate)
    for restart in payload["restarts"]:
        restart["rate"] = run.conv(restart["rate"])
    path = write_json(run.out / "search.json", payload)

    rprint(f"📊 [bold]Capacity search ({result.mode}):[/bold]")
    rprint(f"   • best rate: {run.conv(result.rate):.10g} {run.unit}/use")
    rprint(f"   • power: {result.power:.10g}")
    rank_style = "green" if result.rank_ok else "yellow"
    bound = result.rank_bound if result.rank_bound is not None else "-"
    rprint(f"   • rank K_r: [{rank_style}]{result.rank}[/{rank_style}] (bound {bound})")
    _saved(path)


@cli.command('sk-compare')
@_common_options
def sk_compare(run: RunContext):
    """Recursive scheme against the Kalman-filter scheme with c = -sqrt(a^2 - 1)."""
    cfg = run.config
    a = cfg.encoder.a if cfg.encoder.a is not None else 2.0
    if a <= 1.0:
        raise ValueError(f"sk-compare needs a scalar encoder with a > 1, got a={a}")
    T = cfg.horizon
    g = math.sqrt(a * a - 1.0)
    rng = np.random.default_rng(np.random.SeedSequence([run.seed, T]))
    x0 = float(rng.uniform(-0.5, 0.5))
    noise = rng.standard_normal(T + 1)

    sk = sk_transmit(a, g, x0, noise, T)
    kf = control_system(EncoderSpec.scalar(a, -g), awgn(), [x0], noise, T)
    deviations = {
        "u": float(np.max(np.abs(sk.u - kf.u))),
        "y": float(np.max(np.abs(sk.y - kf.y))),
        "xhat0": float(np.max(np.abs(sk.xhat0_path - kf.xhat0_path))),
    }
    tol = run.tol if run.tol is not None else 1e-10
    payload = {"a": a, "g": g, "c": -g, "T": T, "seed": run.seed, "x0": x0,
               "max_deviation": deviations, "tolerance": tol,
               "identical": max(deviations.values()) <= tol}
    path = write_json(run.out / "sk_compare.json", payload)

    table = Table(title=f"SK vs KF (a={a:g}, T={T})")
    table.add_column("Signal", style="cyan")
    table.add_column("Max deviation", justify="right")
    for key, value in deviations.items():
        style = "green" if value <= tol else "red"
        table.add_row(key, f"[{style}]{value:.3e}[/{style}]")
    console.print(table)
    _saved(path)


if __name__ == '__main__':
    cli()
