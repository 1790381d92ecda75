"""`evolve`, `scan` and `reproduce`: run a scenario and write CSV and SVG."""

from __future__ import annotations

from pathlib import Path
from typing import List, Optional

import typer

import cavityms.common.constant as C
from cavityms.cli.common.cli import handle_errors
from cavityms.cli.common.display import info, warn
from cavityms.cli.common.options import RunOptions
from cavityms.common.exception import UnknownScenarioException
from cavityms.common.util.functool import expand_arg_group
from cavityms.common.util.pretty import tabulate_rows
from cavityms.lib.harness import (
    ScanResult,
    ScanSpec,
    Scenario,
    emit_csv,
    emit_svg_lineplot,
    load_config,
    run_scenario,
)

# scenarios that need a config file are run through `evolve` and `scan`
REPRODUCIBLE = tuple(
    name for name in Scenario.names() if name not in (C.Scenario.CUSTOM, C.Scenario.EVOLVE)
)
# columns left out of terminal tables
_QUIET_COLUMNS = ("ok", "trunc_pop")


def _emit(result: ScanResult, out_dir: Path) -> List[Path]:
    paths = [emit_csv(result, out_dir / f"{result.scenario}.csv")]
    if result.x is not None and result.y:
        paths.append(emit_svg_lineplot(result, out_dir / f"{result.scenario}.svg"))
    for path in paths:
        info(C.Template.WROTE.format(path=path))
    return paths


def _print_table(result: ScanResult) -> None:
    """Peaks of time series; every row of sweeps and tables."""
    if result.x == "t":
        peaks = result.peaks()
        if peaks:
            info(tabulate_rows([list(p.values()) for p in peaks], list(peaks[0])))
        return
    keep = [j for j, name in enumerate(result.columns) if name not in _QUIET_COLUMNS]
    info(
        tabulate_rows(
            [[row[j] for j in keep] for row in result.rows],
            [result.columns[j] for j in keep],
        )
    )


def _finish(result: ScanResult) -> None:
    if result.max_trunc_pop > C.Tolerance.TRUNCATION:
        warn(f"Fock truncation population reached {result.max_trunc_pop:.2e}; raise n_max.")
    if result.flagged:
        warn(C.Template.FLAGGED_ROWS.format(count=result.flagged))
        raise typer.Exit(C.ExitCode.NUMERICAL)


@handle_errors
@expand_arg_group
def evolve(
    run: RunOptions,
    config: Path = typer.Argument(..., help="Simulation config file."),
    t_stop: Optional[float] = typer.Option(None, help="End time in gate times."),
    t_points: Optional[int] = typer.Option(None, help="Samples along time."),
) -> None:
    """Evolve the configured initial state; write state and gate fidelity over time."""
    sim = load_config(config)
    spec = sim.scan_spec(
        scenario=C.Scenario.EVOLVE,
        t_stop=t_stop,
        t_points=t_points,
        jobs=run.n_jobs,
        rel_tol=run.rel_tol(sim.config.query("integrator.rel_tol", None)),
    )
    result = run_scenario(spec, sim)
    _emit(result, run.out_dir)
    for column in result.y:
        for peak in result.peaks(column):
            info(
                f"{column}: "
                + C.Template.PEAK.format(value=peak[column], time=peak["t"], unit=sim.time_unit)
            )
    _finish(result)


@handle_errors
@expand_arg_group
def scan(
    run: RunOptions,
    config: Path = typer.Argument(..., help="Simulation config file with a [scan] section."),
) -> None:
    """Run the [scan] section of a config file (default: sweep one key)."""
    sim = load_config(config)
    spec = sim.scan_spec(
        jobs=run.n_jobs,
        rel_tol=run.rel_tol(sim.config.query("integrator.rel_tol", None)),
    )
    result = run_scenario(spec, sim)
    _emit(result, run.out_dir)
    _print_table(result)
    _finish(result)


@handle_errors
@expand_arg_group
def reproduce(
    run: RunOptions,
    scenario: str = typer.Argument(..., help=f"One of {', '.join(REPRODUCIBLE)}."),
    full: bool = typer.Option(False, "--full", help="Full-resolution grids."),
) -> None:
    """Recompute a figure or table at desk scale."""
    if scenario not in REPRODUCIBLE:
        raise UnknownScenarioException(
            f"{scenario!r} is not one of {', '.join(REPRODUCIBLE)}"
        )
    spec = ScanSpec(scenario=scenario, full=full, jobs=run.n_jobs, rel_tol=run.rel_tol())
    result = run_scenario(spec)
    _emit(result, run.out_dir)
    _print_table(result)
    _finish(result)
