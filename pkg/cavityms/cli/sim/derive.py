"""`derive-params`: effective parameters and condition checks of a config."""

from __future__ import annotations

from pathlib import Path

import typer

from cavityms.cli.common.cli import handle_errors
from cavityms.cli.common.display import info, warn
from cavityms.common.util.pretty import tabulate_mapping
from cavityms.lib.harness import load_config
from cavityms.lib.harness.report import derive_report

_UNIT_NOTE = {
    "mhz": "frequencies in 2π·MHz, times in μs",
    "natural": "frequencies and times in the file's units",
}


@handle_errors
def derive_params(
    config: Path = typer.Argument(..., help="Simulation config file."),
    as_json: bool = typer.Option(False, "--json", help="Print JSON instead of tables."),
) -> None:
    """Print χ, g_eff, δ, Stark shifts, δ′ and the error budget of a config."""
    report = derive_report(load_config(config))
    if as_json:
        info(report.dumps())
        return

    info(f"model: {report.model} ({_UNIT_NOTE[report.units]})")
    info(tabulate_mapping(report.values, headers=("quantity", "value")))
    if report.checks:
        info("")
        info(tabulate_mapping(report.checks, headers=("condition", "status")))
        if not report.passed:
            warn("Some gate conditions do not hold; see the table above.")
