"""Scenario runners, config files and result emitters."""

from cavityms.lib.harness.config import SimulationConfig, load_config, parse_config
from cavityms.lib.harness.emit import emit_csv, emit_svg_lineplot, read_csv
from cavityms.lib.harness.scenarios import Scenario, run_scenario
from cavityms.lib.harness.spec import ScanResult, ScanSpec

__all__ = [
    "ScanResult",
    "ScanSpec",
    "Scenario",
    "SimulationConfig",
    "emit_csv",
    "emit_svg_lineplot",
    "load_config",
    "parse_config",
    "read_csv",
    "run_scenario",
]
