"""Option groups shared by the simulation commands.

Field types are real objects (no postponed annotations) because typer reads
them from the expanded signature of whichever module uses the group.
"""

from pathlib import Path
from typing import Optional

import typer

from cavityms.cli.common.context import SettingsContext
from cavityms.common.util.functool import arg_group
from cavityms.lib.common.settings import Settings


@arg_group
class RunOptions:
    """Output directory, worker count and integrator tolerance.

    Flags win over the config file, which wins over `Settings`.
    """

    ctx: SettingsContext
    out: Optional[Path] = typer.Option(
        None, "--out", "-o", help="Directory receiving CSV and SVG files."
    )
    jobs: Optional[int] = typer.Option(
        None, "--jobs", "-j", min=1, help="Worker processes (default CAVITY_MS_JOBS or 1)."
    )
    tol: Optional[float] = typer.Option(
        None, "--tol", help="Relative tolerance of Runge-Kutta integrations."
    )

    @property
    def settings(self) -> Settings:
        """Tool settings."""
        return self.ctx.obj

    @property
    def out_dir(self) -> Path:
        """Where outputs go."""
        return self.out if self.out is not None else Path(self.settings.out_dir)

    @property
    def n_jobs(self) -> int:
        """Worker processes."""
        return self.jobs if self.jobs is not None else self.settings.jobs

    def rel_tol(self, from_config: Optional[float] = None) -> float:
        """Flag, then config file value, then settings."""
        if self.tol is not None:
            return self.tol
        if from_config is not None:
            return from_config
        return self.settings.rel_tol
