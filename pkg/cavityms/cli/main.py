"""Console script for cavityms."""

from __future__ import annotations

from typing import List, Optional

import click
import typer

import cavityms.common.constant as C
from cavityms.cli.common.command import add_config_commands
from cavityms.cli.sim import derive, run, selftest

app = typer.Typer(context_settings={"help_option_names": ["-h", "--help"]})

app.command("derive-params")(derive.derive_params)
app.command("evolve")(run.evolve)
app.command("scan")(run.scan)
app.command("reproduce")(run.reproduce)
app.command("selftest")(selftest.selftest)

add_config_commands(app)


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; usage errors exit with 1 instead of click's 2.

    Exit codes: 0 success, 1 bad input or usage, 2 numerical failure.
    """
    try:
        code = app(args=argv, prog_name="cavityms", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return C.ExitCode.CONFIG
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        typer.echo("Aborted!", err=True)
        return C.ExitCode.CONFIG
    return code if isinstance(code, int) else C.ExitCode.OK
