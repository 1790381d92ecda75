"""Util for cavityms cli display."""

from __future__ import annotations

import os
from typing import NoReturn

import typer

import cavityms.common.constant as C


def error(err_msg: str, exit_code: int = C.ExitCode.CONFIG) -> NoReturn:
    """Print error message and exit program."""
    typer.secho(err_msg, fg=typer.colors.MAGENTA, err=True)
    raise typer.Exit(exit_code)


def warn(warn_msg: str) -> None:
    """Print warning message.

    Does not print warning if suppressed
    """
    if C.CLIEnv.IGNORE_WARNING in os.environ:
        return
    typer.secho(warn_msg, fg=typer.colors.YELLOW, err=True)


def info(info_msg: str) -> None:
    """Print info message."""
    typer.echo(info_msg)


def check(name: str, passed: bool, detail: str = "") -> None:
    """Print one pass/fail line."""
    mark = typer.style("pass", fg=typer.colors.GREEN) if passed else typer.style(
        "FAIL", fg=typer.colors.RED, bold=True
    )
    typer.echo(f"[{mark}] {name}" + (f"  ({detail})" if detail else ""))
