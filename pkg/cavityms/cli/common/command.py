"""Cavity MS CLI global options and settings commands."""

from __future__ import annotations

import json
import platform
import sys
from pathlib import Path

import typer

from cavityms import __version__ as cavityms_v
from cavityms.cli.common.context import SettingsContext
from cavityms.cli.common.display import error, info
from cavityms.common.util.log import setup_logging
from cavityms.common.util.pretty import tabulate_mapping
from cavityms.lib.common.settings import Settings


def _print_version(print_version: bool) -> None:
    """A Callback function that implements CLI option '--version'.

    Args:
        print_version (bool): This sets to be True when option '--version' gets passed.

    """
    if not print_version:
        return

    checkpoint_path = Path(__file__).absolute().parent.parent.parent / "checkpoint.json"
    try:
        with checkpoint_path.open() as f:
            git_checkpoint = json.load(f)
            git_info = (
                "Git branch:\t\t{ckpt[git_branch]}\n"
                + "Git commit:\t\t{ckpt[git_commit]}\n"
                + "Git timestamp:\t\t{ckpt[git_timestamp]}"
            ).format(ckpt=git_checkpoint)
    except (OSError, ValueError, KeyError):
        git_info = "Git info:\t\tNot Available"

    version_info = "Python version:\t\t{v.major}.{v.minor}.{v.micro}".format(
        v=sys.version_info
    )
    architecture = platform.processor() or "Not Available"

    info(
        "\n".join(
            [
                f"Version:\t\t{cavityms_v}",
                version_info,
                git_info,
                f"OS/Arch:\t\t{platform.system()}/{architecture}",
            ]
        )
    )

    raise typer.Exit(code=0)


def add_config_commands(app: typer.Typer) -> None:
    """Add the global callback (`--version`, `--verbose`) and `config set/list`.

    Args:
        app (typer.Typer): typer application

    """

    # pylint: disable=unused-variable
    @app.callback()
    def _global_commands(
        ctx: SettingsContext,
        _: bool = typer.Option(
            False,
            "--version",
            "-V",
            help="Print cavityms version",
            callback=_print_version,
            is_eager=True,
        ),
        verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging."),
    ) -> None:
        """Mølmer–Sørensen gates in cavity QED."""
        setup_logging(verbose)
        ctx.obj = Settings.load()

    config_sub_app = typer.Typer()

    # pylint: disable=unused-variable
    @config_sub_app.command("set")
    def set_config(ctx: SettingsContext, value: str) -> None:
        """Set a default, e.g. `jobs=4` or `out_dir=results`."""
        key, sep, raw = value.partition("=")
        if not sep:
            error("Expected key=value.")
        try:
            ctx.obj.set_from_string(key, raw)
        except KeyError:
            error(f"Unknown setting {key!r}. Known: {', '.join(ctx.obj.to_dict())}")
        except ValueError as e:
            error(f"Invalid value for {key}: {e}")
        ctx.obj.save()

    # pylint: disable=unused-variable
    @config_sub_app.command("list")
    def list_config(ctx: SettingsContext) -> None:
        """Show the effective settings."""
        info(tabulate_mapping(ctx.obj.to_dict(), headers=("setting", "value")))

    app.add_typer(
        config_sub_app,
        name="config",
        help="Tool settings (defaults for --jobs, --out and --tol).",
    )
