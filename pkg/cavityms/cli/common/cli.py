"""Cavity MS CLI typer-related utilities."""

from __future__ import annotations

import logging
from functools import wraps
from typing import Callable

import cavityms.common.constant as C
from cavityms.cli.common.display import error
from cavityms.common.exception import BaseCLIException
from cavityms.lib.common.exception import (
    BaseCavityMSLibException,
    NumericalError,
    OutputError,
)

logger = logging.getLogger(__name__)


def handle_errors(f: Callable) -> Callable:
    """Decorator that turns library errors into exit codes.

    Numerical failures exit with 2; configuration, contract and I/O errors
    exit with 1.
    """

    @wraps(f)
    def _handle(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except NumericalError as e:
            logger.debug("numerical failure", exc_info=True)
            error(f"numerical failure: {e}", C.ExitCode.NUMERICAL)
        except OutputError as e:
            error(f"cannot write {e}", C.ExitCode.CONFIG)
        except (BaseCavityMSLibException, BaseCLIException) as e:
            logger.debug("rejected input", exc_info=True)
            error(f"{type(e).__name__}: {e}", C.ExitCode.CONFIG)

    return _handle
