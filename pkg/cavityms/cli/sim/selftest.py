"""`selftest`: fast checks with exactly known answers."""

from __future__ import annotations

import cavityms.common.constant as C
from cavityms.cli.common.display import check, error, info
from cavityms.lib.selftest import run_selftest


def selftest() -> None:
    """Run the built-in consistency checks (a few seconds)."""
    results = run_selftest()
    for name, passed, detail in results:
        check(name, passed, detail)
    failed = sum(not passed for _, passed, _ in results)
    if failed:
        error(C.Template.SELFTEST_FAILED.format(count=failed), C.ExitCode.NUMERICAL)
    info(f"{len(results)} checks passed")
