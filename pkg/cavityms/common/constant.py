"""Common constants.

Constant groups are classes that cannot be modified once defined. Iterating a
group yields its public values, and `in` tests membership by value.

"""

import inspect
import pathlib
from typing import Iterator


class _MetaConst(type):
    def __setattr__(cls, key: str, value: object) -> None:
        """Raise error if tries to update constants."""
        raise TypeError(f"{cls.__name__}.{key} is a constant")

    def __iter__(cls) -> Iterator[object]:
        """Iterate over public values in name order."""
        for name, obj in inspect.getmembers(cls):
            if name.startswith("_") or inspect.isclass(obj):
                continue
            yield obj

    def __contains__(cls, value: object) -> bool:
        """Membership by value."""
        return any(value == obj for obj in cls)


class Const(metaclass=_MetaConst):
    """Constant base class."""

    def __setattr__(self, key: str, value: object) -> None:
        """Raise error if tries to update constants."""
        raise TypeError(key)


SETTINGS_FOLDER = pathlib.Path.home() / ".cavityms"
SETTINGS_FILE = SETTINGS_FOLDER / "settings.json"


class CLIEnv(Const):
    """Environment variables for the cavityms cli."""

    IGNORE_WARNING = "CAVITY_MS_IGNORE_WARNING"
    PREFIX = "CAVITY_MS"


class ExitCode(Const):
    """Process exit codes."""

    OK = 0
    CONFIG = 1
    NUMERICAL = 2


class Level(Const):
    """Per-atom level indices.

    Qubit atoms use (g, e). Four-level Raman atoms append the two excited
    levels r1, r2. The 87Rb model appends the leakage level u.
    """

    G = 0
    E = 1
    R1 = 2
    R2 = 3
    U = 2


class Tolerance(Const):
    """Numerical thresholds shared across the library."""

    HERMITIAN = 1e-10
    TRUNCATION = 1e-6
    POSITIVITY = 1e-6
    CONDITION = 1e-9
    ADIABATIC = 1e-3
    SERIES_TAIL = 1e-10
    SERIES_FLOOR = 1e-14
    NORM_DRIFT = 1e-8
    TIME_RESOLUTION = 1e-4


class Scenario(Const):
    """Scenario identifiers understood by the harness."""

    FIG3A = "fig3a"
    FIG3B = "fig3b"
    FIG4 = "fig4"
    FIG5 = "fig5"
    FIG6 = "fig6"
    FIG7 = "fig7"
    RB87 = "rb87"
    FIG8 = "fig8"
    TABLE1 = "table1"
    CUSTOM = "custom"
    EVOLVE = "evolve"


class Model(Const):
    """Model names accepted in `[system] model`."""

    RAMAN = "raman"
    EFFECTIVE = "effective"
    RB87 = "rb87"


class Template(Const):
    """CLI message templates."""

    WROTE = "wrote {path}"
    PEAK = "max F = {value:.6f} at t = {time:.6g} {unit}"
    FLAGGED_ROWS = "{count} row(s) failed numerically; see the `ok` column"
    SELFTEST_FAILED = "{count} selftest check(s) failed"
