"""Scan descriptions and results."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass as std_dataclass
from dataclasses import field
from typing import Any, Dict, List, Optional

import numpy as np

from cavityms import __version__
from cavityms.common import constant as C
from cavityms.common.model import dataclass
from cavityms.common.util.serialization import DataClassJSONSerializeMixin
from cavityms.lib.common.exception import (
    InvalidConfigurationError,
    InvalidDimensionError,
)
from cavityms.lib.dynamics import IntegratorConfig

SPACINGS = ("linear", "log")


@dataclass
class ScanSpec:
    """What to run.

    Args:
        scenario (str): scenario id
        parameter (str | None): swept quantity; a dotted config key for
            `custom`, informational otherwise
        start, stop (float | None): sweep range, scenario default if omitted
        points (int | None): sweep points, scenario default if omitted
        spacing (str): linear or log
        t_stop (float): end of the time window in gate times
        t_points (int): samples per time series
        full (bool): full-resolution sweep and time grids
        jobs (int): worker processes
        rel_tol (float): relative tolerance of Runge-Kutta integrations

    """

    scenario: str
    parameter: Optional[str] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    points: Optional[int] = None
    spacing: str = "linear"
    t_stop: float = 2.0
    t_points: int = 201
    full: bool = False
    jobs: int = 1
    rel_tol: float = 1e-8

    def __post_init__(self) -> None:
        """Validate."""
        if self.scenario not in C.Scenario:
            raise InvalidConfigurationError(
                f"unknown scenario {self.scenario!r}", key="scan.scenario"
            )
        if self.points is not None and self.points < 2:
            raise InvalidConfigurationError("need at least 2 points", key="scan.points")
        if self.t_points < 2:
            raise InvalidConfigurationError("need at least 2 points", key="scan.t_points")
        if self.spacing not in SPACINGS:
            raise InvalidConfigurationError(
                f"must be one of {SPACINGS}", key="scan.spacing"
            )
        if not self.t_stop > 0:
            raise InvalidConfigurationError("must be positive", key="scan.t_stop")
        if self.jobs < 1:
            raise InvalidConfigurationError("must be >= 1", key="jobs")
        if not self.rel_tol > 0:
            raise InvalidConfigurationError("must be positive", key="rel_tol")

    @property
    def integrator(self) -> IntegratorConfig:
        """Runge-Kutta settings for density-operator runs."""
        return IntegratorConfig.for_density(rel_tol=self.rel_tol)

    def sweep(
        self, start: float, stop: float, points: int, spacing: Optional[str] = None
    ) -> np.ndarray:
        """Sweep values; explicit fields of the ScanSpec win over the arguments."""
        start = start if self.start is None else self.start
        stop = stop if self.stop is None else self.stop
        points = points if self.points is None else self.points
        spacing = spacing or self.spacing
        if spacing == "log":
            if start <= 0 or stop <= 0:
                raise InvalidConfigurationError(
                    "log spacing needs a positive range", key="scan.start"
                )
            return np.geomspace(start, stop, points)
        return np.linspace(start, stop, points)


@std_dataclass
class ScanResult(DataClassJSONSerializeMixin):
    """A rectangular table with provenance.

    `x`, `y` and `group` name the columns of the default line plot; rows that
    share the `group` columns form one curve.
    """

    scenario: str
    columns: List[str]
    rows: List[List[float]]
    provenance: Dict[str, str] = field(default_factory=dict)
    x: Optional[str] = None
    y: List[str] = field(default_factory=list)
    group: List[str] = field(default_factory=list)
    log_x: bool = False

    def __post_init__(self) -> None:
        """Check the table is rectangular and the plot columns exist."""
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise InvalidDimensionError(
                    f"row {i} has {len(row)} values, expected {width}"
                )
        for name in [self.x, *self.y, *self.group]:
            if name is not None and name not in self.columns:
                raise InvalidDimensionError(f"unknown column {name!r}")

    def column(self, name: str) -> np.ndarray:
        """One column as an array."""
        if name not in self.columns:
            raise KeyError(name)
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows], dtype=float)

    @property
    def flagged(self) -> int:
        """Rows whose evaluation failed."""
        if "ok" not in self.columns:
            return 0
        return int(np.sum(self.column("ok") == 0))

    @property
    def max_trunc_pop(self) -> float:
        """Largest truncation guard value in the table."""
        if "trunc_pop" not in self.columns:
            return 0.0
        values = self.column("trunc_pop")
        values = values[np.isfinite(values)]
        return float(values.max()) if values.size else 0.0

    def peaks(self, y: Optional[str] = None) -> List[Dict[str, float]]:
        """Maximum of `y` (default the first plotted column) per curve, with its x."""
        y = y or (self.y[0] if self.y else None)
        if self.x is None or y is None:
            return []
        xs, ys = self.column(self.x), self.column(y)
        keys = [self.columns.index(g) for g in self.group]
        curves: Dict[tuple, List[int]] = {}
        for i, row in enumerate(self.rows):
            curves.setdefault(tuple(row[k] for k in keys), []).append(i)
        peaks = []
        for key, idx in curves.items():
            values = ys[idx]
            if not np.any(np.isfinite(values)):
                continue
            best = idx[int(np.nanargmax(values))]
            peaks.append(
                {**dict(zip(self.group, key)), self.x: xs[best], y: ys[best]}
            )
        return peaks


def config_hash(payload: Dict[str, Any]) -> str:
    """Short sha256 of a canonical JSON rendering."""

    def _default(o: Any) -> Any:
        if isinstance(o, np.generic):
            return o.item()
        return str(o)

    text = json.dumps(payload, sort_keys=True, default=_default)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def provenance(spec: ScanSpec, extra: Optional[Dict[str, Any]] = None) -> Dict[str, str]:
    """Header lines for a result; no timestamps, so reruns stay byte-identical."""
    payload = {
        "spec": {k: v for k, v in vars(spec).items() if not k.startswith("_")},
        "extra": extra or {},
    }
    # jobs does not change the numbers
    payload["spec"].pop("jobs", None)
    return {
        "scenario": spec.scenario,
        "config_hash": config_hash(payload),
        "version": __version__,
        "rel_tol": f"{spec.rel_tol:g}",
        "truncation_tol": f"{C.Tolerance.TRUNCATION:g}",
        "time_resolution": f"{C.Tolerance.TIME_RESOLUTION:g}",
    }


def finite_or_nan(value: Any) -> float:
    """Float cell value; None becomes NaN."""
    if value is None:
        return math.nan
    return float(value)
