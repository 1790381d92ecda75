"""CSV and SVG output.

Both writers are deterministic: the same `ScanResult` always produces the
same bytes.
"""

from __future__ import annotations

import logging
import math
import os
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  pylint: disable=wrong-import-position

from cavityms.lib.common.exception import InvalidConfigurationError, OutputError  # noqa: E402
from cavityms.lib.harness.spec import ScanResult  # noqa: E402

logger = logging.getLogger(__name__)

CSV_FORMAT = "{:.12g}"
PROVENANCE_PREFIX = "# "
_SVG_RC = {"svg.hashsalt": "cavityms", "svg.fonttype": "none"}


def format_value(value: float) -> str:
    """12 significant digits; NaN as `nan`."""
    if math.isnan(value):
        return "nan"
    return CSV_FORMAT.format(value)


def render_csv(result: ScanResult) -> str:
    """CSV text: provenance comments, header, one line per row, LF endings."""
    lines = [f"{PROVENANCE_PREFIX}{k}: {v}" for k, v in sorted(result.provenance.items())]
    lines.append(",".join(result.columns))
    lines.extend(",".join(format_value(v) for v in row) for row in result.rows)
    return "\n".join(lines) + "\n"


def _write(path: Path, data: str) -> Path:
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf8", newline="\n") as f:
            f.write(data)
    except OSError as e:
        raise OutputError(str(path), e.strerror or str(e)) from e
    logger.debug("wrote %s", path)
    return path


def emit_csv(result: ScanResult, path: str | os.PathLike) -> Path:
    """Write the table as CSV."""
    return _write(Path(path), render_csv(result))


def read_csv(path: str | os.PathLike, scenario: str = "") -> ScanResult:
    """Parse a file written by `emit_csv`."""
    provenance: Dict[str, str] = {}
    columns: Optional[List[str]] = None
    rows: List[List[float]] = []
    try:
        with open(path, "r", encoding="utf8") as f:
            for line in f:
                line = line.rstrip("\n")
                if line.startswith(PROVENANCE_PREFIX):
                    key, _, value = line[len(PROVENANCE_PREFIX):].partition(": ")
                    provenance[key] = value
                elif columns is None:
                    columns = line.split(",")
                elif line:
                    rows.append([float(v) for v in line.split(",")])
    except OSError as e:
        raise OutputError(str(path), e.strerror or str(e)) from e
    except ValueError as e:
        raise InvalidConfigurationError(f"{path}: {e}") from e
    if columns is None:
        raise InvalidConfigurationError(f"{path}: no header line")
    return ScanResult(
        scenario=provenance.get("scenario", scenario),
        columns=columns,
        rows=rows,
        provenance=provenance,
    )


def _curves(
    result: ScanResult, x: str, group: Sequence[str]
) -> List[Tuple[str, List[int]]]:
    """Row indices per curve, curves in order of first appearance."""
    keys = [result.columns.index(g) for g in group]
    curves: Dict[Tuple[float, ...], List[int]] = {}
    for i, row in enumerate(result.rows):
        curves.setdefault(tuple(row[k] for k in keys), []).append(i)
    labelled = []
    for key, idx in curves.items():
        label = ", ".join(f"{g}={format_value(v)}" for g, v in zip(group, key))
        labelled.append((label, idx))
    return labelled


def emit_svg_lineplot(
    result: ScanResult,
    path: str | os.PathLike,
    x: Optional[str] = None,
    y: Optional[Sequence[str]] = None,
) -> Path:
    """Line plot of `y` against `x`, one line per group and y column."""
    x = x or result.x
    y = list(y or result.y)
    if x is None or not y:
        raise InvalidConfigurationError(f"{result.scenario} has no default plot")
    xs = result.column(x)
    ys = {name: result.column(name) for name in y}

    path = Path(path)
    with matplotlib.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for label, idx in _curves(result, x, result.group):
            for name in y:
                name_label = name if len(y) > 1 or not label else ""
                text = ", ".join(filter(None, (label, name_label)))
                ax.plot(xs[idx], ys[name][idx], label=text or None)
        ax.set_xlabel(x)
        ax.set_ylabel(", ".join(y))
        if result.log_x:
            ax.set_xscale("log")
        if ax.get_legend_handles_labels()[1]:
            ax.legend(fontsize="small")
        ax.set_title(result.scenario)
        try:
            if path.parent and not path.parent.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise OutputError(str(path), e.strerror or str(e)) from e
        finally:
            plt.close(fig)
    logger.debug("wrote %s", path)
    return path
