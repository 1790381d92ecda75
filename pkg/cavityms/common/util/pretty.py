"""Utilities for pretty printing."""

from __future__ import annotations

from typing import Any, Callable, Mapping, Sequence

from tabulate import tabulate

_FLOAT_FORMAT = "{:.6g}"


def tabulate_rows(rows: Sequence[Sequence[Any]], headers: Sequence[str]) -> str:
    """Format a list of rows into a table."""
    data = [[_format_cell(cell) for cell in row] for row in rows]
    return tabulate(data, headers=list(headers))


def tabulate_mapping(mapping: Mapping[str, Any], headers=("name", "value")) -> str:
    """Format a flat mapping as a two column table."""
    return tabulate_rows(list(mapping.items()), headers)


def _format_cell(cell: Any) -> str:
    return _format_factory(cell)(cell)


def _format_factory(cell: Any) -> Callable[[Any], str]:
    if isinstance(cell, bool):
        return _format_bool
    if isinstance(cell, complex):
        return _format_complex
    if isinstance(cell, float):
        return _format_float
    if isinstance(cell, (list, tuple)):
        return _format_sequence
    return str


def _format_bool(o: bool) -> str:
    return "pass" if o else "FAIL"


def _format_float(o: float) -> str:
    return _FLOAT_FORMAT.format(o)


def _format_complex(o: complex) -> str:
    return f"{o.real:.6g}{o.imag:+.6g}j"


def _format_sequence(o: Sequence[Any]) -> str:
    item_print_limit = 3

    contract_list = len(o) > item_print_limit
    o = list(o)[:item_print_limit]

    fmt_list = ", ".join(_format_cell(i) for i in o)
    if contract_list:
        fmt_list += " ..."
    return fmt_list
