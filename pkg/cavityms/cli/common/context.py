"""Cavity MS CLI context."""

from __future__ import annotations

from typing import Generic, TypeVar

import typer

from cavityms.lib.common.settings import FileBackedConfig, Settings

T = TypeVar("T", bound=FileBackedConfig)


class TyperContext(typer.Context, Generic[T]):
    """Base typer context all cavityms app contexts should inherit.

    Attributes:
        obj (T): tool settings loaded by the global callback

    """

    obj: T


class SettingsContext(TyperContext[Settings]):
    """Typer context carrying `Settings`."""
