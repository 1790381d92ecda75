"""Logging utilities."""

from __future__ import annotations

import logging
from functools import wraps
from time import monotonic as time_
from typing import Any, Callable, Generic, TypeVar, overload

from rich.logging import RichHandler
from termcolor import colored

F = TypeVar("F", bound=Callable)
T = TypeVar("T")
logger = logging.getLogger(__name__)

ROOT_LOGGER = "cavityms"
_REPR_LIMIT = 200


class _Unset(Generic[T]):
    """An attribute that must be assigned before it is read."""

    def __set_name__(self, owner: type, name: str) -> None:
        self._name = name

    def __get__(self, obj: object | None, objtype: type) -> T:
        raise RuntimeError(f"{objtype.__name__}.{self._name} read before set")


def setup_logging(verbose: bool = False) -> None:
    """Route cavityms logs through a rich handler.

    Args:
        verbose (bool): log at DEBUG instead of WARNING.

    """
    root = logging.getLogger(ROOT_LOGGER)
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        root.addHandler(RichHandler(show_path=verbose, rich_tracebacks=verbose))


@overload
def log_func(
    func: None = None,
    *,
    logger_: logging.Logger = logger,
    log_level: int = logging.DEBUG,
    template: str = "",
    func_input: bool = True,
    func_output: bool = True,
    func_exception: bool = True,
    time: bool = True,
) -> Callable[[F], F]:
    ...


@overload
def log_func(func: F) -> F:
    ...


def log_func(
    func: F | None = None,
    *,
    logger_: logging.Logger = logger,
    log_level: int = logging.DEBUG,
    template: str = "",
    func_input: bool = True,
    func_output: bool = True,
    func_exception: bool = True,
    time: bool = True,
) -> F | Callable[[F], F]:
    """Log a function for its input, output and wall time.

    Array-valued arguments and results are abbreviated so that a logged
    integration does not dump whole density matrices.
    """

    def _inner_decorator(func: F) -> F:
        name = template or func.__qualname__

        @wraps(func)
        def _wrapper(*args, **kwargs):
            ctx = _LogContext(
                logger_,
                log_level,
                name,
                func_input,
                func_output,
                func_exception,
                time,
            )
            ctx.input_args = (args, kwargs)
            with ctx:
                ctx.ret = func(*args, **kwargs)
                return ctx.ret

        return _wrapper  # type: ignore

    if func is not None:
        return _inner_decorator(func)

    return _inner_decorator


def _abbreviate(obj: Any) -> str:
    shape = getattr(obj, "shape", None)
    if shape is not None and len(shape) > 0:
        return f"<array {shape} {getattr(obj, 'dtype', '')}>"
    if isinstance(obj, (tuple, list)):
        inner = ", ".join(_abbreviate(o) for o in obj)
        return f"({inner})" if isinstance(obj, tuple) else f"[{inner}]"
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{k}={_abbreviate(v)}" for k, v in obj.items()) + "}"
    text = repr(obj)
    if len(text) > _REPR_LIMIT:
        text = text[:_REPR_LIMIT] + "..."
    return text


# pylint: disable=too-many-instance-attributes
class _LogContext:

    input_args: _Unset[Any] = _Unset()
    ret: _Unset[Any] = _Unset()

    # pylint: disable=too-many-arguments
    def __init__(
        self,
        logger_: logging.Logger,
        log_level: int,
        template: str,
        func_input: bool,
        func_output: bool,
        func_exception: bool,
        time: bool,
    ) -> None:
        """Initialize."""
        self.logger_ = logger_
        self.log_level = log_level
        self.template = template
        self.func_input = func_input
        self.func_output = func_output
        self.func_exception = func_exception
        self.time = time

        self.start_time = 0.0

    def __enter__(self) -> _LogContext:
        if self._enabled(self.func_input):
            self._log("called with", "%s %s", _abbreviate(self.input_args))
        self.start_time = time_()
        return self

    def __exit__(self, exc_type: Any, *_) -> None:
        if self._enabled(self.time):
            self._log("took", "%s %f seconds", time_() - self.start_time)
        if exc_type is None:
            if self._enabled(self.func_output):
                self._log("returned with", "%s %s", _abbreviate(self.ret))
            return

        if self._enabled(self.func_exception):
            self._log("raised error", "%s", exc_info=True)

    def _enabled(self, cond: bool) -> bool:
        return cond and self.logger_.isEnabledFor(self.log_level)

    def _log(self, detail: str, log_msg: str, *args: Any, **kw: Any) -> None:
        header = colored(f"[{self.template}] {detail}", "yellow")
        self.logger_.log(self.log_level, log_msg, header, *args, **kw)
