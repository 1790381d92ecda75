"""Functool utilities.

Used by the CLI to share option groups (`--out`, `--jobs`, `--tol`) between
commands without repeating the typer declarations.
"""

from __future__ import annotations

import inspect
import sys
import types
from dataclasses import MISSING, dataclass
from functools import update_wrapper
from inspect import Parameter, Signature, signature
from types import MappingProxyType
from typing import Any, Callable, Mapping, get_type_hints

ARG_GROUP_KEY = "__ARG_GROUP__"


def arg_group(t: type) -> type:
    """Turn a class into an argument group (a dataclass of typer options)."""
    t = dataclass(t)
    setattr(t, ARG_GROUP_KEY, "")
    return t


def is_arg_group(t: Any) -> bool:
    """Return true if this is an argument group."""
    return isinstance(t, type) and hasattr(t, ARG_GROUP_KEY)


def _global_namespace(f: Callable) -> dict[str, Any]:
    ns = sys.modules[f.__module__].__dict__.copy()
    ns.setdefault(f.__name__, f)
    return ns


def _caller_locals() -> Mapping[str, Any]:
    """Locals of whoever called the function that calls this one."""
    frame = inspect.currentframe()
    assert frame and frame.f_back and frame.f_back.f_back
    try:
        return MappingProxyType(frame.f_back.f_back.f_locals)
    finally:
        del frame


def expand_arg_group(f: Callable) -> Callable:
    """Expand argument-group parameters into one parameter per field.

    Examples:
        >>> @arg_group
            class Group:
                a: int
                b: float = 1.0

        >>> @expand_arg_group
            def func(g: Group): ...

        >>> # typer sees `def func(a: int, b: float = 1.0)`; the body still
        >>> # receives `g=Group(a, b)`.

    """
    annotation = get_type_hints(f, _global_namespace(f), dict(_caller_locals()))
    groups = {name: arg for name, arg in annotation.items() if is_arg_group(arg)}
    group_fields = {
        name: getattr(arg, "__dataclass_fields__") for name, arg in groups.items()
    }

    parameters = []
    annotations = dict(f.__annotations__)
    for param in signature(f).parameters.values():
        if param.name not in group_fields:
            parameters.append(param)
            continue
        del annotations[param.name]
        for field in group_fields[param.name].values():
            param_kw = {"name": field.name, "kind": param.kind, "annotation": field.type}
            if field.default is not MISSING:
                param_kw["default"] = field.default
            parameters.append(Parameter(**param_kw))
            annotations[field.name] = field.type

    new_sig = Signature(parameters, return_annotation=signature(f).return_annotation)

    def _group_arguments(*args, **kwargs) -> dict:
        bound = new_sig.bind(*args, **kwargs)
        bound.apply_defaults()
        arguments = bound.arguments
        for group_name, fields in group_fields.items():
            values = {name: arguments.pop(name) for name in fields}
            arguments[group_name] = groups[group_name](**values)
        return arguments

    @full_wraps(f)
    def _wrapper(*args, **kwargs):
        return f(**_group_arguments(*args, **kwargs))

    setattr(_wrapper, "__annotations__", annotations)
    setattr(_wrapper, "__signature__", new_sig)
    return _wrapper


def full_wraps(wrapped: Callable) -> Callable:
    """Like functools.wraps, but the wrapper also sees the wrapped globals.

    typer resolves string annotations through `func.__globals__`, so the
    wrapper must be able to see the names the wrapped module imported.
    """

    def _full_wraps(wrapper: Callable) -> Callable:
        globalns = {**getattr(wrapped, "__globals__"), **getattr(wrapper, "__globals__")}
        new_wrapper = types.FunctionType(
            wrapper.__code__,
            globalns,
            name=wrapped.__name__,
            argdefs=getattr(wrapped, "__defaults__"),
            closure=getattr(wrapper, "__closure__"),
        )
        new_wrapper = update_wrapper(new_wrapper, wrapped)
        setattr(new_wrapper, "__kwdefaults__", getattr(wrapped, "__kwdefaults__"))
        return new_wrapper

    return _full_wraps
