"""Implement Config class."""

from __future__ import annotations

from copy import deepcopy
from typing import Any, Dict, Iterator, List, Tuple, TypeVar, Union

JSONType = Union[str, int, float, bool, None, Dict[str, Any], List[Any]]

_MISSING = object()


def _parse_key_string(key: str) -> list[str]:
    if not key:
        raise KeyError(key)
    return key.split(".")


T = TypeVar("T", bound="Config")


class Config(dict):
    """Nested dictionary.

    Used for simulation configurations.
    Keys express nested dict, seperated by '.'
    E.g. "drive.omega1"
    """

    def query(self, key: str, default: Any = _MISSING) -> JSONType:
        """Query a value.

        config.query("system")  # config["system"]
        config.query("drive.g")  # config["drive"]["g"]

        Raises:
            KeyError: if key does not exist and no default is given

        Returns:
            JSONType: a json-like value

        """
        dest: Any = self
        try:
            for k in _parse_key_string(key):
                if not isinstance(dest, dict):
                    raise KeyError(key)
                dest = dest[k]
        except KeyError:
            if default is _MISSING:
                raise
            return default
        if isinstance(dest, dict):
            return Config(**dest)
        return dest

    def add(self, key: str, value: JSONType) -> None:
        """Add a value to config.

        Args:
            key (str): config key
            value (JSONType): json-like value

        Raises:
            KeyError: if key already exists

        """
        dest, last_key = self._parse_key(key)
        if last_key in dest:
            raise KeyError(key)
        dest[last_key] = value

    def update_key(self, key: str, value: JSONType) -> None:
        """Set a value, replacing any existing one."""
        dest, last_key = self._parse_key(key)
        dest[last_key] = value

    def remove(self, key: str) -> None:
        """Remove a subconfig.

        Raises:
            KeyError: if key does not exist

        """
        dest, last_key = self._parse_key(key)
        if last_key not in dest:
            raise KeyError(key)
        del dest[last_key]

    def flatten(self) -> Iterator[tuple[str, JSONType]]:
        """Yield (dotted key, leaf value) pairs in insertion order."""

        def _walk(prefix: str, node: dict) -> Iterator[tuple[str, JSONType]]:
            for k, v in node.items():
                path = f"{prefix}.{k}" if prefix else k
                if isinstance(v, dict):
                    yield from _walk(path, v)
                else:
                    yield path, v

        yield from _walk("", self)

    def copy(self: T) -> T:
        """Create a deepcopy."""
        return deepcopy(self)

    def _parse_key(self, key: str) -> Tuple[dict, str]:
        key_list = _parse_key_string(key)
        last_key = key_list[-1]

        dest: dict = self
        for k in key_list[:-1]:
            if k not in dest:
                dest[k] = {}
            dest = dest[k]
            if not isinstance(dest, dict):
                raise KeyError(key)

        return dest, last_key
