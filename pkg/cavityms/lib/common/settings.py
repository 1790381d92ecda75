"""File-backed tool settings.

Settings are read from a small JSON file and may be overridden per variable
from the environment (`<PREFIX>_<NAME>`). Command line flags win over both.

"""

from __future__ import annotations

import json
import os
import sys
from collections import ChainMap
from secrets import token_hex
from typing import Any, Mapping, TypeVar, Union, get_type_hints

from cavityms.common import constant as C

T = TypeVar("T", bound="FileBackedConfig")


def _global_namespace(cls: type) -> dict[str, Any]:
    ns = sys.modules[cls.__module__].__dict__.copy()
    ns.setdefault(cls.__name__, cls)
    return ns


class FileBackedConfig:
    """Save/load configuration to/from a persistent json file."""

    _defaults: dict[str, Any]

    @classmethod
    def load(cls: type[T], file_path: str | os.PathLike | None = None) -> T:
        """Load configuration from file (a missing file means defaults)."""
        return cls(str(file_path or C.SETTINGS_FILE))

    def __init_subclass__(cls) -> None:
        """Turn annotated class attributes into properties."""
        annotations = get_type_hints(cls, globalns=_global_namespace(cls))

        defaults = {}
        for attr_name, type_annotation in annotations.items():
            if attr_name.startswith("_"):
                continue
            if not hasattr(cls, attr_name):
                raise TypeError(
                    f"Configuration has missing default value for {attr_name}"
                )
            default = getattr(cls, attr_name)
            defaults[attr_name] = default
            setattr(cls, attr_name, create_property(attr_name, type_annotation))

        cls._defaults = defaults

    def __init__(self, file_path: str) -> None:
        """Initialize."""
        self._file_path = file_path
        self._config: dict[str, Any] = {}
        self._env_overrides: dict[str, Any] = {}

        self._load_from_file()

        meta = getattr(self, "Meta", type("Meta", (), {}))
        env_prefix = getattr(meta, "prefix", "")

        for attr_name in self._defaults:
            env = f"{env_prefix}_{attr_name}".upper()
            if env in os.environ:
                type_annotation = self._annotations()[attr_name]
                self._env_overrides[attr_name] = parse_value(
                    type_annotation, os.environ[env]
                )

    @classmethod
    def _annotations(cls) -> dict[str, Any]:
        return get_type_hints(cls, globalns=_global_namespace(cls))

    def set_from_string(self, key: str, raw_value: str) -> None:
        """Set a known key from its string form.

        Raises:
            KeyError: unknown key

        """
        if key not in self._defaults:
            raise KeyError(key)
        self._config[key] = parse_value(self._annotations()[key], raw_value)

    def save(self) -> None:
        """Save configuration.

        Atomic write via write & rename.
        """
        config_dir = os.path.dirname(self._file_path)
        if config_dir:
            os.makedirs(config_dir, exist_ok=True)
        temp_path = f"{self._file_path}.{token_hex(10)}"
        with open(temp_path, "w", encoding="utf8") as f:
            json.dump(self._config, f, sort_keys=True)
        os.replace(temp_path, self._file_path)

    def to_dict(self) -> Mapping[str, Any]:
        """Return the effective configuration dictionary."""
        return dict(ChainMap(self._env_overrides, self._config, self._defaults))

    def __eq__(self, other: object) -> bool:
        """Return true if two configuration objects are equal."""
        if not isinstance(other, FileBackedConfig):
            return NotImplemented

        return self.to_dict() == other.to_dict()

    def __str__(self) -> str:
        """Return string representation."""
        return str(self.to_dict())

    __repr__ = __str__

    def _load_from_file(self) -> None:
        if not os.path.exists(self._file_path):
            return

        with open(self._file_path, "r", encoding="utf8") as f:
            self._config = json.load(f)


# pylint: disable=protected-access
def create_property(attr: str, type_annotation: Any) -> property:
    """Return a property descriptor given config attribute."""

    def fget(self) -> Any:
        if attr in self._env_overrides:
            return self._env_overrides[attr]
        if attr in self._config:
            return self._config[attr]
        return self._defaults[attr]

    def fset(self, value: Any) -> None:
        self._config[attr] = value

    def fdel(self) -> None:
        self._config.pop(attr, None)

    doc = f"Configuration {attr}[{type_annotation}]"
    return property(fget, fset, fdel, doc)


def parse_value(type_: object, raw_value: str) -> Any:
    """Given stringified value, convert into python object."""
    if isinstance(type_, type):
        return type_(raw_value)

    origin = getattr(type_, "__origin__", None)
    args = getattr(type_, "__args__", ())

    # Optional[~]
    if origin is not Union or len(args) != 2 or args[-1] is not type(None):
        raise TypeError(type_)

    if raw_value == "null":
        return None

    return args[0](raw_value)


class Settings(FileBackedConfig):
    """Defaults for the command line tool.

    Attributes:
        jobs: worker processes for scenario sweeps
        out_dir: directory receiving CSV/SVG outputs
        rel_tol: relative tolerance for Runge-Kutta integrations

    """

    jobs: int = 1
    out_dir: str = "."
    rel_tol: float = 1e-8

    class Meta:
        """Environment overrides use CAVITY_MS_<NAME>."""

        prefix = C.CLIEnv.PREFIX
