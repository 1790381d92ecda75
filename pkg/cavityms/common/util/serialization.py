"""Custom serialization utilities."""

from __future__ import annotations

import json
import math
from typing import Any, TypeVar

from mashumaro.mixins.json import DataClassJSONMixin

S = TypeVar("S", bound="DataClassJSONSerializeMixin")


def _finite(o: Any) -> Any:
    """Replace non-finite floats with None so the output stays strict JSON."""
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    return o


class DataClassJSONSerializeMixin(DataClassJSONMixin):
    """JSON serialization mixin for result and report dataclasses."""

    def serialize(self) -> bytes:
        """Serialize into compact, key-sorted UTF-8 JSON."""
        return self.dumps(indent=None).encode("utf-8")

    def dumps(self, indent: int | None = 2) -> str:
        """Serialize into a deterministic JSON string."""
        return json.dumps(
            _finite(self.to_dict()),
            indent=indent,
            sort_keys=True,
            separators=(",", ":") if indent is None else (",", ": "),
        )

    @classmethod
    def deserialize(cls: type[S], data: bytes) -> S:
        """Turn bytes into dataclass."""
        return cls.from_dict(json.loads(data.decode("utf-8")))
