"""Cavity MS models.

Parameter objects (drive settings, derived gate parameters, scan
descriptions) are validated pydantic dataclasses at runtime. Type checkers see
plain dataclasses.

"""

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from dataclasses import dataclass
else:
    from pydantic.dataclasses import dataclass

__all__ = ["dataclass"]
