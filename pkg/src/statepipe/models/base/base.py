"""
Base models for Statepipe.

StatepipeBaseModel is the foundation for every immutable domain type;
ArrayModel extends it for types that carry numpy matrices.
"""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict


class StatepipeBaseModel(BaseModel):
    """
    Shared configuration for all Statepipe domain models.

    Domain values are immutable after construction and safe to share across
    threads, so every model is frozen and rejects unknown fields.
    """

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        validate_default=True,
    )


class ArrayModel(StatepipeBaseModel):
    """
    Base for models holding numpy arrays.

    Arrays are copied and flagged read-only by subclass validators; equality
    compares arrays elementwise instead of relying on the dict comparison
    pydantic uses by default.
    """

    model_config = StatepipeBaseModel.model_config | ConfigDict(
        arbitrary_types_allowed=True,
    )

    def __eq__(self, other: object) -> bool:
        """Compare field by field, arrays by shape, dtype and content."""
        if type(other) is not type(self):
            return NotImplemented
        for name in type(self).model_fields:
            mine: Any = getattr(self, name)
            theirs: Any = getattr(other, name)
            if isinstance(mine, np.ndarray) or isinstance(theirs, np.ndarray):
                if not (
                    isinstance(mine, np.ndarray)
                    and isinstance(theirs, np.ndarray)
                    and mine.dtype == theirs.dtype
                    and np.array_equal(mine, theirs)
                ):
                    return False
            elif mine != theirs:
                return False
        return True

    __hash__ = None  # type: ignore[assignment]


def frozen_array(value: Any, dtype: np.dtype | type, ndim: int) -> np.ndarray:  # noqa: ANN401
    """Copy value into a read-only array of the given dtype and rank."""
    array = np.array(value, dtype=dtype, copy=True)
    if array.ndim != ndim:
        msg = f"expected a {ndim}-D array, got shape {array.shape}"
        raise ValueError(msg)
    array.setflags(write=False)
    return array
