"""Shared model-facing types."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from ..errors import NumericError


@dataclass(frozen=True)
class ForecastVector:
    """Multi-step forecast issued from one origin.

    ``values[h-1]`` targets ``origin_date + h`` days; every entry is finite.
    """

    origin_date: dt.date
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise NumericError("forecast vector must be a non-empty 1-d array")
        if not np.isfinite(arr).all():
            raise NumericError(
                f"non-finite forecast from origin {self.origin_date}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def h_max(self) -> int:
        return self.values.shape[0]

    def target_date(self, h: int) -> dt.date:
        return self.origin_date + dt.timedelta(days=h)
