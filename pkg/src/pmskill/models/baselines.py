"""Naive baselines: lag-1 persistence and seasonal-naive lookup.

Both depend only on observations at or before the forecast origin (the
end of the supplied history).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, EmptyInputError, InsufficientHistoryError
from ..series import TimeSeries
from .base import ForecastVector


def _last_present_value(history: TimeSeries) -> float:
    try:
        _, value = history.last_present()
    except EmptyInputError as exc:
        raise InsufficientHistoryError(
            "no present observation at or before the origin") from exc
    return value


def persistence_forecast(history: TimeSeries, h_max: int) -> ForecastVector:
    """Repeat the most recent present observation at every horizon."""
    if h_max < 1:
        raise DomainError("h_max must be >= 1")
    value = _last_present_value(history)
    return ForecastVector(history.end_date, np.full(h_max, value))


def seasonal_naive_forecast(history: TimeSeries, period: int,
                            h_max: int) -> ForecastVector:
    """Use the observation one (or more, for h > period) full periods
    before each target date; fall back to persistence where that
    observation is missing."""
    if period < 1:
        raise DomainError("seasonal period must be >= 1")
    if h_max < 1:
        raise DomainError("h_max must be >= 1")
    fallback = _last_present_value(history)
    values = history.values
    origin_idx = len(history) - 1
    out = np.empty(h_max)
    for h in range(1, h_max + 1):
        cycles = -(-h // period)  # ceil: smallest k with h - k*period <= 0
        look = origin_idx + h - cycles * period
        if 0 <= look <= origin_idx and not math.isnan(values[look]):
            out[h - 1] = values[look]
        else:
            out[h - 1] = fallback
    return ForecastVector(history.end_date, out)
