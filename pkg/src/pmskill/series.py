"""Daily time-series data model, CSV ingestion and summary statistics.

A :class:`TimeSeries` is a gap-free calendar index: entry ``i`` is the
observation for ``start_date + i`` days, and dates without a measurement
hold NaN. Negative concentrations are rejected at CSV ingestion; an
in-memory series may carry them so that quality filtering has something
to remove.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DomainError,
    DuplicateDateError,
    EmptyInputError,
    FormatError,
    RangeError,
)

ONE_DAY = dt.timedelta(days=1)


def _as_value_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise DomainError("series values must be one-dimensional")
    if np.isinf(arr).any():
        raise DomainError("series values must be finite or missing (NaN)")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Calendar-indexed daily values with NaN marking missing days."""

    start_date: dt.date
    values: np.ndarray
    name: str = "pm10"

    def __post_init__(self):
        object.__setattr__(self, "values", _as_value_array(self.values))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def end_date(self) -> dt.date:
        if len(self) == 0:
            raise EmptyInputError("empty series has no end date")
        return self.start_date + dt.timedelta(days=len(self) - 1)

    @property
    def present_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def present_count(self) -> int:
        return int(self.present_mask.sum())

    def dates(self) -> np.ndarray:
        start = np.datetime64(self.start_date.isoformat(), "D")
        return start + np.arange(len(self))

    def index_of(self, date: dt.date) -> int:
        idx = (date - self.start_date).days
        if idx < 0 or idx >= len(self):
            raise RangeError(f"{date} outside series range "
                             f"[{self.start_date}, {self.end_date}]")
        return idx

    def date_at(self, index: int) -> dt.date:
        return self.start_date + dt.timedelta(days=int(index))

    def value_at(self, date: dt.date) -> float:
        return float(self.values[self.index_of(date)])

    def up_to(self, date: dt.date) -> "TimeSeries":
        """Sub-series of all dates <= ``date`` (the forecast information set)."""
        idx = (date - self.start_date).days
        if idx < 0:
            raise RangeError(f"{date} precedes the series start")
        return replace(self, values=self.values[: min(idx + 1, len(self))])

    def before(self, date: dt.date) -> "TimeSeries":
        """Sub-series of all dates strictly before ``date``."""
        idx = (date - self.start_date).days
        if idx <= 0:
            raise RangeError(f"no data before {date}")
        return replace(self, values=self.values[: min(idx, len(self))])

    def with_values(self, values) -> "TimeSeries":
        return replace(self, values=values)

    def last_present(self) -> tuple[dt.date, float]:
        """Most recent present observation (date, value)."""
        idx = np.flatnonzero(self.present_mask)
        if idx.size == 0:
            raise EmptyInputError(f"series {self.name!r} has no present value")
        i = int(idx[-1])
        return self.date_at(i), float(self.values[i])


@dataclass(frozen=True)
class CsvSpec:
    """Column/format description for CSV ingestion and writing."""

    date_column: str = "date"
    value_column: str = "value"
    name: str | None = None


@dataclass(frozen=True)
class QualityPolicy:
    """Validity predicates applied by :func:`quality_filter`."""

    require_nonnegative: bool = True
    require_finite: bool = True
    ceiling: float | None = None  # paper keeps the 218.3 spike: default off


@dataclass(frozen=True)
class FilterReport:
    raw_count: int
    retained_count: int
    retention_fraction: float
    per_year_coverage: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class StatsReport:
    mean: float
    median: float
    max: float
    exceedance_fraction: float
    threshold: float
    n_obs: int


@dataclass(frozen=True)
class FeatureTable:
    """Per-date deterministic calendar features, aligned to a TimeSeries."""

    start_date: dt.date
    columns: dict[str, np.ndarray]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.columns.keys())

    def __len__(self) -> int:
        return next(iter(self.columns.values())).shape[0]

    def matrix(self, names=None) -> np.ndarray:
        names = self.names if names is None else tuple(names)
        return np.column_stack([self.columns[n] for n in names])


def load_csv(path, spec: CsvSpec = CsvSpec()) -> TimeSeries:
    """Load a daily CSV export into a gap-free TimeSeries.

    Dates absent from the file become missing entries; empty value cells
    are missing; duplicate dates and negative values abort the load.
    """
    by_date: dict[dt.date, float] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: empty file, header expected")
        for col in (spec.date_column, spec.value_column):
            if col not in reader.fieldnames:
                raise FormatError(f"{path}: missing column {col!r} "
                                  f"(found {reader.fieldnames})")
        for lineno, row in enumerate(reader, start=2):
            raw_date = (row[spec.date_column] or "").strip()
            try:
                date = dt.date.fromisoformat(raw_date)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad date {raw_date!r}") from exc
            if date in by_date:
                raise DuplicateDateError(f"{path}:{lineno}: duplicate date {date}")
            raw_val = (row[spec.value_column] or "").strip()
            if raw_val == "":
                by_date[date] = math.nan
                continue
            try:
                value = float(raw_val)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad value {raw_val!r}") from exc
            if math.isnan(value) or math.isinf(value):
                raise FormatError(f"{path}:{lineno}: non-finite value {raw_val!r}")
            if value < 0:
                raise DomainError(f"{path}:{lineno}: negative concentration {value}")
            by_date[date] = value
    if not by_date:
        raise EmptyInputError(f"{path}: no data rows")
    start = min(by_date)
    n = (max(by_date) - start).days + 1
    values = np.full(n, np.nan)
    for date, value in by_date.items():
        values[(date - start).days] = value
    name = spec.name or spec.value_column
    return TimeSeries(start_date=start, values=values, name=name)


def write_csv(series: TimeSeries, path, spec: CsvSpec = CsvSpec()) -> None:
    """Write a TimeSeries in the ingestion format (exact round-trip)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([spec.date_column, spec.value_column])
        date = series.start_date
        for value in series.values:
            # repr() keeps the shortest exact float representation
            cell = "" if math.isnan(value) else repr(float(value))
            writer.writerow([date.isoformat(), cell])
            date += ONE_DAY


def quality_filter(series: TimeSeries,
                   policy: QualityPolicy = QualityPolicy()
                   ) -> tuple[TimeSeries, FilterReport]:
    """Mask entries failing the policy; passing values are untouched."""
    values = series.values
    present = series.present_mask
    valid = present.copy()
    if policy.require_finite:
        valid &= np.isfinite(values) | ~present
    if policy.require_nonnegative:
        valid &= ~(values < 0)
    if policy.ceiling is not None:
        valid &= ~(values > policy.ceiling)
    out = values.copy()
    out[present & ~valid] = np.nan
    filtered = series.with_values(out)

    raw = int(present.sum())
    retained = int((present & valid).sum())
    fraction = retained / raw if raw else 1.0
    coverage: dict[int, float] = {}
    years = series.dates().astype("datetime64[Y]").astype(int) + 1970
    kept = present & valid
    for year in np.unique(years):
        in_year = years == year
        coverage[int(year)] = float(kept[in_year].sum() / in_year.sum())
    return filtered, FilterReport(raw, retained, fraction, coverage)


def summary_stats(series: TimeSeries, threshold: float = 50.0) -> StatsReport:
    present = series.values[series.present_mask]
    if present.size == 0:
        raise EmptyInputError("summary_stats needs at least one present value")
    return StatsReport(
        mean=float(present.mean()),
        median=float(np.median(present)),
        max=float(present.max()),
        exceedance_fraction=float((present > threshold).sum() / present.size),
        threshold=float(threshold),
        n_obs=int(present.size),
    )


def calendar_features(series: TimeSeries) -> FeatureTable:
    """Day-of-week, month and (sin, cos) day-of-year encoding per date.

    A deterministic function of the calendar only; series values never
    enter. Day-of-year runs 1..365/366 and the angle is 2*pi*doy/year_len.
    """
    days = series.dates()
    epoch = days.astype(np.int64)
    dow = (epoch + 3) % 7  # 1970-01-01 was a Thursday; Monday = 0
    years = days.astype("datetime64[Y]")
    month = (days.astype("datetime64[M]") - years.astype("datetime64[M]")
             ).astype(np.int64) + 1
    doy = (days - years.astype("datetime64[D]")).astype(np.int64) + 1
    y = years.astype(np.int64) + 1970
    leap = ((y % 4 == 0) & (y % 100 != 0)) | (y % 400 == 0)
    year_len = np.where(leap, 366.0, 365.0)
    angle = 2.0 * np.pi * doy / year_len
    return FeatureTable(
        start_date=series.start_date,
        columns={
            "day_of_week": dow.astype(np.float64),
            "month": month.astype(np.float64),
            "doy_sin": np.sin(angle),
            "doy_cos": np.cos(angle),
        },
    )
