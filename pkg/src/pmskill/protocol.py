"""Evaluation protocols: static splits, rolling-origin folds, train-only
preprocessing and the leakage-safe runner.

A fold is one calendar month of forecast origins. Models are (re)fit on
data strictly before the month; forecasts are then issued from every
valid origin inside it, paired with actuals and the lag-1 persistence
reference. SARIMA coefficients are estimated once on the initial window
and held fixed, with only the filter state advanced; baselines and GBT
refit per fold.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DataError,
    DegenerateScaleError,
    DomainError,
    EmptyInputError,
    FitError,
    FormatError,
    PlanError,
    RangeError,
)
from .models import (
    ForecasterSpec,
    build_supervised,
    default_order_grid,
    feature_row_at,
    gbt_fit,
    sarima_fit,
    sarima_order_select,
    seasonal_naive_forecast,
)
from .models.sarima import SarimaModel, sarima_fold_run, sarima_forecast_at
from .series import TimeSeries

log = logging.getLogger(__name__)

ONE_DAY = dt.timedelta(days=1)

RECORD_COLUMNS = ("fold_id", "origin_date", "h", "model_tag",
                  "forecast", "persistence", "actual")

PREPROC_KINDS = ("none", "standardize", "log1p")

DEFAULT_MIN_TEST = 15  # valid (origin, h=1) pairs required to keep a fold


# ---------------------------------------------------------------------------
# fold planning

@dataclass(frozen=True)
class FoldSpec:
    fold_id: int
    train_end: dt.date   # exclusive
    test_start: dt.date
    test_end: dt.date    # inclusive
    valid_pairs: int     # usable (origin, h=1) pairs in the test range


@dataclass(frozen=True)
class FoldPlan:
    initial_train_end: dt.date
    folds: tuple[FoldSpec, ...]
    h_max: int
    min_test: int
    dropped: tuple[FoldSpec, ...] = ()


def _month_start(date: dt.date) -> dt.date:
    return date.replace(day=1)


def _next_month(date: dt.date) -> dt.date:
    if date.month == 12:
        return dt.date(date.year + 1, 1, 1)
    return dt.date(date.year, date.month + 1, 1)


def count_valid_pairs(series: TimeSeries, start: dt.date,
                      end: dt.date) -> int:
    """Origins in [start, end] with the origin value and its h=1 target
    both present."""
    n = 0
    date = start
    while date <= end:
        nxt = date + ONE_DAY
        if nxt <= series.end_date:
            y0 = series.values[series.index_of(date)]
            y1 = series.values[series.index_of(nxt)]
            if not math.isnan(y0) and not math.isnan(y1):
                n += 1
        date = nxt
    return n


def rolling_folds(series: TimeSeries, initial_train_end: dt.date,
                  h_max: int = 7, min_test: int = DEFAULT_MIN_TEST) -> FoldPlan:
    """Monthly expanding-window folds.

    One candidate fold per calendar month starting with the month of
    ``initial_train_end`` (the next month when it is not a month start),
    through the last month whose first day still admits an h_max-step
    target. Folds with fewer than ``min_test`` valid (origin, h=1) pairs
    are dropped and logged.
    """
    if h_max < 1:
        raise PlanError("h_max must be >= 1")
    if len(series) == 0:
        raise PlanError("empty series")
    if initial_train_end <= series.start_date or initial_train_end > series.end_date:
        raise PlanError(
            f"initial_train_end {initial_train_end} not inside series range "
            f"({series.start_date}, {series.end_date}]")
    month = (initial_train_end if initial_train_end.day == 1
             else _next_month(initial_train_end))
    retained: list[FoldSpec] = []
    dropped: list[FoldSpec] = []
    fold_id = 0
    while month + dt.timedelta(days=h_max) <= series.end_date:
        test_end = min(_next_month(month) - ONE_DAY, series.end_date)
        fold = FoldSpec(
            fold_id=fold_id,
            train_end=month,
            test_start=month,
            test_end=test_end,
            valid_pairs=count_valid_pairs(series, month, test_end),
        )
        if fold.valid_pairs >= min_test:
            retained.append(fold)
        else:
            dropped.append(fold)
            log.info("dropping fold %d (%s): %d valid pairs < min_test %d",
                     fold.fold_id, month, fold.valid_pairs, min_test)
        fold_id += 1
        month = _next_month(month)
    if not retained:
        raise PlanError("no fold satisfies the minimum test-size criterion")
    return FoldPlan(
        initial_train_end=initial_train_end,
        folds=tuple(retained),
        h_max=h_max,
        min_test=min_test,
        dropped=tuple(dropped),
    )


def static_split(series: TimeSeries, boundary: dt.date
                 ) -> tuple[TimeSeries, TimeSeries]:
    """All dates < boundary vs all dates >= boundary."""
    if boundary <= series.start_date or boundary > series.end_date:
        raise RangeError(
            f"boundary {boundary} not strictly inside series range "
            f"[{series.start_date}, {series.end_date}]")
    cut = series.index_of(boundary)
    train = series.with_values(series.values[:cut])
    test = TimeSeries(boundary, series.values[cut:], name=series.name)
    return train, test


def static_plan(series: TimeSeries, boundary: dt.date, h_max: int = 7) -> FoldPlan:
    """The static protocol as a single fold covering the whole test segment."""
    static_split(series, boundary)  # validates the boundary
    fold = FoldSpec(
        fold_id=0,
        train_end=boundary,
        test_start=boundary,
        test_end=series.end_date,
        valid_pairs=count_valid_pairs(series, boundary, series.end_date),
    )
    if fold.valid_pairs < 1:
        raise PlanError("static test segment has no valid (origin, h=1) pair")
    return FoldPlan(
        initial_train_end=boundary,
        folds=(fold,),
        h_max=h_max,
        min_test=1,
    )


# ---------------------------------------------------------------------------
# train-only preprocessing

@dataclass(frozen=True)
class PreprocSpec:
    """Transform with parameters estimated from training data only."""

    kind: str = "none"
    mean: float = 0.0
    scale: float = 1.0
    fitted_through: dt.date | None = None

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        if self.kind == "none":
            return np.asarray(values, dtype=np.float64)
        if self.kind == "standardize":
            return (np.asarray(values, dtype=np.float64) - self.mean) / self.scale
        if self.kind == "log1p":
            return np.log1p(np.asarray(values, dtype=np.float64))
        raise DomainError(f"unknown preprocessing kind {self.kind!r}")

    def invert_values(self, values: np.ndarray) -> np.ndarray:
        if self.kind == "none":
            return np.asarray(values, dtype=np.float64)
        if self.kind == "standardize":
            return np.asarray(values, dtype=np.float64) * self.scale + self.mean
        if self.kind == "log1p":
            return np.expm1(np.asarray(values, dtype=np.float64))
        raise DomainError(f"unknown preprocessing kind {self.kind!r}")

    def apply(self, series: TimeSeries) -> TimeSeries:
        return series.with_values(self.apply_values(series.values))


def fit_preprocessor(train: TimeSeries, kind: str) -> PreprocSpec:
    if kind not in PREPROC_KINDS:
        raise DomainError(f"unknown preprocessing kind {kind!r} "
                          f"(expected one of {PREPROC_KINDS})")
    end = train.end_date if len(train) else None
    if kind == "none":
        return PreprocSpec(kind="none", fitted_through=end)
    present = train.values[train.present_mask]
    if present.size == 0:
        raise EmptyInputError(f"cannot fit {kind!r} on an all-missing window")
    if kind == "standardize":
        scale = float(present.std())
        if scale == 0.0:
            raise DegenerateScaleError("zero variance in the training window")
        return PreprocSpec(kind="standardize", mean=float(present.mean()),
                           scale=scale, fitted_through=end)
    if present.min() <= -1.0:
        raise DomainError("log1p requires values > -1")
    return PreprocSpec(kind="log1p", fitted_through=end)


# ---------------------------------------------------------------------------
# forecast records

@dataclass(frozen=True)
class ForecastRecordSet:
    """Flat per-(fold, origin, horizon, model) records plus provenance."""

    fold_id: np.ndarray
    origin: np.ndarray      # datetime64[D]
    horizon: np.ndarray
    model_tag: np.ndarray
    forecast: np.ndarray
    persistence: np.ndarray
    actual: np.ndarray
    provenance: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return self.fold_id.shape[0]

    @property
    def h_max(self) -> int:
        stated = self.provenance.get("h_max")
        if stated is not None:
            return int(stated)
        return int(self.horizon.max()) if len(self) else 0

    def tags(self) -> tuple[str, ...]:
        seen: list[str] = []
        for tag in self.model_tag:
            if tag not in seen:
                seen.append(str(tag))
        return tuple(seen)

    def for_tag(self, tag: str) -> "ForecastRecordSet":
        mask = self.model_tag == tag
        if not mask.any():
            raise DataError(f"no records for model tag {tag!r}")
        return self._subset(mask)

    def _subset(self, mask) -> "ForecastRecordSet":
        return ForecastRecordSet(
            fold_id=self.fold_id[mask],
            origin=self.origin[mask],
            horizon=self.horizon[mask],
            model_tag=self.model_tag[mask],
            forecast=self.forecast[mask],
            persistence=self.persistence[mask],
            actual=self.actual[mask],
            provenance=self.provenance,
        )

    @staticmethod
    def merge(parts: list["ForecastRecordSet"]) -> "ForecastRecordSet":
        """Concatenate per-model record sets, checking that the actual (and
        persistence) values agree wherever (origin, h) pairs coincide."""
        if not parts:
            raise EmptyInputError("nothing to merge")
        seen: dict[tuple, tuple[float, float]] = {}
        for part in parts:
            for o, h, a, p in zip(part.origin, part.horizon,
                                  part.actual, part.persistence):
                key = (o.astype("datetime64[D]").item(), int(h))
                if key in seen and seen[key] != (float(a), float(p)):
                    raise DataError(
                        f"inconsistent actual/persistence at {key}")
                seen[key] = (float(a), float(p))
        return ForecastRecordSet(
            fold_id=np.concatenate([p.fold_id for p in parts]),
            origin=np.concatenate([p.origin for p in parts]),
            horizon=np.concatenate([p.horizon for p in parts]),
            model_tag=np.concatenate([p.model_tag for p in parts]),
            forecast=np.concatenate([p.forecast for p in parts]),
            persistence=np.concatenate([p.persistence for p in parts]),
            actual=np.concatenate([p.actual for p in parts]),
            provenance={"merged": [p.provenance for p in parts],
                        "h_max": max(p.h_max for p in parts)},
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(RECORD_COLUMNS)
            for i in range(len(self)):
                writer.writerow([
                    int(self.fold_id[i]),
                    str(self.origin[i]),
                    int(self.horizon[i]),
                    str(self.model_tag[i]),
                    repr(float(self.forecast[i])),
                    repr(float(self.persistence[i])),
                    repr(float(self.actual[i])),
                ])

    @classmethod
    def from_csv(cls, path) -> "ForecastRecordSet":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != list(RECORD_COLUMNS):
                raise FormatError(
                    f"{path}: expected columns {list(RECORD_COLUMNS)}, "
                    f"got {header}")
            for row in reader:
                rows.append(row)
        if not rows:
            raise EmptyInputError(f"{path}: no records")
        return cls(
            fold_id=np.array([int(r[0]) for r in rows], dtype=np.int32),
            origin=np.array([r[1] for r in rows], dtype="datetime64[D]"),
            horizon=np.array([int(r[2]) for r in rows], dtype=np.int16),
            model_tag=np.array([r[3] for r in rows]),
            forecast=np.array([float(r[4]) for r in rows]),
            persistence=np.array([float(r[5]) for r in rows]),
            actual=np.array([float(r[6]) for r in rows]),
            provenance={"source": str(path)},
        )


# ---------------------------------------------------------------------------
# the runner

def _fold_origin_forecasts(series: TimeSeries, spec: ForecasterSpec,
                           fold: FoldSpec, h_max: int, preproc_kind: str,
                           sarima_global: SarimaModel | None):
    """Forecasts for every valid origin of one fold.

    Returns (list of (origin_date, values), skipped_origins). Values are on
    the original scale. Raises DataError/FitError on fold-level failure.
    """
    train = series.before(fold.train_end)
    preproc = fit_preprocessor(train, preproc_kind)
    hist_end = min(fold.test_end, series.end_date)
    full = series.up_to(hist_end)
    tvalues = preproc.apply_values(full.values)

    start_idx = full.index_of(fold.test_start)
    origin_idx = [i for i in range(start_idx, len(full))
                  if not math.isnan(series.values[i])]

    out = []
    skipped = 0
    if spec.kind == "persistence":
        for i in origin_idx:
            value = float(series.values[i])
            out.append((full.date_at(i), np.full(h_max, value)))
    elif spec.kind == "seasonal-naive":
        for i in origin_idx:
            fc = seasonal_naive_forecast(
                full.with_values(full.values[: i + 1]), spec.period, h_max)
            out.append((full.date_at(i), fc.values))
    elif spec.kind == "sarima":
        assert sarima_global is not None
        run = sarima_fold_run(sarima_global.order, sarima_global.params,
                              tvalues, collect_from_idx=start_idx)
        for i in origin_idx:
            vals = sarima_forecast_at(run, i, h_max)
            out.append((full.date_at(i), preproc.invert_values(vals)))
    elif spec.kind == "gbt":
        ttrain = train.with_values(tvalues[: len(train)])
        sup = build_supervised(ttrain, spec.hyper.lags, h_max,
                               spec.hyper.use_calendar)
        model = gbt_fit(sup, spec.hyper)
        thist = full.with_values(tvalues)
        for i in origin_idx:
            row = feature_row_at(thist, full.date_at(i), spec.hyper.lags,
                                 spec.hyper.use_calendar)
            if row is None:
                skipped += 1
                continue
            vals = model.predict(row.reshape(1, -1))[0]
            out.append((full.date_at(i), preproc.invert_values(vals)))
    else:  # unreachable: ForecasterSpec validates kind
        raise DataError(f"cannot run model kind {spec.kind!r}")
    return out, skipped


def _run_fold(args):
    series, spec, fold, h_max, preproc_kind, sarima_global = args
    forecasts, skipped_origins = _fold_origin_forecasts(
        series, spec, fold, h_max, preproc_kind, sarima_global)
    rows = []
    skipped_pairs = 0
    for origin_date, values in forecasts:
        if not np.isfinite(values).all():
            raise FitError(f"non-finite forecast at origin {origin_date}")
        pers = series.value_at(origin_date)
        for h in range(1, h_max + 1):
            target = origin_date + dt.timedelta(days=h)
            if target > series.end_date:
                skipped_pairs += 1
                continue
            actual = series.value_at(target)
            if math.isnan(actual):
                skipped_pairs += 1
                continue
            rows.append((fold.fold_id, origin_date, h,
                         float(values[h - 1]), pers, actual))
    return rows, skipped_pairs, skipped_origins


def as_fold_plan(series: TimeSeries, plan, h_max: int = 7,
                 min_test: int = DEFAULT_MIN_TEST) -> FoldPlan:
    if isinstance(plan, FoldPlan):
        return plan
    if isinstance(plan, dt.date):
        return static_plan(series, plan, h_max)
    raise DomainError("plan must be a FoldPlan or a static boundary date")


def run_protocol(series: TimeSeries, spec: ForecasterSpec, plan,
                 preproc_kind: str = "none", jobs: int = 1
                 ) -> ForecastRecordSet:
    """Leakage-safe evaluation of one model over a fold plan.

    Per fold, preprocessing and the model are (re)fit on data strictly
    before the fold's train_end; forecasts are issued from every valid
    origin in the test range and inverse-transformed before recording.
    Fold-level failures are recorded and skipped; the run fails only if
    every fold fails.
    """
    plan = as_fold_plan(series, plan)
    h_max = plan.h_max

    sarima_global: SarimaModel | None = None
    if spec.kind == "sarima":
        initial_train = series.before(plan.initial_train_end)
        pp0 = fit_preprocessor(initial_train, preproc_kind)
        t0 = pp0.apply(initial_train)
        order = spec.order
        if order is None:
            order = sarima_order_select(t0, default_order_grid())
            log.info("selected SARIMA order %s on the initial window",
                     order.label())
        sarima_global = sarima_fit(t0, order)

    tasks = [(series, spec, fold, h_max, preproc_kind, sarima_global)
             for fold in plan.folds]
    fold_failures: list[dict] = []
    rows = []
    skipped_pairs = 0
    skipped_origins = 0

    def _collect(fold: FoldSpec, outcome) -> None:
        nonlocal skipped_pairs, skipped_origins
        fold_rows, sp, so = outcome
        rows.extend(fold_rows)
        skipped_pairs += sp
        skipped_origins += so

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = list(pool.map(_run_fold_safe, tasks))
        for fold, outcome in zip(plan.folds, futures):
            if isinstance(outcome, dict):
                fold_failures.append(outcome)
                log.warning("fold %d failed: %s", outcome["fold_id"],
                            outcome["error"])
            else:
                _collect(fold, outcome)
    else:
        for fold, task in zip(plan.folds, tasks):
            try:
                outcome = _run_fold(task)
            except (DataError, FitError) as exc:
                fold_failures.append({"fold_id": fold.fold_id,
                                      "error": f"{type(exc).__name__}: {exc}"})
                log.warning("fold %d failed: %s", fold.fold_id, exc)
                continue
            _collect(fold, outcome)

    if not rows:
        raise FitError(
            f"model {spec.tag!r}: every fold failed or produced no records "
            f"({len(fold_failures)} failures)")

    provenance = {
        "model": spec.to_dict(),
        "preprocessing": preproc_kind,
        "h_max": h_max,
        "protocol": {
            "initial_train_end": plan.initial_train_end.isoformat(),
            "n_folds": len(plan.folds),
            "n_dropped_folds": len(plan.dropped),
            "min_test": plan.min_test,
        },
        "skipped_pairs": skipped_pairs,
        "skipped_origins": skipped_origins,
        "fold_failures": fold_failures,
    }
    if sarima_global is not None:
        provenance["sarima"] = sarima_global.to_json_dict()

    n = len(rows)
    return ForecastRecordSet(
        fold_id=np.array([r[0] for r in rows], dtype=np.int32),
        origin=np.array([r[1].isoformat() for r in rows], dtype="datetime64[D]"),
        horizon=np.array([r[2] for r in rows], dtype=np.int16),
        model_tag=np.array([spec.tag] * n),
        forecast=np.array([r[3] for r in rows]),
        persistence=np.array([r[4] for r in rows]),
        actual=np.array([r[5] for r in rows]),
        provenance=provenance,
    )


def _run_fold_safe(args):
    try:
        return _run_fold(args)
    except (DataError, FitError) as exc:
        fold = args[2]
        return {"fold_id": fold.fold_id,
                "error": f"{type(exc).__name__}: {exc}"}
