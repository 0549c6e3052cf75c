"""Gradient-boosted regression trees with direct multi-horizon prediction.

One independent ensemble per horizon, trained on lagged values plus
optional calendar features of the origin date. Trees are grown by greedy
SSE splits (compiled kernel when available); rows are never imputed — a
supervised row exists only where every lag is present, and each horizon
trains on the rows whose target is present.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import ConfigError, DataError, EmptyInputError, SchemaError
from ..series import TimeSeries, calendar_features
from .base import ForecastVector

CALENDAR_FEATURES = ("day_of_week", "month", "doy_sin", "doy_cos")


@dataclass(frozen=True)
class GbtHyper:
    """Boosting hyperparameters (defaults are recorded in every report)."""

    n_trees: int = 300
    max_depth: int = 4
    learning_rate: float = 0.05
    min_leaf: int = 5
    subsample: float = 0.8
    lags: tuple[int, ...] = (1, 2, 3, 7, 14)
    use_calendar: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lags", tuple(int(l) for l in self.lags))
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ConfigError("learning_rate must be in (0, 1]")
        if self.min_leaf < 1:
            raise ConfigError("min_leaf must be >= 1")
        if not 0.0 < self.subsample <= 1.0:
            raise ConfigError("subsample must be in (0, 1]")
        if not self.lags or any(l < 1 for l in self.lags):
            raise ConfigError("lags must be a non-empty list of integers >= 1")

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "min_leaf": self.min_leaf,
            "subsample": self.subsample,
            "lags": list(self.lags),
            "use_calendar": self.use_calendar,
            "rng_seed": self.rng_seed,
        }


@dataclass(frozen=True)
class SupervisedSet:
    """Aligned (features, per-horizon targets) rows; no imputation."""

    X: np.ndarray                 # (n, f), NaN-free
    targets: np.ndarray           # (n, h_max), NaN = target unavailable
    origin_dates: np.ndarray      # (n,) datetime64[D]
    feature_names: tuple[str, ...]
    h_max: int

    def __len__(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class _Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray


def _tree_apply(tree: _Tree, X: np.ndarray) -> np.ndarray:
    node = np.zeros(X.shape[0], dtype=np.int32)
    active = np.flatnonzero(tree.feature[node] >= 0)
    while active.size:
        cur = node[active]
        go_left = X[active, tree.feature[cur]] <= tree.threshold[cur]
        node[active] = np.where(go_left, tree.left[cur], tree.right[cur])
        active = active[tree.feature[node[active]] >= 0]
    return tree.value[node]


@dataclass(frozen=True)
class GbtModel:
    hyper: GbtHyper
    feature_names: tuple[str, ...]
    h_max: int
    base: np.ndarray = field(repr=False)            # (h_max,)
    ensembles: tuple = field(repr=False)            # per horizon: tuple[_Tree]
    n_rows: tuple[int, ...] = ()

    def predict(self, X: np.ndarray, max_trees: int | None = None) -> np.ndarray:
        """Per-horizon predictions, (n, h_max). ``max_trees`` truncates each
        ensemble (staged predictions for diagnostics)."""
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        if X.shape[1] != len(self.feature_names):
            raise SchemaError(
                f"expected {len(self.feature_names)} features "
                f"{list(self.feature_names)}, got {X.shape[1]}")
        if not np.isfinite(X).all():
            raise SchemaError("feature rows must be finite")
        out = np.empty((X.shape[0], self.h_max))
        lr = self.hyper.learning_rate
        for h in range(self.h_max):
            acc = np.full(X.shape[0], self.base[h])
            trees = self.ensembles[h]
            if max_trees is not None:
                trees = trees[:max_trees]
            for tree in trees:
                acc += lr * _tree_apply(tree, X)
            out[:, h] = acc
        return out


def build_supervised(series: TimeSeries, lags, h_max: int,
                     use_calendar: bool = True) -> SupervisedSet:
    """One row per origin date: features are strictly-past lags
    ``y[origin - j]`` (plus calendar features of the origin date) and the
    horizon-h target is ``y[origin + h]``. Rows keep only origins with all
    lags present and at least one present target."""
    lags = tuple(int(l) for l in lags)
    if not lags or min(lags) < 1:
        raise DataError("lags must all be >= 1")
    if h_max < 1:
        raise DataError("h_max must be >= 1")
    T = len(series)
    if max(lags) + h_max >= T:
        raise DataError(
            f"series of length {T} too short for max lag {max(lags)} "
            f"and horizon {h_max}")
    v = series.values
    cols = []
    names = []
    for j in lags:
        col = np.full(T, np.nan)
        col[j:] = v[:-j]
        cols.append(col)
        names.append(f"lag_{j}")
    if use_calendar:
        table = calendar_features(series)
        for name in CALENDAR_FEATURES:
            cols.append(table.columns[name])
            names.append(name)
    X = np.column_stack(cols)

    targets = np.full((T, h_max), np.nan)
    for h in range(1, h_max + 1):
        targets[:-h, h - 1] = v[h:]

    lag_ok = ~np.isnan(X[:, : len(lags)]).any(axis=1)
    any_target = ~np.isnan(targets).all(axis=1)
    keep = lag_ok & any_target
    if not keep.any():
        raise EmptyInputError("no complete supervised rows")
    return SupervisedSet(
        X=np.ascontiguousarray(X[keep]),
        targets=targets[keep],
        origin_dates=series.dates()[keep],
        feature_names=tuple(names),
        h_max=h_max,
    )


def gbt_fit(data: SupervisedSet, hyper: GbtHyper) -> GbtModel:
    """Stage-wise least-squares boosting, one ensemble per horizon.

    Deterministic given ``hyper.rng_seed``: per-horizon RNG streams are
    spawned from the seed, and tree/subsample order is fixed.
    """
    X = np.ascontiguousarray(data.X, dtype=np.float64)
    base = np.empty(data.h_max)
    ensembles = []
    n_rows = []
    lr = hyper.learning_rate
    for h in range(1, data.h_max + 1):
        y_col = data.targets[:, h - 1]
        rows_all = np.flatnonzero(~np.isnan(y_col)).astype(np.int32)
        n_h = rows_all.shape[0]
        if n_h < 2 * hyper.min_leaf:
            raise DataError(
                f"horizon {h}: {n_h} rows < 2*min_leaf = {2 * hyper.min_leaf}")
        n_rows.append(n_h)
        y_full = np.where(np.isnan(y_col), 0.0, y_col)
        base[h - 1] = float(y_col[rows_all].mean())
        resid = y_full - base[h - 1]
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(hyper.rng_seed,
                                                   spawn_key=(h,))))
        m_sub = n_h if hyper.subsample >= 1.0 else max(
            1, int(round(hyper.subsample * n_h)))
        trees = []
        for _ in range(hyper.n_trees):
            if m_sub == n_h:
                rows = rows_all
            else:
                rows = np.sort(rng.choice(rows_all, size=m_sub, replace=False))
            tree = _Tree(*_kernels.grow_tree(X, resid, rows,
                                             hyper.max_depth, hyper.min_leaf))
            resid[rows_all] -= lr * _tree_apply(tree, X[rows_all])
            trees.append(tree)
        ensembles.append(tuple(trees))
    return GbtModel(
        hyper=hyper,
        feature_names=data.feature_names,
        h_max=data.h_max,
        base=base,
        ensembles=tuple(ensembles),
        n_rows=tuple(n_rows),
    )


def feature_row_at(series: TimeSeries, origin: dt.date, lags,
                   use_calendar: bool = True) -> np.ndarray | None:
    """Prediction-time feature row at ``origin`` (values dated < origin
    only); None when any lag is missing."""
    idx = series.index_of(origin)
    v = series.values
    row = []
    for j in lags:
        k = idx - j
        if k < 0 or np.isnan(v[k]):
            return None
        row.append(v[k])
    if use_calendar:
        one_day = TimeSeries(origin, [0.0], name=series.name)
        table = calendar_features(one_day)
        for name in CALENDAR_FEATURES:
            row.append(float(table.columns[name][0]))
    return np.asarray(row, dtype=np.float64)


def gbt_forecast(model: GbtModel, features: np.ndarray,
                 origin_date: dt.date) -> ForecastVector:
    """Direct per-horizon prediction for one feature row."""
    pred = model.predict(np.asarray(features, dtype=np.float64).reshape(1, -1))
    return ForecastVector(origin_date, pred[0])
