"""Horizon-wise errors, persistence-relative skill and the predictability
horizon H*.

Skill is 1 - Err_model/Err_pers over matched (forecast, actual) pairs;
positive means better than persistence. H* comes in two variants: the
literal maximum horizon with positive skill, and the length of the
contiguous positive prefix (they differ when interior horizons dip
non-positive).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError, EmptyInputError, UndefinedSkillError
from .protocol import ForecastRecordSet

MODES = ("pooled", "mean_of_folds")


def rmse(forecast, actual) -> float:
    f = np.asarray(forecast, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if f.shape != a.shape or f.size == 0:
        raise EmptyInputError("rmse needs >= 1 matched pair")
    return float(np.sqrt(np.mean((f - a) ** 2)))


def mae(forecast, actual) -> float:
    f = np.asarray(forecast, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if f.shape != a.shape or f.size == 0:
        raise EmptyInputError("mae needs >= 1 matched pair")
    return float(np.mean(np.abs(f - a)))


ERROR_FUNCTIONS = {"rmse": rmse, "mae": mae}


def skill(err_model: float, err_pers: float) -> float:
    """1 - err_model/err_pers; zero persistence error is parity when the
    model is also perfect, undefined otherwise."""
    if err_model < 0 or err_pers < 0:
        raise DomainError("errors must be >= 0")
    if err_pers == 0.0:
        if err_model == 0.0:
            return 0.0
        raise UndefinedSkillError(
            "persistence error is zero while the model error is not")
    return 1.0 - err_model / err_pers


def h_star(skill_values) -> tuple[int, int]:
    """(max variant, contiguous-prefix variant) of the predictability
    horizon; 0 when no horizon has positive skill."""
    values = list(skill_values)
    star_max = 0
    for h, value in enumerate(values, start=1):
        if value > 0.0:
            star_max = h
    prefix = 0
    for value in values:
        if value > 0.0:
            prefix += 1
        else:
            break
    return star_max, prefix


@dataclass(frozen=True)
class SkillProfile:
    model_tag: str
    mode: str                 # pooled | mean_of_folds
    error: str                # rmse | mae
    skill: tuple[float, ...]  # index h-1
    err_model: tuple[float, ...]
    err_pers: tuple[float, ...]
    n_pairs: tuple[int, ...]
    h_star_max: int
    h_star_prefix: int

    def to_json_dict(self) -> dict:
        return {
            "model_tag": self.model_tag,
            "mode": self.mode,
            "error": self.error,
            "skill": list(self.skill),
            "err_model": list(self.err_model),
            "err_pers": list(self.err_pers),
            "n_pairs": list(self.n_pairs),
            "h_star_max": self.h_star_max,
            "h_star_prefix": self.h_star_prefix,
        }


@dataclass(frozen=True)
class FoldSkillSummary:
    horizon: int
    fold_ids: tuple[int, ...]
    skills: tuple[float, ...]
    median: float
    mean: float
    n_nonpositive: int   # skill <= 0
    n_total: int

    def to_json_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "fold_ids": list(self.fold_ids),
            "skills": list(self.skills),
            "median": self.median,
            "mean": self.mean,
            "n_nonpositive": self.n_nonpositive,
            "n_total": self.n_total,
        }


@dataclass(frozen=True)
class ErrorCell:
    model_tag: str
    horizon: int
    rmse: float
    mae: float
    n_pairs: int
    fold_id: int | None = None


@dataclass(frozen=True)
class ErrorTable:
    cells: tuple[ErrorCell, ...]


def _per_horizon_pairs(records: ForecastRecordSet, h: int):
    mask = records.horizon == h
    if not mask.any():
        raise EmptyInputError(f"no records at horizon {h}")
    return (records.forecast[mask], records.persistence[mask],
            records.actual[mask], records.fold_id[mask])


def _fold_skills(records: ForecastRecordSet, h: int,
                 error: str) -> tuple[tuple[int, ...], tuple[float, ...]]:
    err = ERROR_FUNCTIONS[error]
    f, p, a, folds = _per_horizon_pairs(records, h)
    ids = []
    values = []
    for fold in np.unique(folds):
        sel = folds == fold
        values.append(skill(err(f[sel], a[sel]), err(p[sel], a[sel])))
        ids.append(int(fold))
    return tuple(ids), tuple(values)


def skill_profile(records: ForecastRecordSet, model_tag: str,
                  mode: str = "pooled", error: str = "rmse") -> SkillProfile:
    """Per-horizon skill for one model.

    pooled: one error over all origins per horizon, then one skill
    (the algorithmic definition). mean_of_folds: skill per fold per
    horizon, then the average across folds (the reporting convention).
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    if error not in ERROR_FUNCTIONS:
        raise DomainError(f"error must be one of {tuple(ERROR_FUNCTIONS)}")
    h_max = records.h_max
    if h_max < 1:
        raise EmptyInputError("record set is empty")
    sub = records.for_tag(model_tag)
    err = ERROR_FUNCTIONS[error]
    skills = []
    err_model = []
    err_pers = []
    n_pairs = []
    for h in range(1, h_max + 1):
        f, p, a, _ = _per_horizon_pairs(sub, h)
        em = err(f, a)
        ep = err(p, a)
        err_model.append(em)
        err_pers.append(ep)
        n_pairs.append(int(f.shape[0]))
        if mode == "pooled":
            skills.append(skill(em, ep))
        else:
            _, fold_vals = _fold_skills(sub, h, error)
            skills.append(float(np.mean(fold_vals)))
    star_max, star_prefix = h_star(skills)
    return SkillProfile(
        model_tag=model_tag,
        mode=mode,
        error=error,
        skill=tuple(skills),
        err_model=tuple(err_model),
        err_pers=tuple(err_pers),
        n_pairs=tuple(n_pairs),
        h_star_max=star_max,
        h_star_prefix=star_prefix,
    )


def fold_distribution(records: ForecastRecordSet, model_tag: str, h: int,
                      error: str = "rmse") -> FoldSkillSummary:
    """Distribution of per-fold skill at one horizon."""
    if error not in ERROR_FUNCTIONS:
        raise DomainError(f"error must be one of {tuple(ERROR_FUNCTIONS)}")
    sub = records.for_tag(model_tag)
    ids, values = _fold_skills(sub, h, error)
    if not values:
        raise EmptyInputError(f"no folds at horizon {h}")
    arr = np.asarray(values)
    return FoldSkillSummary(
        horizon=h,
        fold_ids=ids,
        skills=values,
        median=float(np.median(arr)),
        mean=float(arr.mean()),
        n_nonpositive=int((arr <= 0.0).sum()),
        n_total=len(values),
    )


def error_table(records: ForecastRecordSet, per_fold: bool = False) -> ErrorTable:
    """RMSE/MAE per (model, horizon), optionally also per fold."""
    cells = []
    for tag in records.tags():
        sub = records.for_tag(tag)
        for h in range(1, records.h_max + 1):
            f, _, a, folds = _per_horizon_pairs(sub, h)
            cells.append(ErrorCell(tag, h, rmse(f, a), mae(f, a), f.shape[0]))
            if per_fold:
                for fold in np.unique(folds):
                    sel = folds == fold
                    cells.append(ErrorCell(tag, h, rmse(f[sel], a[sel]),
                                           mae(f[sel], a[sel]),
                                           int(sel.sum()), int(fold)))
    if not cells:
        raise EmptyInputError("record set is empty")
    return ErrorTable(tuple(cells))
