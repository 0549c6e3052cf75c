"""Forecast model families and their configuration.

Four families: lag-1 persistence, seasonal-naive, SARIMA (state-space
maximum likelihood) and gradient-boosted trees with direct multi-horizon
prediction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError
from .base import ForecastVector
from .baselines import persistence_forecast, seasonal_naive_forecast
from .gbt import (
    GbtHyper,
    GbtModel,
    SupervisedSet,
    build_supervised,
    feature_row_at,
    gbt_fit,
    gbt_forecast,
)
from .sarima import (
    SarimaModel,
    SarimaOrder,
    SarimaParams,
    default_order_grid,
    sarima_filter_through,
    sarima_fit,
    sarima_forecast,
    sarima_loglik,
    sarima_order_select,
)

KINDS = ("persistence", "seasonal-naive", "sarima", "gbt")


@dataclass(frozen=True)
class ForecasterSpec:
    """Tagged model configuration, serializable to/from the run config.

    ``order=None`` with kind "sarima" requests AICc order selection on the
    initial training window (the order is then held fixed).
    """

    kind: str
    tag: str = ""
    period: int = 7                      # seasonal-naive
    order: SarimaOrder | None = None     # sarima
    hyper: GbtHyper | None = None        # gbt

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r} "
                              f"(expected one of {KINDS})")
        if not self.tag:
            object.__setattr__(self, "tag", self.kind)
        if self.kind == "seasonal-naive" and self.period < 1:
            raise ConfigError("seasonal-naive period must be >= 1")
        if self.kind == "gbt" and self.hyper is None:
            object.__setattr__(self, "hyper", GbtHyper())

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "tag": self.tag}
        if self.kind == "seasonal-naive":
            out["period"] = self.period
        elif self.kind == "sarima":
            if self.order is None:
                out["order"] = "auto"
            else:
                out["order"] = [self.order.p, self.order.d, self.order.q]
                out["seasonal_order"] = [self.order.P, self.order.D,
                                         self.order.Q, self.order.s]
        elif self.kind == "gbt":
            out.update(self.hyper.to_dict())
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ForecasterSpec":
        data = dict(raw)
        kind = data.pop("kind", None)
        if kind not in KINDS:
            raise ConfigError(f"model entry needs kind in {KINDS}, got {kind!r}")
        tag = data.pop("tag", "") or kind
        try:
            if kind == "persistence":
                spec = cls(kind=kind, tag=tag)
            elif kind == "seasonal-naive":
                spec = cls(kind=kind, tag=tag,
                           period=int(data.pop("period", 7)))
            elif kind == "sarima":
                order_raw = data.pop("order", "auto")
                seasonal = data.pop("seasonal_order", [0, 0, 0, 7])
                if order_raw == "auto":
                    order = None
                else:
                    p, d, q = (int(v) for v in order_raw)
                    P, D, Q, s = (int(v) for v in seasonal)
                    order = SarimaOrder(p, d, q, P, D, Q, s)
                spec = cls(kind=kind, tag=tag, order=order)
            else:
                hyper = GbtHyper(**{k: (tuple(v) if k == "lags" else v)
                                    for k, v in data.items()})
                data = {}
                spec = cls(kind=kind, tag=tag, hyper=hyper)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad model entry for {tag!r}: {exc}") from exc
        if data:
            raise ConfigError(
                f"unknown keys in model entry {tag!r}: {sorted(data)}")
        return spec


__all__ = [
    "ForecastVector",
    "ForecasterSpec",
    "GbtHyper",
    "GbtModel",
    "SarimaModel",
    "SarimaOrder",
    "SarimaParams",
    "SupervisedSet",
    "build_supervised",
    "default_order_grid",
    "feature_row_at",
    "gbt_fit",
    "gbt_forecast",
    "persistence_forecast",
    "sarima_filter_through",
    "sarima_fit",
    "sarima_forecast",
    "sarima_loglik",
    "sarima_order_select",
    "seasonal_naive_forecast",
]
