"""Seasonal ARIMA estimated by exact Gaussian maximum likelihood.

The seasonal and ordinary differences are applied up front; the remaining
ARMA part runs through a companion-form state space and the likelihood
comes from the one-step prediction-error decomposition with stationary
initialization. Missing observations simply skip the measurement update.
Optimization is a Nelder-Mead simplex over unconstrained coordinates
(partial-autocorrelation transform keeps every visited point stationary
and invertible), with the innovation variance concentrated out.
"""

from __future__ import annotations

import datetime as dt
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .. import _kernels
from ..errors import (
    DataError,
    DomainError,
    EmptyInputError,
    FitError,
    NumericError,
    SelectionError,
)
from ..series import TimeSeries
from .base import ForecastVector

_LOG_2PI = math.log(2.0 * math.pi)
_BIG = 1e12  # objective value for invalid points


@dataclass(frozen=True)
class SarimaOrder:
    """(p, d, q)(P, D, Q)_s specification."""

    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 7

    def __post_init__(self):
        for name in ("p", "d", "q", "P", "D", "Q", "s"):
            if getattr(self, name) < 0:
                raise DomainError(f"order component {name} must be >= 0")
        if (self.P, self.D, self.Q) != (0, 0, 0) and self.s < 2:
            raise DomainError("seasonal order requires season length s >= 2")

    @property
    def n_coeffs(self) -> int:
        return self.p + self.q + self.P + self.Q

    @property
    def includes_mean(self) -> bool:
        # a mean term only makes sense on undifferenced data
        return self.d == 0 and self.D == 0

    def diff_lag(self) -> int:
        return self.d + self.D * self.s

    def as_tuple(self):
        return (self.p, self.d, self.q, self.P, self.D, self.Q, self.s)

    def label(self) -> str:
        return (f"({self.p},{self.d},{self.q})"
                f"({self.P},{self.D},{self.Q})_{self.s}")


@dataclass(frozen=True)
class SarimaParams:
    """Natural-scale coefficients; ``mean`` applies to the differenced scale."""

    ar: tuple = ()
    sar: tuple = ()
    ma: tuple = ()
    sma: tuple = ()
    mean: float = 0.0
    sigma2: float = 1.0


@dataclass(frozen=True)
class SarimaModel:
    """Fitted model plus the filtered state needed to forecast."""

    order: SarimaOrder
    params: SarimaParams
    loglik: float
    n_obs: int
    end_date: dt.date
    state: np.ndarray = field(repr=False)      # filtered companion state
    anchors: np.ndarray = field(repr=False)    # trailing completed values for undifferencing
    converged: bool = True

    def to_json_dict(self) -> dict:
        return {
            "order": list(self.order.as_tuple()),
            "ar": list(self.params.ar),
            "seasonal_ar": list(self.params.sar),
            "ma": list(self.params.ma),
            "seasonal_ma": list(self.params.sma),
            "mean": self.params.mean,
            "innovation_variance": self.params.sigma2,
            "loglik": self.loglik,
            "n_obs": self.n_obs,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# polynomials, transforms, state-space assembly

def stationary_ar_roots(coeffs) -> np.ndarray:
    """Roots of 1 - c1 z - ... - cp z^p (stationary iff all outside |z|=1)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.size == 0:
        return np.empty(0, dtype=np.complex128)
    return np.roots(np.r_[-coeffs[::-1], 1.0])


def invertible_ma_roots(coeffs) -> np.ndarray:
    """Roots of 1 + t1 z + ... + tq z^q (invertible iff all outside |z|=1)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.size == 0:
        return np.empty(0, dtype=np.complex128)
    return np.roots(np.r_[coeffs[::-1], 1.0])


def _pacf_to_coef(x) -> np.ndarray:
    """Unconstrained reals -> coefficients of a stationary AR polynomial."""
    x = np.asarray(x, dtype=np.float64)
    pac = x / np.sqrt(1.0 + x * x)
    coef = np.zeros(pac.shape[0])
    for k in range(pac.shape[0]):
        head = coef[:k].copy()
        coef[:k] = head - pac[k] * head[::-1]
        coef[k] = pac[k]
    return coef


def _unpack_unconstrained(order: SarimaOrder, x: np.ndarray) -> SarimaParams:
    p, q, P, Q = order.p, order.q, order.P, order.Q
    ar = _pacf_to_coef(x[:p])
    sar = _pacf_to_coef(x[p:p + P])
    ma = -_pacf_to_coef(x[p + P:p + P + q])
    sma = -_pacf_to_coef(x[p + P + q:p + P + q + Q])
    as_floats = lambda c: tuple(float(v) for v in c)
    return SarimaParams(ar=as_floats(ar), sar=as_floats(sar),
                        ma=as_floats(ma), sma=as_floats(sma))


def _expand_polys(order: SarimaOrder,
                  params: SarimaParams) -> tuple[np.ndarray, np.ndarray]:
    """Multiply seasonal and ordinary lag polynomials; return the companion
    AR vector ``phi`` and disturbance loading ``rvec`` (both length r)."""
    arpoly = np.r_[1.0, -np.asarray(params.ar, dtype=np.float64)]
    if order.P:
        sp = np.zeros(order.s * order.P + 1)
        sp[0] = 1.0
        sp[order.s::order.s] = -np.asarray(params.sar, dtype=np.float64)
        arpoly = np.convolve(arpoly, sp)
    mapoly = np.r_[1.0, np.asarray(params.ma, dtype=np.float64)]
    if order.Q:
        sq = np.zeros(order.s * order.Q + 1)
        sq[0] = 1.0
        sq[order.s::order.s] = np.asarray(params.sma, dtype=np.float64)
        mapoly = np.convolve(mapoly, sq)
    phi_full = -arpoly[1:]
    theta_full = mapoly[1:]
    r = max(phi_full.shape[0], theta_full.shape[0] + 1, 1)
    phi = np.zeros(r)
    phi[:phi_full.shape[0]] = phi_full
    rvec = np.zeros(r)
    rvec[0] = 1.0
    rvec[1:1 + theta_full.shape[0]] = theta_full
    return phi, rvec


def _companion_step(phi: np.ndarray, a: np.ndarray) -> np.ndarray:
    out = phi * a[0]
    out[:-1] += a[1:]
    return out


def _stationary_cov(phi: np.ndarray, rvec: np.ndarray) -> np.ndarray:
    """Solve P = T P T' + R R' for the companion transition T."""
    r = phi.shape[0]
    T = np.zeros((r, r))
    T[:, 0] = phi
    if r > 1:
        T[np.arange(r - 1), np.arange(1, r)] = 1.0
    lhs = np.eye(r * r) - np.kron(T, T)
    try:
        vec = np.linalg.solve(lhs, np.outer(rvec, rvec).ravel())
    except np.linalg.LinAlgError as exc:
        raise NumericError("stationary covariance solve failed") from exc
    P0 = vec.reshape(r, r)
    if not np.isfinite(P0).all():
        raise NumericError("stationary covariance is not finite")
    return 0.5 * (P0 + P0.T)


def _diff_poly(order: SarimaOrder) -> np.ndarray:
    """Lag-polynomial coefficients of (1-B)^d (1-B^s)^D."""
    dcoef = np.array([1.0])
    for _ in range(order.d):
        dcoef = np.convolve(dcoef, [1.0, -1.0])
    if order.D:
        sc = np.zeros(order.s + 1)
        sc[0] = 1.0
        sc[order.s] = -1.0
        for _ in range(order.D):
            dcoef = np.convolve(dcoef, sc)
    return dcoef


def _difference(values: np.ndarray, order: SarimaOrder
                ) -> tuple[np.ndarray, np.ndarray]:
    """Apply (1-B)^d (1-B^s)^D; returns (w, dcoef) with w[i] the difference
    ending at values[i + L] and NaN wherever an operand is missing."""
    dcoef = _diff_poly(order)
    L = dcoef.shape[0] - 1
    T = values.shape[0]
    if T <= L:
        raise DataError(f"series too short to difference (need > {L} values)")
    w = np.zeros(T - L)
    for k in range(L + 1):
        w = w + dcoef[k] * values[L - k: T - k]
    return w, dcoef


# ---------------------------------------------------------------------------
# filtering

class _FilterRun:
    """One filter pass over a value array, with per-index state snapshots
    and a causally completed copy of the original values (for
    undifferencing forecasts when history has gaps)."""

    def __init__(self, order: SarimaOrder, params: SarimaParams,
                 values: np.ndarray, collect_from_idx: int = -1):
        self.order = order
        self.params = params
        self.phi, self.rvec = _expand_polys(order, params)
        _check_coeff_validity(order, params)
        w, self.dcoef = _difference(values, order)
        self.lag = self.dcoef.shape[0] - 1
        obs = (~np.isnan(w)).astype(np.uint8)
        wc = np.where(obs.astype(bool), w - params.mean, 0.0)
        p0 = _stationary_cov(self.phi, self.rvec)
        collect_w = -1
        if collect_from_idx >= 0:
            collect_w = max(collect_from_idx - self.lag, 0)
        (self.ok, self.sum_log_f, self.sum_v2_f, self.n_obs,
         self.a_last, self._collected, wpred) = _kernels.arma_filter(
            wc, obs, self.phi, self.rvec, p0, collect_w)
        self._collect_w = collect_w
        self._wpred = wpred
        self._completed = None
        self._values = values

    def loglik(self, sigma2: float) -> float:
        n = self.n_obs
        return -0.5 * (n * (_LOG_2PI + math.log(sigma2))
                       + self.sum_log_f + self.sum_v2_f / sigma2)

    def concentrated_sigma2(self) -> float:
        return self.sum_v2_f / self.n_obs

    def state_at(self, idx: int) -> np.ndarray:
        """Filtered state a_{idx|idx} in original index space."""
        w_idx = idx - self.lag
        if w_idx < 0:
            return np.zeros(self.phi.shape[0])
        if self._collect_w < 0 or w_idx < self._collect_w:
            raise ValueError("state not collected at this index")
        return self._collected[w_idx - self._collect_w]

    @property
    def completed(self) -> np.ndarray:
        """Original values with missing entries filled left-to-right by the
        model's own one-step predictions (integration anchors)."""
        if self._completed is None:
            values = self._values
            comp = values.copy()
            L = self.lag
            if L > 0:
                present = np.flatnonzero(~np.isnan(comp))
                if present.size == 0:
                    raise EmptyInputError("series has no present value")
                first_val = comp[present[0]]
                last = math.nan
                for t in range(min(L, comp.shape[0])):
                    if math.isnan(comp[t]):
                        comp[t] = last if not math.isnan(last) else first_val
                    else:
                        last = comp[t]
                dc = self.dcoef
                for t in range(L, comp.shape[0]):
                    if math.isnan(comp[t]):
                        w_hat = self._wpred[t - L] + self.params.mean
                        acc = w_hat
                        for k in range(1, L + 1):
                            acc -= dc[k] * comp[t - k]
                        comp[t] = acc
            self._completed = comp
        return self._completed

    def anchors_at(self, idx: int) -> np.ndarray:
        """Trailing ``lag`` completed values ending at ``idx`` inclusive."""
        L = self.lag
        if L == 0:
            return np.empty(0)
        comp = self.completed
        lo = max(idx + 1 - L, 0)
        tail = comp[lo: idx + 1]
        if tail.shape[0] < L:  # series shorter than the differencing lag
            tail = np.r_[np.full(L - tail.shape[0], tail[0] if tail.size else 0.0),
                         tail]
        return tail


def _check_coeff_validity(order: SarimaOrder, params: SarimaParams) -> None:
    for coeffs, roots_fn, what in (
        (params.ar, stationary_ar_roots, "AR"),
        (params.sar, stationary_ar_roots, "seasonal AR"),
        (params.ma, invertible_ma_roots, "MA"),
        (params.sma, invertible_ma_roots, "seasonal MA"),
    ):
        roots = roots_fn(coeffs)
        if roots.size and not (np.abs(roots) > 1.0).all():
            raise DomainError(f"{what} polynomial has roots inside the unit circle")


# ---------------------------------------------------------------------------
# public operations

def sarima_loglik(order: SarimaOrder, params: SarimaParams,
                  series: TimeSeries) -> float:
    """Exact Gaussian log-likelihood of the differenced series."""
    if params.sigma2 <= 0:
        raise DomainError("innovation variance must be positive")
    run = _FilterRun(order, params, series.values)
    if not run.ok:
        raise NumericError("degenerate prediction variance in the filter")
    if run.n_obs == 0:
        raise DataError("no observed values after differencing")
    ll = run.loglik(params.sigma2)
    if not math.isfinite(ll):
        raise NumericError("log-likelihood is not finite")
    return ll


def sarima_fit(train: TimeSeries, order: SarimaOrder) -> SarimaModel:
    """Maximum-likelihood fit; coefficients over the stationarity/
    invertibility transform, innovation variance concentrated out."""
    values = train.values
    w, _ = _difference(values, order)
    n_eff = int((~np.isnan(w)).sum())
    k = order.n_coeffs
    n_free = k + 1 + (1 if order.includes_mean else 0)
    if n_eff < 10 * n_free:
        raise DataError(
            f"need >= {10 * n_free} differenced observations for "
            f"{order.label()}, have {n_eff}")
    mean = float(np.nanmean(w)) if order.includes_mean else 0.0

    def objective(x: np.ndarray) -> float:
        params = _unpack_unconstrained(order, x)
        params = SarimaParams(params.ar, params.sar, params.ma, params.sma,
                              mean=mean)
        try:
            run = _FilterRun(order, params, values)
        except (NumericError, DomainError):
            # DomainError only at the numerical edge of the stationary region
            return _BIG
        if not run.ok or run.n_obs == 0:
            return _BIG
        s2 = run.concentrated_sigma2()
        if not math.isfinite(s2) or s2 <= 0:
            return _BIG
        negll = 0.5 * (run.n_obs * (_LOG_2PI + 1.0 + math.log(s2))
                       + run.sum_log_f)
        return negll if math.isfinite(negll) else _BIG

    if k == 0:
        x_best = np.empty(0)
        converged = True
    else:
        opts = {"maxiter": 500 * k, "maxfev": 1000 * k,
                "xatol": 1e-5, "fatol": 1e-9}
        first = minimize(objective, np.zeros(k), method="Nelder-Mead",
                         options=opts)
        # one restart from a perturbed point guards against a poor simplex
        perturbed = first.x + 0.25 * (-1.0) ** np.arange(k)
        second = minimize(objective, perturbed, method="Nelder-Mead",
                          options=opts)
        usable = [r for r in (first, second) if r.fun < _BIG]
        if not usable:
            raise FitError(f"no valid likelihood point for {order.label()}")
        settled = [r for r in usable if r.success]
        if not settled:
            best = min(usable, key=lambda r: r.fun)
            raise FitError(
                f"simplex did not converge for {order.label()} "
                f"(best negloglik {best.fun:.6g} at {best.x.tolist()})")
        best = min(settled, key=lambda r: r.fun)
        x_best = best.x
        converged = True

    coeff = _unpack_unconstrained(order, x_best)
    params = SarimaParams(coeff.ar, coeff.sar, coeff.ma, coeff.sma, mean=mean)
    run = _FilterRun(order, params, values)
    if not run.ok or run.n_obs == 0:
        raise FitError(f"final filter pass failed for {order.label()}")
    sigma2 = run.concentrated_sigma2()
    params = SarimaParams(coeff.ar, coeff.sar, coeff.ma, coeff.sma,
                          mean=mean, sigma2=sigma2)
    loglik = run.loglik(sigma2)
    return SarimaModel(
        order=order,
        params=params,
        loglik=loglik,
        n_obs=run.n_obs,
        end_date=train.end_date,
        state=run.a_last,
        anchors=run.anchors_at(len(train) - 1),
        converged=converged,
    )


def sarima_filter_through(order: SarimaOrder, params: SarimaParams,
                          series: TimeSeries) -> SarimaModel:
    """Refresh state/anchors on new history with frozen coefficients."""
    run = _FilterRun(order, params, series.values)
    if not run.ok:
        raise NumericError("degenerate prediction variance in the filter")
    if run.n_obs == 0:
        raise DataError("no observed values after differencing")
    return SarimaModel(
        order=order,
        params=params,
        loglik=run.loglik(params.sigma2),
        n_obs=run.n_obs,
        end_date=series.end_date,
        state=run.a_last,
        anchors=run.anchors_at(len(series) - 1),
        converged=True,
    )


def _forecast_values(order: SarimaOrder, params: SarimaParams,
                     state: np.ndarray, anchors: np.ndarray,
                     h_max: int) -> np.ndarray:
    """Iterate the transition with zero innovations, then undo differencing."""
    phi, _ = _expand_polys(order, params)
    a = np.array(state, dtype=np.float64, copy=True)
    w_hat = np.empty(h_max)
    for h in range(h_max):
        a = _companion_step(phi, a)
        w_hat[h] = a[0] + params.mean
    L = order.diff_lag()
    if L == 0:
        return w_hat
    dcoef = _diff_poly(order)
    hist = list(anchors[-L:])
    out = np.empty(h_max)
    for h in range(h_max):
        y = w_hat[h]
        for k in range(1, L + 1):
            y -= dcoef[k] * hist[-k]
        hist.append(y)
        out[h] = y
    return out


def sarima_forecast(model: SarimaModel, h_max: int) -> ForecastVector:
    """Minimum-MSE forecast at horizons 1..h_max from the filtered state."""
    if h_max < 1:
        raise DomainError("h_max must be >= 1")
    values = _forecast_values(model.order, model.params, model.state,
                              model.anchors, h_max)
    return ForecastVector(model.end_date, values)


def sarima_fold_run(order: SarimaOrder, params: SarimaParams,
                    values: np.ndarray, collect_from_idx: int) -> _FilterRun:
    """Single filter pass with frozen coefficients, snapshotting the
    filtered state at every index >= collect_from_idx so the protocol can
    forecast from each origin in a fold without refiltering.
    """
    run = _FilterRun(order, params, values, collect_from_idx)
    if not run.ok:
        raise NumericError("degenerate prediction variance in the filter")
    return run


def sarima_forecast_at(run: _FilterRun, idx: int, h_max: int) -> np.ndarray:
    """Forecast values for horizons 1..h_max from origin index ``idx``."""
    return _forecast_values(run.order, run.params, run.state_at(idx),
                            run.anchors_at(idx), h_max)


def default_order_grid(s: int = 7) -> list[SarimaOrder]:
    """p,q in {0,1,2}; d in {0,1}; P,D,Q in {0,1}; weekly season."""
    grid = []
    for p, d, q, P, D, Q in itertools.product(
            range(3), range(2), range(3), range(2), range(2), range(2)):
        grid.append(SarimaOrder(p, d, q, P, D, Q, s))
    return grid


def sarima_order_select(train: TimeSeries,
                        grid=None) -> SarimaOrder:
    """Pick the AICc-minimizing order; failed fits are skipped.

    Ties break toward fewer parameters, then lexicographic order tuple.
    """
    candidates = list(grid) if grid is not None else default_order_grid()
    if not candidates:
        raise SelectionError("empty order grid")
    scored = []
    for order in candidates:
        try:
            model = sarima_fit(train, order)
        except (DataError, FitError, NumericError):
            continue
        k = order.n_coeffs + 1 + (1 if order.includes_mean else 0)
        n = model.n_obs
        if n - k - 1 <= 0:
            continue
        aicc = -2.0 * model.loglik + 2.0 * k + 2.0 * k * (k + 1) / (n - k - 1)
        scored.append((aicc, order.n_coeffs, order.as_tuple(), order))
    if not scored:
        raise SelectionError("every candidate order failed to fit")
    scored.sort(key=lambda t: (t[0], t[1], t[2]))
    return scored[0][3]
