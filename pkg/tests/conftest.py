"""Shared test helpers: independent oracles and simulators.

The oracles here deliberately avoid the library's own computation paths
(brute-force Gaussian densities via psi-weight autocovariances, direct
AR recursions) so the tests stay dual-route.
"""

import datetime as dt

import numpy as np
import pytest

from pmskill import TimeSeries


def mvn_logpdf(y: np.ndarray, cov: np.ndarray) -> float:
    """Direct multivariate normal log density at mean zero."""
    sign, logdet = np.linalg.slogdet(cov)
    assert sign > 0
    n = y.shape[0]
    return float(-0.5 * (n * np.log(2 * np.pi) + logdet
                         + y @ np.linalg.solve(cov, y)))


def arma_autocov(ar, ma, sigma2: float, n_lags: int,
                 n_terms: int = 4000) -> np.ndarray:
    """ARMA autocovariances by truncated psi-weight expansion."""
    ar = list(ar)
    ma = list(ma)
    psi = np.zeros(n_terms)
    psi[0] = 1.0
    for j in range(1, n_terms):
        acc = ma[j - 1] if j - 1 < len(ma) else 0.0
        for i, a in enumerate(ar, start=1):
            if j - i >= 0:
                acc += a * psi[j - i]
        psi[j] = acc
    return np.array([sigma2 * float(psi[: n_terms - k] @ psi[k:])
                     for k in range(n_lags)])


def arma_cov_matrix(ar, ma, sigma2: float, n: int) -> np.ndarray:
    gamma = arma_autocov(ar, ma, sigma2, n)
    return np.array([[gamma[abs(i - j)] for j in range(n)] for i in range(n)])


def simulate_ar(ar, n: int, seed: int, sd: float = 1.0,
                mean: float = 0.0, burnin: int = 600) -> np.ndarray:
    """Plain AR recursion (independent of the package generator)."""
    rng = np.random.default_rng(seed)
    e = rng.normal(0.0, sd, n + burnin)
    x = np.zeros(n + burnin)
    p = len(ar)
    for t in range(n + burnin):
        acc = e[t]
        for i, a in enumerate(ar, start=1):
            if t - i >= 0:
                acc += a * x[t - i]
        x[t] = acc
    return x[burnin:] + mean


def daily_series(values, start=dt.date(2020, 1, 1), name="test") -> TimeSeries:
    return TimeSeries(start, values, name=name)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
