"""Pure NumPy implementations of the hot kernels.

These mirror the compiled versions in ``_core.pyx`` (same contracts, same
scan/partition order) and are selected automatically when the extension
is unavailable, or explicitly via ``PMSKILL_BACKEND=pure``.
"""

from __future__ import annotations

import numpy as np


def arma_filter(w, obs, phi, rvec, p0, collect_from=-1):
    """One pass of the prediction-error (Kalman) recursion for a zero-mean
    ARMA process in companion form, unit innovation variance.

    State transition has ``phi`` in the first column and identity on the
    superdiagonal; the disturbance loading is ``rvec = (1, theta_1, ...)``
    and the observation is the first state component. Missing steps
    (``obs[t] == 0``) skip the measurement update.

    Parameters
    ----------
    w : (T,) float64
        Differenced, demeaned observations (ignored where not observed).
    obs : (T,) uint8
        1 where ``w`` holds an observation.
    phi, rvec : (r,) float64
        Expanded AR coefficients and disturbance loading.
    p0 : (r, r) float64
        Stationary initial state covariance at unit innovation variance.
    collect_from : int
        If >= 0, record the post-update state ``a_{t|t}`` for every
        ``t >= collect_from``.

    Returns
    -------
    (ok, sum_log_f, sum_v2_f, n_obs, a_last, collected, wpred)
        ``sum_log_f`` and ``sum_v2_f`` accumulate ``log F_t`` and
        ``v_t^2 / F_t`` over observed steps; ``a_last`` is the filtered
        state after the final step; ``wpred[t]`` is the one-step prior
        mean of ``w_t``. ``ok`` is False when a prediction variance
        degenerated, in which case the outputs are unusable.
    """
    w = np.asarray(w, dtype=np.float64)
    obs = np.asarray(obs, dtype=np.uint8)
    phi = np.asarray(phi, dtype=np.float64)
    rvec = np.asarray(rvec, dtype=np.float64)
    T = w.shape[0]
    r = phi.shape[0]
    a = np.zeros(r)
    P = np.array(p0, dtype=np.float64, copy=True)
    rr = np.outer(rvec, rvec)
    sum_log_f = 0.0
    sum_v2_f = 0.0
    n_obs = 0
    wpred = np.empty(T)
    n_collect = T - collect_from if 0 <= collect_from < T else 0
    collected = np.zeros((max(n_collect, 0), r))

    for t in range(T):
        wpred[t] = a[0]
        if obs[t]:
            f = P[0, 0]
            if not np.isfinite(f) or f <= 1e-300:
                return False, 0.0, 0.0, 0, a, collected, wpred
            v = w[t] - a[0]
            sum_log_f += np.log(f)
            sum_v2_f += v * v / f
            n_obs += 1
            k = P[:, 0] / f
            a = a + k * v
            P = P - np.outer(k, P[0, :])
        if 0 <= collect_from <= t:
            collected[t - collect_from] = a
        if t == T - 1:
            break
        # time update: a <- T a, P <- T P T' + R R'
        a_new = phi * a[0]
        a_new[: r - 1] += a[1:]
        a = a_new
        M = np.outer(phi, P[0, :])
        M[: r - 1] += P[1:, :]
        Pn = np.outer(M[:, 0], phi)
        Pn[:, : r - 1] += M[:, 1:]
        P = Pn + rr
    return True, float(sum_log_f), float(sum_v2_f), int(n_obs), a, collected, wpred


def grow_tree(X, y, rows, max_depth, min_leaf):
    """Grow one SSE-greedy regression tree on ``y`` restricted to ``rows``.

    Splits minimize within-node squared error; candidate thresholds are
    midpoints between consecutive distinct sorted feature values, subject
    to ``min_leaf`` on both sides. Nodes are emitted in depth-first
    preorder, left child first; ``feature == -1`` marks a leaf.

    Returns ``(feature, threshold, left, right, value)`` arrays.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.int32)
    n_features = X.shape[1]

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, rows, 0)]
    while stack:
        node, node_rows, depth = stack.pop()
        m = node_rows.shape[0]
        yv = y[node_rows]
        total = float(yv.sum())
        value[node] = total / m
        if depth >= max_depth or m < 2 * min_leaf:
            continue

        best_gain = -np.inf
        best_feat = -1
        best_thr = 0.0
        for j in range(n_features):
            xv = X[node_rows, j]
            order = np.argsort(xv, kind="stable")
            xs = xv[order]
            nl = np.arange(1, m)
            ok = (xs[:-1] < xs[1:]) & (nl >= min_leaf) & ((m - nl) >= min_leaf)
            if not ok.any():
                continue
            ls = np.cumsum(yv[order])[:-1]
            rs = total - ls
            with np.errstate(invalid="ignore"):
                gain = ls * ls / nl + rs * rs / (m - nl)
            gain[~ok] = -np.inf
            pos = int(np.argmax(gain))
            if gain[pos] > best_gain:
                best_gain = float(gain[pos])
                best_feat = j
                thr = 0.5 * (xs[pos] + xs[pos + 1])
                if thr >= xs[pos + 1]:  # midpoint rounded up: keep split intact
                    thr = xs[pos]
                best_thr = float(thr)
        if best_feat < 0:
            continue

        go_left = X[node_rows, best_feat] <= best_thr
        left_rows = node_rows[go_left]
        right_rows = node_rows[~go_left]
        feature[node] = best_feat
        threshold[node] = best_thr
        left_id = new_node()
        right_id = new_node()
        left[node] = left_id
        right[node] = right_id
        stack.append((right_id, right_rows, depth + 1))
        stack.append((left_id, left_rows, depth + 1))

    return (
        np.asarray(feature, dtype=np.int32),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int32),
        np.asarray(right, dtype=np.int32),
        np.asarray(value, dtype=np.float64),
    )
