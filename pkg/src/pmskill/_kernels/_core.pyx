# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: ARMA prediction-error filter and tree growth.

Contracts match pmskill._kernels._pure exactly (same scan order, same
tie-breaking, same node numbering); see that module for documentation.
"""

from libc.math cimport log, isfinite, INFINITY
from libc.stdlib cimport qsort

import numpy as np
cimport numpy as cnp

cnp.import_array()


def arma_filter(w, obs, phi, rvec, p0, int collect_from=-1):
    cdef double[::1] w_v = np.ascontiguousarray(w, dtype=np.float64)
    cdef unsigned char[::1] obs_v = np.ascontiguousarray(obs, dtype=np.uint8)
    cdef double[::1] phi_v = np.ascontiguousarray(phi, dtype=np.float64)
    cdef double[::1] r_v = np.ascontiguousarray(rvec, dtype=np.float64)
    cdef Py_ssize_t T = w_v.shape[0]
    cdef Py_ssize_t r = phi_v.shape[0]

    a_arr = np.zeros(r)
    P_arr = np.array(p0, dtype=np.float64, copy=True)
    cdef Py_ssize_t n_collect = T - collect_from if 0 <= collect_from < T else 0
    collected_arr = np.zeros((n_collect if n_collect > 0 else 0, r))
    wpred_arr = np.empty(T)
    scratch_a = np.empty(r)
    scratch_m = np.empty((r, r))

    cdef double[::1] a = a_arr
    cdef double[:, ::1] P = P_arr
    cdef double[:, ::1] collected = collected_arr
    cdef double[::1] wpred = wpred_arr
    cdef double[::1] an = scratch_a
    cdef double[:, ::1] M = scratch_m

    cdef double sum_log_f = 0.0
    cdef double sum_v2_f = 0.0
    cdef Py_ssize_t n_obs = 0
    cdef Py_ssize_t t, i, j
    cdef double f, v, ki, p0j
    cdef bint ok = True

    with nogil:
        for t in range(T):
            wpred[t] = a[0]
            if obs_v[t]:
                f = P[0, 0]
                if not isfinite(f) or f <= 1e-300:
                    ok = False
                    break
                v = w_v[t] - a[0]
                sum_log_f += log(f)
                sum_v2_f += v * v / f
                n_obs += 1
                # k = P[:,0]/f ; a += k v ; P -= outer(k, P[0,:])
                for i in range(r):
                    an[i] = P[i, 0] / f
                for i in range(r):
                    a[i] = a[i] + an[i] * v
                for j in range(r):
                    p0j = P[0, j]
                    for i in range(r):
                        P[i, j] = P[i, j] - an[i] * p0j
            if 0 <= collect_from and collect_from <= t:
                for i in range(r):
                    collected[t - collect_from, i] = a[i]
            if t == T - 1:
                break
            # a <- T a
            for i in range(r):
                an[i] = phi_v[i] * a[0]
            for i in range(r - 1):
                an[i] += a[i + 1]
            for i in range(r):
                a[i] = an[i]
            # M = T P : row i = phi_i * P[0,:] (+ P[i+1,:] for i < r-1)
            for i in range(r):
                for j in range(r):
                    M[i, j] = phi_v[i] * P[0, j]
            for i in range(r - 1):
                for j in range(r):
                    M[i, j] += P[i + 1, j]
            # P = M T' + R R' : col j = phi_j * M[:,0] (+ M[:,j+1] for j < r-1)
            for j in range(r):
                for i in range(r):
                    P[i, j] = M[i, 0] * phi_v[j]
            for j in range(r - 1):
                for i in range(r):
                    P[i, j] += M[i, j + 1]
            for i in range(r):
                for j in range(r):
                    P[i, j] += r_v[i] * r_v[j]

    if not ok:
        return False, 0.0, 0.0, 0, a_arr, collected_arr, wpred_arr
    return True, sum_log_f, sum_v2_f, int(n_obs), a_arr, collected_arr, wpred_arr


cdef struct XY:
    double x
    double y


cdef int _cmp_xy(const void* pa, const void* pb) noexcept nogil:
    cdef double ax = (<const XY*> pa).x
    cdef double bx = (<const XY*> pb).x
    if ax < bx:
        return -1
    if ax > bx:
        return 1
    return 0


def grow_tree(X, y, rows, int max_depth, int min_leaf):
    cdef double[:, ::1] X_v = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] y_v = np.ascontiguousarray(y, dtype=np.float64)
    cdef int[::1] rows_in = np.ascontiguousarray(rows, dtype=np.int32)
    cdef Py_ssize_t n_features = X_v.shape[1]
    cdef Py_ssize_t m_total = rows_in.shape[0]

    # <= m leaves (min_leaf >= 1), so < 2m nodes
    cdef Py_ssize_t cap = 2 * m_total + 2
    feature_arr = np.full(cap, -1, dtype=np.int32)
    threshold_arr = np.zeros(cap)
    left_arr = np.full(cap, -1, dtype=np.int32)
    right_arr = np.full(cap, -1, dtype=np.int32)
    value_arr = np.zeros(cap)
    idx_arr = np.array(rows_in, dtype=np.int32, copy=True)
    scratch_arr = np.empty(m_total, dtype=np.int32)
    pairs_arr = np.empty(m_total, dtype=[("x", np.float64), ("y", np.float64)])
    stack_arr = np.empty((cap, 4), dtype=np.int64)  # node, start, end, depth

    cdef int[::1] feature = feature_arr
    cdef double[::1] threshold = threshold_arr
    cdef int[::1] left = left_arr
    cdef int[::1] right = right_arr
    cdef double[::1] value = value_arr
    cdef int[::1] idx = idx_arr
    cdef int[::1] scratch = scratch_arr
    cdef XY* pairs = <XY*> cnp.PyArray_DATA(pairs_arr)
    cdef long long[:, ::1] stack = stack_arr

    cdef Py_ssize_t n_nodes = 1, sp = 0
    cdef Py_ssize_t node, start, end, depth, m, i, j, pos, nl, nr, cut
    cdef double total, ls, rs, gain, best_gain, best_thr, thr, xj
    cdef int best_feat, rr_i
    cdef Py_ssize_t left_id, right_id

    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = m_total
    stack[0, 3] = 0
    sp = 1
    with nogil:
        while sp > 0:
            sp -= 1
            node = stack[sp, 0]
            start = stack[sp, 1]
            end = stack[sp, 2]
            depth = stack[sp, 3]
            m = end - start
            total = 0.0
            for i in range(start, end):
                total += y_v[idx[i]]
            value[node] = total / m
            if depth >= max_depth or m < 2 * min_leaf:
                continue

            best_gain = -INFINITY
            best_feat = -1
            best_thr = 0.0
            for j in range(n_features):
                for i in range(m):
                    rr_i = idx[start + i]
                    pairs[i].x = X_v[rr_i, j]
                    pairs[i].y = y_v[rr_i]
                qsort(pairs, m, sizeof(XY), _cmp_xy)
                ls = 0.0
                for pos in range(m - 1):
                    ls += pairs[pos].y
                    nl = pos + 1
                    nr = m - nl
                    if nl < min_leaf:
                        continue
                    if nr < min_leaf:
                        break
                    if pairs[pos].x == pairs[pos + 1].x:
                        continue
                    rs = total - ls
                    gain = ls * ls / nl + rs * rs / nr
                    if gain > best_gain:
                        best_gain = gain
                        best_feat = j
                        thr = 0.5 * (pairs[pos].x + pairs[pos + 1].x)
                        if thr >= pairs[pos + 1].x:
                            thr = pairs[pos].x
                        best_thr = thr
            if best_feat < 0:
                continue

            # stable partition of idx[start:end] by x <= thr
            cut = 0
            for i in range(start, end):
                if X_v[idx[i], best_feat] <= best_thr:
                    scratch[cut] = idx[i]
                    cut += 1
            nl = cut
            for i in range(start, end):
                if X_v[idx[i], best_feat] > best_thr:
                    scratch[cut] = idx[i]
                    cut += 1
            for i in range(m):
                idx[start + i] = scratch[i]

            feature[node] = best_feat
            threshold[node] = best_thr
            left_id = n_nodes
            right_id = n_nodes + 1
            n_nodes += 2
            left[node] = <int> left_id
            right[node] = <int> right_id
            stack[sp, 0] = right_id
            stack[sp, 1] = start + nl
            stack[sp, 2] = end
            stack[sp, 3] = depth + 1
            sp += 1
            stack[sp, 0] = left_id
            stack[sp, 1] = start
            stack[sp, 2] = start + nl
            stack[sp, 3] = depth + 1
            sp += 1

    return (
        feature_arr[:n_nodes].copy(),
        threshold_arr[:n_nodes].copy(),
        left_arr[:n_nodes].copy(),
        right_arr[:n_nodes].copy(),
        value_arr[:n_nodes].copy(),
    )
