"""Hot numerical loops with twin builds.

Each kernel exists as a plain-loop source (compiled with numba when the
backend is active) and as a pure numpy/python fallback.  The public names at
the bottom of this module always point at the selected build; the test suite
runs both builds against each other and benchmarks/bench_kernels.py times
them.

Conventions: a G2-valued path is passed as (vecs, mats) with shapes (n, d)
and (n, d, d), holding the running signature from time 0.  Distances are the
homogeneous norm from the algebra module, evaluated in fused form so that
identical inputs give exactly zero.
"""

import math

import numpy as np

from ._backend import JIT_OPTIONS, USE_NUMBA

# --------------------------------------------------------------------------
# distance helpers (loop sources; jitted below when the backend is active)
# --------------------------------------------------------------------------


def _vec_point_dist(x, i, y, j):
    s = 0.0
    for k in range(x.shape[1]):
        diff = y[j, k] - x[i, k]
        s += diff * diff
    return math.sqrt(s)


def _g2_point_dist(vx, mx, i, vy, my, j):
    """Homogeneous distance N(g_i^-1 h_j) between two path points."""
    d = vx.shape[1]
    s1 = 0.0
    for k in range(d):
        diff = vy[j, k] - vx[i, k]
        s1 += diff * diff
    us = 0.0
    for k in range(d):
        for l in range(k + 1, d):
            q_kl = my[j, k, l] - mx[i, k, l] - vx[i, k] * (vy[j, l] - vx[i, l])
            q_lk = my[j, l, k] - mx[i, l, k] - vx[i, l] * (vy[j, k] - vx[i, k])
            a = 0.5 * (q_kl - q_lk)
            us += a * a
    lvl1 = math.sqrt(s1)
    lvl2 = math.sqrt(2.0 * math.sqrt(us))
    return lvl1 if lvl1 > lvl2 else lvl2


def _g2_inc_pair_dist(vx, mx, ia, ja, vy, my, ib, jb):
    """Homogeneous distance between increment x[ia->ja] and y[ib->jb]."""
    d = vx.shape[1]
    s1 = 0.0
    for k in range(d):
        gk = vx[ja, k] - vx[ia, k]
        hk = vy[jb, k] - vy[ib, k]
        diff = hk - gk
        s1 += diff * diff
    us = 0.0
    for k in range(d):
        for l in range(k + 1, d):
            g_kl = mx[ja, k, l] - mx[ia, k, l] - vx[ia, k] * (vx[ja, l] - vx[ia, l])
            g_lk = mx[ja, l, k] - mx[ia, l, k] - vx[ia, l] * (vx[ja, k] - vx[ia, k])
            h_kl = my[jb, k, l] - my[ib, k, l] - vy[ib, k] * (vy[jb, l] - vy[ib, l])
            h_lk = my[jb, l, k] - my[ib, l, k] - vy[ib, l] * (vy[jb, k] - vy[ib, k])
            gv_k = vx[ja, k] - vx[ia, k]
            gv_l = vx[ja, l] - vx[ia, l]
            dv_k = (vy[jb, k] - vy[ib, k]) - gv_k
            dv_l = (vy[jb, l] - vy[ib, l]) - gv_l
            q_kl = h_kl - g_kl - gv_k * dv_l
            q_lk = h_lk - g_lk - gv_l * dv_k
            a = 0.5 * (q_kl - q_lk)
            us += a * a
    lvl1 = math.sqrt(s1)
    lvl2 = math.sqrt(2.0 * math.sqrt(us))
    return lvl1 if lvl1 > lvl2 else lvl2


# --------------------------------------------------------------------------
# p-variation DP
# --------------------------------------------------------------------------


def _pvar_dp_vec_loop(values, p):
    """Max over partitions of sum |increment|^p, endpoints pinned."""
    n = values.shape[0]
    if n < 2:
        return 0.0
    best = np.empty(n)
    best[0] = 0.0
    for j in range(1, n):
        m = -1.0
        for i in range(j):
            c = best[i] + _vec_point_dist(values, i, values, j) ** p
            if c > m:
                m = c
        best[j] = m
    return best[n - 1]


def _pvar_dp_g2_loop(vecs, mats, p):
    n = vecs.shape[0]
    if n < 2:
        return 0.0
    best = np.empty(n)
    best[0] = 0.0
    for j in range(1, n):
        m = -1.0
        for i in range(j):
            c = best[i] + _g2_point_dist(vecs, mats, i, vecs, mats, j) ** p
            if c > m:
                m = c
        best[j] = m
    return best[n - 1]


def _pvar_dp_vec_np(values, p):
    n = values.shape[0]
    if n < 2:
        return 0.0
    best = np.empty(n)
    best[0] = 0.0
    for j in range(1, n):
        dist = np.linalg.norm(values[:j] - values[j], axis=1)
        best[j] = np.max(best[:j] + dist ** p)
    return float(best[n - 1])


def _g2_point_dist_rows_np(vx, mx, j):
    """Distances from points 0..j-1 to point j of the same path, vectorized."""
    dv = vx[j] - vx[:j]
    dm = mx[j] - mx[:j] - vx[:j, :, None] * dv[:, None, :]
    a = 0.5 * (dm - dm.transpose(0, 2, 1))
    iu = np.triu_indices(vx.shape[1], 1)
    us = np.sum(a[:, iu[0], iu[1]] ** 2, axis=1) if iu[0].size else np.zeros(j)
    return np.maximum(np.linalg.norm(dv, axis=1), np.sqrt(2.0 * np.sqrt(us)))


def _pvar_dp_g2_np(vecs, mats, p):
    n = vecs.shape[0]
    if n < 2:
        return 0.0
    best = np.empty(n)
    best[0] = 0.0
    for j in range(1, n):
        dist = _g2_point_dist_rows_np(vecs, mats, j)
        best[j] = np.max(best[:j] + dist ** p)
    return float(best[n - 1])


# --------------------------------------------------------------------------
# inhomogeneous rho distance DP (levelwise sup over partitions)
# --------------------------------------------------------------------------


def _rho_dp_loop(vx, mx, vy, my, p):
    """Return (S1, S2): levelwise powered partition sups on the common grid.

    S1 uses |level-1 increment difference|^p, S2 uses the Frobenius norm of
    the full level-2 increment difference to the power p/2.
    """
    n = vx.shape[0]
    d = vx.shape[1]
    s_out = np.zeros(2)
    if n < 2:
        return s_out
    best1 = np.empty(n)
    best2 = np.empty(n)
    best1[0] = 0.0
    best2[0] = 0.0
    for j in range(1, n):
        m1 = -1.0
        m2 = -1.0
        for i in range(j):
            c1 = 0.0
            for k in range(d):
                diff = (vx[j, k] - vx[i, k]) - (vy[j, k] - vy[i, k])
                c1 += diff * diff
            c2 = 0.0
            for k in range(d):
                for l in range(d):
                    ax = mx[j, k, l] - mx[i, k, l] - vx[i, k] * (vx[j, l] - vx[i, l])
                    ay = my[j, k, l] - my[i, k, l] - vy[i, k] * (vy[j, l] - vy[i, l])
                    diff = ax - ay
                    c2 += diff * diff
            v1 = best1[i] + math.sqrt(c1) ** p
            v2 = best2[i] + math.sqrt(c2) ** (p / 2.0)
            if v1 > m1:
                m1 = v1
            if v2 > m2:
                m2 = v2
        best1[j] = m1
        best2[j] = m2
    s_out[0] = best1[n - 1]
    s_out[1] = best2[n - 1]
    return s_out


def _rho_dp_np(vx, mx, vy, my, p):
    n = vx.shape[0]
    s_out = np.zeros(2)
    if n < 2:
        return s_out
    best1 = np.empty(n)
    best2 = np.empty(n)
    best1[0] = 0.0
    best2[0] = 0.0
    for j in range(1, n):
        d1v = (vx[j] - vx[:j]) - (vy[j] - vy[:j])
        c1 = np.linalg.norm(d1v, axis=1)
        ax = mx[j] - mx[:j] - vx[:j, :, None] * (vx[j] - vx[:j])[:, None, :]
        ay = my[j] - my[:j] - vy[:j, :, None] * (vy[j] - vy[:j])[:, None, :]
        c2 = np.sqrt(np.sum((ax - ay) ** 2, axis=(1, 2)))
        best1[j] = np.max(best1[:j] + c1 ** p)
        best2[j] = np.max(best2[:j] + c2 ** (p / 2.0))
    s_out[0] = best1[n - 1]
    s_out[1] = best2[n - 1]
    return s_out


# --------------------------------------------------------------------------
# homogeneous p-variation distance DP (for the beta metric)
# --------------------------------------------------------------------------


def _homog_dp_g2_loop(vx, mx, vy, my, p):
    n = vx.shape[0]
    if n < 2:
        return 0.0
    best = np.empty(n)
    best[0] = 0.0
    for j in range(1, n):
        m = -1.0
        for i in range(j):
            c = best[i] + _g2_inc_pair_dist(vx, mx, i, j, vy, my, i, j) ** p
            if c > m:
                m = c
        best[j] = m
    return best[n - 1]


def _homog_dp_vec_loop(x, y, p):
    n = x.shape[0]
    if n < 2:
        return 0.0
    d = x.shape[1]
    best = np.empty(n)
    best[0] = 0.0
    for j in range(1, n):
        m = -1.0
        for i in range(j):
            s = 0.0
            for k in range(d):
                diff = (x[j, k] - x[i, k]) - (y[j, k] - y[i, k])
                s += diff * diff
            c = best[i] + math.sqrt(s) ** p
            if c > m:
                m = c
        best[j] = m
    return best[n - 1]


def _homog_dp_g2_np(vx, mx, vy, my, p):
    n = vx.shape[0]
    if n < 2:
        return 0.0
    d = vx.shape[1]
    iu = np.triu_indices(d, 1)
    best = np.empty(n)
    best[0] = 0.0
    for j in range(1, n):
        gav = vx[j] - vx[:j]
        hbv = vy[j] - vy[:j]
        gm = mx[j] - mx[:j] - vx[:j, :, None] * gav[:, None, :]
        hm = my[j] - my[:j] - vy[:j, :, None] * hbv[:, None, :]
        dv = hbv - gav
        q = hm - gm - gav[:, :, None] * dv[:, None, :]
        a = 0.5 * (q - q.transpose(0, 2, 1))
        us = np.sum(a[:, iu[0], iu[1]] ** 2, axis=1) if iu[0].size else np.zeros(j)
        dist = np.maximum(np.linalg.norm(dv, axis=1), np.sqrt(2.0 * np.sqrt(us)))
        best[j] = np.max(best[:j] + dist ** p)
    return float(best[n - 1])


def _homog_dp_vec_np(x, y, p):
    n = x.shape[0]
    if n < 2:
        return 0.0
    best = np.empty(n)
    best[0] = 0.0
    for j in range(1, n):
        dist = np.linalg.norm((x[j] - x[:j]) - (y[j] - y[:j]), axis=1)
        best[j] = np.max(best[:j] + dist ** p)
    return float(best[n - 1])


# --------------------------------------------------------------------------
# bottleneck alignment DP (sigma estimates)
# --------------------------------------------------------------------------
# Cost of a monotone alignment is the max over matched pairs (i, j) of
# max(|t_i - s_j|, dist(x_i, y_j)); ties between alignments are broken toward
# the smaller time distortion max|t_i - s_j| (lexicographic bottleneck DP).
# Backtracking prefers the diagonal predecessor, then up, then left.


def _sigma_backtrack(choice, n, m):
    ai = np.empty(n + m, dtype=np.int64)
    aj = np.empty(n + m, dtype=np.int64)
    i = n - 1
    j = m - 1
    k = n + m - 1
    ai[k] = i
    aj[k] = j
    while i > 0 or j > 0:
        c = choice[i, j]
        if c == 0:
            i -= 1
            j -= 1
        elif c == 1:
            i -= 1
        else:
            j -= 1
        k -= 1
        ai[k] = i
        aj[k] = j
    return ai[k:].copy(), aj[k:].copy()


def _sigma_dp_core(tx, ty, n, m, cost, dt, val, lam, choice):
    big = 1e300
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                pv, pl = 0.0, 0.0
                ch = 0
            else:
                pv, pl = big, big
                ch = 0
                if i > 0 and j > 0:
                    pv, pl = val[i - 1, j - 1], lam[i - 1, j - 1]
                    ch = 0
                if i > 0:
                    v, l = val[i - 1, j], lam[i - 1, j]
                    if v < pv or (v == pv and l < pl):
                        pv, pl, ch = v, l, 1
                if j > 0:
                    v, l = val[i, j - 1], lam[i, j - 1]
                    if v < pv or (v == pv and l < pl):
                        pv, pl, ch = v, l, 2
            c = cost[i, j]
            val[i, j] = c if c > pv else pv
            t = dt[i, j]
            lam[i, j] = t if t > pl else pl
            choice[i, j] = ch


def _sigma_dp_vec_loop(tx, x, ty, y):
    n = tx.shape[0]
    m = ty.shape[0]
    val = np.empty((n, m))
    lam = np.empty((n, m))
    choice = np.zeros((n, m), dtype=np.int8)
    cost = np.empty((n, m))
    dt = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            t = abs(tx[i] - ty[j])
            dloc = _vec_point_dist(x, i, y, j)
            dt[i, j] = t
            cost[i, j] = t if t > dloc else dloc
    _sigma_dp_core(tx, ty, n, m, cost, dt, val, lam, choice)
    return val[n - 1, m - 1], lam[n - 1, m - 1], choice


def _sigma_dp_g2_loop(tx, vx, mx, ty, vy, my):
    n = tx.shape[0]
    m = ty.shape[0]
    val = np.empty((n, m))
    lam = np.empty((n, m))
    choice = np.zeros((n, m), dtype=np.int8)
    cost = np.empty((n, m))
    dt = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            t = abs(tx[i] - ty[j])
            dloc = _g2_point_dist(vx, mx, i, vy, my, j)
            dt[i, j] = t
            cost[i, j] = t if t > dloc else dloc
    _sigma_dp_core(tx, ty, n, m, cost, dt, val, lam, choice)
    return val[n - 1, m - 1], lam[n - 1, m - 1], choice


def _sigma_dp_vec_np(tx, x, ty, y):
    dt = np.abs(tx[:, None] - ty[None, :])
    dloc = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=2)
    cost = np.maximum(dt, dloc)
    n, m = cost.shape
    val = np.empty((n, m))
    lam = np.empty((n, m))
    choice = np.zeros((n, m), dtype=np.int8)
    _sigma_dp_core(tx, ty, n, m, cost, dt, val, lam, choice)
    return val[n - 1, m - 1], lam[n - 1, m - 1], choice


def _sigma_dp_g2_np(tx, vx, mx, ty, vy, my):
    n = tx.shape[0]
    m = ty.shape[0]
    d = vx.shape[1]
    iu = np.triu_indices(d, 1)
    dt = np.abs(tx[:, None] - ty[None, :])
    cost = np.empty((n, m))
    for i in range(n):
        dv = vy - vx[i]
        dm = my - mx[i] - vx[i][None, :, None] * dv[:, None, :]
        a = 0.5 * (dm - dm.transpose(0, 2, 1))
        us = np.sum(a[:, iu[0], iu[1]] ** 2, axis=1) if iu[0].size else np.zeros(m)
        dist = np.maximum(np.linalg.norm(dv, axis=1), np.sqrt(2.0 * np.sqrt(us)))
        cost[i] = np.maximum(dt[i], dist)
    val = np.empty((n, m))
    lam = np.empty((n, m))
    choice = np.zeros((n, m), dtype=np.int8)
    _sigma_dp_core(tx, ty, n, m, cost, dt, val, lam, choice)
    return val[n - 1, m - 1], lam[n - 1, m - 1], choice


# --------------------------------------------------------------------------
# increment-uniform distance along a fixed alignment (d_0 evaluation)
# --------------------------------------------------------------------------


def _d0_align_vec_loop(x, y, ai, aj):
    L = ai.shape[0]
    d = x.shape[1]
    worst = 0.0
    for u in range(L):
        for v in range(u + 1, L):
            s = 0.0
            for k in range(d):
                diff = (x[ai[v], k] - x[ai[u], k]) - (y[aj[v], k] - y[aj[u], k])
                s += diff * diff
            ds = math.sqrt(s)
            if ds > worst:
                worst = ds
    return worst


def _d0_align_g2_loop(vx, mx, vy, my, ai, aj):
    L = ai.shape[0]
    worst = 0.0
    for u in range(L):
        for v in range(u + 1, L):
            ds = _g2_inc_pair_dist(vx, mx, ai[u], ai[v], vy, my, aj[u], aj[v])
            if ds > worst:
                worst = ds
    return worst


def _d0_align_vec_np(x, y, ai, aj):
    gx = x[ai]
    gy = y[aj]
    diff = gx[:, None, :] - gx[None, :, :] - (gy[:, None, :] - gy[None, :, :])
    return float(np.max(np.linalg.norm(diff, axis=2))) if ai.size else 0.0


def _d0_align_g2_np(vx, mx, vy, my, ai, aj):
    return _d0_align_g2_loop(vx, mx, vy, my, ai, aj)


# --------------------------------------------------------------------------
# oscillation counting (greedy stopping times)
# --------------------------------------------------------------------------


def _nu_count_vec_loop(values, delta):
    """Number of greedy stopping times at oscillation threshold delta."""
    n = values.shape[0]
    count = 0
    start = 0
    while start < n - 1:
        hit = -1
        osc = 0.0
        for t in range(start + 1, n):
            for u in range(start, t):
                dloc = _vec_point_dist(values, u, values, t)
                if dloc > osc:
                    osc = dloc
            if osc > delta:
                hit = t
                break
        if hit < 0:
            break
        count += 1
        start = hit
    return count


def _nu_count_g2_loop(vecs, mats, delta):
    n = vecs.shape[0]
    count = 0
    start = 0
    while start < n - 1:
        hit = -1
        osc = 0.0
        for t in range(start + 1, n):
            for u in range(start, t):
                dloc = _g2_point_dist(vecs, mats, u, vecs, mats, t)
                if dloc > osc:
                    osc = dloc
            if osc > delta:
                hit = t
                break
        if hit < 0:
            break
        count += 1
        start = hit
    return count


# --------------------------------------------------------------------------
# specialized log-ODE steppers (linear and sine-twist vector fields)
# --------------------------------------------------------------------------
# Per increment with log (u, a) the step field is
#   W(y) = sum_i u_i V_i(y) + sum_{i<j} a_ij (DV_j V_i - DV_i V_j)(y)
# integrated over unit time by classical RK4 with
#   substeps = base * max(1, ceil(hom_norm(u, a) / cap)).


def _inc_hom_norm(u, a, i):
    d = u.shape[1]
    s1 = 0.0
    for k in range(d):
        s1 += u[i, k] * u[i, k]
    us = 0.0
    for k in range(d):
        for l in range(k + 1, d):
            us += a[i, k, l] * a[i, k, l]
    lvl1 = math.sqrt(s1)
    lvl2 = math.sqrt(2.0 * math.sqrt(us))
    return lvl1 if lvl1 > lvl2 else lvl2


def _rk4_linear_drive_loop(u, a, A, b, y0, base, cap):
    """Trajectory of the log-ODE scheme for affine fields V_i(y) = A_i y + b_i."""
    m = u.shape[0]
    d = u.shape[1]
    e = y0.shape[0]
    traj = np.empty((m + 1, e))
    y = y0.copy()
    traj[0] = y
    M = np.empty((e, e))
    c = np.empty(e)
    k1 = np.empty(e)
    k2 = np.empty(e)
    k3 = np.empty(e)
    k4 = np.empty(e)
    tmp = np.empty(e)
    for step in range(m):
        for r in range(e):
            c[r] = 0.0
            for s in range(e):
                M[r, s] = 0.0
        for i in range(d):
            ui = u[step, i]
            if ui != 0.0:
                for r in range(e):
                    c[r] += ui * b[i, r]
                    for s in range(e):
                        M[r, s] += ui * A[i, r, s]
        for i in range(d):
            for j in range(i + 1, d):
                aij = a[step, i, j]
                if aij != 0.0:
                    # bracket (A_j A_i - A_i A_j) y + A_j b_i - A_i b_j
                    for r in range(e):
                        acc = 0.0
                        for s in range(e):
                            acc += A[j, r, s] * b[i, s] - A[i, r, s] * b[j, s]
                        c[r] += aij * acc
                        for s in range(e):
                            br = 0.0
                            for q in range(e):
                                br += A[j, r, q] * A[i, q, s] - A[i, r, q] * A[j, q, s]
                            M[r, s] += aij * br
        norm = _inc_hom_norm(u, a, step)
        nsub = base * max(1, int(math.ceil(norm / cap)))
        h = 1.0 / nsub
        for _ in range(nsub):
            for r in range(e):
                acc = c[r]
                for s in range(e):
                    acc += M[r, s] * y[s]
                k1[r] = acc
            for r in range(e):
                tmp[r] = y[r] + 0.5 * h * k1[r]
            for r in range(e):
                acc = c[r]
                for s in range(e):
                    acc += M[r, s] * tmp[s]
                k2[r] = acc
            for r in range(e):
                tmp[r] = y[r] + 0.5 * h * k2[r]
            for r in range(e):
                acc = c[r]
                for s in range(e):
                    acc += M[r, s] * tmp[s]
                k3[r] = acc
            for r in range(e):
                tmp[r] = y[r] + h * k3[r]
            for r in range(e):
                acc = c[r]
                for s in range(e):
                    acc += M[r, s] * tmp[s]
                k4[r] = acc
            for r in range(e):
                y[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r])
        traj[step + 1] = y
    return traj


def _sine_w_eval(u, a, a0, B, step, y, out):
    """W(y) for sine-twist fields V_i(y)_r = a0[i,r] + sum_s B[i,r,s] sin(y_s)."""
    d = u.shape[1]
    e = y.shape[0]
    sy = np.empty(e)
    cy = np.empty(e)
    for s in range(e):
        sy[s] = math.sin(y[s])
        cy[s] = math.cos(y[s])
    V = np.empty((d, e))
    for i in range(d):
        for r in range(e):
            acc = a0[i, r]
            for s in range(e):
                acc += B[i, r, s] * sy[s]
            V[i, r] = acc
    for r in range(e):
        out[r] = 0.0
    for i in range(d):
        ui = u[step, i]
        if ui != 0.0:
            for r in range(e):
                out[r] += ui * V[i, r]
    for i in range(d):
        for j in range(i + 1, d):
            aij = a[step, i, j]
            if aij != 0.0:
                for r in range(e):
                    acc = 0.0
                    for s in range(e):
                        acc += B[j, r, s] * cy[s] * V[i, s] \
                            - B[i, r, s] * cy[s] * V[j, s]
                    out[r] += aij * acc


def _rk4_sine_drive_loop(u, a, a0, B, y0, base, cap):
    """Trajectory of the log-ODE scheme for sine-twist fields."""
    m = u.shape[0]
    e = y0.shape[0]
    traj = np.empty((m + 1, e))
    y = y0.copy()
    traj[0] = y
    k1 = np.empty(e)
    k2 = np.empty(e)
    k3 = np.empty(e)
    k4 = np.empty(e)
    tmp = np.empty(e)
    for step in range(m):
        norm = _inc_hom_norm(u, a, step)
        nsub = base * max(1, int(math.ceil(norm / cap)))
        h = 1.0 / nsub
        for _ in range(nsub):
            _sine_w_eval(u, a, a0, B, step, y, k1)
            for r in range(e):
                tmp[r] = y[r] + 0.5 * h * k1[r]
            _sine_w_eval(u, a, a0, B, step, tmp, k2)
            for r in range(e):
                tmp[r] = y[r] + 0.5 * h * k2[r]
            _sine_w_eval(u, a, a0, B, step, tmp, k3)
            for r in range(e):
                tmp[r] = y[r] + h * k3[r]
            _sine_w_eval(u, a, a0, B, step, tmp, k4)
            for r in range(e):
                y[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r])
        traj[step + 1] = y
    return traj


# --------------------------------------------------------------------------
# build selection
# --------------------------------------------------------------------------

if USE_NUMBA:
    from numba import njit

    _jit = njit(**JIT_OPTIONS)
    _vec_point_dist = _jit(_vec_point_dist)
    _g2_point_dist = _jit(_g2_point_dist)
    _g2_inc_pair_dist = _jit(_g2_inc_pair_dist)
    _inc_hom_norm = _jit(_inc_hom_norm)
    _sigma_dp_core = _jit(_sigma_dp_core)
    _sine_w_eval = _jit(_sine_w_eval)

    pvar_dp_vec = _jit(_pvar_dp_vec_loop)
    pvar_dp_g2 = _jit(_pvar_dp_g2_loop)
    rho_dp = _jit(_rho_dp_loop)
    homog_dp_g2 = _jit(_homog_dp_g2_loop)
    homog_dp_vec = _jit(_homog_dp_vec_loop)
    _sigma_dp_vec = _jit(_sigma_dp_vec_loop)
    _sigma_dp_g2 = _jit(_sigma_dp_g2_loop)
    d0_align_vec = _jit(_d0_align_vec_loop)
    d0_align_g2 = _jit(_d0_align_g2_loop)
    nu_count_vec = _jit(_nu_count_vec_loop)
    nu_count_g2 = _jit(_nu_count_g2_loop)
    rk4_linear_drive = _jit(_rk4_linear_drive_loop)
    rk4_sine_drive = _jit(_rk4_sine_drive_loop)
else:
    pvar_dp_vec = _pvar_dp_vec_np
    pvar_dp_g2 = _pvar_dp_g2_np
    rho_dp = _rho_dp_np
    homog_dp_g2 = _homog_dp_g2_np
    homog_dp_vec = _homog_dp_vec_np
    _sigma_dp_vec = _sigma_dp_vec_np
    _sigma_dp_g2 = _sigma_dp_g2_np
    d0_align_vec = _d0_align_vec_np
    d0_align_g2 = _d0_align_g2_np
    nu_count_vec = _nu_count_vec_loop
    nu_count_g2 = _nu_count_g2_loop
    rk4_linear_drive = _rk4_linear_drive_loop
    rk4_sine_drive = _rk4_sine_drive_loop


def sigma_dp_vec(tx, x, ty, y):
    """Bottleneck alignment value, time distortion and alignment indices."""
    val, lam, choice = _sigma_dp_vec(tx, x, ty, y)
    ai, aj = _sigma_backtrack(choice, tx.shape[0], ty.shape[0])
    return float(val), float(lam), ai, aj


def sigma_dp_g2(tx, vx, mx, ty, vy, my):
    val, lam, choice = _sigma_dp_g2(tx, vx, mx, ty, vy, my)
    ai, aj = _sigma_backtrack(choice, tx.shape[0], ty.shape[0])
    return float(val), float(lam), ai, aj
