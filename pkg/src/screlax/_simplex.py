"""Dense bounded-variable revised simplex kernel.

The kernel body is written in the numpy subset that numba supports, so the
identical source runs either jit-compiled or as plain numpy (see
``screlax._backend``). It solves

    minimize c.y   subject to   A y = b,   lo <= y <= hi

where A already carries slack columns and, as its last m columns, signed
artificial unit columns used by phase 1. Two phases, Dantzig pricing with a
Bland's-rule fallback once pivots stay degenerate, explicit dense basis
inverse with periodic refactorization. The leaving variable comes from a
two-pass ratio test that admits any row whose ratio fits within the
feasibility tolerance and picks the largest pivot among them, which keeps
the basis well conditioned on degenerate problems.
"""

from __future__ import annotations

import numpy as np

from ._backend import backend_name, compile_kernel

# status codes returned by the kernel
OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
STALL = 3
SINGULAR = 4

# variable states
NB_LO = 0
NB_UP = 1
NB_FREE = 2
BASIC = 3

_PIV_TOL = 1e-10
_DEGEN_EPS = 1e-12
_BLAND_AFTER = 64
_REFACTOR_EVERY = 64


def _inv_ok(B):
    """Gauss-Jordan inverse with partial pivoting.

    Returns (Binv, ok); ok is False when a pivot column has no usable
    entry, in which case the caller must treat the basis as singular
    instead of trusting the output.
    """
    m = B.shape[0]
    W = np.zeros((m, 2 * m))
    W[:, :m] = B
    for i in range(m):
        W[i, m + i] = 1.0
    scale = 0.0
    for i in range(m):
        for j in range(m):
            a = abs(B[i, j])
            if a > scale:
                scale = a
    tiny = 1e-14 * (1.0 + scale)
    for col in range(m):
        piv = col
        best = abs(W[col, col])
        for i in range(col + 1, m):
            a = abs(W[i, col])
            if a > best:
                best = a
                piv = i
        if best <= tiny:
            return W[:, m:].copy(), False
        if piv != col:
            tmp = W[col].copy()
            W[col] = W[piv]
            W[piv] = tmp
        W[col] /= W[col, col]
        f = W[:, col].copy()
        f[col] = 0.0
        W -= f.reshape(-1, 1) * W[col : col + 1, :]
    return W[:, m:].copy(), True


def simplex_kernel(A, b, c, lo, hi, basis, vstat, x, warm, start_bland,
                   max_iter, feas_tol, opt_tol):
    """Run the two-phase simplex. Mutates basis, vstat, x in place.

    Returns (status, pi, obj, iters, ray_j, ray_dir, ray_w). pi holds the
    duals of the phase that terminated: phase-1 duals on INFEASIBLE (they
    form the infeasibility certificate), phase-2 duals on OPTIMAL.
    """
    m, nn = A.shape
    n_real = nn - m

    pi = np.zeros(m)
    ray_w = np.zeros(m)

    if warm:
        B = np.empty((m, m))
        for k in range(m):
            for i in range(m):
                B[i, k] = A[i, basis[k]]
        Binv, ok = _inv_ok(B)
        if not ok:
            return SINGULAR, pi, 0.0, 0, -1, 0.0, ray_w
        rhs = b.copy()
        for j in range(nn):
            if vstat[j] != BASIC and x[j] != 0.0:
                xv = x[j]
                for i in range(m):
                    rhs[i] -= A[i, j] * xv
        xb = Binv @ rhs
        for k in range(m):
            x[basis[k]] = xb[k]
        phase = 2
    else:
        Binv = np.zeros((m, m))
        for i in range(m):
            Binv[i, i] = A[i, n_real + i]
        phase = 1

    cost = np.zeros(nn)
    if phase == 1:
        for j in range(n_real, nn):
            cost[j] = 1.0
    else:
        for j in range(nn):
            cost[j] = c[j]

    iters = 0
    bland = start_bland
    degen_streak = 0
    since_refactor = 0

    while True:
        if iters >= max_iter:
            return STALL, pi, 0.0, iters, -1, 0.0, ray_w

        if since_refactor >= _REFACTOR_EVERY:
            since_refactor = 0
            B = np.empty((m, m))
            for k in range(m):
                for i in range(m):
                    B[i, k] = A[i, basis[k]]
            Binv, ok = _inv_ok(B)
            if not ok:
                return SINGULAR, pi, 0.0, iters, -1, 0.0, ray_w
            rhs = b.copy()
            for j in range(nn):
                if vstat[j] != BASIC and x[j] != 0.0:
                    xv = x[j]
                    for i in range(m):
                        rhs[i] -= A[i, j] * xv
            xb = Binv @ rhs
            for k in range(m):
                x[basis[k]] = xb[k]

        pi = cost[basis] @ Binv
        d = cost - pi @ A

        # entering column
        enter = -1
        enter_dir = 0.0
        best = opt_tol
        for j in range(nn):
            st = vstat[j]
            if st == BASIC:
                continue
            if lo[j] == hi[j]:
                continue
            dj = d[j]
            if (st == NB_LO or st == NB_FREE) and dj < -opt_tol:
                if bland:
                    enter = j
                    enter_dir = 1.0
                    break
                if -dj > best:
                    best = -dj
                    enter = j
                    enter_dir = 1.0
            elif (st == NB_UP or st == NB_FREE) and dj > opt_tol:
                if bland:
                    enter = j
                    enter_dir = -1.0
                    break
                if dj > best:
                    best = dj
                    enter = j
                    enter_dir = -1.0

        if enter == -1:
            if phase == 1:
                obj1 = 0.0
                for j in range(n_real, nn):
                    obj1 += x[j]
                if obj1 > feas_tol:
                    return INFEASIBLE, pi, obj1, iters, -1, 0.0, ray_w
                # pin artificials and continue with the real objective
                for j in range(n_real, nn):
                    hi[j] = 0.0
                    if vstat[j] != BASIC:
                        x[j] = 0.0
                for j in range(nn):
                    cost[j] = c[j]
                phase = 2
                bland = start_bland
                degen_streak = 0
                continue
            obj = 0.0
            for j in range(nn):
                obj += c[j] * x[j]
            return OPTIMAL, pi, obj, iters, -1, 0.0, ray_w

        aj = np.empty(m)
        for i in range(m):
            aj[i] = A[i, enter]
        w = Binv @ aj

        retried = False
        while True:
            t_flip = np.inf
            if hi[enter] < np.inf and lo[enter] > -np.inf:
                t_flip = hi[enter] - lo[enter]

            # pass 1: strict minimum ratio plus a tolerance-relaxed limit
            t_strict = t_flip
            t_limit = t_flip
            for i in range(m):
                wi = w[i] * enter_dir
                bv = basis[i]
                if wi > _PIV_TOL:
                    if lo[bv] > -np.inf:
                        ts = (x[bv] - lo[bv]) / wi
                        tr = (x[bv] - lo[bv] + feas_tol) / wi
                        if ts < t_strict:
                            t_strict = ts
                        if tr < t_limit:
                            t_limit = tr
                elif wi < -_PIV_TOL:
                    if hi[bv] < np.inf:
                        ts = (hi[bv] - x[bv]) / (-wi)
                        tr = (hi[bv] - x[bv] + feas_tol) / (-wi)
                        if ts < t_strict:
                            t_strict = ts
                        if tr < t_limit:
                            t_limit = tr

            if t_strict == np.inf:
                if phase == 1:
                    # phase-1 objective is bounded below; cannot happen with
                    # exact arithmetic. Refactor once, then give up.
                    if not retried:
                        retried = True
                        B = np.empty((m, m))
                        for k in range(m):
                            for i in range(m):
                                B[i, k] = A[i, basis[k]]
                        Binv, ok = _inv_ok(B)
                        if not ok:
                            return SINGULAR, pi, 0.0, iters, -1, 0.0, ray_w
                        w = Binv @ aj
                        continue
                    return STALL, pi, 0.0, iters, -1, 0.0, ray_w
                for i in range(m):
                    ray_w[i] = w[i]
                return UNBOUNDED, pi, 0.0, iters, enter, enter_dir, ray_w

            # pass 2: among rows within the limit, Bland mode takes the
            # smallest basis index at the strict minimum, normal mode takes
            # the largest pivot inside the relaxed window
            leave = -1
            leave_to_upper = False
            t_row = np.inf
            best_piv = 0.0
            for i in range(m):
                wi = w[i] * enter_dir
                bv = basis[i]
                if wi > _PIV_TOL and lo[bv] > -np.inf:
                    ti = (x[bv] - lo[bv]) / wi
                    if bland:
                        if ti <= t_strict + 1e-12 and (leave == -1 or bv < basis[leave]):
                            leave = i
                            t_row = ti
                            leave_to_upper = False
                    elif ti <= t_limit and abs(w[i]) > best_piv:
                        best_piv = abs(w[i])
                        leave = i
                        t_row = ti
                        leave_to_upper = False
                elif wi < -_PIV_TOL and hi[bv] < np.inf:
                    ti = (hi[bv] - x[bv]) / (-wi)
                    if bland:
                        if ti <= t_strict + 1e-12 and (leave == -1 or bv < basis[leave]):
                            leave = i
                            t_row = ti
                            leave_to_upper = True
                    elif ti <= t_limit and abs(w[i]) > best_piv:
                        best_piv = abs(w[i])
                        leave = i
                        t_row = ti
                        leave_to_upper = True

            if leave >= 0 and t_row < 0.0:
                t_row = 0.0
            if leave == -1 or t_flip < t_row:
                leave = -1
                t_best = t_flip
            else:
                t_best = t_row

            if leave >= 0 and abs(w[leave]) < 1e-11 and not retried:
                retried = True
                B = np.empty((m, m))
                for k in range(m):
                    for i in range(m):
                        B[i, k] = A[i, basis[k]]
                Binv, ok = _inv_ok(B)
                if not ok:
                    return SINGULAR, pi, 0.0, iters, -1, 0.0, ray_w
                w = Binv @ aj
                continue
            break

        if t_best <= _DEGEN_EPS:
            degen_streak += 1
            if degen_streak >= _BLAND_AFTER:
                bland = True
        elif t_best > 1e-9:
            degen_streak = 0
            bland = start_bland

        if t_best > 0.0:
            x[enter] = x[enter] + enter_dir * t_best
            for i in range(m):
                bv = basis[i]
                x[bv] = x[bv] - enter_dir * t_best * w[i]

        if leave == -1:
            # bound flip, basis unchanged
            if vstat[enter] == NB_LO:
                vstat[enter] = NB_UP
                x[enter] = hi[enter]
            else:
                vstat[enter] = NB_LO
                x[enter] = lo[enter]
        else:
            lv = basis[leave]
            if leave_to_upper:
                vstat[lv] = NB_UP
                x[lv] = hi[lv]
            else:
                vstat[lv] = NB_LO
                x[lv] = lo[lv]
            basis[leave] = enter
            vstat[enter] = BASIC
            piv = w[leave]
            prow = Binv[leave, :] / piv
            for i in range(m):
                if i != leave:
                    wi = w[i]
                    if wi != 0.0:
                        for k in range(m):
                            Binv[i, k] -= wi * prow[k]
            for k in range(m):
                Binv[leave, k] = prow[k]
            since_refactor += 1

        iters += 1


_HELPER_JITTED = False


def get_kernel(backend: str | None = None):
    global _inv_ok, _HELPER_JITTED
    if backend_name(backend) == "numba" and not _HELPER_JITTED:
        import numba

        _inv_ok = numba.njit(cache=True, nogil=True)(_inv_ok)
        _HELPER_JITTED = True
    return compile_kernel(simplex_kernel, backend)
