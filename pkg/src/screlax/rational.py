"""Exact rational simplex.

Tableau simplex over Fractions with Bland's rule, used when a
LinearProgram is marked ``exact=True``. Floats convert to their exact
binary values, so results are reproducible bit for bit. Statuses and
certificates follow the same conventions as the floating-point engine:
Farkas vectors index the combined row system of ``farkas_rows`` and rays
improve the stated objective sense.

Everything is reduced to one inequality system G x <= h (equalities
become opposite inequality pairs, bounds become rows), then solved as
G(u - v) + s = h with u, v, s >= 0. That keeps the certificate mapping
trivial at the cost of a few extra columns, which is fine at the sizes
exact mode is meant for.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .lp import LinearProgram, LpResult, LpStatus, LpStallError


def to_fraction(v) -> Fraction:
    """Exact conversion; floats map to their binary value."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, (float, np.floating)):
        return Fraction(float(v))
    return Fraction(v)


def fraction_vector(vals) -> list[Fraction]:
    return [to_fraction(v) for v in np.asarray(vals, dtype=object).reshape(-1)]


def fraction_matrix(rows) -> list[list[Fraction]]:
    arr = np.asarray(rows, dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return [[to_fraction(v) for v in row] for row in arr]


_ZERO = Fraction(0)
_ONE = Fraction(1)


def _combined_rows(lp: LinearProgram):
    """Exact (G, h) in the row order used by farkas certificates."""
    n, p, q = lp.dims()
    G: list[list[Fraction]] = []
    h: list[Fraction] = []
    a_ub = fraction_matrix(lp.a_ub) if p else []
    b_ub = fraction_vector(lp.b_ub) if p else []
    a_eq = fraction_matrix(lp.a_eq) if q else []
    b_eq = fraction_vector(lp.b_eq) if q else []
    for i in range(p):
        G.append(list(a_ub[i]))
        h.append(b_ub[i])
    for i in range(q):
        G.append(list(a_eq[i]))
        h.append(b_eq[i])
    for i in range(q):
        G.append([-v for v in a_eq[i]])
        h.append(-b_eq[i])
    lb = list(lp.lb) if lp.lb is not None else [None] * n
    ub = list(lp.ub) if lp.ub is not None else [None] * n
    lb = [None if (v is None or v == -np.inf) else to_fraction(v) for v in lb]
    ub = [None if (v is None or v == np.inf) else to_fraction(v) for v in ub]
    for j in range(n):
        if lb[j] is not None:
            row = [_ZERO] * n
            row[j] = -_ONE
            G.append(row)
            h.append(-lb[j])
    for j in range(n):
        if ub[j] is not None:
            row = [_ZERO] * n
            row[j] = _ONE
            G.append(row)
            h.append(ub[j])
    return G, h


def solve_exact(lp: LinearProgram, max_iter: int = 200000) -> LpResult:
    """Solve exactly; x, value, certificates come back as Fractions."""
    n = len(lp.c)
    c = fraction_vector(lp.c)
    sense = [-v for v in c] if lp.maximize else list(c)
    G, h = _combined_rows(lp)
    R = len(G)

    if R == 0:
        ray = [_ZERO] * n
        for j in range(n):
            if sense[j] != 0:
                ray[j] = _ONE if sense[j] < 0 else -_ONE
        if any(v != 0 for v in ray):
            if lp.maximize:
                ray = [-v for v in ray]
            return LpResult(LpStatus.UNBOUNDED, ray=np.array(ray, dtype=object),
                            value=np.inf if lp.maximize else -np.inf)
        x = np.array([_ZERO] * n, dtype=object)
        return LpResult(LpStatus.OPTIMAL, x=x, value=_ZERO)

    # columns: u_1..u_n, v_1..v_n, s_1..s_R, then R artificials
    N = 2 * n + R
    width = N + R + 1  # + rhs
    rows: list[list[Fraction]] = []
    art_sign: list[int] = []
    for i in range(R):
        row = [_ZERO] * width
        for j in range(n):
            row[j] = G[i][j]
            row[n + j] = -G[i][j]
        row[2 * n + i] = _ONE
        rhs = h[i]
        sign = 1
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
            sign = -1
        row[N + i] = _ONE
        row[-1] = rhs
        rows.append(row)
        art_sign.append(sign)

    basis = [N + i for i in range(R)]
    # phase-1 objective: minimize artificial sum; reduced-cost row starts
    # as -(sum of constraint rows) over non-artificial columns
    obj = [_ZERO] * width
    for i in range(R):
        for k in range(width):
            obj[k] -= rows[i][k]
    for i in range(R):
        obj[N + i] = _ZERO

    iters = _bland(rows, obj, basis, set(range(N)), max_iter)
    phase1 = -obj[-1]
    if iters < 0:
        raise LpStallError("exact simplex exceeded the iteration cap")

    if phase1 > 0:
        # tableau row i is sign_i times combined row i, so the dual of the
        # tableau maps back with that sign; artificial reduced cost d_i
        # equals 1 - pi_i in tableau coordinates
        y = [_ZERO] * R
        for i in range(R):
            pi = _ONE - obj[N + i]
            cand = -art_sign[i] * pi
            if cand > 0:
                y[i] = cand
        top = max(y)
        if top > 0:
            y = [v / top for v in y]
        return LpResult(LpStatus.INFEASIBLE, farkas=np.array(y, dtype=object),
                        iterations=iters)

    # pivot lingering zero-value artificials onto structural columns;
    # rows where none exists are redundant and get dropped
    for i in range(R):
        if basis[i] >= N:
            piv = next((j for j in range(N) if rows[i][j] != 0), None)
            if piv is not None:
                _pivot(rows, obj, i, piv, basis)
    keep = [i for i in range(R) if basis[i] < N]
    rows = [rows[i] for i in keep]
    basis = [basis[i] for i in keep]
    allowed = set(range(N))

    # phase 2
    obj = [_ZERO] * width
    for j in range(n):
        obj[j] = sense[j]
        obj[n + j] = -sense[j]
    for i, b in enumerate(basis):
        if obj[b] != 0:
            coef = obj[b]
            for k in range(width):
                obj[k] -= coef * rows[i][k]

    iters2 = _bland(rows, obj, basis, allowed, max_iter)
    if iters2 == -2:
        j = _entering_bland(obj, basis, allowed)
        ray = [_ZERO] * N
        ray[j] = _ONE
        for i, b in enumerate(basis):
            ray[b] = -rows[i][j]
        xray = np.array([ray[k] - ray[n + k] for k in range(n)], dtype=object)
        return LpResult(LpStatus.UNBOUNDED, ray=xray,
                        value=np.inf if lp.maximize else -np.inf,
                        iterations=iters)
    if iters2 < 0:
        raise LpStallError("exact simplex exceeded the iteration cap")

    uv = [_ZERO] * N
    for i, b in enumerate(basis):
        uv[b] = rows[i][-1]
    x = np.array([uv[j] - uv[n + j] for j in range(n)], dtype=object)
    value = sum((ci * xi for ci, xi in zip(c, x)), _ZERO)
    return LpResult(LpStatus.OPTIMAL, x=x, value=value, iterations=iters + iters2)


def _entering_bland(obj, basis, allowed):
    basic = set(basis)
    for j in sorted(allowed):
        if j not in basic and obj[j] < 0:
            return j
    return -1


def _bland(rows, obj, basis, allowed, max_iter) -> int:
    """Bland-rule tableau iterations in place. Returns the count, -1 on a
    hit cap, -2 on unboundedness (entering column left intact)."""
    R = len(rows)
    it = 0
    while it < max_iter:
        j = _entering_bland(obj, basis, allowed)
        if j < 0:
            return it
        leave = -1
        best = None
        for i in range(R):
            a = rows[i][j]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return -2
        _pivot(rows, obj, leave, j, basis)
        it += 1
    return -1


def _pivot(rows, obj, i: int, j: int, basis) -> None:
    piv = rows[i][j]
    inv = _ONE / piv
    rows[i] = [v * inv for v in rows[i]]
    ri = rows[i]
    for r in range(len(rows)):
        if r != i:
            f = rows[r][j]
            if f != 0:
                rows[r] = [a - f * b for a, b in zip(rows[r], ri)]
    f = obj[j]
    if f != 0:
        for k in range(len(obj)):
            obj[k] -= f * ri[k]
    basis[i] = j
