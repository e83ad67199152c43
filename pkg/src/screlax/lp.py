"""Linear programming engine.

Dense bounded-variable two-phase primal simplex with rigorous status
discrimination: every infeasible solve carries a Farkas certificate over the
combined row system, every unbounded solve carries an improving ray, and a
configurable iteration cap turns numerical stalls into a typed error instead
of a wrong answer. Semidefinite side constraints are handled by an
eigenvector cutting-plane loop on top of the LP core.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _simplex


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpError(Exception):
    """Base class for engine failures."""


class LpStallError(LpError):
    """Iteration cap hit before convergence; carries the last basis."""

    def __init__(self, message: str, basis=None, iterations: int = 0):
        super().__init__(message)
        self.basis = basis
        self.iterations = iterations


def _as_2d(a, n: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, n))
    arr = np.asarray(a, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, n)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.shape[1] != n:
        raise ValueError(f"row width {arr.shape[1]} does not match {n} variables")
    return arr


def _as_1d(a, r: int, what: str) -> np.ndarray:
    if a is None:
        arr = np.zeros(r)
    else:
        arr = np.asarray(a, dtype=float).reshape(-1)
    if arr.shape[0] != r:
        raise ValueError(f"{what}: expected length {r}, got {arr.shape[0]}")
    return arr


@dataclass
class LinearProgram:
    """min/max c.x subject to a_ub x <= b_ub, a_eq x = b_eq, lb <= x <= ub.

    Bounds default to free variables. With ``exact=True`` all data is taken
    as Fractions and the solve runs in exact rational arithmetic.
    """

    c: Sequence
    a_ub: Sequence = None
    b_ub: Sequence = None
    a_eq: Sequence = None
    b_eq: Sequence = None
    lb: Sequence = None
    ub: Sequence = None
    maximize: bool = False
    exact: bool = False

    def dims(self):
        n = len(self.c)
        p = 0 if self.a_ub is None else len(self.a_ub)
        q = 0 if self.a_eq is None else len(self.a_eq)
        return n, p, q


@dataclass
class LpResult:
    status: LpStatus
    x: np.ndarray | None = None
    value: float | None = None
    farkas: np.ndarray | None = None
    ray: np.ndarray | None = None
    iterations: int = 0
    basis: np.ndarray | None = None

    def require_optimal(self) -> np.ndarray:
        if self.status != LpStatus.OPTIMAL:
            raise LpError(f"expected an optimal solve, got {self.status.value}")
        return self.x


def farkas_rows(lp: LinearProgram):
    """Combined row system (A, rhs) used by infeasibility certificates.

    Row order: the a_ub rows, each equality as two opposite inequalities,
    then -x_j <= -lb_j for every finite lower bound and x_j <= ub_j for
    every finite upper bound. A certificate y >= 0 returned on an
    infeasible solve satisfies y.A = 0 and y.rhs < 0 over these rows.
    """
    n, p, q = lp.dims()
    a_ub = _as_2d(lp.a_ub, n)
    b_ub = _as_1d(lp.b_ub, p, "b_ub")
    a_eq = _as_2d(lp.a_eq, n)
    b_eq = _as_1d(lp.b_eq, q, "b_eq")
    lb = _as_1d(lp.lb, n, "lb") if lp.lb is not None else np.full(n, -np.inf)
    ub = _as_1d(lp.ub, n, "ub") if lp.ub is not None else np.full(n, np.inf)

    blocks_a = [a_ub, a_eq, -a_eq]
    blocks_b = [b_ub, b_eq, -b_eq]
    for j in range(n):
        if lb[j] > -np.inf:
            row = np.zeros(n)
            row[j] = -1.0
            blocks_a.append(row.reshape(1, -1))
            blocks_b.append(np.array([-lb[j]]))
    for j in range(n):
        if ub[j] < np.inf:
            row = np.zeros(n)
            row[j] = 1.0
            blocks_a.append(row.reshape(1, -1))
            blocks_b.append(np.array([ub[j]]))
    return np.vstack(blocks_a), np.concatenate(blocks_b)


class _Prepared:
    """Standard form shared by repeated solves over the same feasible set."""

    def __init__(self, lp: LinearProgram):
        n, p, q = lp.dims()
        self.n, self.p, self.q = n, p, q
        self.m = p + q
        a_ub = _as_2d(lp.a_ub, n)
        self.b_ub = _as_1d(lp.b_ub, p, "b_ub")
        a_eq = _as_2d(lp.a_eq, n)
        self.b_eq = _as_1d(lp.b_eq, q, "b_eq")
        self.lb = _as_1d(lp.lb, n, "lb") if lp.lb is not None else np.full(n, -np.inf)
        self.ub = _as_1d(lp.ub, n, "ub") if lp.ub is not None else np.full(n, np.inf)
        if np.any(self.lb > self.ub):
            self.bad_bound = int(np.argmax(self.lb > self.ub))
        else:
            self.bad_bound = -1

        m = self.m
        self.b = np.concatenate([self.b_ub, self.b_eq])
        if not np.all(np.isfinite(self.b)):
            raise ValueError("right-hand sides must be finite")
        self.a_struct = np.vstack([a_ub, a_eq]) if m else np.zeros((0, n))
        nn = n + p + m
        self.nn = nn
        A = np.zeros((m, nn))
        if m:
            A[:, :n] = self.a_struct
            for i in range(p):
                A[i, n + i] = 1.0
        self.A = A  # artificial block filled at cold start
        self.lo = np.concatenate([self.lb, np.zeros(p), np.zeros(m)])
        self.hi = np.concatenate([self.ub, np.full(p, np.inf), np.full(m, np.inf)])
        self.feas_tol = 1e-9 * (1.0 + (np.abs(self.b).max() if m else 0.0))

    def cold_state(self):
        n, p, m, nn = self.n, self.p, self.m, self.nn
        x = np.zeros(nn)
        vstat = np.full(nn, _simplex.NB_FREE, dtype=np.int64)
        for j in range(n + p):
            if self.lo[j] > -np.inf:
                x[j] = self.lo[j]
                vstat[j] = _simplex.NB_LO
            elif self.hi[j] < np.inf:
                x[j] = self.hi[j]
                vstat[j] = _simplex.NB_UP
            else:
                x[j] = 0.0
                vstat[j] = _simplex.NB_FREE
        r = self.b - self.A[:, : n + p] @ x[: n + p]
        A = self.A.copy()
        for i in range(m):
            A[i, n + p + i] = 1.0 if r[i] >= 0.0 else -1.0
        x[n + p :] = np.abs(r)
        vstat[n + p :] = _simplex.BASIC
        basis = np.arange(n + p, nn, dtype=np.int64)
        return A, basis, vstat, x, False

    def warm_state(self, state):
        basis, vstat, x, A = state
        return A, basis.copy(), vstat.copy(), x.copy(), True


def _default_max_iter(m: int, nn: int) -> int:
    return max(5000, 30 * (m + nn))


def _solve_prepared(prep: _Prepared, c_user: np.ndarray, maximize: bool,
                    warm=None, backend: str | None = None,
                    max_iter: int | None = None):
    n, p, m, nn = prep.n, prep.p, prep.m, prep.nn

    if prep.bad_bound >= 0:
        # certificate: the two bound rows of the offending variable
        y = _bound_conflict_certificate(prep, prep.bad_bound)
        return LpResult(LpStatus.INFEASIBLE, farkas=y), None

    if m == 0:
        return _solve_box_only(prep, c_user, maximize), None

    c_int = np.zeros(nn)
    c_int[:n] = -c_user if maximize else c_user

    cap = max_iter if max_iter is not None else _default_max_iter(m, nn)
    kern = _simplex.get_kernel(backend)

    # escalation ladder: requested start, then a cold restart, then cold
    # with Bland's rule throughout; only then give up
    attempts = [(True, False)] if warm is not None else [(False, False)]
    if warm is not None:
        attempts.append((False, False))
    attempts.append((False, True))

    for use_warm, start_bland in attempts:
        if use_warm:
            A, basis, vstat, x, is_warm = prep.warm_state(warm)
            lo = prep.lo.copy()
            hi = prep.hi.copy()
            hi[n + p :] = 0.0  # artificials stay pinned on warm solves
        else:
            A, basis, vstat, x, is_warm = prep.cold_state()
            lo = prep.lo.copy()
            hi = prep.hi.copy()
        status, pi, obj, iters, ray_j, ray_dir, ray_w = kern(
            A, prep.b, c_int, lo, hi, basis, vstat, x, is_warm, start_bland,
            cap, prep.feas_tol, 1e-9,
        )
        if status not in (_simplex.STALL, _simplex.SINGULAR):
            break

    if status == _simplex.STALL or status == _simplex.SINGULAR:
        what = "went singular" if status == _simplex.SINGULAR else "stalled"
        raise LpStallError(
            f"simplex {what} after {iters} iterations", basis=basis.copy(),
            iterations=iters,
        )

    state = (basis, vstat, x, A)
    if status == _simplex.OPTIMAL:
        xs = x[:n].copy()
        value = float(c_user @ xs)
        return LpResult(LpStatus.OPTIMAL, x=xs, value=value, iterations=iters,
                        basis=basis.copy()), state
    if status == _simplex.UNBOUNDED:
        ray_full = np.zeros(nn)
        ray_full[ray_j] = ray_dir
        for i in range(m):
            ray_full[basis[i]] -= ray_dir * ray_w[i]
        ray = ray_full[:n].copy()
        value = np.inf if maximize else -np.inf
        return LpResult(LpStatus.UNBOUNDED, ray=ray, value=value,
                        iterations=iters, basis=basis.copy()), state
    # infeasible: assemble the combined-row certificate from phase-1 duals
    y = _farkas_from_duals(prep, pi)
    return LpResult(LpStatus.INFEASIBLE, farkas=y, iterations=iters,
                    basis=basis.copy()), None


def _bound_conflict_certificate(prep: _Prepared, j: int) -> np.ndarray:
    n, p, q = prep.n, prep.p, prep.q
    finite_lb = [k for k in range(n) if prep.lb[k] > -np.inf]
    finite_ub = [k for k in range(n) if prep.ub[k] < np.inf]
    y = np.zeros(p + 2 * q + len(finite_lb) + len(finite_ub))
    y[p + 2 * q + finite_lb.index(j)] = 1.0
    y[p + 2 * q + len(finite_lb) + finite_ub.index(j)] = 1.0
    return y


def _farkas_from_duals(prep: _Prepared, pi: np.ndarray) -> np.ndarray:
    n, p, q = prep.n, prep.p, prep.q
    pi_ub = pi[:p]
    pi_eq = pi[p:]
    h = prep.a_struct.T @ pi  # structural column activity
    y_ub = np.maximum(-pi_ub, 0.0)
    y_eq_plus = np.maximum(-pi_eq, 0.0)
    y_eq_minus = np.maximum(pi_eq, 0.0)
    parts = [y_ub, y_eq_plus, y_eq_minus]
    lb_part = []
    for j in range(n):
        if prep.lb[j] > -np.inf:
            lb_part.append(max(-h[j], 0.0))
    ub_part = []
    for j in range(n):
        if prep.ub[j] < np.inf:
            ub_part.append(max(h[j], 0.0))
    parts.append(np.array(lb_part))
    parts.append(np.array(ub_part))
    y = np.concatenate(parts)
    top = y.max() if y.size else 0.0
    if top > 0:
        y = y / top
    return y


def _solve_box_only(prep: _Prepared, c_user: np.ndarray, maximize: bool) -> LpResult:
    n = prep.n
    sense = -1.0 if maximize else 1.0
    x = np.zeros(n)
    ray = np.zeros(n)
    unbounded = False
    for j in range(n):
        cj = sense * c_user[j]
        if cj > 0:
            if prep.lb[j] > -np.inf:
                x[j] = prep.lb[j]
            else:
                ray[j] = -1.0
                unbounded = True
        elif cj < 0:
            if prep.ub[j] < np.inf:
                x[j] = prep.ub[j]
            else:
                ray[j] = 1.0
                unbounded = True
        else:
            if prep.lb[j] > -np.inf:
                x[j] = prep.lb[j]
            elif prep.ub[j] < np.inf:
                x[j] = prep.ub[j]
    if unbounded:
        return LpResult(LpStatus.UNBOUNDED, ray=ray,
                        value=np.inf if maximize else -np.inf)
    return LpResult(LpStatus.OPTIMAL, x=x, value=float(c_user @ x))


def solve_lp(lp: LinearProgram, backend: str | None = None,
             max_iter: int | None = None, debug_dump=None) -> LpResult:
    """Solve a linear program.

    Identical inputs produce identical outputs within one process; the
    pivoting rules are deterministic. ``debug_dump`` writes basis and
    certificate data as JSON to the given path.
    """
    if lp.exact:
        from . import rational

        return rational.solve_exact(lp)
    c = np.asarray(lp.c, dtype=float).reshape(-1)
    prep = _Prepared(lp)
    res, _ = _solve_prepared(prep, c, lp.maximize, backend=backend,
                             max_iter=max_iter)
    if debug_dump is not None:
        _dump_result(debug_dump, res)
    return res


def solve_many(lp: LinearProgram, objectives: Iterable[Sequence],
               backend: str | None = None,
               max_iter: int | None = None) -> list[LpResult]:
    """Solve the same feasible set under several objectives.

    The optimal basis of each solve warm-starts the next one, which is much
    cheaper than repeated cold solves on large systems. Results appear in
    objective order. ``lp.c`` is ignored.
    """
    if lp.exact:
        from . import rational

        out = []
        for obj in objectives:
            sub = LinearProgram(c=list(obj), a_ub=lp.a_ub, b_ub=lp.b_ub,
                                a_eq=lp.a_eq, b_eq=lp.b_eq, lb=lp.lb, ub=lp.ub,
                                maximize=lp.maximize, exact=True)
            out.append(rational.solve_exact(sub))
        return out
    prep = _Prepared(lp)
    results = []
    state = None
    infeasible = None
    for obj in objectives:
        c = np.asarray(obj, dtype=float).reshape(-1)
        if c.shape[0] != prep.n:
            raise ValueError("objective length mismatch")
        if infeasible is not None:
            results.append(infeasible)
            continue
        res, state = _solve_prepared(prep, c, lp.maximize, warm=state,
                                     backend=backend, max_iter=max_iter)
        if res.status == LpStatus.INFEASIBLE:
            infeasible = res
        results.append(res)
    return results


def _dump_result(path, res: LpResult) -> None:
    doc = {
        "status": res.status.value,
        "value": res.value,
        "iterations": res.iterations,
        "x": None if res.x is None else list(map(float, res.x)),
        "basis": None if res.basis is None else list(map(int, res.basis)),
        "farkas": None if res.farkas is None else list(map(float, res.farkas)),
        "ray": None if res.ray is None else list(map(float, res.ray)),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# symmetric matrices


def min_eigpair(S: np.ndarray):
    """Smallest eigenvalue and a unit eigenvector of a symmetric matrix.

    The residual satisfies |S w - lam w| <= 1e-7 (1 + |S|). Non-symmetric
    input is rejected.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("expected a square matrix")
    scale = 1.0 + np.abs(S).max(initial=0.0)
    if np.abs(S - S.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(S)
    lam = float(vals[0])
    w = vecs[:, 0].copy()
    for comp in w:
        if abs(comp) > 1e-12:
            if comp < 0:
                w = -w
            break
    return lam, w


@dataclass(frozen=True)
class SymmetricMatrixVar:
    """Packed lower-triangle layout of a symmetric matrix variable.

    Entry (i, j) with i >= j sits at ``offset + i(i+1)/2 + j`` in the LP
    variable vector.
    """

    order: int
    offset: int = 0

    @property
    def n_entries(self) -> int:
        return self.order * (self.order + 1) // 2

    def index(self, i: int, j: int) -> int:
        if i < j:
            i, j = j, i
        return self.offset + i * (i + 1) // 2 + j

    def unpack(self, values: Sequence) -> np.ndarray:
        """Rebuild the dense symmetric matrix from a full variable vector."""
        d = self.order
        S = np.empty((d, d))
        for i in range(d):
            for j in range(i + 1):
                v = values[self.index(i, j)]
                S[i, j] = v
                S[j, i] = v
        return S

    def dot_coefficients(self, Q: np.ndarray) -> np.ndarray:
        """Packed row g with g.packed(S) = sum_ij Q_ij S_ij for symmetric Q."""
        d = self.order
        g = np.zeros(self.n_entries)
        for i in range(d):
            for j in range(i + 1):
                k = i * (i + 1) // 2 + j
                g[k] = Q[i, i] if i == j else Q[i, j] + Q[j, i]
        return g


class PsdBlock:
    """Affine symmetric-matrix image S(x) = C + sum_k x_k E_k of LP variables.

    Entries are given as (var, i, j, val) with i >= j meaning S[i,j] and
    S[j,i] both receive val * x[var].
    """

    def __init__(self, order: int, const: np.ndarray | None,
                 entries: Iterable[tuple[int, int, int, float]]):
        self.order = order
        self.const = np.zeros((order, order)) if const is None else np.asarray(const, dtype=float)
        ent = list(entries)
        self.var = np.array([e[0] for e in ent], dtype=np.int64)
        self.ii = np.array([e[1] for e in ent], dtype=np.int64)
        self.jj = np.array([e[2] for e in ent], dtype=np.int64)
        self.val = np.array([e[3] for e in ent], dtype=float)

    def assemble(self, x: np.ndarray, include_const: bool = True) -> np.ndarray:
        S = self.const.copy() if include_const else np.zeros((self.order, self.order))
        contrib = self.val * x[self.var]
        np.add.at(S, (self.ii, self.jj), contrib)
        off = self.ii != self.jj
        np.add.at(S, (self.jj[off], self.ii[off]), contrib[off])
        return S

    def cut_row(self, w: np.ndarray, nvars: int):
        """Row (a, rhs) with a.x <= rhs encoding w.S(x)w >= 0."""
        wi = w[self.ii]
        wj = w[self.jj]
        factor = np.where(self.ii == self.jj, wi * wj, 2.0 * wi * wj) * self.val
        g = np.zeros(nvars)
        np.add.at(g, self.var, factor)
        rhs = float(w @ self.const @ w)
        return -g, rhs


@dataclass
class PsdResult:
    result: LpResult
    cuts_added: int
    converged: bool


def solve_with_psd(lp: LinearProgram, psd_blocks: Sequence[PsdBlock],
                   tol: float = 1e-7, max_cuts: int = 400,
                   backend: str | None = None) -> PsdResult:
    """Solve an LP with positive-semidefiniteness required of affine blocks.

    Outer approximation: solve the LP, find the most negative eigenpair of
    each block, add the eigenvector cut, repeat. Any returned bound is valid
    from above for maximization (the feasible set is only ever shrunk
    toward the true one); ``converged`` reports whether all blocks ended
    PSD within tolerance.
    """
    n = len(lp.c)
    a_ub = _as_2d(lp.a_ub, n)
    b_ub = _as_1d(lp.b_ub, a_ub.shape[0], "b_ub")
    extra_a: list[np.ndarray] = []
    extra_b: list[float] = []
    cuts = 0
    res = None
    while True:
        cur = LinearProgram(
            c=lp.c,
            a_ub=np.vstack([a_ub] + [r.reshape(1, -1) for r in extra_a]) if extra_a else a_ub,
            b_ub=np.concatenate([b_ub, np.array(extra_b)]) if extra_b else b_ub,
            a_eq=lp.a_eq, b_eq=lp.b_eq, lb=lp.lb, ub=lp.ub,
            maximize=lp.maximize,
        )
        res = solve_lp(cur, backend=backend)
        if res.status == LpStatus.INFEASIBLE:
            return PsdResult(res, cuts, True)
        if res.status == LpStatus.UNBOUNDED:
            cut_made = False
            for blk in psd_blocks:
                S_dir = blk.assemble(res.ray, include_const=False)
                scale = 1.0 + np.abs(S_dir).max(initial=0.0)
                lam, w = min_eigpair(0.5 * (S_dir + S_dir.T))
                if lam < -tol * scale and cuts < max_cuts:
                    a_row, rhs = blk.cut_row(w, n)
                    extra_a.append(a_row)
                    extra_b.append(rhs)
                    cuts += 1
                    cut_made = True
            if not cut_made:
                return PsdResult(res, cuts, cuts < max_cuts)
            continue
        x = res.x
        violated = False
        added = False
        for blk in psd_blocks:
            S = blk.assemble(x)
            scale = 1.0 + np.abs(S).max(initial=0.0)
            lam, w = min_eigpair(0.5 * (S + S.T))
            if lam < -tol * scale:
                violated = True
                if cuts < max_cuts:
                    a_row, rhs = blk.cut_row(w, n)
                    extra_a.append(a_row)
                    extra_b.append(rhs)
                    cuts += 1
                    added = True
        if not violated:
            return PsdResult(res, cuts, True)
        if not added:  # cut budget exhausted with violations outstanding
            return PsdResult(res, cuts, False)
