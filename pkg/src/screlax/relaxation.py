"""Successive convex relaxation operators.

Two families of one-step set operators over a bundle's base polytope C0:

* Discretized lift: from support values of the current set C_k, build the
  pairwise product cuts, lift to (v, V) with V standing in for v v^T, and
  bound supports of the next set by LP (optionally with the moment matrix
  (1 v; v V) kept positive semidefinite by eigenvector cuts).

* Homogeneous cone form: represent the k-th set exactly as a slice of a
  cone K_k defined by nested symmetric-matrix certificates. One step maps
  K_k to {Y e0 : Y symmetric, Y e0-column consistent, Y u in K_k for every
  generator u of the polar direction cone, diagonal entries linked to the
  first row on 0-1 coordinates}. Support queries expand the whole
  certificate tree into one flat LP; generators with two nonzeros keep the
  tree sparse enough to be practical.

The driver iterates either operator, records probe supports per
iteration, and stops when they agree with the enumeration oracle.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .formulations import FormulationBundle
from .geometry import FacetList, QuadraticFunction  # noqa: F401  (part of the API)
from .lp import (LinearProgram, LpStatus, PsdBlock, SymmetricMatrixVar,
                 min_eigpair, solve_lp, solve_many)


class HomogSizeError(RuntimeError):
    """Expanded certificate LP would exceed the nonzero cap."""


# ---------------------------------------------------------------------------
# directions and support tables


def _unit(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=float).reshape(-1)
    nrm = float(np.linalg.norm(d))
    if nrm == 0.0:
        raise ValueError("zero direction")
    return d / nrm


def _dir_key(d: np.ndarray):
    return tuple(np.round(np.asarray(d, dtype=float) * 1e10).astype(np.int64))


class DirectionSet:
    """Ordered list of distinct unit directions."""

    def __init__(self, dirs):
        seen = set()
        self.dirs: list[np.ndarray] = []
        for d in dirs:
            u = _unit(d)
            key = _dir_key(u)
            if key not in seen:
                seen.add(key)
                self.dirs.append(u)
        if not self.dirs:
            raise ValueError("empty direction set")
        self.n = self.dirs[0].shape[0]
        for d in self.dirs:
            if d.shape[0] != self.n:
                raise ValueError("mixed dimensions")

    def __iter__(self):
        return iter(self.dirs)

    def __len__(self):
        return len(self.dirs)

    @classmethod
    def coordinate(cls, n: int) -> "DirectionSet":
        dirs = []
        eye = np.eye(n)
        for i in range(n):
            dirs.append(eye[i])
            dirs.append(-eye[i])
        return cls(dirs)

    @classmethod
    def minimal(cls, layout) -> "DirectionSet":
        """Just the signed coordinate directions of the 0-1 tagged block,
        the smallest set for which the finite-termination argument holds."""
        idx = list(layout.binary_indices())
        if not idx:
            raise ValueError("layout has no 0-1 tagged coordinates")
        eye = np.eye(layout.n)
        dirs = []
        for i in idx:
            dirs.append(eye[i])
            dirs.append(-eye[i])
        return cls(dirs)

    @classmethod
    def default_dbar(cls, bundle: FormulationBundle) -> "DirectionSet":
        """Signed coordinates plus the base polytope's facet normals."""
        dirs = list(cls.coordinate(bundle.n))
        for a in bundle.c0.ineq_a:
            if np.abs(a).max() > 0:
                dirs.append(a)
        return cls(dirs)

    def union(self, other) -> "DirectionSet":
        return DirectionSet(list(self.dirs) + [np.asarray(d, dtype=float) for d in other])

    def covers_binary_block(self, layout) -> bool:
        keys = {_dir_key(d) for d in self.dirs}
        eye = np.eye(layout.n)
        for i in layout.binary_indices():
            if _dir_key(eye[i]) not in keys or _dir_key(-eye[i]) not in keys:
                return False
        return True


class SupportTable:
    """Support values alpha(C, d) = max d.v over C, keyed by direction."""

    def __init__(self):
        self._vals: dict = {}

    def set(self, d, value: float) -> None:
        self._vals[_dir_key(d)] = float(value)

    def has(self, d) -> bool:
        return _dir_key(d) in self._vals

    def get(self, d) -> float:
        key = _dir_key(d)
        if key not in self._vals:
            raise KeyError("no support value stored for that direction")
        return self._vals[key]

    def __len__(self):
        return len(self._vals)

    @classmethod
    def from_function(cls, dirs, fn) -> "SupportTable":
        t = cls()
        for d in dirs:
            t.set(d, fn(d))
        return t


def c0_support_table(bundle: FormulationBundle, dirs,
                     backend: str | None = None) -> SupportTable:
    lst = list(dirs)
    if not lst:
        return SupportTable()
    a_ub, b_ub, a_eq, b_eq = bundle.c0.matrices()
    base = LinearProgram(c=np.zeros(bundle.n), a_ub=a_ub, b_ub=b_ub,
                         a_eq=a_eq, b_eq=b_eq, maximize=True)
    results = solve_many(base, lst, backend=backend)
    t = SupportTable()
    for d, res in zip(lst, results):
        if res.status == LpStatus.INFEASIBLE:
            t.set(d, -np.inf)
        elif res.status == LpStatus.UNBOUNDED:
            t.set(d, np.inf)
        else:
            t.set(d, res.value)
    return t


# ---------------------------------------------------------------------------
# cut generation


def t0_generators(c0_support: SupportTable, d0: DirectionSet) -> list[np.ndarray]:
    """One polar-cone generator (alpha(C0,d); -d) per direction, unmerged."""
    gens = []
    for d in d0:
        gens.append(np.concatenate([[c0_support.get(d)], -d]))
    return gens


def p2_cuts(c0_support: SupportTable, ck_support: SupportTable,
            d0: DirectionSet, dbar: DirectionSet) -> list[QuadraticFunction]:
    """Pairwise product cuts: for d valid on C0 and dbar valid on C_k, the
    product (alpha(C0,d) - d.v)(alpha(C_k,dbar) - dbar.v) is nonnegative on
    C_k; its negation expands to one quadratic row each."""
    cuts = []
    for d in d0:
        a1 = c0_support.get(d)
        for db in dbar:
            a2 = ck_support.get(db)
            cuts.append(QuadraticFunction.product_cut(a1, d, a2, db))
    return cuts


# ---------------------------------------------------------------------------
# discretized lifted operator


def _lifted_lp(bundle: FormulationBundle, cuts) -> tuple[LinearProgram, SymmetricMatrixVar]:
    n = bundle.n
    V = SymmetricMatrixVar(order=n, offset=n)
    nv = n + V.n_entries
    a_ub0, b_ub0, a_eq0, b_eq0 = bundle.c0.matrices()
    rows = [np.hstack([a_ub0, np.zeros((a_ub0.shape[0], V.n_entries))])]
    rhs = [b_ub0]
    cut_rows = np.zeros((len(cuts), nv))
    cut_rhs = np.zeros(len(cuts))
    for i, qf in enumerate(cuts):
        cut_rows[i, :n] = 2.0 * qf.q
        cut_rows[i, n:] = V.dot_coefficients(qf.Q)
        cut_rhs[i] = -qf.gamma
    rows.append(cut_rows)
    rhs.append(cut_rhs)
    a_eq = None
    b_eq = None
    if a_eq0 is not None:
        a_eq = np.hstack([a_eq0, np.zeros((a_eq0.shape[0], V.n_entries))])
        b_eq = b_eq0
    lp = LinearProgram(c=np.zeros(nv), a_ub=np.vstack(rows),
                       b_ub=np.concatenate(rhs), a_eq=a_eq, b_eq=b_eq,
                       maximize=True)
    return lp, V


def _moment_block(n: int, V: SymmetricMatrixVar) -> PsdBlock:
    """(1, v; v, V) as an affine block of the lifted variables."""
    const = np.zeros((n + 1, n + 1))
    const[0, 0] = 1.0
    entries = [(j, 1 + j, 0, 1.0) for j in range(n)]
    for i in range(n):
        for j in range(i + 1):
            entries.append((V.index(i, j), 1 + i, 1 + j, 1.0))
    return PsdBlock(n + 1, const, entries)


def _lifted_values(bundle: FormulationBundle, c0_support: SupportTable,
                   ck_support: SupportTable, d0: DirectionSet,
                   dbar: DirectionSet, directions, psd: bool,
                   backend: str | None = None, psd_tol: float = 1e-7,
                   psd_max_cuts: int = 400):
    """Supports of the one-step lifted set in each direction.

    Returns (values, all_psd_converged).
    """
    dirs = [np.asarray(d, dtype=float).reshape(-1) for d in directions]
    n = bundle.n
    for db in dbar:
        if ck_support.get(db) == -np.inf:
            return [-np.inf] * len(dirs), True
    cuts = list(bundle.pf) + p2_cuts(c0_support, ck_support, d0, dbar)
    lp, V = _lifted_lp(bundle, cuts)
    nv = n + V.n_entries
    objs = [np.concatenate([d, np.zeros(V.n_entries)]) for d in dirs]
    if not psd:
        results = solve_many(lp, objs, backend=backend)
        vals = []
        for res in results:
            if res.status == LpStatus.INFEASIBLE:
                vals.append(-np.inf)
            elif res.status == LpStatus.UNBOUNDED:
                vals.append(np.inf)
            else:
                vals.append(res.value)
        return vals, True
    block = _moment_block(n, V)
    return _eigencut_values(lp, [block], objs, nv, psd_tol, psd_max_cuts, backend)


def _eigencut_values(lp: LinearProgram, blocks, objs, nv: int, tol: float,
                     max_cuts: int, backend: str | None):
    """Maximize several objectives over an LP whose solution must keep the
    given affine blocks positive semidefinite; cuts accumulate across
    objectives since they are valid for the set, not the objective."""
    extra_a: list[np.ndarray] = []
    extra_b: list[float] = []
    converged = True
    vals = []
    base_aub = lp.a_ub if lp.a_ub is not None else np.zeros((0, nv))
    base_bub = lp.b_ub if lp.b_ub is not None else np.zeros(0)
    for obj in objs:
        cuts_here = 0
        while True:
            cur = LinearProgram(
                c=obj,
                a_ub=np.vstack([base_aub] + [r.reshape(1, -1) for r in extra_a]) if extra_a else base_aub,
                b_ub=np.concatenate([base_bub, np.array(extra_b)]) if extra_b else base_bub,
                a_eq=lp.a_eq, b_eq=lp.b_eq, lb=lp.lb, ub=lp.ub, maximize=True)
            res = solve_lp(cur, backend=backend)
            if res.status == LpStatus.INFEASIBLE:
                vals.append(-np.inf)
                break
            if res.status == LpStatus.UNBOUNDED:
                vals.append(np.inf)
                break
            x = res.x
            violated = False
            for blk in blocks:
                S = blk.assemble(x)
                scale = 1.0 + np.abs(S).max(initial=0.0)
                lam, w = min_eigpair(0.5 * (S + S.T))
                if lam < -tol * scale:
                    violated = True
                    if len(extra_a) < max_cuts:
                        a_row, rhs = blk.cut_row(w, nv)
                        extra_a.append(a_row)
                        extra_b.append(rhs)
                        cuts_here += 1
            if not violated:
                vals.append(res.value)
                break
            if len(extra_a) >= max_cuts and cuts_here == 0:
                converged = False
                vals.append(res.value)
                break
            if len(extra_a) >= max_cuts:
                cuts_here = 0  # budget just exhausted; one more solve, then stop
    return vals, converged


def n_hat(bundle: FormulationBundle, ck_support: SupportTable,
          d0: DirectionSet, dbar: DirectionSet, direction,
          backend: str | None = None) -> float:
    """Support of the one-step lifted LP relaxation in one direction."""
    c0t = c0_support_table(bundle, d0, backend=backend)
    vals, _ = _lifted_values(bundle, c0t, ck_support, d0, dbar, [direction],
                             psd=False, backend=backend)
    return vals[0]


def n_hat_plus(bundle: FormulationBundle, ck_support: SupportTable,
               d0: DirectionSet, dbar: DirectionSet, direction,
               backend: str | None = None, tol: float = 1e-7,
               max_cuts: int = 400) -> float:
    """As n_hat with the moment matrix kept positive semidefinite."""
    c0t = c0_support_table(bundle, d0, backend=backend)
    vals, _ = _lifted_values(bundle, c0t, ck_support, d0, dbar, [direction],
                             psd=True, backend=backend, psd_tol=tol,
                             psd_max_cuts=max_cuts)
    return vals[0]


# ---------------------------------------------------------------------------
# homogeneous cone stages


@dataclass
class ConeStage:
    """Level-k cone in R^(1+n). Level 0 is the homogenization of C0; each
    further level is certified by one symmetric matrix per generator chain."""

    level: int
    bundle: FormulationBundle
    gens: list
    psd: bool = False
    prev: "ConeStage | None" = None
    max_nonzeros: int = 200_000

    @property
    def n(self) -> int:
        return self.bundle.n

    def estimate_nonzeros(self) -> int:
        """Closed-form size bound for the flattened certificate LP."""
        g = max(len(self.gens), 1)
        n = self.n
        a_ub, _, a_eq, _ = self.bundle.c0.matrices()
        base_nnz = int(np.count_nonzero(a_ub)) + a_ub.shape[0]
        if a_eq is not None:
            base_nnz += int(np.count_nonzero(a_eq)) + a_eq.shape[0]
        leaves = g ** self.level
        matrices = sum(g ** i for i in range(self.level))
        per_matrix = 3 * len(list(self.bundle.layout.binary_indices())) + (n + 1)
        # each leaf membership touches base rows through 2-sparse generators
        return leaves * base_nnz * 3 + matrices * per_matrix * 4


def initial_stage(bundle: FormulationBundle, d0: DirectionSet,
                  psd: bool = False, max_nonzeros: int = 200_000,
                  backend: str | None = None) -> ConeStage:
    if bundle.layout.m == bundle.layout.n:
        raise ValueError("homogeneous operators need 0-1 tagged coordinates")
    c0t = c0_support_table(bundle, d0, backend=backend)
    gens = t0_generators(c0t, d0)
    return ConeStage(level=0, bundle=bundle, gens=gens, psd=psd,
                     max_nonzeros=max_nonzeros)


def homog_step(stage: ConeStage) -> ConeStage:
    nxt = ConeStage(level=stage.level + 1, bundle=stage.bundle,
                    gens=stage.gens, psd=stage.psd, prev=stage,
                    max_nonzeros=stage.max_nonzeros)
    if nxt.estimate_nonzeros() > nxt.max_nonzeros:
        raise HomogSizeError(
            f"level {nxt.level} certificate LP estimated above "
            f"{nxt.max_nonzeros} nonzeros")
    return nxt


class _LpBuilder:
    """Accumulates sparse rows over an open-ended variable space."""

    def __init__(self, cap: int):
        self.nv = 0
        self.ub_rows: list[dict] = []
        self.ub_rhs: list[float] = []
        self.eq_rows: list[dict] = []
        self.eq_rhs: list[float] = []
        self.nnz = 0
        self.cap = cap

    def new_vars(self, count: int) -> int:
        start = self.nv
        self.nv += count
        return start

    def _count(self, expr: dict) -> None:
        self.nnz += len(expr)
        if self.nnz > self.cap:
            raise HomogSizeError(f"certificate LP exceeds {self.cap} nonzeros")

    def add_ub(self, expr: dict, const: float) -> None:
        """expr.z + const <= 0"""
        if not expr:
            if const > 1e-12:
                raise ValueError("constant row is infeasible")
            return
        self._count(expr)
        self.ub_rows.append(expr)
        self.ub_rhs.append(-const)

    def add_eq(self, expr: dict, const: float) -> None:
        if not expr:
            if abs(const) > 1e-12:
                raise ValueError("constant equality is infeasible")
            return
        self._count(expr)
        self.eq_rows.append(expr)
        self.eq_rhs.append(-const)

    def dense(self, rows: list[dict]) -> np.ndarray:
        out = np.zeros((len(rows), self.nv))
        for i, row in enumerate(rows):
            for j, val in row.items():
                out[i, j] = val
        return out

    def to_lp(self, objective: np.ndarray, maximize: bool = True) -> LinearProgram:
        c = np.zeros(self.nv)
        c[: objective.shape[0]] = objective
        return LinearProgram(
            c=c,
            a_ub=self.dense(self.ub_rows), b_ub=np.array(self.ub_rhs),
            a_eq=self.dense(self.eq_rows) if self.eq_rows else None,
            b_eq=np.array(self.eq_rhs) if self.eq_rows else None,
            maximize=maximize)


def _combine(terms) -> tuple[dict, float]:
    """Affine combination of (coef, (expr, const)) pairs."""
    out: dict = {}
    const = 0.0
    for coef, (expr, c) in terms:
        if coef == 0.0:
            continue
        const += coef * c
        for j, v in expr.items():
            out[j] = out.get(j, 0.0) + coef * v
    return {j: v for j, v in out.items() if v != 0.0}, const


def _emit_membership(stage: ConeStage, w, builder: _LpBuilder, psd_blocks: list):
    """Constrain the affine vector w (length 1+n) to lie in the stage cone."""
    n = stage.n
    if stage.level == 0:
        a_ub, b_ub, a_eq, b_eq = stage.bundle.c0.matrices()
        for a, b in zip(a_ub, b_ub):
            terms = [(-b, w[0])]
            for j in range(n):
                if a[j] != 0.0:
                    terms.append((a[j], w[1 + j]))
            expr, const = _combine(terms)
            builder.add_ub(expr, const)
        if a_eq is not None:
            for a, b in zip(a_eq, b_eq):
                terms = [(-b, w[0])]
                for j in range(n):
                    if a[j] != 0.0:
                        terms.append((a[j], w[1 + j]))
                expr, const = _combine(terms)
                builder.add_eq(expr, const)
        expr, const = _combine([(-1.0, w[0])])
        builder.add_ub(expr, const)
        return

    binary = list(stage.bundle.layout.binary_indices())
    if stage.psd:
        ref_cols = set(range(1, n + 1))
    else:
        ref_cols = {1 + j for j in binary}
        for u in stage.gens:
            for t in range(1, n + 1):
                if u[t] != 0.0:
                    ref_cols.add(t)
    # packed entries for unordered pairs {i, t >= 1} touching a referenced column
    entry_idx: dict = {}
    pairs = []
    for i in range(1, n + 1):
        for t in range(1, i + 1):
            if i in ref_cols or t in ref_cols:
                pairs.append((i, t))
    start = builder.new_vars(len(pairs))
    for k, (i, t) in enumerate(pairs):
        entry_idx[(i, t)] = start + k

    def entry(i: int, t: int):
        if i == 0 and t == 0:
            return w[0]
        if t == 0:
            return w[i]
        if i == 0:
            return w[t]
        key = (i, t) if i >= t else (t, i)
        return ({entry_idx[key]: 1.0}, 0.0)

    # lambda = Y00 >= 0
    expr, const = _combine([(-1.0, w[0])])
    builder.add_ub(expr, const)
    # diagonal equals first row on the 0-1 coordinates
    for j in binary:
        expr, const = _combine([(1.0, entry(1 + j, 1 + j)), (-1.0, w[1 + j])])
        builder.add_eq(expr, const)
    # every generator image stays in the previous cone
    for u in stage.gens:
        y = []
        for i in range(n + 1):
            terms = []
            if u[0] != 0.0:
                terms.append((float(u[0]), w[i]))
            for t in range(1, n + 1):
                if u[t] != 0.0:
                    terms.append((float(u[t]), entry(i, t)))
            y.append(_combine(terms))
        _emit_membership(stage.prev, y, builder, psd_blocks)
    if stage.psd:
        const_mat = np.zeros((n + 1, n + 1))
        entries = []
        for i in range(n + 1):
            for t in range(i + 1):
                expr, c = entry(i, t)
                const_mat[i, t] += c
                if i != t:
                    const_mat[t, i] += c
                for j, v in expr.items():
                    entries.append((j, i, t, v))
        psd_blocks.append((n + 1, const_mat, entries))


def _build_stage_system(stage: ConeStage):
    builder = _LpBuilder(stage.max_nonzeros)
    n = stage.n
    v0 = builder.new_vars(n)
    w = [({}, 1.0)] + [({v0 + j: 1.0}, 0.0) for j in range(n)]
    blocks_raw: list = []
    _emit_membership(stage, w, builder, blocks_raw)
    return builder, blocks_raw


def stage_support(stage: ConeStage, directions, backend: str | None = None,
                  return_points: bool = False, psd_tol: float = 1e-7,
                  psd_max_cuts: int = 400):
    """Supports (and optionally maximizers) of the stage's v0=1 slice."""
    dirs = [np.asarray(d, dtype=float).reshape(-1) for d in directions]
    n = stage.n
    builder, blocks_raw = _build_stage_system(stage)
    lp = builder.to_lp(np.zeros(n))
    objs = []
    for d in dirs:
        c = np.zeros(builder.nv)
        c[:n] = d
        objs.append(c)
    if not stage.psd:
        results = solve_many(lp, objs, backend=backend)
        vals = []
        pts = []
        for res in results:
            if res.status == LpStatus.INFEASIBLE:
                vals.append(-np.inf)
                pts.append(None)
            elif res.status == LpStatus.UNBOUNDED:
                vals.append(np.inf)
                pts.append(None)
            else:
                vals.append(res.value)
                pts.append(res.x[:n].copy())
        if return_points:
            return vals, pts, True
        return vals, True
    blocks = [PsdBlock(order, const, entries) for order, const, entries in blocks_raw]
    vals, converged = _eigencut_values(lp, blocks, objs, builder.nv,
                                       psd_tol, psd_max_cuts, backend)
    if return_points:
        return vals, [None] * len(vals), converged
    return vals, converged


def homogenize_row(row) -> np.ndarray:
    """Lift a coefficient row over the base coordinates to the cone space."""
    row = np.asarray(row, dtype=float).reshape(-1)
    return np.concatenate([[0.0], row])


def cone_split_gap(stage: ConeStage, w_point, row_a, row_b,
                   backend: str | None = None) -> float:
    """Least uniform constraint violation over decompositions w = wa + wb
    with wa in the stage cone sliced by row_a.v = 0 and wb in the stage
    cone sliced by row_b.v = 0. Near zero certifies the decomposition."""
    w_point = np.asarray(w_point, dtype=float).reshape(-1)
    n = stage.n
    if w_point.shape[0] != n + 1:
        raise ValueError("point must be homogeneous (length 1+n)")
    builder = _LpBuilder(stage.max_nonzeros)
    a0 = builder.new_vars(n + 1)
    wa = [({a0 + i: 1.0}, 0.0) for i in range(n + 1)]
    wb = [({a0 + i: -1.0}, float(w_point[i])) for i in range(n + 1)]
    _emit_membership(stage, wa, builder, [])
    ra = np.asarray(row_a, dtype=float).reshape(-1)
    rb = np.asarray(row_b, dtype=float).reshape(-1)
    expr, const = _combine([(float(ra[i]), wa[i]) for i in range(n + 1) if ra[i] != 0.0])
    builder.add_eq(expr, const)
    _emit_membership(stage, wb, builder, [])
    expr, const = _combine([(float(rb[i]), wb[i]) for i in range(n + 1) if rb[i] != 0.0])
    builder.add_eq(expr, const)
    # elasticize: every row may overflow by t, minimize t
    nv = builder.nv
    t_col = nv
    a_ub = builder.dense(builder.ub_rows)
    a_eq = builder.dense(builder.eq_rows)
    b_ub = np.array(builder.ub_rhs)
    b_eq = np.array(builder.eq_rhs)
    rows = [np.hstack([a_ub, -np.ones((a_ub.shape[0], 1))])]
    rhs = [b_ub]
    if a_eq.shape[0]:
        rows.append(np.hstack([a_eq, -np.ones((a_eq.shape[0], 1))]))
        rhs.append(b_eq)
        rows.append(np.hstack([-a_eq, -np.ones((a_eq.shape[0], 1))]))
        rhs.append(-b_eq)
    c = np.zeros(nv + 1)
    c[t_col] = 1.0
    lb = np.full(nv + 1, -np.inf)
    lb[t_col] = 0.0
    res = solve_lp(LinearProgram(c=c, a_ub=np.vstack(rows),
                                 b_ub=np.concatenate(rhs), lb=lb),
                   backend=backend)
    if res.status != LpStatus.OPTIMAL:
        return np.inf
    return res.value


# ---------------------------------------------------------------------------
# hierarchy driver


@dataclass
class HierarchyTrace:
    mode: str
    probe_dirs: list
    oracle: dict
    iterations: list = field(default_factory=list)
    stop_reason: str = ""
    wall_time: float = 0.0
    cap_hit: bool = False
    psd_clean: bool = True

    @property
    def iterations_run(self) -> int:
        return self.iterations[-1]["k"] if self.iterations else 0

    def supports_at(self, k: int) -> dict:
        for it in self.iterations:
            if it["k"] == k:
                return it["supports"]
        raise KeyError(k)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "directions": {str(i): [float(v) for v in d]
                           for i, d in enumerate(self.probe_dirs)},
            "oracle": self.oracle,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "wall_time": self.wall_time,
            "cap_hit": self.cap_hit,
            "psd_clean": self.psd_clean,
        }

    def to_csv_rows(self) -> list:
        rows = [("k", "dir_id", "support")]
        for it in self.iterations:
            for key in sorted(it["supports"], key=int):
                rows.append((it["k"], key, it["supports"][key]))
        return rows


def default_probes(bundle: FormulationBundle, n_random: int = 32,
                   seed: int = 0) -> list[np.ndarray]:
    """Objective direction, signed coordinates, and seeded random units."""
    dirs = []
    if np.abs(bundle.objective).max(initial=0.0) > 0:
        dirs.append(_unit(bundle.objective))
    eye = np.eye(bundle.n)
    for i in range(bundle.n):
        dirs.append(eye[i])
        dirs.append(-eye[i])
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        v = rng.normal(size=bundle.n)
        dirs.append(_unit(v))
    return list(DirectionSet(dirs))


def run_hierarchy(bundle: FormulationBundle, mode: str,
                  d0: DirectionSet | None = None,
                  dbar: DirectionSet | None = None,
                  probe_dirs=None, max_iter: int = 10, tol: float = 1e-6,
                  backend: str | None = None, max_nonzeros: int = 200_000,
                  psd_tol: float = 1e-7, psd_max_cuts: int = 400) -> HierarchyTrace:
    """Iterate one relaxation operator until the probe supports match the
    enumeration oracle or the iteration budget runs out.

    Modes: ssilp / ssdp use the discretized lifted operator (LP / LP with
    the semidefinite moment block); homog_lp / homog_sdp use the nested
    cone certificates. When a homogeneous certificate system outgrows
    ``max_nonzeros`` the driver falls back to the discretized operator for
    the remaining iterations and flags the trace.
    """
    if mode not in ("ssilp", "ssdp", "homog_lp", "homog_sdp"):
        raise ValueError(f"unknown mode {mode!r}")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if probe_dirs is None:
        probe_dirs = default_probes(bundle)
    probes = [_unit(d) for d in probe_dirs]
    if not probes:
        raise ValueError("need at least one probe direction")
    if d0 is None:
        d0 = DirectionSet.coordinate(bundle.n)
    t_start = time.perf_counter()

    oracle_vals = {str(i): bundle.oracle_support(d, backend=backend)
                   for i, d in enumerate(probes)}
    trace = HierarchyTrace(mode=mode, probe_dirs=probes, oracle=oracle_vals)

    def probes_match(sup: dict) -> bool:
        for key, target in oracle_vals.items():
            if sup[key] - target > tol or not np.isfinite(sup[key]) and np.isfinite(target):
                return False
        return True

    def record(k: int, values: list) -> dict:
        sup = {str(i): float(v) for i, v in enumerate(values)}
        trace.iterations.append({"k": k, "supports": sup})
        return sup

    discretized = mode in ("ssilp", "ssdp")
    psd = mode in ("ssdp", "homog_sdp")
    if discretized:
        if dbar is None:
            dbar = DirectionSet.default_dbar(bundle)
        dbar = dbar.union(probes)

    c0_probe = c0_support_table(bundle, probes, backend=backend)
    sup = record(0, [c0_probe.get(d) for d in probes])
    if probes_match(sup):
        trace.stop_reason = "hull_reached"
        trace.wall_time = time.perf_counter() - t_start
        return trace

    c0_d0 = c0_support_table(bundle, d0, backend=backend)
    table = None
    stage = None
    if discretized:
        table = c0_support_table(bundle, dbar, backend=backend)
    else:
        stage = initial_stage(bundle, d0, psd=psd, max_nonzeros=max_nonzeros,
                              backend=backend)

    for k in range(1, max_iter + 1):
        if not discretized:
            try:
                stage = homog_step(stage)
                vals, clean = stage_support(stage, probes, backend=backend,
                                            psd_tol=psd_tol,
                                            psd_max_cuts=psd_max_cuts)
                trace.psd_clean = trace.psd_clean and clean
            except HomogSizeError:
                # switch to the discretized operator from the current stage
                trace.cap_hit = True
                discretized = True
                if dbar is None:
                    dbar = DirectionSet.default_dbar(bundle).union(probes)
                else:
                    dbar = dbar.union(probes)
                dvals, _ = stage_support(stage, list(dbar), backend=backend,
                                         psd_tol=psd_tol,
                                         psd_max_cuts=psd_max_cuts)
                table = SupportTable()
                for d, v in zip(dbar, dvals):
                    table.set(d, v)
        if discretized:
            all_dirs = list(dbar)
            vals_all, clean = _lifted_values(bundle, c0_d0, table, d0, dbar,
                                             all_dirs, psd=psd, backend=backend,
                                             psd_tol=psd_tol,
                                             psd_max_cuts=psd_max_cuts)
            trace.psd_clean = trace.psd_clean and clean
            table = SupportTable()
            for d, v in zip(all_dirs, vals_all):
                table.set(d, v)
            vals = [table.get(p) for p in probes]
        sup = record(k, vals)
        if probes_match(sup):
            trace.stop_reason = "hull_reached"
            break
    else:
        trace.stop_reason = "max_iter"
    trace.wall_time = time.perf_counter() - t_start
    return trace
