"""Facet strengthening along complementarity disjunctions.

Works on the homogenized self-dual form of an instance: variables
(x, s, alpha) in R^(2l+1) with s = Mx + q*alpha tied by equality rows and
a simplex row keeping everything compact. Complementarity is never written
down as a constraint; instead each inequality row is tightened against the
two sides of every disjunction x_j = 0 / s_j = 0 by a pair of LPs over the
homogenized cone of the current relaxation, which shrinks the relaxation
onto the convex hull of the complementary points in l rounds.

Row sign conventions: internally rows are stored as a.v <= b (geometry
FacetList); dumped rows use the pair (u, u0) = (-a, b), to be read as
-(u . v) <= u0, with u0 entering the strengthening LPs as the coefficient
of the homogenizing coordinate.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .formulations import build_lcp_alpha, build_mip_alpha
from .geometry import FacetList
from .instance import LcpInstance
from .lp import LinearProgram, LpError, LpStatus, solve_lp, solve_many
from .rational import to_fraction
from .relaxation import DirectionSet, run_hierarchy


def _ell_of(dim: int) -> int:
    if dim < 3 or dim % 2 == 0:
        raise ValueError("facet list must live in R^(2l+1)")
    return (dim - 1) // 2


# ---------------------------------------------------------------------------
# strengthening LPs


def _cone_lp_parts(ck: FacetList):
    """Homogenization of the facet list: one extra 0th coordinate xi0 with
    rows a.xi - b*xi0 <= 0 (resp. = 0) and xi0 >= 0. Coordinates fixed to
    zero by tagged equalities get pinned bounds so the LPs shrink."""
    dim = ck.dim
    a_ub, b_ub, a_eq, b_eq = ck.matrices()
    rows_ub = np.hstack([-b_ub[:, None], a_ub]) if a_ub.shape[0] else np.zeros((0, dim + 1))
    rows_eq = None
    if a_eq is not None:
        rows_eq = np.hstack([-b_eq[:, None], a_eq])
    lb = np.full(dim + 1, -np.inf)
    lb[0] = 0.0
    ub = np.full(dim + 1, np.inf)
    if a_eq is not None:
        for a, b in zip(a_eq, b_eq):
            nz = np.nonzero(a)[0]
            if b == 0.0 and nz.shape[0] == 1:
                lb[1 + nz[0]] = 0.0
                ub[1 + nz[0]] = 0.0
    return rows_ub, rows_eq, lb, ub


def _pinned_bounds(lb, ub, one_var: int, zero_var: int):
    lo = lb.copy()
    hi = ub.copy()
    if hi[one_var] < 1.0:
        return None  # the coordinate is already fixed at zero: slice empty
    lo[one_var] = 1.0
    hi[one_var] = 1.0
    lo[zero_var] = 0.0
    hi[zero_var] = 0.0
    return lo, hi


def _side_lp(ck_parts, dim: int, one_var: int, zero_var: int):
    rows_ub, rows_eq, lb, ub = ck_parts
    pinned = _pinned_bounds(lb, ub, one_var, zero_var)
    if pinned is None:
        return None
    lo, hi = pinned
    return LinearProgram(c=np.zeros(dim + 1), a_ub=rows_ub,
                         b_ub=np.zeros(rows_ub.shape[0]),
                         a_eq=rows_eq,
                         b_eq=np.zeros(rows_eq.shape[0]) if rows_eq is not None else None,
                         lb=lo, ub=hi)


def _row_objective(a: np.ndarray, b: float) -> np.ndarray:
    # minimize u0*xi0 + u.xi with (u0, u) = (b, -a)
    return np.concatenate([[b], -a])


@dataclass
class StrengthenOutcome:
    """Result of tightening one row against the disjunction at index j."""

    j: int
    fix_x: bool = False
    fix_s: bool = False
    row: tuple | None = None
    values: tuple = (None, None)


def strengthen_row(row, j: int, ck: FacetList,
                   backend: str | None = None) -> StrengthenOutcome:
    """Tighten one inequality row against the two faces x_j = 0, s_j = 0.

    Solves min (b, -a).xi over the homogenized cone with xi_{x_j} = 1,
    xi_{s_j} = 0, and the mirrored problem. An infeasible side proves the
    matching coordinate vanishes on every feasible point (emit an equality);
    two optima tighten the row's x_j and s_j coefficients by the optimal
    values while every other coefficient and the right side stay put.
    """
    a, b = row
    a = np.asarray(a, dtype=float).reshape(-1)
    ell = _ell_of(ck.dim)
    if not 1 <= j <= ell:
        raise ValueError(f"disjunction index {j} outside 1..{ell}")
    parts = _cone_lp_parts(ck)
    xv = 1 + (j - 1)
    sv = 1 + (ell + j - 1)
    obj = _row_objective(a, b)
    out = StrengthenOutcome(j=j)
    vals = []
    for one, zero, which in ((xv, sv, "x"), (sv, xv, "s")):
        lp = _side_lp(parts, ck.dim, one, zero)
        res = solve_lp(LinearProgram(c=obj, a_ub=lp.a_ub, b_ub=lp.b_ub,
                                     a_eq=lp.a_eq, b_eq=lp.b_eq,
                                     lb=lp.lb, ub=lp.ub),
                       backend=backend) if lp is not None else None
        if lp is None or res.status == LpStatus.INFEASIBLE:
            if which == "x":
                out.fix_x = True
            else:
                out.fix_s = True
            vals.append(None)
        elif res.status == LpStatus.UNBOUNDED:
            raise LpError("strengthening LP unbounded; the seed row is not "
                          "valid for the current relaxation")
        else:
            vals.append(res.value)
    out.values = tuple(vals)
    if not out.fix_x and not out.fix_s:
        new_a = a.copy()
        new_a[j - 1] += vals[0]
        new_a[ell + j - 1] += vals[1]
        out.row = (new_a, b)
    return out


def _facets_from(dim: int, ineqs, eqs) -> FacetList:
    out = FacetList(dim)
    for a, b in ineqs:
        out.add(a, b)
    for a, b, tag in eqs:
        out.add_eq(a, b, tag)
    return out


def minimize_rows(fl: FacetList, backend: str | None = None,
                  tol: float = 1e-9) -> FacetList:
    """Drop inequality rows implied by the rest (support <= rhs without
    them); the surviving rows are the working stand-in for a facet list."""
    ineqs = list(zip(fl.ineq_a, fl.ineq_b))
    eqs = list(zip(fl.eq_a, fl.eq_b, fl.eq_tags))
    kept = list(range(len(ineqs)))
    for i in list(kept):
        trial = [t for t in kept if t != i]
        cand = _facets_from(fl.dim, [ineqs[t] for t in trial], eqs)
        a, b = ineqs[i]
        if cand.support(a, backend=backend) <= b + tol:
            kept = trial
    return _facets_from(fl.dim, [ineqs[t] for t in kept], eqs)


def algorithm41_step(ck: FacetList, backend: str | None = None,
                     jobs: int = 1) -> tuple[FacetList, dict]:
    """One full strengthening round: every inequality row against every
    disjunction index, 2*l*|rows| LPs, then dedup into the next list."""
    ell = _ell_of(ck.dim)
    rows = list(zip([a.copy() for a in ck.ineq_a], ck.ineq_b))
    parts = _cone_lp_parts(ck)
    objs = [_row_objective(a, b) for a, b in rows]
    tasks = [(j, which) for j in range(1, ell + 1) for which in ("x", "s")]

    def run_side(task):
        j, which = task
        xv = 1 + (j - 1)
        sv = 1 + (ell + j - 1)
        one, zero = (xv, sv) if which == "x" else (sv, xv)
        lp = _side_lp(parts, ck.dim, one, zero)
        if lp is None:
            return [None] * len(rows)
        return solve_many(lp, objs, backend=backend)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            side_results = list(pool.map(run_side, tasks))
    else:
        side_results = [run_side(t) for t in tasks]
    by_task = dict(zip(tasks, side_results))

    nxt = ck.copy()
    pinned = set()
    if ck.eq_a:
        for a, b in zip(ck.eq_a, ck.eq_b):
            nz = np.nonzero(a)[0]
            if b == 0.0 and nz.shape[0] == 1:
                pinned.add(int(nz[0]))
    n_new = 0
    n_fixed = 0
    for r, (a, b) in enumerate(rows):
        for j in range(1, ell + 1):
            res_x = by_task[(j, "x")][r]
            res_s = by_task[(j, "s")][r]
            bad_x = res_x is None or res_x.status == LpStatus.INFEASIBLE
            bad_s = res_s is None or res_s.status == LpStatus.INFEASIBLE
            for res in (res_x, res_s):
                if res is not None and res.status == LpStatus.UNBOUNDED:
                    raise LpError("strengthening LP unbounded; invalid seed row")
            if bad_x or bad_s:
                for bad, coord, name in ((bad_x, j - 1, "x"),
                                         (bad_s, ell + j - 1, "s")):
                    if bad and coord not in pinned:
                        e = np.zeros(ck.dim)
                        e[coord] = 1.0
                        nxt.add_eq(e, 0.0, tag=f"fix:{name}:{j}")
                        pinned.add(coord)
                        n_fixed += 1
                continue
            new_a = a.copy()
            new_a[j - 1] += res_x.value
            new_a[ell + j - 1] += res_s.value
            if nxt.add(new_a, b):
                n_new += 1
    stats = {"lp_count": 2 * ell * len(rows), "rows_in": len(rows),
             "rows_added": n_new, "coords_fixed": n_fixed}
    return nxt, stats


def _supports(fl: FacetList, dirs, backend: str | None = None) -> list[float]:
    lp = fl.as_lp(np.zeros(fl.dim))
    vals = []
    for res in solve_many(lp, [np.asarray(d, dtype=float) for d in dirs],
                          backend=backend):
        if res.status == LpStatus.INFEASIBLE:
            vals.append(-np.inf)
        elif res.status == LpStatus.UNBOUNDED:
            vals.append(np.inf)
        else:
            vals.append(res.value)
    return vals


def default_hull_probes(ell: int) -> list[np.ndarray]:
    """Objective direction first, then all signed coordinates of (x,s,a)."""
    dim = 2 * ell + 1
    dirs = [np.eye(dim)[dim - 1]]
    eye = np.eye(dim)
    for i in range(dim):
        dirs.append(eye[i])
        dirs.append(-eye[i])
    return list(DirectionSet(dirs))


def algorithm41_run(inst: LcpInstance, max_iter: int | None = None,
                    probe_dirs=None, backend: str | None = None,
                    jobs: int = 1) -> tuple[list[FacetList], dict]:
    """Iterate the strengthening rounds from the instance's homogenized
    self-dual relaxation; returns the facet list per iteration plus a trace
    of row counts and probe supports."""
    bundle = build_lcp_alpha(inst, explicit_s=True)
    ell = inst.ell
    if max_iter is None:
        max_iter = ell
    if probe_dirs is None:
        probe_dirs = default_hull_probes(ell)
    probes = [np.asarray(d, dtype=float).reshape(-1) for d in probe_dirs]
    ck = minimize_rows(bundle.c0, backend=backend)
    t0 = time.perf_counter()
    facets = [ck]
    trace = {"ell": ell, "iterations": [], "stop_reason": "max_iter"}

    def record(k, fl, stats):
        sup = {str(i): float(v) for i, v in enumerate(_supports(fl, probes, backend))}
        entry = {"k": k, "n_rows": fl.n_ineq, "n_eq": fl.n_eq, "supports": sup}
        entry.update(stats)
        trace["iterations"].append(entry)

    record(0, ck, {"lp_count": 0})
    for k in range(1, max_iter + 1):
        ck, stats = algorithm41_step(ck, backend=backend, jobs=jobs)
        facets.append(ck)
        record(k, ck, stats)
    trace["wall_time"] = time.perf_counter() - t0
    return facets, trace


# ---------------------------------------------------------------------------
# exact-arithmetic variant


@dataclass
class ExactFacets:
    """Facet list over Fractions: rows a.v <= b plus equality rows."""

    dim: int
    ineqs: list = field(default_factory=list)   # (tuple of Fraction, Fraction)
    eqs: list = field(default_factory=list)

    def copy(self) -> "ExactFacets":
        return ExactFacets(self.dim, list(self.ineqs), list(self.eqs))

    def add(self, a, b) -> bool:
        a = [to_fraction(v) for v in a]
        b = to_fraction(b)
        scale = max(abs(v) for v in a)
        if scale == 0:
            if b < 0:
                raise ValueError("added the impossible row 0 <= negative")
            return False
        key = (tuple(v / scale for v in a), b / scale)
        if key in {(r, c) for r, c in self.ineqs}:
            return False
        self.ineqs.append(key)
        return True

    def add_eq(self, a, b) -> None:
        a = [to_fraction(v) for v in a]
        b = to_fraction(b)
        scale = max(abs(v) for v in a)
        if scale == 0:
            raise ValueError("zero equality row")
        row = (tuple(v / scale for v in a), b / scale)
        if row not in self.eqs:
            self.eqs.append(row)

    def as_lp(self, c, maximize: bool = True) -> LinearProgram:
        a_ub = np.array([list(a) for a, _ in self.ineqs], dtype=object)
        b_ub = np.array([b for _, b in self.ineqs], dtype=object)
        a_eq = b_eq = None
        if self.eqs:
            a_eq = np.array([list(a) for a, _ in self.eqs], dtype=object)
            b_eq = np.array([b for _, b in self.eqs], dtype=object)
        return LinearProgram(c=np.array(list(c), dtype=object), a_ub=a_ub,
                             b_ub=b_ub, a_eq=a_eq, b_eq=b_eq,
                             maximize=maximize, exact=True)

    def support(self, d):
        """Best objective over the set: a Fraction, None when the set is
        empty, or +inf when the direction is unbounded."""
        res = solve_lp(self.as_lp(d))
        if res.status == LpStatus.INFEASIBLE:
            return None
        if res.status == LpStatus.UNBOUNDED:
            return np.inf
        return res.value

    def homogenized_lp(self, obj, one_var: int, zero_var: int) -> LinearProgram:
        dim = self.dim
        zero = Fraction(0)
        a_ub = []
        for a, b in self.ineqs:
            a_ub.append([-b] + list(a))
        a_eq = []
        for a, b in self.eqs:
            a_eq.append([-b] + list(a))
        lb = [None] * (dim + 1)
        ub = [None] * (dim + 1)
        lb[0] = zero
        lb[one_var] = Fraction(1)
        ub[one_var] = Fraction(1)
        lb[zero_var] = zero
        ub[zero_var] = zero
        lb = [(-np.inf if v is None else v) for v in lb]
        ub = [(np.inf if v is None else v) for v in ub]
        return LinearProgram(
            c=np.array(list(obj), dtype=object),
            a_ub=np.array(a_ub, dtype=object),
            b_ub=np.array([zero] * len(a_ub), dtype=object),
            a_eq=np.array(a_eq, dtype=object) if a_eq else None,
            b_eq=np.array([zero] * len(a_eq), dtype=object) if a_eq else None,
            lb=np.array(lb, dtype=object), ub=np.array(ub, dtype=object),
            exact=True)


def _exact_base(inst: LcpInstance) -> ExactFacets:
    ell = inst.ell
    dim = 2 * ell + 1
    M = [[to_fraction(v) for v in row] for row in inst.M]
    q = [to_fraction(v) for v in inst.q]
    zero = Fraction(0)
    one = Fraction(1)
    out = ExactFacets(dim)
    for i in range(ell):
        row = [zero] * dim
        for jj in range(ell):
            row[jj] = -M[i][jj]
        row[ell + i] = one
        row[2 * ell] = -q[i]
        out.add_eq(row, zero)
    for i in range(dim):
        row = [zero] * dim
        row[i] = -one
        out.add(row, zero)
    out.add([one] * dim, one)
    return out


def _exact_minimize(fl: ExactFacets) -> ExactFacets:
    kept = list(fl.ineqs)
    i = 0
    while i < len(kept):
        trial = ExactFacets(fl.dim, kept[:i] + kept[i + 1:], list(fl.eqs))
        a, b = kept[i]
        sup = trial.support(list(a))
        if sup is not None and sup <= b:
            kept.pop(i)
        else:
            i += 1
    return ExactFacets(fl.dim, kept, list(fl.eqs))


def algorithm41_step_exact(ck: ExactFacets) -> ExactFacets:
    ell = _ell_of(ck.dim)
    nxt = ck.copy()
    pinned = set()
    for a, b in ck.eqs:
        nz = [t for t, v in enumerate(a) if v != 0]
        if b == 0 and len(nz) == 1:
            pinned.add(nz[0])
    for a, b in list(ck.ineqs):
        obj = [b] + [-v for v in a]
        for j in range(1, ell + 1):
            xv, sv = j, ell + j
            vals = []
            bad = []
            for one, zero in ((xv, sv), (sv, xv)):
                if (one - 1) in pinned:
                    vals.append(None)
                    bad.append(True)
                    continue
                res = solve_lp(ck.homogenized_lp(obj, one, zero))
                if res.status == LpStatus.INFEASIBLE:
                    vals.append(None)
                    bad.append(True)
                elif res.status == LpStatus.UNBOUNDED:
                    raise LpError("exact strengthening LP unbounded")
                else:
                    vals.append(res.value)
                    bad.append(False)
            if bad[0] or bad[1]:
                for isbad, coord in zip(bad, (j - 1, ell + j - 1)):
                    if isbad and coord not in pinned:
                        e = [Fraction(0)] * ck.dim
                        e[coord] = Fraction(1)
                        nxt.add_eq(e, Fraction(0))
                        pinned.add(coord)
                continue
            new_a = list(a)
            new_a[j - 1] = new_a[j - 1] + vals[0]
            new_a[ell + j - 1] = new_a[ell + j - 1] + vals[1]
            nxt.add(new_a, b)
    return nxt


def algorithm41_run_exact(inst: LcpInstance, max_iter: int | None = None,
                          probe_dirs=None) -> tuple[list[ExactFacets], dict]:
    """Strengthening rounds in exact rational arithmetic; supports in the
    trace are Fractions and comparisons against the exact enumeration
    reference can demand equality rather than a tolerance."""
    ell = inst.ell
    if max_iter is None:
        max_iter = ell
    if probe_dirs is None:
        probe_dirs = default_hull_probes(ell)
    probes = [[to_fraction(v) for v in np.asarray(d, dtype=object).reshape(-1)]
              for d in probe_dirs]
    ck = _exact_minimize(_exact_base(inst))
    facets = [ck]
    trace = {"ell": ell, "iterations": []}

    def record(k, fl):
        sup = {str(i): fl.support(p) for i, p in enumerate(probes)}
        trace["iterations"].append({"k": k, "n_rows": len(fl.ineqs),
                                    "n_eq": len(fl.eqs), "supports": sup})

    record(0, ck)
    for k in range(1, max_iter + 1):
        ck = algorithm41_step_exact(ck)
        facets.append(ck)
        record(k, ck)
    return facets, trace


def exact_hull_supports(inst: LcpInstance, probe_dirs) -> list:
    """Enumeration reference in exact arithmetic: per complementarity
    pattern pin one of x_i, s_i to zero and take the best support."""
    ell = inst.ell
    base = _exact_base(inst)
    out = []
    probes = [[to_fraction(v) for v in np.asarray(d, dtype=object).reshape(-1)]
              for d in probe_dirs]
    pieces = []
    for pattern in itertools.product((False, True), repeat=ell):
        piece = base.copy()
        for i, s_side in enumerate(pattern):
            coord = ell + i if s_side else i
            e = [Fraction(0)] * base.dim
            e[coord] = Fraction(1)
            piece.add_eq(e, Fraction(0))
        pieces.append(piece)
    for p in probes:
        best = None
        for piece in pieces:
            val = piece.support(p)
            if val is not None and (best is None or val > best):
                best = val
        out.append(best)
    return out


# ---------------------------------------------------------------------------
# sequential convex-hull-of-union operator


@dataclass
class UnionOfPolytopes:
    """Relaxation kept as an explicit union; supports are maxima over the
    pieces, which equals the support of the convex hull of the union."""

    pieces: list
    empty_tags: list = field(default_factory=list)
    history: list = field(default_factory=list)

    def support(self, d, backend: str | None = None) -> float:
        best = -np.inf
        for piece in self.pieces:
            val = piece.support(d, backend=backend)
            best = max(best, val)
        return best

    def to_dict(self) -> dict:
        return {
            "n_pieces": len(self.pieces),
            "empty_branches": list(self.empty_tags),
            "piece_counts": [len(step) for step in self.history],
        }


def _piece_trivial(piece: FacetList, backend: str | None, tol: float) -> bool:
    """True when the piece has shrunk to the origin (its whole mass sits at
    zero, so it contributes nothing beyond any other piece)."""
    return piece.support(np.ones(piece.dim), backend=backend) <= tol


def balas_run(inst: LcpInstance, backend: str | None = None,
              tol: float = 1e-9) -> UnionOfPolytopes:
    """Process one complementarity pair per round: each piece splits into
    its x_j = 0 and s_j = 0 faces, and the union of the faces represents
    the convex hull of the split (both faces sit on supporting hyperplanes
    of every piece, so taking hulls piecewise is exact). Degenerate pieces
    are tagged and dropped. After l rounds the union's supports are the
    hull supports."""
    bundle = build_lcp_alpha(inst, explicit_s=True)
    ell = inst.ell
    pieces = [bundle.c0.copy()]
    union = UnionOfPolytopes(pieces=pieces, history=[list(pieces)])
    for j in range(1, ell + 1):
        nxt = []
        for idx, piece in enumerate(union.pieces):
            for name, coord in (("x", j - 1), ("s", ell + j - 1)):
                child = piece.copy()
                e = np.zeros(child.dim)
                e[coord] = 1.0
                child.add_eq(e, 0.0, tag=f"fix:{name}:{j}")
                if _piece_trivial(child, backend, tol):
                    union.empty_tags.append(f"piece{idx}:{name}{j}=0")
                    continue
                nxt.append(child)
        if not nxt:
            nxt = [union.pieces[0]]
        union.pieces = nxt
        union.history.append(list(nxt))
    return union


# ---------------------------------------------------------------------------
# projection dominance


@dataclass
class DominanceReport:
    status: str
    k_max: int
    rows: list = field(default_factory=list)
    all_ok: bool = True

    def to_dict(self) -> dict:
        return {"status": self.status, "k_max": self.k_max,
                "all_ok": self.all_ok, "rows": self.rows}


def compare_dominance(inst: LcpInstance, k_max: int | None = None,
                      probe_dirs=None, backend: str | None = None,
                      tol: float = 1e-6, jobs: int = 1) -> DominanceReport:
    """Compare the cone-certificate hierarchy against facet strengthening
    on a shared projection.

    Both sides start from bases with identical (x, alpha) shadows: the 0-1
    formulation's relaxation projects to exactly the region cut out by
    s = Mx + q*alpha >= 0, x >= 0, x + s <= e, 0 <= alpha <= 1, which seeds
    the strengthening side. Probes live in (x_1..x_l, alpha); the report
    records, per round and probe, the hierarchy support (z coordinates
    dropped from the direction) and the strengthened-list support (s
    coordinates dropped, the equality rows substitute them away).
    """
    ell = inst.ell
    if k_max is None:
        k_max = ell
    if probe_dirs is None:
        eye = np.eye(ell + 1)
        probe_dirs = [eye[ell]] + [eye[i] for i in range(ell)] \
            + [-eye[i] for i in range(ell + 1)]
    probes = []
    for d in probe_dirs:
        d = np.asarray(d, dtype=float).reshape(-1)
        if d.shape[0] != ell + 1:
            raise ValueError("dominance probes live in (x, alpha), length l+1")
        probes.append(d / np.linalg.norm(d))

    mip = build_mip_alpha(inst)
    mip_dirs = []
    for d in probes:
        full = np.zeros(mip.n)
        full[0] = d[ell]
        full[1:ell + 1] = d[:ell]
        mip_dirs.append(full)
    hier = run_hierarchy(mip, "homog_lp", d0=DirectionSet.minimal(mip.layout),
                         probe_dirs=mip_dirs, max_iter=k_max, tol=1e-12,
                         backend=backend)
    sup3 = {}
    last = None
    for k in range(0, k_max + 1):
        try:
            last = hier.supports_at(k)
        except KeyError:
            pass  # stopped early; supports are frozen from here on
        sup3[k] = last

    dim = 2 * ell + 1
    base = FacetList(dim)
    for i in range(ell):
        row = np.zeros(dim)
        row[:ell] = -inst.M[i]
        row[ell + i] = 1.0
        row[2 * ell] = -inst.q[i]
        base.add_eq(row, 0.0, tag=f"slack:{i}")
    eye = np.eye(dim)
    for i in range(dim):
        base.add(-eye[i], 0.0)
    base.add(eye[2 * ell], 1.0)
    for i in range(ell):
        row = np.zeros(dim)
        row[i] = 1.0
        row[ell + i] = 1.0
        base.add(row, 1.0)

    lcp_dirs = []
    for d in probes:
        full = np.zeros(dim)
        full[:ell] = d[:ell]
        full[2 * ell] = d[ell]
        lcp_dirs.append(full)
    ck = minimize_rows(base, backend=backend)
    sup4 = {0: _supports(ck, lcp_dirs, backend=backend)}
    for k in range(1, k_max + 1):
        ck, _ = algorithm41_step(ck, backend=backend, jobs=jobs)
        sup4[k] = _supports(ck, lcp_dirs, backend=backend)

    report = DominanceReport(status="ok", k_max=k_max)
    for i in range(len(probes)):
        if sup3[0][str(i)] > sup4[0][i] + 1e-7:
            report.status = "incomparable"
            report.all_ok = False
            return report
    for k in range(0, k_max + 1):
        for i in range(len(probes)):
            s3 = sup3[k][str(i)]
            s4 = float(sup4[k][i])
            ok = s3 <= s4 + tol
            report.rows.append({"k": k, "dir_id": str(i), "support3": s3,
                                "support4": s4, "ok": bool(ok)})
            report.all_ok = report.all_ok and ok
    return report


def facets_to_dict(fl) -> dict:
    """JSON-ready dump; rows use the (u, u0) pair with -(u.v) <= u0."""
    if isinstance(fl, ExactFacets):
        rows = [{"u": [str(-v) for v in a], "u0": str(b)} for a, b in fl.ineqs]
        eqs = [{"u": [str(-v) for v in a], "u0": str(b)} for a, b in fl.eqs]
    else:
        rows = [{"u": [float(-v) for v in a], "u0": float(b)}
                for a, b in zip(fl.ineq_a, fl.ineq_b)]
        eqs = [{"u": [float(-v) for v in a], "u0": float(b), "tag": t}
               for a, b, t in zip(fl.eq_a, fl.eq_b, fl.eq_tags)]
    return {"sign_convention": "-(u.v) <= u0", "rows": rows, "eq_rows": eqs}
