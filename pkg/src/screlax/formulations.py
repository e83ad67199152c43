"""Convex encodings of complementarity problems.

Four builders produce a FormulationBundle each: a base polytope C0 given
as facet rows, a family of quadratic functions whose nonpositivity carves
the feasible points F out of C0, an objective, and a recovery rule mapping
relaxation optima back to complementarity solutions.

  big-M        (x, z) with box constraints x <= r z, Mx + q <= r(e - z)
  scaled 0-1   (alpha, x, z) homogenized by alpha, objective max alpha
  direct       (x, s, alpha) or (alpha, x) with the normalization row
               making the set compact for every M
  cone form    (alpha, x) over a pointed polyhedral cone K and its dual

Every bundle also answers oracle support queries: max d.v over the convex
hull of its feasible set, computed exactly by enumerating complementarity
pieces. Exponential in ell, fine at test scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import FacetList, QuadraticFunction
from .instance import LcpInstance, LcpSolution, PatternPolytope, verify_solution
from .lp import LinearProgram, LpStatus, solve_lp


class ConeError(ValueError):
    """Cone fails a structural requirement (pointedness, interior, margins)."""


# ---------------------------------------------------------------------------
# variable layout


@dataclass(frozen=True)
class VariableLayout:
    """Named contiguous blocks covering coordinates 0..n-1.

    ``m`` is the first index of the 0-1 tagged coordinates; ``m == n``
    means the formulation has none.
    """

    blocks: tuple
    m: int
    n: int

    def __post_init__(self):
        covered = []
        for name, start, stop in self.blocks:
            covered.extend(range(start, stop))
        if sorted(covered) != list(range(self.n)):
            raise ValueError("blocks must exactly cover 0..n-1")
        if not 0 <= self.m <= self.n:
            raise ValueError("m out of range")

    def block(self, name: str) -> range:
        for bname, start, stop in self.blocks:
            if bname == name:
                return range(start, stop)
        raise KeyError(name)

    def has_block(self, name: str) -> bool:
        return any(bname == name for bname, _, _ in self.blocks)

    def index(self, name: str, i: int = 0) -> int:
        r = self.block(name)
        if not 0 <= i < len(r):
            raise IndexError(f"{name}[{i}]")
        return r[i]

    def binary_indices(self) -> range:
        return range(self.m, self.n)

    def to_dict(self) -> dict:
        return {
            "blocks": [{"name": b, "start": s, "stop": t} for b, s, t in self.blocks],
            "m": self.m,
            "n": self.n,
        }


# ---------------------------------------------------------------------------
# polyhedral cones


def _normalize_rows(rows: np.ndarray) -> np.ndarray:
    out = []
    for r in rows:
        scale = np.abs(r).max(initial=0.0)
        if scale > 0:
            out.append(r / scale)
    return np.array(out) if out else np.zeros((0, rows.shape[1]))


def _dedup_sorted_desc(rows: np.ndarray) -> np.ndarray:
    seen = {}
    for r in rows:
        key = tuple(np.round(r / 1e-9).astype(np.int64))
        seen[key] = r
    ordered = sorted(seen.values(), key=lambda r: tuple(r), reverse=True)
    return np.array(ordered) if ordered else rows.reshape(0, -1)


def _extreme_rays_of_hrep(B: np.ndarray) -> np.ndarray:
    """Extreme rays of {x : Bx >= 0}, assuming pointed and solid.

    Candidates come from (dim-1)-subsets of rows with a one-dimensional
    nullspace; feasible sign choices survive. Combinatorial, test scale.
    """
    B = np.asarray(B, dtype=float)
    rB, dim = B.shape
    scale = 1.0 + np.abs(B).max(initial=0.0)
    rays = []
    if dim == 1:
        for v in (np.array([1.0]), np.array([-1.0])):
            if (B @ v).min(initial=0.0) >= -1e-9 * scale:
                rays.append(v)
    else:
        for subset in itertools.combinations(range(rB), dim - 1):
            A = B[list(subset)]
            u, sv, vh = np.linalg.svd(A)
            if (sv > 1e-9 * scale).sum() != dim - 1:
                continue
            v = vh[-1]
            for cand in (v, -v):
                if (B @ cand).min() >= -1e-9 * scale:
                    rays.append(cand)
                    break
    return _dedup_sorted_desc(_normalize_rows(np.array(rays) if rays else np.zeros((0, dim))))


class PolyhedralCone:
    """Pointed solid polyhedral cone, given by generators or by rows of
    {x : Bx >= 0}; the missing description is derived on demand."""

    def __init__(self, dim: int, generators=None, inequalities=None):
        if generators is None and inequalities is None:
            raise ConeError("need generators or inequality rows")
        self.dim = int(dim)
        self._G = None if generators is None else np.asarray(generators, dtype=float).reshape(-1, dim)
        self._B = None if inequalities is None else np.asarray(inequalities, dtype=float).reshape(-1, dim)
        self.representation = "generators" if self._G is not None else "inequalities"

    @classmethod
    def from_generators(cls, generators) -> "PolyhedralCone":
        g = np.asarray(generators, dtype=float)
        return cls(g.shape[1], generators=g)

    @classmethod
    def from_inequalities(cls, rows) -> "PolyhedralCone":
        b = np.asarray(rows, dtype=float)
        return cls(b.shape[1], inequalities=b)

    @classmethod
    def orthant(cls, dim: int) -> "PolyhedralCone":
        return cls(dim, inequalities=np.eye(dim))

    @property
    def inequality_rows(self) -> np.ndarray:
        if self._B is None:
            # facet normals of cone(G) are the extreme rays of {y : Gy >= 0}
            self._B = _extreme_rays_of_hrep(self._G)
        return self._B

    @property
    def generator_rows(self) -> np.ndarray:
        if self._G is None:
            self._G = _extreme_rays_of_hrep(self._B)
        return self._G

    def extreme_rays(self) -> np.ndarray:
        return self.generator_rows

    def dual(self) -> "PolyhedralCone":
        out = PolyhedralCone(self.dim,
                             generators=self._B,
                             inequalities=self._G if self._G is not None else None)
        if out._G is None and out._B is None:  # pragma: no cover
            raise ConeError("empty cone description")
        return out

    def is_pointed(self) -> bool:
        if self._B is not None:
            return np.linalg.matrix_rank(self._B, tol=1e-9) == self.dim
        G = _normalize_rows(self._G)
        if G.shape[0] == 0:
            return True
        # pointed iff some y is uniformly positive on the generators
        res = solve_lp(LinearProgram(
            c=np.zeros(self.dim),
            a_ub=-G, b_ub=-np.ones(G.shape[0]),
            lb=np.full(self.dim, -1e6), ub=np.full(self.dim, 1e6)))
        return res.status == LpStatus.OPTIMAL

    def is_solid(self) -> bool:
        if self._G is not None:
            return np.linalg.matrix_rank(self._G, tol=1e-9) == self.dim
        B = _normalize_rows(self._B)
        if B.shape[0] == 0:
            return True
        # max t with Bx >= t e inside the unit box
        c = np.zeros(self.dim + 1)
        c[-1] = 1.0
        a_ub = np.hstack([-B, np.ones((B.shape[0], 1))])
        res = solve_lp(LinearProgram(
            c=c, a_ub=a_ub, b_ub=np.zeros(B.shape[0]),
            lb=np.concatenate([np.full(self.dim, -1.0), [0.0]]),
            ub=np.concatenate([np.full(self.dim, 1.0), [1.0]]),
            maximize=True))
        return res.status == LpStatus.OPTIMAL and res.value > 1e-9

    def validate(self) -> None:
        if not self.is_pointed():
            raise ConeError("cone is not pointed")
        if not self.is_solid():
            raise ConeError("cone has empty interior")

    def interior_margin(self, v) -> float:
        """min over normalized facet rows of row.v; positive means interior."""
        v = np.asarray(v, dtype=float).reshape(-1)
        B = _normalize_rows(self.inequality_rows)
        return float((B @ v).min(initial=np.inf))

    def contains(self, v, tol: float = 1e-9) -> bool:
        return self.interior_margin(v) >= -tol

    def to_dict(self) -> dict:
        doc = {"dim": self.dim, "representation": self.representation}
        if self._G is not None:
            doc["generators"] = [[float(v) for v in row] for row in self._G]
        if self._B is not None:
            doc["inequalities"] = [[float(v) for v in row] for row in self._B]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "PolyhedralCone":
        gens = doc.get("generators")
        ineqs = doc.get("inequalities")
        if doc.get("representation") == "inequalities" and ineqs is not None:
            return cls(int(doc["dim"]), inequalities=ineqs)
        if gens is not None:
            return cls(int(doc["dim"]), generators=gens)
        return cls(int(doc["dim"]), inequalities=ineqs)


def default_eta(cone: PolyhedralCone) -> np.ndarray:
    """Interior point of K scaled so normalized facet products reach 1."""
    B = _normalize_rows(cone.inequality_rows)
    dim = cone.dim
    # minimize the l1 norm of eta subject to B eta >= e
    c = np.concatenate([np.zeros(dim), np.ones(dim)])
    a_ub = [np.hstack([-B, np.zeros((B.shape[0], dim))])]
    eye = np.eye(dim)
    a_ub.append(np.hstack([eye, -eye]))
    a_ub.append(np.hstack([-eye, -eye]))
    b_ub = np.concatenate([-np.ones(B.shape[0]), np.zeros(2 * dim)])
    res = solve_lp(LinearProgram(c=c, a_ub=np.vstack(a_ub), b_ub=b_ub,
                                 lb=np.concatenate([np.full(dim, -1e6), np.zeros(dim)]),
                                 ub=np.full(2 * dim, 1e6)))
    if res.status != LpStatus.OPTIMAL:
        raise ConeError("no interior point found for the cone")
    return res.x[:dim]


def default_eta_bar(cone: PolyhedralCone) -> np.ndarray:
    """Sum of normalized facet rows: strictly interior to the dual cone."""
    B = _normalize_rows(cone.inequality_rows)
    return B.sum(axis=0)


# ---------------------------------------------------------------------------
# bundles


@dataclass
class FormulationBundle:
    kind: str
    layout: VariableLayout
    c0: FacetList
    pf: list
    objective: np.ndarray
    recovery: str
    instance: LcpInstance | None = None
    variant: str = ""
    r: float | None = None
    cone: PolyhedralCone | None = None
    cp_map: np.ndarray | None = None
    cp_shift: np.ndarray | None = None
    eta: np.ndarray | None = None
    eta_bar: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.layout.n

    def support_c0(self, d, backend: str | None = None) -> float:
        return self.c0.support(d, backend=backend)

    def check_compact(self, backend: str | None = None) -> None:
        for j in range(self.n):
            for sign in (1.0, -1.0):
                d = np.zeros(self.n)
                d[j] = sign
                if not np.isfinite(self.c0.support(d, backend=backend)):
                    raise ValueError(
                        f"base polytope unbounded in coordinate {j} (sign {sign:+.0f})")

    # -- oracle ------------------------------------------------------------

    def oracle_pieces(self) -> list[PatternPolytope]:
        """Complementarity pieces of the feasible set, in pattern order."""
        if self.kind == "cp_alpha":
            raise ValueError("cone form pieces carry multiplier variables; "
                             "use oracle_support directly")
        inst = self.instance
        ell = inst.ell
        out = []
        for pattern in itertools.product((False, True), repeat=ell):
            facets = self.c0.copy()
            if self.kind in ("bigm", "mip_alpha"):
                for i, hit in enumerate(pattern):
                    row = np.zeros(self.n)
                    row[self.layout.index("z", i)] = 1.0
                    facets.add_eq(row, 1.0 if hit else 0.0, tag=f"z:{i}")
            elif self.kind == "lcp_alpha" and self.variant == "explicit":
                for i, hit in enumerate(pattern):
                    row = np.zeros(self.n)
                    row[self.layout.index("s" if hit else "x", i)] = 1.0
                    facets.add_eq(row, 0.0, tag=("s:" if hit else "x:") + str(i))
            elif self.kind == "lcp_alpha":
                for i, hit in enumerate(pattern):
                    row = np.zeros(self.n)
                    if hit:
                        row[self.layout.index("alpha")] = inst.q[i]
                        for j in range(ell):
                            row[self.layout.index("x", j)] = inst.M[i, j]
                        if np.abs(row).max() == 0.0:
                            continue  # vacuous slack row
                        facets.add_eq(row, 0.0, tag=f"s:{i}")
                    else:
                        row[self.layout.index("x", i)] = 1.0
                        facets.add_eq(row, 0.0, tag=f"x:{i}")
            else:
                raise ValueError(f"unknown kind {self.kind!r}")
            out.append(PatternPolytope(pattern, facets))
        return out

    def oracle_support(self, d, backend: str | None = None,
                       return_point: bool = False):
        """Exact hull support in direction d by piece enumeration.

        With return_point the result is (value, maximizer) where the
        maximizer is a point of the feasible set attaining the support, or
        None when every piece is empty.
        """
        d = np.asarray(d, dtype=float).reshape(-1)
        if d.shape[0] != self.n:
            raise ValueError("direction dimension mismatch")
        if self.kind == "cp_alpha":
            best, point = self._cp_oracle_support(d, backend)
            return (best, point) if return_point else best
        best = -np.inf
        point = None
        for piece in self.oracle_pieces():
            if return_point:
                res = solve_lp(piece.facets.as_lp(d, maximize=True),
                               backend=backend)
                if res.status == LpStatus.OPTIMAL and res.value > best:
                    best = res.value
                    point = res.x
            else:
                val = piece.support(d, backend=backend)
                if val > best:
                    best = val
        return (best, point) if return_point else best

    def _cp_oracle_support(self, d: np.ndarray, backend: str | None):
        """Pieces indexed by which facet products vanish: the dual-side
        multipliers live on the rows of K, and each piece pins either the
        facet value or its multiplier to zero."""
        B = self.cone.inequality_rows
        rB, ell = B.shape
        n = self.n
        nv = n + rB
        a_ub, b_ub, _, _ = self.c0.matrices()
        a_ub = np.hstack([a_ub, np.zeros((a_ub.shape[0], rB))])
        # A x + q alpha - B^T mu = 0 rows
        eq_rows = np.zeros((ell, nv))
        eq_rows[:, self.layout.index("alpha")] = self.cp_shift
        eq_rows[:, list(self.layout.block("x"))] = self.cp_map
        eq_rows[:, n:] = -B.T
        d_pad = np.concatenate([d, np.zeros(rB)])
        best = -np.inf
        point = None
        for subset in itertools.product((False, True), repeat=rB):
            extra = []
            for j, facet_zero in enumerate(subset):
                if facet_zero:
                    row = np.zeros(nv)
                    row[list(self.layout.block("x"))] = B[j]
                    extra.append(row)
            a_eq = np.vstack([eq_rows] + ([np.vstack(extra)] if extra else []))
            b_eq = np.zeros(a_eq.shape[0])
            lb = np.concatenate([np.full(n, -np.inf), np.zeros(rB)])
            ub = np.full(nv, np.inf)
            for j, facet_zero in enumerate(subset):
                if not facet_zero:
                    ub[n + j] = 0.0
            res = solve_lp(LinearProgram(c=d_pad, a_ub=a_ub, b_ub=b_ub,
                                         a_eq=a_eq, b_eq=b_eq, lb=lb, ub=ub,
                                         maximize=True), backend=backend)
            if res.status == LpStatus.OPTIMAL and res.value > best:
                best = res.value
                point = res.x[:n].copy()
        return best, point

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        a_ub, b_ub, a_eq, b_eq = self.c0.matrices()
        doc = {
            "kind": self.kind,
            "variant": self.variant,
            "layout": self.layout.to_dict(),
            "rows": {
                "ineq": [{"a": [float(v) for v in a], "b": float(b)}
                         for a, b in zip(a_ub, b_ub)],
                "eq": [{"a": [float(v) for v in a], "b": float(b), "tag": t}
                       for a, b, t in zip(self.c0.eq_a, self.c0.eq_b, self.c0.eq_tags)],
            },
            "pf": [{"gamma": float(qf.gamma),
                    "q": [float(v) for v in qf.q],
                    "Q": [[float(v) for v in row] for row in qf.Q]}
                   for qf in self.pf],
            "objective": [float(v) for v in self.objective],
            "recovery": self.recovery,
        }
        if self.instance is not None:
            doc["instance"] = self.instance.to_dict()
        if self.r is not None:
            doc["r"] = float(self.r)
        if self.cone is not None:
            doc["cone"] = self.cone.to_dict()
            doc["eta"] = [float(v) for v in self.eta]
            doc["eta_bar"] = [float(v) for v in self.eta_bar]
        return doc


def _binary_quadratics(layout: VariableLayout, block: str) -> list:
    """z_i^2 - z_i <= 0 for the block, then the reversed family."""
    n = layout.n
    fwd = []
    rev = []
    for i in range(len(layout.block(block))):
        k = layout.index(block, i)
        Q = np.zeros((n, n))
        Q[k, k] = 1.0
        qv = np.zeros(n)
        qv[k] = -0.5
        fwd.append(QuadraticFunction(gamma=0.0, q=qv, Q=Q))
        rev.append(QuadraticFunction(gamma=0.0, q=-qv, Q=-Q))
    return fwd + rev


def build_bigm(inst: LcpInstance, r: float) -> FormulationBundle:
    """Box encoding: z relaxed 0-1, x <= r z, Mx + q <= r(e - z)."""
    if not r > 0:
        raise ValueError("r must be positive")
    ell = inst.ell
    n = 2 * ell
    layout = VariableLayout(blocks=(("x", 0, ell), ("z", ell, n)), m=ell, n=n)
    c0 = FacetList(n)
    M, q = inst.M, inst.q
    for i in range(ell):  # Mx + q >= 0
        a = np.zeros(n)
        a[:ell] = -M[i]
        c0.add(a, q[i])
    for i in range(ell):  # Mx + q <= r(e - z)
        a = np.zeros(n)
        a[:ell] = M[i]
        a[ell + i] = r
        c0.add(a, r - q[i])
    eye = np.eye(n)
    for i in range(ell):
        c0.add(-eye[ell + i], 0.0)  # z >= 0
    for i in range(ell):
        c0.add(eye[ell + i], 1.0)  # z <= e
    for i in range(ell):
        c0.add(-eye[i], 0.0)  # x >= 0
    for i in range(ell):  # x <= r z
        a = np.zeros(n)
        a[i] = 1.0
        a[ell + i] = -r
        c0.add(a, 0.0)
    bundle = FormulationBundle(
        kind="bigm", layout=layout, c0=c0,
        pf=_binary_quadratics(layout, "z"),
        objective=np.zeros(n), recovery="strip_z",
        instance=inst, r=float(r))
    bundle.check_compact()
    return bundle


def build_mip_alpha(inst: LcpInstance) -> FormulationBundle:
    """Scaled 0-1 encoding: max alpha, 0 <= Mx + q alpha <= e - z,
    0 <= x <= z, 0 <= alpha <= 1, z relaxed 0-1."""
    ell = inst.ell
    n = 2 * ell + 1
    layout = VariableLayout(
        blocks=(("alpha", 0, 1), ("x", 1, ell + 1), ("z", ell + 1, n)),
        m=ell + 1, n=n)
    c0 = FacetList(n)
    M, q = inst.M, inst.q
    for i in range(ell):  # Mx + q alpha >= 0
        a = np.zeros(n)
        a[0] = -q[i]
        a[1:ell + 1] = -M[i]
        c0.add(a, 0.0)
    for i in range(ell):  # Mx + q alpha + z <= e
        a = np.zeros(n)
        a[0] = q[i]
        a[1:ell + 1] = M[i]
        a[ell + 1 + i] = 1.0
        c0.add(a, 1.0)
    eye = np.eye(n)
    for i in range(ell):
        c0.add(-eye[ell + 1 + i], 0.0)  # z >= 0
    for i in range(ell):
        c0.add(eye[ell + 1 + i], 1.0)  # z <= e
    for i in range(ell):
        c0.add(-eye[1 + i], 0.0)  # x >= 0
    for i in range(ell):  # x <= z
        a = np.zeros(n)
        a[1 + i] = 1.0
        a[ell + 1 + i] = -1.0
        c0.add(a, 0.0)
    c0.add(-eye[0], 0.0)  # alpha >= 0
    c0.add(eye[0], 1.0)  # alpha <= 1
    objective = np.zeros(n)
    objective[0] = 1.0
    bundle = FormulationBundle(
        kind="mip_alpha", layout=layout, c0=c0,
        pf=_binary_quadratics(layout, "z"),
        objective=objective, recovery="divide_by_alpha", instance=inst)
    bundle.check_compact()
    return bundle


def _alpha_cone_rows(c0: FacetList, layout: VariableLayout, B: np.ndarray,
                     dual_rows: np.ndarray, A: np.ndarray, q: np.ndarray,
                     eta: np.ndarray, eta_bar: np.ndarray) -> None:
    """Shared row emitter for the (alpha, x) cone-constrained sets:
    x in K, A x + q alpha in K*, alpha >= 0, normalization <= 1."""
    n = layout.n
    alpha = layout.index("alpha")
    xr = list(layout.block("x"))
    for brow in B:
        a = np.zeros(n)
        a[xr] = -brow
        c0.add(a, 0.0)
    for drow in dual_rows:
        a = np.zeros(n)
        a[alpha] = -float(drow @ q)
        a[xr] = -(drow @ A)
        c0.add(a, 0.0)
    a = np.zeros(n)
    a[alpha] = -1.0
    c0.add(a, 0.0)
    a = np.zeros(n)
    a[alpha] = float(eta @ q) + 1.0
    a[xr] = eta_bar + A.T @ eta
    c0.add(a, 1.0)


def build_lcp_alpha(inst: LcpInstance, explicit_s: bool = False) -> FormulationBundle:
    """Homogenized direct encoding.

    explicit_s keeps the slack as coordinates (x, s, alpha) tied by
    equality rows, which is the shape the facet-strengthening algorithm
    works on; otherwise the compact (alpha, x) form carries the ell
    complementarity quadratics x_i (Mx + q alpha)_i <= 0.
    """
    ell = inst.ell
    M, q = inst.M, inst.q
    if explicit_s:
        n = 2 * ell + 1
        layout = VariableLayout(
            blocks=(("x", 0, ell), ("s", ell, 2 * ell), ("alpha", 2 * ell, n)),
            m=n, n=n)
        c0 = FacetList(n)
        for i in range(ell):  # s = Mx + q alpha
            a = np.zeros(n)
            a[:ell] = -M[i]
            a[ell + i] = 1.0
            a[2 * ell] = -q[i]
            c0.add_eq(a, 0.0, tag=f"slack:{i}")
        eye = np.eye(n)
        for i in range(ell):
            c0.add(-eye[i], 0.0)  # x >= 0
        for i in range(ell):
            c0.add(-eye[ell + i], 0.0)  # s >= 0
        c0.add(-eye[2 * ell], 0.0)  # alpha >= 0
        a = np.ones(n)  # e.x + e.s + alpha <= 1
        c0.add(a, 1.0)
        objective = np.zeros(n)
        objective[2 * ell] = 1.0
        bundle = FormulationBundle(
            kind="lcp_alpha", layout=layout, c0=c0, pf=[],
            objective=objective, recovery="divide_by_alpha",
            instance=inst, variant="explicit")
        bundle.check_compact()
        return bundle

    n = ell + 1
    layout = VariableLayout(blocks=(("alpha", 0, 1), ("x", 1, n)), m=n, n=n)
    c0 = FacetList(n)
    eye_l = np.eye(ell)
    _alpha_cone_rows(c0, layout, B=eye_l, dual_rows=eye_l, A=M, q=q,
                     eta=np.ones(ell), eta_bar=np.ones(ell))
    pf = []
    for i in range(ell):
        a = np.zeros(n)
        a[1 + i] = 1.0
        b = np.zeros(n)
        b[0] = q[i]
        b[1:] = M[i]
        Q = 0.5 * (np.outer(a, b) + np.outer(b, a))
        pf.append(QuadraticFunction(gamma=0.0, q=np.zeros(n), Q=Q))
    objective = np.zeros(n)
    objective[0] = 1.0
    bundle = FormulationBundle(
        kind="lcp_alpha", layout=layout, c0=c0, pf=pf,
        objective=objective, recovery="divide_by_alpha",
        instance=inst, variant="implicit")
    bundle.check_compact()
    return bundle


def build_cp_alpha(cone: PolyhedralCone, A, q, eta, eta_bar) -> FormulationBundle:
    """Cone-constrained encoding: x in K, A x + q alpha in K*, scaled by
    alpha with the normalization <eta_bar, x> + <eta, Ax + q alpha> + alpha <= 1."""
    A = np.asarray(A, dtype=float)
    q = np.asarray(q, dtype=float).reshape(-1)
    eta = np.asarray(eta, dtype=float).reshape(-1)
    eta_bar = np.asarray(eta_bar, dtype=float).reshape(-1)
    ell = cone.dim
    if A.shape != (ell, ell) or q.shape[0] != ell:
        raise ValueError("map dimensions must match the cone")
    cone.validate()
    if cone.interior_margin(eta) < 1e-9:
        raise ConeError("eta is not strictly interior to the cone")
    dual = cone.dual()
    if dual.interior_margin(eta_bar) < 1e-9:
        raise ConeError("eta_bar is not strictly interior to the dual cone")

    n = ell + 1
    layout = VariableLayout(blocks=(("alpha", 0, 1), ("x", 1, n)), m=n, n=n)
    c0 = FacetList(n)
    _alpha_cone_rows(c0, layout, B=cone.inequality_rows,
                     dual_rows=dual.inequality_rows, A=A, q=q,
                     eta=eta, eta_bar=eta_bar)
    # the paired quadratics +-<x, Ax + alpha q> enforcing orthogonality
    Qx = np.zeros((n, n))
    Qx[1:, 1:] = 0.5 * (A + A.T)
    Qx[0, 1:] += 0.5 * q
    Qx[1:, 0] += 0.5 * q
    pf = [QuadraticFunction(gamma=0.0, q=np.zeros(n), Q=Qx),
          QuadraticFunction(gamma=0.0, q=np.zeros(n), Q=-Qx)]
    objective = np.zeros(n)
    objective[0] = 1.0
    bundle = FormulationBundle(
        kind="cp_alpha", layout=layout, c0=c0, pf=pf,
        objective=objective, recovery="divide_by_alpha",
        cone=cone, cp_map=A, cp_shift=q, eta=eta, eta_bar=eta_bar)
    bundle.check_compact()
    return bundle


# ---------------------------------------------------------------------------
# recovery


@dataclass
class RecoveryResult:
    ok: bool
    reason: str
    solution: LcpSolution | None
    verified: bool


def verify_cp(cone: PolyhedralCone, x, s, tol: float = 1e-7) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    s = np.asarray(s, dtype=float).reshape(-1)
    if cone.interior_margin(x) < -tol:
        return False
    G = _normalize_rows(cone.generator_rows)
    if G.shape[0] and (G @ s).min() < -tol:
        return False
    return float(x @ s) <= tol


def recover(point, bundle: FormulationBundle, tol: float = 1e-6) -> RecoveryResult:
    """Map a relaxation point back to a complementarity solution.

    strip_z drops the relaxed 0-1 block; divide_by_alpha rescales by the
    homogenization coordinate and fails cleanly when it is too small to
    certify anything.
    """
    v = np.asarray(point, dtype=float).reshape(-1)
    if v.shape[0] != bundle.n:
        raise ValueError("point dimension mismatch")
    if bundle.recovery == "strip_z":
        x = v[list(bundle.layout.block("x"))]
        s = bundle.instance.slack(x)
        sol = LcpSolution(x=x, s=s, pattern=_side_pattern(x, s))
        return RecoveryResult(True, "", sol,
                              verify_solution(bundle.instance, x, tol))
    if bundle.recovery != "divide_by_alpha":
        raise ValueError(f"unknown recovery rule {bundle.recovery!r}")
    alpha = v[bundle.layout.index("alpha")]
    if alpha <= tol:
        return RecoveryResult(False, "alpha_too_small", None, False)
    x = v[list(bundle.layout.block("x"))] / alpha
    if bundle.kind == "cp_alpha":
        s = bundle.cp_map @ x + bundle.cp_shift
        sol = LcpSolution(x=x, s=s, pattern=_side_pattern(x, s))
        return RecoveryResult(True, "", sol, verify_cp(bundle.cone, x, s, tol))
    s = bundle.instance.slack(x)
    sol = LcpSolution(x=x, s=s, pattern=_side_pattern(x, s))
    return RecoveryResult(True, "", sol,
                          verify_solution(bundle.instance, x, tol))


def _side_pattern(x, s) -> tuple:
    return tuple(bool(si <= xi) for xi, si in zip(x, s))
