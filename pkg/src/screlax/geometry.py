"""Shared polyhedral helpers: facet lists and quadratic cut functions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lp import LinearProgram, LpStatus, solve_lp

_DEDUP_QUANTUM = 1e-9


def _norm_key(a: np.ndarray, b: float):
    q = np.round(np.concatenate([a, [b]]) / _DEDUP_QUANTUM).astype(np.int64)
    return q.tobytes()


@dataclass
class FacetList:
    """Polytope described by inequality rows a.v <= b plus tagged equalities.

    Rows are normalized so the largest inequality coefficient has magnitude
    one, and duplicates within 1e-9 are dropped on insertion. Equality rows
    carry a tag naming why the variable got fixed.
    """

    dim: int
    ineq_a: list = field(default_factory=list)
    ineq_b: list = field(default_factory=list)
    eq_a: list = field(default_factory=list)
    eq_b: list = field(default_factory=list)
    eq_tags: list = field(default_factory=list)
    _seen: set = field(default_factory=set, repr=False)

    def copy(self) -> "FacetList":
        out = FacetList(self.dim)
        out.ineq_a = [a.copy() for a in self.ineq_a]
        out.ineq_b = list(self.ineq_b)
        out.eq_a = [a.copy() for a in self.eq_a]
        out.eq_b = list(self.eq_b)
        out.eq_tags = list(self.eq_tags)
        out._seen = set(self._seen)
        return out

    @property
    def n_ineq(self) -> int:
        return len(self.ineq_a)

    @property
    def n_eq(self) -> int:
        return len(self.eq_a)

    def add(self, a, b: float) -> bool:
        """Insert a.v <= b; returns False when it duplicates a stored row."""
        a = np.asarray(a, dtype=float).reshape(-1)
        if a.shape[0] != self.dim:
            raise ValueError("row width mismatch")
        scale = np.abs(a).max(initial=0.0)
        if scale == 0.0:
            if b < -1e-12:
                raise ValueError("added the impossible row 0 <= negative")
            return False
        a = a / scale
        b = float(b) / scale
        key = _norm_key(a, b)
        if key in self._seen:
            return False
        self._seen.add(key)
        self.ineq_a.append(a)
        self.ineq_b.append(b)
        return True

    def add_eq(self, a, b: float, tag: str = "") -> None:
        a = np.asarray(a, dtype=float).reshape(-1)
        scale = np.abs(a).max(initial=0.0)
        if scale == 0.0:
            raise ValueError("zero equality row")
        self.eq_a.append(a / scale)
        self.eq_b.append(float(b) / scale)
        self.eq_tags.append(tag)

    def matrices(self):
        a_ub = np.vstack(self.ineq_a) if self.ineq_a else np.zeros((0, self.dim))
        b_ub = np.array(self.ineq_b)
        a_eq = np.vstack(self.eq_a) if self.eq_a else None
        b_eq = np.array(self.eq_b) if self.eq_a else None
        return a_ub, b_ub, a_eq, b_eq

    def as_lp(self, c, maximize: bool = True, exact: bool = False) -> LinearProgram:
        a_ub, b_ub, a_eq, b_eq = self.matrices()
        return LinearProgram(c=c, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=b_eq,
                             maximize=maximize, exact=exact)

    def support(self, d, backend: str | None = None) -> float:
        """max d.v over the polytope; -inf when empty, +inf when unbounded."""
        res = solve_lp(self.as_lp(np.asarray(d, dtype=float)), backend=backend)
        if res.status == LpStatus.INFEASIBLE:
            return -np.inf
        if res.status == LpStatus.UNBOUNDED:
            return np.inf
        return res.value

    def contains(self, v, tol: float = 1e-7) -> bool:
        v = np.asarray(v, dtype=float).reshape(-1)
        for a, b in zip(self.ineq_a, self.ineq_b):
            if a @ v > b + tol:
                return False
        for a, b in zip(self.eq_a, self.eq_b):
            if abs(a @ v - b) > tol:
                return False
        return True

    def offset_form(self) -> np.ndarray:
        """Inequalities as rows (u0, u) meaning u0 + u.v >= 0."""
        rows = np.zeros((self.n_ineq, self.dim + 1))
        for i, (a, b) in enumerate(zip(self.ineq_a, self.ineq_b)):
            rows[i, 0] = b
            rows[i, 1:] = -a
        return rows

    @classmethod
    def from_offset_form(cls, dim: int, rows) -> "FacetList":
        out = cls(dim)
        for row in np.asarray(rows, dtype=float):
            out.add(-row[1:], row[0])
        return out


@dataclass(frozen=True)
class QuadraticFunction:
    """q(v) = gamma + 2 q.v + v.Q v with Q symmetric."""

    gamma: float
    q: np.ndarray
    Q: np.ndarray

    def value(self, v) -> float:
        v = np.asarray(v, dtype=float).reshape(-1)
        return float(self.gamma + 2.0 * (self.q @ v) + v @ self.Q @ v)

    @classmethod
    def product_cut(cls, alpha1: float, d1, alpha2: float, d2) -> "QuadraticFunction":
        """Cut q(v) <= 0 from two valid bounds d1.v <= alpha1, d2.v <= alpha2.

        The product (alpha1 - d1.v)(alpha2 - d2.v) is nonnegative on any set
        where both bounds hold; negating and symmetrizing gives the stored
        quadratic.
        """
        d1 = np.asarray(d1, dtype=float).reshape(-1)
        d2 = np.asarray(d2, dtype=float).reshape(-1)
        Q = -0.5 * (np.outer(d1, d2) + np.outer(d2, d1))
        q = 0.5 * (alpha1 * d2 + alpha2 * d1)
        gamma = -alpha1 * alpha2
        return cls(gamma=gamma, q=q, Q=Q)
