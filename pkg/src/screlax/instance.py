"""Linear complementarity problem instances and the enumeration oracle.

An instance is a square matrix M and vector q of size ell. A solution is
x >= 0 with s = M x + q >= 0 and x.s = 0. The solution set splits into at
most 2^ell pieces, one per choice of which side of each complementary pair
is pinned to zero; each piece is a polytope, so exhaustive enumeration
gives exact ground truth for testing relaxations. That cost is exponential
in ell, which is the whole reason the relaxation machinery exists.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .geometry import FacetList
from .lp import LpStatus, solve_lp


@dataclass
class LcpInstance:
    M: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.M = np.asarray(self.M, dtype=float)
        self.q = np.asarray(self.q, dtype=float).reshape(-1)
        if self.M.ndim != 2 or self.M.shape[0] != self.M.shape[1]:
            raise ValueError("M must be square")
        if self.q.shape[0] != self.M.shape[0]:
            raise ValueError("q length must match M")
        if not np.all(np.isfinite(self.M)):
            raise ValueError("M has a non-finite entry")
        if not np.all(np.isfinite(self.q)):
            raise ValueError("q has a non-finite entry")

    @property
    def ell(self) -> int:
        return self.M.shape[0]

    def slack(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        return self.M @ x + self.q

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "M": [[float(v) for v in row] for row in self.M],
            "q": [float(v) for v in self.q],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LcpInstance":
        for key in ("M", "q"):
            if key not in doc:
                raise ValueError(f"instance document lacks field {key!r}")
        inst = cls(M=np.array(doc["M"], dtype=float),
                   q=np.array(doc["q"], dtype=float))
        if "ell" in doc and int(doc["ell"]) != inst.ell:
            raise ValueError(
                f"field 'ell'={doc['ell']} disagrees with M size {inst.ell}")
        return inst


def save_instance(inst: LcpInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_instance(path) -> LcpInstance:
    with open(path) as fh:
        return LcpInstance.from_dict(json.load(fh))


def random_instance(ell: int, seed: int = 0, kind: str = "general") -> LcpInstance:
    """Deterministic random instance; symmetric_psd uses M = G G.T."""
    if ell < 1:
        raise ValueError("ell must be at least 1")
    rng = np.random.default_rng(seed)
    if kind == "general":
        M = rng.uniform(-1.0, 1.0, size=(ell, ell))
    elif kind == "symmetric_psd":
        G = rng.uniform(-1.0, 1.0, size=(ell, ell))
        M = G @ G.T
    else:
        raise ValueError(f"unknown kind {kind!r}")
    q = rng.uniform(-1.0, 1.0, size=ell)
    return LcpInstance(M=M, q=q)


def default_bound(inst: LcpInstance) -> float:
    """Box size heuristic making every enumerated piece bounded."""
    mq = np.abs(inst.q).max(initial=0.0)
    mM = np.abs(inst.M).max(initial=0.0)
    return 10.0 * (1.0 + mq) * (1.0 + mM)


@dataclass
class LcpSolution:
    x: np.ndarray
    s: np.ndarray
    pattern: tuple

    def complementarity_violation(self) -> float:
        return float(np.minimum(self.x, self.s).max(initial=0.0))

    def to_dict(self) -> dict:
        return {
            "pattern": [1 if b else 0 for b in self.pattern],
            "x": [float(v) for v in self.x],
            "s": [float(v) for v in self.s],
        }


class PatternPolytope:
    """One enumeration piece: a facet list plus the pattern that induced it.

    pattern[i] True pins s_i = 0 and leaves x_i free, False pins x_i = 0.
    """

    def __init__(self, pattern, facets: FacetList):
        self.pattern = tuple(bool(b) for b in pattern)
        self.facets = facets

    @classmethod
    def from_instance(cls, inst: LcpInstance, pattern,
                      bound: float | None = None) -> "PatternPolytope":
        ell = inst.ell
        if len(pattern) != ell:
            raise ValueError("pattern length mismatch")
        box = default_bound(inst) if bound is None else float(bound)
        facets = FacetList(ell)
        eye = np.eye(ell)
        for i in range(ell):
            facets.add(-eye[i], 0.0)  # x >= 0
        for i in range(ell):
            facets.add(-inst.M[i], inst.q[i])  # Mx + q >= 0
        for i in range(ell):
            facets.add(eye[i], box)
        for i, free in enumerate(pattern):
            if free:
                facets.add_eq(inst.M[i], -inst.q[i], tag=f"s:{i}")
            else:
                facets.add_eq(eye[i], 0.0, tag=f"x:{i}")
        return cls(pattern, facets)

    def find_point(self, backend: str | None = None) -> np.ndarray | None:
        res = solve_lp(self.facets.as_lp(np.zeros(self.facets.dim)),
                       backend=backend)
        return res.x if res.status == LpStatus.OPTIMAL else None

    def support(self, d, backend: str | None = None) -> float:
        return self.facets.support(d, backend=backend)


def _all_patterns(ell: int):
    return itertools.product((False, True), repeat=ell)


def enumerate_solutions(inst: LcpInstance, bound: float | None = None,
                        backend: str | None = None) -> list[LcpSolution]:
    """One witness point per nonempty piece, in pattern order."""
    out = []
    for pat in _all_patterns(inst.ell):
        piece = PatternPolytope.from_instance(inst, pat, bound)
        x = piece.find_point(backend=backend)
        if x is not None:
            x = np.maximum(x, 0.0)
            out.append(LcpSolution(x=x, s=inst.slack(x), pattern=pat))
    return out


def feasible_patterns(inst: LcpInstance, bound: float | None = None,
                      backend: str | None = None) -> list[tuple]:
    return [sol.pattern for sol in enumerate_solutions(inst, bound, backend)]


def verify_solution(inst: LcpInstance, x, tol: float = 1e-7) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    s = inst.slack(x)
    if x.min(initial=0.0) < -tol or s.min(initial=0.0) < -tol:
        return False
    return float(x @ s) <= tol


def hull_support(inst: LcpInstance, bundle, d, backend: str | None = None) -> float:
    """max d.v over the hull of the bundle's feasible points.

    Computed piecewise over the bundle's pattern polytopes; -inf when every
    piece is empty. The instance argument guards against mixing data up.
    """
    if bundle.instance is not None and bundle.instance is not inst:
        if (bundle.instance.M.shape != inst.M.shape
                or not np.array_equal(bundle.instance.M, inst.M)
                or not np.array_equal(bundle.instance.q, inst.q)):
            raise ValueError("bundle was built from a different instance")
    return bundle.oracle_support(d, backend=backend)
