"""Formulation builders: base polytopes, quadratic families, cones, recovery."""

import numpy as np
import pytest

from screlax.geometry import FacetList
from screlax.instance import LcpInstance, enumerate_solutions, random_instance
from screlax.formulations import (ConeError, FormulationBundle, PolyhedralCone,
                                  VariableLayout, build_bigm, build_cp_alpha,
                                  build_lcp_alpha, build_mip_alpha,
                                  default_eta, default_eta_bar, recover,
                                  verify_cp)

INST1 = LcpInstance(M=np.array([[1.0]]), q=np.array([-1.0]))


def test_layout_validation_and_lookup():
    lay = VariableLayout(blocks=(("alpha", 0, 1), ("x", 1, 3), ("z", 3, 5)),
                         m=3, n=5)
    assert list(lay.block("x")) == [1, 2]
    assert lay.index("z", 1) == 4
    assert list(lay.binary_indices()) == [3, 4]
    assert lay.has_block("alpha") and not lay.has_block("s")
    with pytest.raises(IndexError):
        lay.index("x", 2)
    with pytest.raises(KeyError):
        lay.block("w")
    with pytest.raises(ValueError):
        VariableLayout(blocks=(("a", 0, 2), ("b", 1, 3)), m=0, n=3)


def test_mip_alpha_shape():
    b = build_mip_alpha(INST1)
    # 6*ell + 2 inequality rows, no equalities [TRIVIAL: row census]
    assert b.c0.n_ineq == 8 and b.c0.n_eq == 0
    assert b.layout.m == 2 and b.layout.n == 3
    assert list(b.layout.block("alpha")) == [0]
    assert b.objective.tolist() == [1.0, 0.0, 0.0]
    assert len(b.pf) == 2  # forward and reversed 0-1 quadratic per pair


def test_bigm_shape():
    b = build_bigm(INST1, r=4.0)
    assert b.c0.n_ineq == 6 and b.layout.n == 2 and b.layout.m == 1
    assert b.r == 4.0
    with pytest.raises(ValueError):
        build_bigm(INST1, r=0.0)


def test_lcp_alpha_shapes():
    ex = build_lcp_alpha(INST1, explicit_s=True)
    assert ex.variant == "explicit"
    assert ex.c0.n_eq == 1 and ex.c0.n_ineq == 4
    assert ex.layout.m == ex.layout.n == 3  # no relaxed 0-1 block
    im = build_lcp_alpha(INST1, explicit_s=False)
    assert im.variant == "implicit"
    assert im.layout.n == 2 and im.c0.n_ineq == 4
    assert len(im.pf) == 1


def test_zero_vector_feasible_in_scaled_forms():
    # the all-zero point satisfies every scaled base polytope [PAPER: the
    # homogenized formulation admits the origin by construction]
    for inst in (INST1, random_instance(2, seed=3), random_instance(3, seed=5)):
        for b in (build_mip_alpha(inst),
                  build_lcp_alpha(inst, explicit_s=True),
                  build_lcp_alpha(inst, explicit_s=False)):
            assert b.c0.contains(np.zeros(b.n), tol=1e-12)


def test_base_polytopes_compact():
    for b in (build_mip_alpha(INST1), build_bigm(INST1, r=4.0),
              build_lcp_alpha(INST1, explicit_s=True)):
        for j in range(b.n):
            d = np.zeros(b.n)
            for sign in (1.0, -1.0):
                d[j] = sign
                assert np.isfinite(b.c0.support(d))


def test_check_compact_rejects_unbounded():
    fl = FacetList(1)
    fl.add(np.array([-1.0]), 0.0)  # x >= 0 only: unbounded above
    layout = VariableLayout(blocks=(("x", 0, 1),), m=1, n=1)
    b = FormulationBundle(kind="toy", layout=layout, c0=fl, pf=[],
                          objective=np.zeros(1), recovery="strip_z")
    with pytest.raises(ValueError):
        b.check_compact()


def test_hull_alpha_values():
    # max alpha over the feasible hull: 1 for the 0-1 encoding, 1/2 for the
    # homogenized direct encoding where the normalization row halves it
    # [DERIVED: s=0 pattern forces x = alpha, so x + s + alpha = 2 alpha <= 1]
    mip = build_mip_alpha(INST1)
    assert mip.oracle_support(mip.objective) == pytest.approx(1.0, abs=1e-9)
    for variant in (True, False):
        b = build_lcp_alpha(INST1, explicit_s=variant)
        assert b.oracle_support(b.objective) == pytest.approx(0.5, abs=1e-9)


def test_bigm_oracle_matches_enumeration():
    b = build_bigm(INST1, r=4.0)
    d = np.zeros(b.n)
    d[b.layout.index("x", 0)] = 1.0
    # single solution x=1 [DERIVED]
    assert b.oracle_support(d) == pytest.approx(1.0, abs=1e-9)


def test_oracle_pieces_count_and_patterns():
    inst = random_instance(2, seed=0)
    b = build_mip_alpha(inst)
    pieces = b.oracle_pieces()
    assert len(pieces) == 4
    assert sorted(p.pattern for p in pieces) == [
        (False, False), (False, True), (True, False), (True, True)]


def test_pf_vanishes_on_feasible_points():
    inst = random_instance(2, seed=1)
    for b in (build_mip_alpha(inst), build_bigm(inst, r=6.0),
              build_lcp_alpha(inst, explicit_s=False)):
        rng = np.random.default_rng(2)
        for _ in range(3):
            d = rng.normal(size=b.n)
            val, pt = b.oracle_support(d, return_point=True)
            assert pt is not None
            for qf in b.pf:
                assert abs(qf.value(pt)) <= 1e-7


def test_recover_mip_point():
    mip = build_mip_alpha(INST1)
    val, pt = mip.oracle_support(mip.objective, return_point=True)
    rec = recover(pt, mip)
    assert rec.ok and rec.verified
    assert rec.solution.x == pytest.approx([1.0], abs=1e-7)


def test_recover_alpha_too_small():
    b = build_lcp_alpha(INST1, explicit_s=True)
    rec = recover(np.zeros(b.n), b)
    assert not rec.ok and rec.reason == "alpha_too_small"


def test_recover_strip_z():
    b = build_bigm(INST1, r=4.0)
    pt = np.array([1.0, 1.0])  # (x, z) at the solution vertex
    rec = recover(pt, b)
    assert rec.ok and rec.verified


def test_cone_basics():
    orth = PolyhedralCone.orthant(2)
    assert orth.is_pointed() and orth.is_solid()
    assert orth.contains([1.0, 0.5]) and not orth.contains([-1.0, 0.0])
    dual = orth.dual()
    assert dual.contains([2.0, 3.0])
    doc = orth.to_dict()
    back = PolyhedralCone.from_dict(doc)
    assert np.array_equal(back.inequality_rows, orth.inequality_rows)


def test_cone_validation_failures():
    half = PolyhedralCone.from_generators([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    assert not half.is_pointed()
    with pytest.raises(ConeError):
        half.validate()
    ray = PolyhedralCone.from_generators([[1.0, 0.0]])
    assert not ray.is_solid()
    with pytest.raises(ConeError):
        PolyhedralCone(2)


def test_generator_inequality_round_trip():
    rng = np.random.default_rng(3)
    G = rng.uniform(-1.0, 1.0, size=(3, 3)) + 2.0 * np.eye(3)
    K = PolyhedralCone.from_generators(G)
    B = K.inequality_rows
    # every generator satisfies every derived facet row
    assert (B @ G.T).min() >= -1e-9
    K2 = PolyhedralCone.from_inequalities(B)
    G2 = K2.generator_rows
    for g in G2:
        assert K.contains(g, tol=1e-7)


def test_eta_defaults_are_interior():
    rng = np.random.default_rng(5)
    for seed in range(3):
        G = rng.uniform(-1.0, 1.0, size=(3, 3)) + 2.0 * np.eye(3)
        K = PolyhedralCone.from_generators(G)
        eta = default_eta(K)
        eta_bar = default_eta_bar(K)
        assert K.interior_margin(eta) > 1e-6
        assert K.dual().interior_margin(eta_bar) > 1e-6


def test_cp_alpha_orthant_matches_direct_encoding():
    # with the nonnegative orthant the cone form reproduces the direct
    # homogenized rows bit for bit [DERIVED: substitution]
    inst = random_instance(2, seed=1)
    cp = build_cp_alpha(PolyhedralCone.orthant(2), inst.M, inst.q,
                        np.ones(2), np.ones(2))
    lc = build_lcp_alpha(inst, explicit_s=False)
    assert len(cp.c0.ineq_a) == len(lc.c0.ineq_a)
    for a, b in zip(cp.c0.ineq_a, lc.c0.ineq_a):
        assert np.array_equal(a, b)
    assert np.array_equal(np.asarray(cp.c0.ineq_b), np.asarray(lc.c0.ineq_b))
    assert np.array_equal(cp.objective, lc.objective)


def test_cp_alpha_validation():
    orth = PolyhedralCone.orthant(2)
    with pytest.raises(ConeError):
        build_cp_alpha(orth, np.eye(2), np.zeros(2),
                       np.array([1.0, -1.0]), np.ones(2))
    with pytest.raises(ValueError):
        build_cp_alpha(orth, np.eye(3), np.zeros(3), np.ones(3), np.ones(3))


def test_cp_solvable_construction_recovers():
    # place a known solution on a facet of a random simplicial cone: x* a
    # generator, s* a facet normal vanishing on it, q = s* - A x*
    # [DERIVED: the pair is complementary by construction]
    rng = np.random.default_rng(4)
    G = rng.uniform(-1.0, 1.0, size=(3, 3)) + np.eye(3)
    K = PolyhedralCone.from_generators(G)
    xstar = G[0]
    sstar = next(b for b in K.inequality_rows if abs(b @ xstar) < 1e-9)
    A = rng.uniform(-1.0, 1.0, size=(3, 3))
    q = sstar - A @ xstar
    bundle = build_cp_alpha(K, A, q, default_eta(K), default_eta_bar(K))
    val, pt = bundle.oracle_support(bundle.objective, return_point=True)
    assert val > 1e-6
    rec = recover(pt, bundle)
    assert rec.ok and rec.verified
    assert verify_cp(K, rec.solution.x, rec.solution.s)


def test_bundle_to_dict_shape():
    b = build_lcp_alpha(INST1, explicit_s=True)
    doc = b.to_dict()
    assert doc["kind"] == "lcp_alpha" and doc["variant"] == "explicit"
    assert len(doc["rows"]["ineq"]) == b.c0.n_ineq
    assert len(doc["rows"]["eq"]) == 1
    assert doc["layout"]["n"] == 3
