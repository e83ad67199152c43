"""Successive relaxation operators: cuts, lifted bounds, cone stages, traces."""

import numpy as np
import pytest

from screlax.geometry import FacetList, QuadraticFunction
from screlax.instance import LcpInstance, random_instance
from screlax.formulations import (FormulationBundle, VariableLayout,
                                  build_bigm, build_mip_alpha)
from screlax.relaxation import (DirectionSet, HomogSizeError, SupportTable,
                                c0_support_table, cone_split_gap,
                                default_probes, homog_step, homogenize_row,
                                initial_stage, n_hat, n_hat_plus, p2_cuts,
                                run_hierarchy, stage_support, t0_generators)

INST1 = LcpInstance(M=np.array([[1.0]]), q=np.array([-1.0]))


def toy_bundle():
    """Unit interval with the complementarity quadratic v(1-v) pinned to 0."""
    fl = FacetList(1)
    fl.add(np.array([1.0]), 1.0)
    fl.add(np.array([-1.0]), 0.0)
    pf = [QuadraticFunction(0.0, np.array([-0.5]), np.array([[1.0]])),
          QuadraticFunction(0.0, np.array([0.5]), np.array([[-1.0]]))]
    layout = VariableLayout(blocks=(("z", 0, 1),), m=0, n=1)
    return FormulationBundle(kind="toy", layout=layout, c0=fl, pf=pf,
                             objective=np.array([1.0]), recovery="strip_z")


def test_direction_set_basics():
    d0 = DirectionSet.coordinate(2)
    assert len(d0) == 4  # plus/minus each axis
    dup = DirectionSet([np.array([1.0, 0.0]), np.array([2.0, 0.0])])
    assert len(dup) == 1  # normalized then deduplicated
    u = d0.union(dup)
    assert len(u) == 4
    with pytest.raises(ValueError):
        DirectionSet([])
    with pytest.raises(ValueError):
        DirectionSet([np.array([1.0]), np.array([1.0, 0.0])])
    with pytest.raises(ValueError):
        DirectionSet([np.zeros(2)])


def test_direction_set_minimal_covers_binary_block():
    mip = build_mip_alpha(random_instance(2, seed=0))
    d0 = DirectionSet.minimal(mip.layout)
    # one pair per relaxed 0-1 coordinate [TRIVIAL]
    assert len(d0) == 4
    assert d0.covers_binary_block(mip.layout)
    assert not DirectionSet.coordinate(mip.n).covers_binary_block(mip.layout) \
        or len(DirectionSet.coordinate(mip.n)) >= 4
    with pytest.raises(ValueError):
        DirectionSet.minimal(VariableLayout(blocks=(("x", 0, 1),), m=1, n=1))


def test_support_table():
    t = SupportTable()
    d = np.array([1.0, 0.0])
    t.set(d, 2.5)
    assert t.has(d) and not t.has(np.array([0.0, 1.0]))
    assert t.get(np.array([1.0, 0.0])) == 2.5
    assert len(t) == 1
    with pytest.raises(KeyError):
        t.get(np.array([0.0, 1.0]))
    t2 = SupportTable.from_function(DirectionSet.coordinate(1), lambda d: 7.0)
    assert t2.get(np.array([-1.0])) == 7.0


def test_toy_lifted_bounds_reach_interval():
    toy = toy_bundle()
    d0 = DirectionSet.coordinate(1)
    dbar = DirectionSet.default_dbar(toy)
    c0t = c0_support_table(toy, d0)
    # C0 = [0, 1]: supports 1 and 0 [TRIVIAL]
    assert c0t.get(np.array([1.0])) == pytest.approx(1.0, abs=1e-9)
    assert c0t.get(np.array([-1.0])) == pytest.approx(0.0, abs=1e-9)
    ck = c0_support_table(toy, dbar)
    # hull of {0, 1} still spans [0, 1]: one round cannot shrink the toy
    # interval, so both lifted bounds stay at 1 [DERIVED]
    assert n_hat(toy, ck, d0, dbar, np.array([1.0])) == pytest.approx(1.0, abs=1e-8)
    assert n_hat_plus(toy, ck, d0, dbar, np.array([1.0])) == pytest.approx(1.0, abs=1e-8)


def test_t0_generators_frozen():
    toy = toy_bundle()
    d0 = DirectionSet.coordinate(1)
    c0t = c0_support_table(toy, d0)
    gens = [g.tolist() for g in t0_generators(c0t, d0)]
    # homogenized rows (support, -d): [[1,-1],[0,1]] [DERIVED]
    assert gens == [[1.0, -1.0], [0.0, 1.0]]


def test_p2_cuts_match_product_form():
    toy = toy_bundle()
    d0 = DirectionSet.coordinate(1)
    dbar = DirectionSet.default_dbar(toy)
    c0t = c0_support_table(toy, d0)
    ck = c0_support_table(toy, dbar)
    cuts = p2_cuts(c0t, ck, d0, dbar)
    assert len(cuts) == len(d0) * len(dbar)
    rng = np.random.default_rng(0)
    pairs = [(d, db) for d in d0 for db in dbar]
    for qf, (d, db) in zip(cuts, pairs):
        for _ in range(10):
            x = rng.normal(size=1)
            lhs = qf.value(x)
            rhs = -(c0t.get(d) - d @ x) * (ck.get(db) - db @ x)
            assert abs(lhs - rhs) < 1e-10


@pytest.mark.parametrize("mode", ["ssilp", "ssdp", "homog_lp", "homog_sdp"])
def test_all_modes_reach_hull_single_pair(mode):
    mip = build_mip_alpha(INST1)
    probe = [np.array([-1.0, 1.0, 0.0]), np.array([0.0, 1.0, -1.0]),
             np.array([1.0, 0.0, 0.0]), np.array([0.0, -1.0, 0.0])]
    kwargs = {}
    if mode.startswith("homog"):
        kwargs["d0"] = DirectionSet.minimal(mip.layout)
    tr = run_hierarchy(mip, mode, probe_dirs=probe, max_iter=3, **kwargs)
    assert tr.stop_reason == "hull_reached"
    # one complementary pair closes in one round [DERIVED]
    assert tr.iterations[-1]["k"] <= 1


def test_trace_monotone_and_above_oracle():
    mip = build_mip_alpha(INST1)
    probe = [np.array([-1.0, 1.0, 0.0]), np.array([0.0, 1.0, -1.0]),
             np.array([1.0, 0.0, 0.0])]
    tr = run_hierarchy(mip, "ssilp", probe_dirs=probe, max_iter=3)
    for i in range(1, len(tr.iterations)):
        prev = tr.iterations[i - 1]["supports"]
        cur = tr.iterations[i]["supports"]
        for key in cur:
            assert cur[key] <= prev[key] + 1e-7
            assert cur[key] >= tr.oracle[key] - 1e-7


def test_trace_serialization():
    mip = build_mip_alpha(INST1)
    probe = [np.array([1.0, 0.0, 0.0])]
    tr = run_hierarchy(mip, "ssilp", probe_dirs=probe, max_iter=2)
    d = tr.to_dict()
    assert set(d) >= {"mode", "iterations", "stop_reason", "wall_time",
                      "oracle", "cap_hit"}
    assert all(set(it) == {"k", "supports"} for it in d["iterations"])
    rows = tr.to_csv_rows()
    assert tuple(rows[0]) == ("k", "dir_id", "support")
    assert len(rows) == 1 + len(tr.iterations) * len(probe)
    assert tr.iterations_run == tr.iterations[-1]["k"]
    assert tr.supports_at(0) == tr.iterations[0]["supports"]


def test_stage_nesting_on_probe_fan():
    mip = build_mip_alpha(INST1)
    st0 = initial_stage(mip, DirectionSet.minimal(mip.layout))
    st1 = homog_step(st0)
    fan = [np.array([-1.0, 1.0, 0.0]), np.array([0.0, 1.0, -1.0]),
           np.array([1.0, 1.0, 1.0]) / np.sqrt(3)]
    v0, _ = stage_support(st0, fan)
    v1, _ = stage_support(st1, fan)
    for a, b in zip(v1, v0):
        assert a <= b + 1e-9  # each level is contained in the last


def test_cone_split_decomposition():
    # boundary points of the next level decompose across the two pattern
    # pieces with nonnegative weights [PAPER: induction step of the
    # convergence argument]
    inst = INST1
    mip = build_mip_alpha(inst)
    st0 = initial_stage(mip, DirectionSet.minimal(mip.layout))
    st1 = homog_step(st0)
    probe = [np.array([-1.0, 1.0, 0.0]), np.array([0.0, 1.0, -1.0]),
             np.array([1.0, 0.0, 0.0])]
    vals, pts, _ = stage_support(st1, probe, return_points=True)
    lay = mip.layout
    x0 = lay.index("x", 0)
    s_row = np.zeros(mip.n)
    s_row[lay.index("alpha", 0)] = inst.q[0]
    s_row[x0] = inst.M[0, 0]
    row_a = homogenize_row(np.eye(mip.n)[x0])
    row_b = homogenize_row(s_row)
    checked = 0
    for p in pts:
        if p is None:
            continue
        w = np.concatenate([[1.0], p])
        assert cone_split_gap(st0, w, row_a, row_b) <= 1e-7
        checked += 1
    assert checked >= 2
    with pytest.raises(ValueError):
        cone_split_gap(st0, np.zeros(mip.n), row_a, row_b)


def test_bigm_homog_reaches_hull():
    bigm = build_bigm(INST1, r=4.0)
    pb = [np.array([1.0, 0.0]), np.array([1.0, -1.0]) / np.sqrt(2),
          np.array([-1.0, 0.0])]
    tr = run_hierarchy(bigm, "homog_lp", d0=DirectionSet.minimal(bigm.layout),
                       probe_dirs=pb, max_iter=3)
    assert tr.stop_reason == "hull_reached"
    assert tr.iterations[-1]["k"] <= 1


def test_two_pair_homog_gap_closes():
    inst = LcpInstance(M=np.array([[2.0, 1.0], [1.0, 3.0]]),
                       q=np.array([-1.0, -2.0]))
    mip = build_mip_alpha(inst)
    probes = default_probes(mip, n_random=8, seed=1)
    tr = run_hierarchy(mip, "homog_lp", d0=DirectionSet.minimal(mip.layout),
                       probe_dirs=probes, max_iter=2)
    assert tr.stop_reason == "hull_reached"
    assert tr.iterations[-1]["k"] <= 2
    gap0 = max(tr.iterations[0]["supports"][k] - tr.oracle[k]
               for k in tr.oracle)
    gap_end = max(tr.iterations[-1]["supports"][k] - tr.oracle[k]
                  for k in tr.oracle)
    assert gap_end <= 1e-6 and gap_end <= gap0 + 1e-12


def test_size_cap_switches_to_discretized_fallback():
    mip = build_mip_alpha(random_instance(3, seed=7))
    probes = default_probes(mip, n_random=4, seed=2)
    tr = run_hierarchy(mip, "homog_lp", d0=DirectionSet.minimal(mip.layout),
                       probe_dirs=probes, max_iter=2, max_nonzeros=500)
    assert tr.cap_hit
    assert [it["k"] for it in tr.iterations][-1] >= 1  # still iterates
    for it in tr.iterations:
        for key, v in it["supports"].items():
            assert v >= tr.oracle[key] - 1e-7  # fallback never cuts the hull


def test_homog_step_size_guard():
    mip = build_mip_alpha(random_instance(3, seed=7))
    st0 = initial_stage(mip, DirectionSet.minimal(mip.layout),
                        max_nonzeros=100)
    with pytest.raises(HomogSizeError):
        homog_step(st0)


def test_initial_stage_needs_binary_block():
    inst = INST1
    from screlax.formulations import build_lcp_alpha
    b = build_lcp_alpha(inst, explicit_s=True)
    with pytest.raises(ValueError):
        initial_stage(b, DirectionSet.coordinate(b.n))


def test_homogenize_row():
    r = homogenize_row(np.array([2.0, -1.0]))
    assert r.tolist() == [0.0, 2.0, -1.0]
