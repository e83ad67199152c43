"""Exact rational arithmetic solve path."""

from fractions import Fraction

import numpy as np
import pytest

from screlax.lp import LinearProgram, LpStatus, solve_lp
from screlax.rational import (fraction_matrix, fraction_vector, solve_exact,
                              to_fraction)


def test_to_fraction_conversions():
    assert to_fraction(Fraction(2, 7)) == Fraction(2, 7)
    assert to_fraction(0.5) == Fraction(1, 2)  # exact binary float
    assert to_fraction(3) == Fraction(3)
    assert to_fraction(np.float64(0.25)) == Fraction(1, 4)
    assert fraction_vector([1, 0.5]) == [Fraction(1), Fraction(1, 2)]
    assert fraction_matrix([[1, 2]]) == [[Fraction(1), Fraction(2)]]


def test_exact_optimal_value_is_a_fraction():
    # min x+y, x+y >= 1/3, x,y >= 0 -> exactly 1/3 [DERIVED]
    lp = LinearProgram(c=[1, 1],
                       a_ub=[[-1, -1]], b_ub=[Fraction(-1, 3)],
                       lb=[0, 0], exact=True)
    res = solve_exact(lp)
    assert res.status == LpStatus.OPTIMAL
    assert isinstance(res.value, Fraction)
    assert res.value == Fraction(1, 3)
    assert sum(res.x) == Fraction(1, 3)


def test_exact_dispatch_through_solve_lp():
    lp = LinearProgram(c=[Fraction(1)], a_ub=[[Fraction(1)]],
                       b_ub=[Fraction(5, 2)], lb=[Fraction(0)],
                       maximize=True, exact=True)
    res = solve_lp(lp)
    assert res.value == Fraction(5, 2)
    assert res.x[0] == Fraction(5, 2)


def test_exact_equality_and_bounds():
    # min 3x + y with x + 2y = 1, 0 <= x <= 1/4, y >= 0
    # at x = 0: y = 1/2, value 1/2; raising x only increases cost [DERIVED]
    lp = LinearProgram(c=[3, 1], a_eq=[[1, 2]], b_eq=[1],
                       lb=[0, 0], ub=[Fraction(1, 4), None], exact=True)
    res = solve_exact(lp)
    assert res.status == LpStatus.OPTIMAL
    assert res.value == Fraction(1, 2)
    assert res.x[0] == 0 and res.x[1] == Fraction(1, 2)


def test_exact_infeasible_certificate_is_exact():
    lp = LinearProgram(c=[0, 0], a_ub=[[1, 1], [-1, -1]],
                       b_ub=[1, -2], lb=[None, None], exact=True)
    res = solve_exact(lp)
    assert res.status == LpStatus.INFEASIBLE
    # combined rows: the two a_ub rows; certificate kills them exactly
    y = res.farkas
    comb = np.array([[1, 1], [-1, -1]], dtype=object)
    act = [sum(y[i] * comb[i][j] for i in range(2)) for j in range(2)]
    assert act == [Fraction(0), Fraction(0)]
    assert y[0] * 1 + y[1] * (-2) < 0


def test_exact_unbounded():
    lp = LinearProgram(c=[1], lb=[0], maximize=True, exact=True)
    res = solve_exact(lp)
    assert res.status == LpStatus.UNBOUNDED


def test_float_solve_agrees_with_exact():
    rng = np.random.default_rng(9)
    for _ in range(6):
        n, p = 3, 4
        A = rng.integers(-3, 4, size=(p, n))
        b = rng.integers(1, 5, size=p)
        c = rng.integers(-3, 4, size=n)
        fl = LinearProgram(c=c.astype(float), a_ub=A.astype(float),
                           b_ub=b.astype(float), lb=np.zeros(n),
                           ub=np.full(n, 10.0), maximize=True)
        ex = LinearProgram(c=list(c), a_ub=[list(r) for r in A],
                           b_ub=list(b), lb=[0] * n, ub=[10] * n,
                           maximize=True, exact=True)
        rf = solve_lp(fl)
        re = solve_exact(ex)
        assert rf.status == re.status == LpStatus.OPTIMAL
        assert rf.value == pytest.approx(float(re.value), abs=1e-9)
