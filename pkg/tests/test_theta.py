from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterfold.poly import LaurentExpr
from clusterfold.reference import x_monomial
from clusterfold.scattering import (
    A_RING,
    GenericPath,
    NonGenericError,
    complete_rank2,
    initial_diagram,
    path_product,
)
from clusterfold.theta import (
    GENERIC_Q,
    BrokenLine,
    enumerate_broken_lines,
    markov_theta,
    structure_constant,
    theta_expand,
    theta_via_path_product,
)


def z(*e):
    return LaurentExpr.monomial(e)


def low_degree(f, k):
    return LaurentExpr({e: c for e, c in f.items() if sum(e[2:]) <= k}, f.nvars)


@pytest.fixture(scope="module")
def d_a2(a2):
    return complete_rank2(initial_diagram(a2, 8), 8)


@pytest.fixture(scope="module")
def d_b2(b2):
    return complete_rank2(initial_diagram(b2, 8), 8)


def test_markov_theta_lines(markov):
    th = markov_theta(markov, 0, 6)
    assert len(th.lines) == 3
    want = z(1, -1, 0, 0, 0, 0) * (LaurentExpr.one(6) + x_monomial(markov, (0, 1, 0)) + x_monomial(markov, (1, 1, 0)))
    assert th.poly == want
    assert th.is_positive()


@pytest.mark.parametrize("i", [0, 1, 2])
def test_markov_thetas_have_three_terms(markov, i):
    th = markov_theta(markov, i, 6)
    assert len(th.poly) == 3 and th.poly.is_positive()


def test_chamber_exponent_is_straight(d_a2):
    th = theta_expand(d_a2, (1, 2), GENERIC_Q)
    assert th.poly == z(1, 2, 0, 0)
    assert len(th.lines) == 1 and not th.lines[0].bends


def test_frozen_direction_is_monomial(d_a2):
    # (0, n) exponents: broken lines never bend
    th = theta_expand(d_a2, (0, 0, 1, 1), GENERIC_Q)
    assert th.poly == z(0, 0, 1, 1)


def test_theta_zero_is_one(d_a2):
    assert theta_expand(d_a2, (0, 0), GENERIC_Q).poly == LaurentExpr.one(4)


def test_a2_minus_f1(d_a2):
    th = theta_expand(d_a2, (-1, 0), GENERIC_Q)
    assert th.poly == z(-1, 0, 0, 0) + z(-1, 1, 1, 0)
    assert len(th.lines) == 2


def test_a2_minus_f1_by_path_product(d_a2):
    # from a chamber containing -f1 the theta is a monomial; transport to Q
    start = (Fraction(-1009, 997), Fraction(13, 991))
    assert theta_expand(d_a2, (-1, 0), start).poly == z(-1, 0, 0, 0)
    p = path_product(d_a2, GenericPath.through(d_a2, [start, GENERIC_Q]), A_RING)
    assert theta_via_path_product(p, (-1, 0)) == theta_expand(d_a2, (-1, 0), GENERIC_Q).poly


def test_chamber_independence(d_a2):
    # endpoints in the same chamber give the same theta
    q2 = (Fraction(3001, 997), Fraction(17, 991))
    for p0 in ((-1, 0), (0, -1), (-1, -1), (2, -1)):
        assert theta_expand(d_a2, p0, GENERIC_Q).poly == theta_expand(d_a2, p0, q2).poly


@pytest.mark.parametrize("p0", [(-1, 0), (0, -1), (-1, -1), (1, -2), (-2, 1)])
def test_consistency_transport(d_a2, p0):
    # ϑ at Q' equals the path product from Q to Q' applied to ϑ at Q
    q2 = (Fraction(-1009, 997), Fraction(-2013, 991))
    th_q = theta_expand(d_a2, p0, GENERIC_Q).poly
    p = path_product(d_a2, GenericPath.through(d_a2, [GENERIC_Q, q2]), A_RING)
    # compare below the truncation residue of the inverse crossings
    assert low_degree(p.apply(th_q, 12), 4) == low_degree(theta_expand(d_a2, p0, q2).poly, 4)


@given(st.integers(-2, 2), st.integers(-2, 2))
def test_theta_positive_a2(a, b):
    from clusterfold.lattice_core import fixture_seed

    d = complete_rank2(initial_diagram(fixture_seed("s_A2"), 6), 6)
    assert theta_expand(d, (a, b), GENERIC_Q, 6).is_positive()


@given(st.integers(-2, 2), st.integers(-2, 2))
def test_theta_positive_b2(a, b):
    from clusterfold.lattice_core import fixture_seed

    d = complete_rank2(initial_diagram(fixture_seed("s_B2"), 6), 6)
    th = theta_expand(d, (a, b), GENERIC_Q, 6)
    assert th.is_positive()
    for ln in th.lines:
        ln.validate(d)


def test_broken_line_validation(d_a2):
    lines = enumerate_broken_lines(d_a2, (-1, 0), GENERIC_Q, 8)
    for ln in lines:
        ln.validate(d_a2)
    bent = next(ln for ln in lines if ln.bends)
    # reversing the bend lowers the degree
    bad = BrokenLine(bent.exponents[::-1], bent.coefficients, bent.bends, bent.endpoint)
    with pytest.raises(AssertionError):
        bad.validate(d_a2)
    with pytest.raises(AssertionError):
        BrokenLine(bent.exponents, (2,) + bent.coefficients[1:], bent.bends, bent.endpoint).validate(d_a2)


def test_endpoint_on_wall_rejected(d_a2):
    with pytest.raises(NonGenericError):
        theta_expand(d_a2, (-1, 0), (0, 1))


def test_broken_lines_rank2_only(markov):
    with pytest.raises(ValueError):
        enumerate_broken_lines(initial_diagram(markov, 4), (1, 0, 0), (1, 2, 3))


def test_structure_constants(d_a2):
    assert structure_constant(d_a2, (1, 0), (0, 0), (1, 0)) == 1
    assert structure_constant(d_a2, (1, 0), (0, 0), (0, 1)) == 0
    assert structure_constant(d_a2, (1, 0), (0, 1), (1, 1)) == 1
    # ϑ_{-f1} ϑ_{f1} = 1 + ϑ_{(p*(e1), e1)}
    assert structure_constant(d_a2, (-1, 0), (1, 0), (0, 0)) == 1
    assert structure_constant(d_a2, (-1, 0), (1, 0), (0, 1, 1, 0)) == 1


def test_product_expansion(d_a2):
    lhs = theta_expand(d_a2, (-1, 0), GENERIC_Q).poly * theta_expand(d_a2, (1, 0), GENERIC_Q).poly
    rhs = LaurentExpr.one(4) + theta_expand(d_a2, (0, 1, 1, 0), GENERIC_Q).poly
    assert lhs == rhs


@given(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), st.tuples(st.integers(-2, 2), st.integers(-2, 2)))
def test_alpha_p_q_sum_nonzero(p, q):
    from clusterfold.lattice_core import fixture_seed

    d = complete_rank2(initial_diagram(fixture_seed("s_A2"), 6), 6)
    r = (p[0] + q[0], p[1] + q[1])
    assert structure_constant(d, p, q, r) >= 1


def test_path_product_needs_a_ring(d_a2):
    p = path_product(d_a2, GenericPath.through(d_a2, [GENERIC_Q, (-1, Fraction(1, 3))]))
    with pytest.raises(ValueError):
        theta_via_path_product(p, (-1, 0))


def test_theta_json(markov):
    js = markov_theta(markov, 1, 6).to_json()
    assert js["lines"] == 3 and js["order"] == 6
