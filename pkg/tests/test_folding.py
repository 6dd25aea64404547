from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterfold.atlas import dt_transform, folded_dt_check
from clusterfold.cones import Cone
from clusterfold.folding import (
    AdmissibilityError,
    check_admissible,
    check_equivariance,
    fixture_action,
    fold_diagram,
    fold_seed,
    incoming_invariant,
    is_pi_invariant_element,
    lifted_path_check,
    perm_from_cycles,
    q_tilde,
    verify_folded_equivalence,
)
from clusterfold.poly import LaurentExpr
from clusterfold.reference import S24_GREEN_SEQUENCE
from clusterfold.scattering import (
    Wall,
    complete_rank2,
    finite_type_diagram,
    initial_diagram,
    pi_act_wall,
    sample_monomials,
)


def z(*e):
    return LaurentExpr.monomial(e)


@pytest.fixture(scope="module")
def fm_a3(a3):
    return fold_seed(fixture_action(a3, "pi_A3"))


@pytest.fixture(scope="module")
def fm_s24(s24):
    return fold_seed(fixture_action(s24, "pi_S24"))


def test_admissible_a3(a3):
    act = check_admissible(a3, [perm_from_cycles([[1, 3]], 3)])
    assert act.orbits == ((0, 2), (1,))
    assert len(act.elements) == 2


def test_a2_swap_rejected_with_witness(a2):
    with pytest.raises(AdmissibilityError) as info:
        fixture_action(a2, "pi_A2_swap")
    w = info.value.witness
    assert {"i", "j", "pi", "pi_prime"} <= set(w)
    assert w["pi"] == [2, 1] or w["pi_prime"] == [2, 1]


def test_bad_permutation_rejected(a3):
    with pytest.raises(ValueError):
        check_admissible(a3, [(0, 0, 1)])


def test_multiplier_mismatch_rejected(b2):
    with pytest.raises(AdmissibilityError):
        check_admissible(b2, [(1, 0)])


def test_fold_a3_is_b2(fm_a3, b2):
    t = fm_a3.target
    assert t.skew == b2.skew and t.d == b2.d == (2, 1)
    assert fm_a3.q == ((1, 0, 1), (0, 1, 0))
    assert fm_a3.s[0] == (Fraction(1, 2), 0)


def test_fold_s24_is_markov(fm_s24, markov):
    assert fm_s24.target.skew == markov.skew
    assert fm_s24.target.d == (2, 2, 2)
    fm_s24.check()


def test_trivial_fold(a2):
    fm = fold_seed(fixture_action(a2, "pi_trivial"))
    assert fm.target.skew == a2.skew and fm.target.d == a2.d
    f = z(1, -2) + z(0, 1) * 3
    assert q_tilde(fm, f) == f


def test_fold_initial_a3(fm_a3):
    fd = fold_diagram(fm_a3, initial_diagram(fm_a3.source, 8))
    walls = {w.n0: (w.coeffs, w.support) for w in fd.walls}
    assert walls[(1, 0)] == ((1, 2, 1), Cone((), [(0, 1)], 2))
    assert walls[(0, 1)][0] == (1, 1)


@pytest.mark.parametrize("which", ["a3", "s24"])
def test_fold_commutes_with_initial(which, fm_a3, fm_s24):
    from clusterfold.scattering import equivalent

    fm = fm_a3 if which == "a3" else fm_s24
    folded = fold_diagram(fm, initial_diagram(fm.source, 6))
    assert equivalent(folded, initial_diagram(fm.target, 6))


def test_q_tilde_examples(fm_s24):
    assert q_tilde(fm_s24, z(1, 0, 0, 1, 0, 0)) == z(2, 0, 0)
    assert q_tilde(fm_s24, z(0, 1, 0, 0, 0, -1)) == z(0, 1, -1)
    f = z(1, 0, 0, 0, 0, 0) + z(0, 0, 0, 1, 0, 0)
    assert q_tilde(fm_s24, f) == z(1, 0, 0) * 2
    with pytest.raises(ValueError):
        q_tilde(fm_s24, z(1, 0))


def test_q_tilde_a_ring(fm_a3):
    # A_prin exponents (m, n): m folds by s*, n by q
    got = q_tilde(fm_a3, z(1, 0, 1, 1, 1, 0))
    assert got == z(*(fm_a3.s_star_vec((1, 0, 1)) + fm_a3.q_vec((1, 1, 0))))


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 4)), max_size=5),
       st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 4)), max_size=5))
def test_q_tilde_is_ring_map(fa, fb):
    from clusterfold.lattice_core import fixture_seed

    fm = fold_seed(fixture_action(fixture_seed("s_A3"), "pi_A3"))
    f = sum((z(a, b, c) * k for a, b, c, k in fa), LaurentExpr.zero(3))
    g = sum((z(a, b, c) * k for a, b, c, k in fb), LaurentExpr.zero(3))
    assert q_tilde(fm, f * g) == q_tilde(fm, f) * q_tilde(fm, g)
    assert q_tilde(fm, f + g) == q_tilde(fm, f) + q_tilde(fm, g)


def test_verify_folded_a3(fm_a3):
    ok, report = verify_folded_equivalence(fm_a3, finite_type_diagram(fm_a3.source, 8), 8)
    assert ok and report["consistent"] and report["equivalent"] and report["pointwise"]


def test_verify_trivial_fold(a2):
    fm = fold_seed(fixture_action(a2, "pi_trivial"))
    ok, _ = verify_folded_equivalence(fm, finite_type_diagram(a2, 8), 8)
    assert ok


def test_verify_negative_control(fm_a3):
    good = fold_diagram(fm_a3, finite_type_diagram(fm_a3.source, 8))
    corrupted = good.with_walls([w for w in good.walls if w.n0 != (1, 1)])
    ok, report = verify_folded_equivalence(fm_a3, finite_type_diagram(fm_a3.source, 8), 8, folded=corrupted)
    assert not ok
    assert "equivalence_witness" in report or "pointwise_witness" in report or "loop_witness" in report


def test_invariant_elements(a3):
    act = fixture_action(a3, "pi_A3")
    assert is_pi_invariant_element(act, initial_diagram(a3, 6))
    assert is_pi_invariant_element(act, finite_type_diagram(a3, 6))
    lone = [w for w in initial_diagram(a3, 6).walls if w.n0 == (1, 0, 0)]
    assert not is_pi_invariant_element(act, lone, 6)
    with pytest.raises(TypeError):
        is_pi_invariant_element(act, "walls")


def test_folding_map_check(fm_a3, fm_s24):
    fm_a3.check()
    fm_s24.check()


def test_lifted_paths(fm_a3):
    d = finite_type_diagram(fm_a3.source, 6)
    fd = fold_diagram(fm_a3, d)
    import random

    rng = random.Random(3)
    mons = sample_monomials(fm_a3.source, "A", 8, rng)
    for i in range(10):
        pts = [(Fraction(rng.randint(-999, 999), 101), Fraction(rng.randint(-999, 999), 103)) for _ in range(3)]
        assert lifted_path_check(fm_a3, d, fd, pts, mons, seed=i)


def test_incoming_invariance(a3, s24):
    assert incoming_invariant(fixture_action(a3, "pi_A3"), initial_diagram(a3, 6))
    assert incoming_invariant(fixture_action(s24, "pi_S24"), initial_diagram(s24, 6))


def test_equivariance_and_negative_control(a3):
    act = fixture_action(a3, "pi_A3")
    d = finite_type_diagram(a3, 6)
    ok, bad = check_equivariance(act, d, 30)
    assert ok and not bad
    # make the e1 wall heavier than its mirror image
    walls = [Wall(w.n0, w.support, (1, 3, 3, 1)) if w.n0 == (1, 0, 0) else w for w in d.walls]
    ok, bad = check_equivariance(act, d.with_walls(walls), 30)
    assert not ok and bad


def test_pi_act_moves_normals(a3):
    w = initial_diagram(a3, 4).walls[0]
    assert pi_act_wall((0, 1, 2), w) == w


def test_folded_dt(fm_s24, s24):
    dt = dt_transform(s24, S24_GREEN_SEQUENCE)
    exps = [(1, 0, 0, 0, 0, 0) + (0,) * 6, (0, 0, 0, 1, 0, 0) + (0,) * 6, (0,) * 12]
    assert folded_dt_check(fm_s24, dt, exps, 8)


def test_b2_completion_matches(fm_a3):
    d = complete_rank2(initial_diagram(fm_a3.target, 8), 8)
    ok, report = verify_folded_equivalence(fm_a3, finite_type_diagram(fm_a3.source, 8), 8, direct=d)
    assert ok and report["equivalent"]
