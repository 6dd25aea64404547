import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterfold.cones import Cone
from clusterfold.lattice_core import (
    MutationTree,
    PrincipalSeed,
    Seed,
    chamber_cone,
    chamber_lattice_intersection,
    final_principal_seed,
    fixture_seed,
    is_maximal_green_sequence,
    mutate_matrix,
    mutate_seed,
    skew_pair,
)
from clusterfold.reference import S24_GREEN_SEQUENCE
from oracles import mutate_matrix_formula

FIXTURES = ("s_S24", "s_markov_folded", "s_A3", "s_B2", "s_A2", "s_kronecker2")


def unit(n, i):
    return tuple(int(j == i) for j in range(n))


@st.composite
def skew_symmetrizable(draw):
    n = draw(st.integers(2, 5))
    d = [draw(st.integers(1, 3)) for _ in range(n)]
    skew = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = draw(st.integers(-3, 3))
            skew[i][j], skew[j][i] = v, -v
    return Seed(skew, d)


def test_seed_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        Seed([[0, 1], [1, 0]], [1, 1])


def test_seed_rejects_bad_multiplier():
    with pytest.raises(ValueError):
        Seed([[0, 1], [-1, 0]], [0, 1])


def test_exchange_matrix_from_skew(b2):
    assert b2.exchange_matrix == ((0, 1), (-2, 0))
    assert Seed.from_exchange(b2.exchange_matrix, b2.d) == b2


def test_json_round_trip(a3):
    assert Seed.from_json(a3.to_json()) == a3


def test_skew_pair_s24(s24):
    assert skew_pair(s24, unit(6, 0), unit(6, 1)) == 1


@pytest.mark.parametrize("name", FIXTURES)
def test_skew_pair_self_is_zero(name):
    s = fixture_seed(name)
    for i in range(s.rank):
        assert skew_pair(s, unit(s.rank, i), unit(s.rank, i)) == 0


def test_folded_markov_exchange_entry(markov):
    assert skew_pair(markov, unit(3, 0), unit(3, 1)) * markov.d[1] == 2


def test_skew_pair_dimension_mismatch(a2):
    with pytest.raises(ValueError):
        skew_pair(a2, (1, 0, 0), (0, 1))


def test_markov_mutation_negates(markov):
    for k in range(3):
        assert mutate_matrix(markov.exchange_matrix, k) == tuple(
            tuple(-x for x in row) for row in markov.exchange_matrix
        )


def test_a3_mutation_at_2(a3):
    # the closed formula is the oracle; entries touching index 2 flip sign
    want = mutate_matrix_formula([list(r) for r in a3.exchange_matrix], 1)
    assert [list(r) for r in a3.mutate(1).exchange_matrix] == want
    assert a3.mutate(1).exchange_matrix == ((0, -1, 0), (1, 0, 1), (0, -1, 0))


@given(skew_symmetrizable(), st.data())
def test_mutation_matches_closed_formula(s, data):
    k = data.draw(st.integers(0, s.rank - 1))
    want = mutate_matrix_formula([list(r) for r in s.exchange_matrix], k)
    assert [list(r) for r in mutate_matrix(s.exchange_matrix, k)] == want


@given(skew_symmetrizable(), st.data())
def test_mutation_is_involution(s, data):
    k = data.draw(st.integers(0, s.rank - 1))
    assert s.mutate(k).mutate(k) == s


@pytest.mark.parametrize("name", FIXTURES)
def test_principal_mutation_involution(name):
    ps = PrincipalSeed.initial(fixture_seed(name))
    for k in range(ps.rank):
        back = mutate_seed(mutate_seed(ps, k), k)
        assert back.seed.exchange_matrix == ps.seed.exchange_matrix
        assert back.c_matrix == ps.c_matrix and back.g_matrix == ps.g_matrix


def test_frozen_mutation_rejected():
    s = Seed([[0, 1], [-1, 0]], [1, 1], frozen=[1])
    with pytest.raises(ValueError):
        mutate_seed(PrincipalSeed.initial(s), 1)
    with pytest.raises(IndexError):
        mutate_seed(PrincipalSeed.initial(s), 5)


def test_green_sequence_s24(s24):
    assert is_maximal_green_sequence(s24, S24_GREEN_SEQUENCE)
    assert not is_maximal_green_sequence(s24, [])
    assert not is_maximal_green_sequence(s24, [1, 1])


def test_green_sequence_prefixes_and_final_matrix(s24):
    ps = PrincipalSeed.initial(s24)
    for k in S24_GREEN_SEQUENCE:
        assert ps.is_green(k - 1)
        ps = ps.mutate(k - 1)
    cols = [ps.c_vector(k) for k in range(6)]
    assert sorted(tuple(-x for x in c) for c in cols) == sorted(unit(6, i) for i in range(6))


def test_sign_coherence_along_sequences(s24, markov):
    for s, seq in ((s24, S24_GREEN_SEQUENCE), (markov, [1, 2, 3, 1, 2])):
        ps = PrincipalSeed.initial(s)
        for k in seq:
            ps = ps.mutate(k - 1)
            for j in range(s.rank):
                c = ps.c_vector(j)
                assert all(x >= 0 for x in c) or all(x <= 0 for x in c)


def test_determinant_of_c_matrix(markov):
    import sympy

    ps = PrincipalSeed.initial(markov).mutate_path([0, 1, 2, 0])
    assert abs(sympy.Matrix(ps.c_matrix).det()) == 1


def test_root_chamber_cones(a2):
    ps = PrincipalSeed.initial(a2)
    plus = chamber_cone(ps, "+")
    assert plus == Cone([(1, 0, 0, 0), (0, 1, 0, 0)], [(0, 0, 1, 0), (0, 0, 0, 1)], 4)
    minus = chamber_cone(ps, "-")
    assert minus == Cone([(-1, 0, 0, 0), (0, -1, 0, 0)], [(0, 0, 1, 0), (0, 0, 0, 1)], 4)


def test_b2_mutated_chamber(b2):
    # the g-vector of the mutated variable is -f_1: the chamber across e_1^perp
    ps = PrincipalSeed.initial(b2).mutate(0)
    assert ps.g_vector(0) == (-1, 0)
    assert chamber_cone(ps, "+", with_n=False) == Cone([(-1, 0), (0, 1)], (), 2)


def test_markov_root_intersection(markov):
    ps = PrincipalSeed.initial(markov)
    desc = chamber_lattice_intersection(chamber_cone(ps, "-"), chamber_cone(ps, "+"))
    assert desc.is_only_lineality()
    assert sorted(desc.lineality) == sorted(unit(6, 3 + i) for i in range(3))


def test_intersection_with_itself(a2):
    c = chamber_cone(PrincipalSeed.initial(a2), "+")
    desc = chamber_lattice_intersection(c, c)
    assert desc.cone == c
    assert sorted(desc.rays) == [(0, 1, 0, 0), (1, 0, 0, 0)]


def test_b2_shared_facet(b2):
    c1 = chamber_cone(PrincipalSeed.initial(b2), "+")
    c2 = chamber_cone(PrincipalSeed.initial(b2).mutate(0), "+")
    desc = chamber_lattice_intersection(c1, c2)
    assert desc.rays == ((0, 1, 0, 0),)
    assert not desc.is_only_lineality()


def test_mutation_tree_finite_type(a2, a3):
    assert MutationTree(a2, 8).closed
    assert len(MutationTree(a2, 8).chambers()) == 5
    assert len(MutationTree(a3, 12).chambers()) == 14


def test_mutation_tree_markov_open(markov):
    tree = MutationTree(markov, 2)
    assert not tree.closed
    assert len(tree.chambers()) == 1 + 3 + 6


def test_final_principal_seed_is_negative(s24):
    ps = final_principal_seed(s24, S24_GREEN_SEQUENCE)
    assert all(x <= 0 for k in range(6) for x in ps.c_vector(k))


@pytest.mark.parametrize(
    "name, finite",
    [("s_A2", True), ("s_B2", True), ("s_A3", True), ("s_S24", False), ("s_markov_folded", False), ("s_kronecker2", False)],
)
def test_finite_type_criterion(name, finite):
    from clusterfold.lattice_core import is_finite_type

    assert is_finite_type(fixture_seed(name)) is finite


@given(st.integers(0, 3), st.integers(1, 3), st.integers(1, 3))
def test_finite_type_rank2_matches_tree(b, d1, d2):
    from clusterfold.lattice_core import is_finite_type

    s = Seed([[0, b], [-b, 0]], [d1, d2])
    product = b * b * d1 * d2
    assert is_finite_type(s) is (product <= 3)
    if product <= 3:
        assert MutationTree(s, 12).closed
