"""One test per acceptance criterion, each at its stated time limit."""

import pytest

from clusterfold.checks import CHECKS, run_check

LIMITS = {n: limit for n, _, limit, _ in CHECKS}


def _run(n: int):
    res = run_check(n)
    print(res.line())
    assert res.ok, res.detail
    assert res.seconds < LIMITS[n], f"{res.seconds:.2f}s exceeds {LIMITS[n]}s"


def test_criterion_01_dt_of_first_generator():
    _run(1)


def test_criterion_02_folded_dt_and_f_bar():
    _run(2)


def test_criterion_03_reverse_realization_g_bar():
    _run(3)


def test_criterion_04_markov_theta():
    _run(4)


def test_criterion_05_a3_folds_to_b2():
    _run(5)


def test_criterion_06_pentagon_identity():
    _run(6)


def test_criterion_07_eta_and_alpha():
    _run(7)


def test_criterion_08_invariance_and_equivariance():
    _run(8)


def test_criterion_09_consistency_and_cocycle():
    _run(9)


def test_criterion_10_structure_constants_positive():
    _run(10)


def test_criterion_11_upper_algebra_containment():
    _run(11)


def test_criterion_12_chamber_lattice():
    _run(12)


def test_all_criteria_registered():
    assert sorted(LIMITS) == list(range(1, 13))
    with pytest.raises(KeyError):
        run_check(13)
