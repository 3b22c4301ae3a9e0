import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intprob import symfun as sf

signatures = st.lists(st.integers(0, 5), min_size=1, max_size=4).map(
    lambda xs: tuple(sorted(xs, reverse=True)))


def test_schur_dim_matches_gt_count():
    for lam in [(2, 1, 0), (3, 3, 0), (4, 2, 1, 0), (2, 2, 2, 0, 0)]:
        assert sf.schur_dim(lam) == sf.count_gt_patterns(lam)


@given(signatures)
@settings(max_examples=40, deadline=None)
def test_schur_dim_is_gt_count(lam):
    assert sf.schur_dim(lam) == sf.count_gt_patterns(lam)


@pytest.mark.parametrize("a,b,c", [(1, 1, 1), (2, 2, 2), (3, 3, 3), (2, 5, 2), (1, 4, 3)])
def test_macmahon_equals_weyl_dimension(a, b, c):
    assert sf.macmahon_count(a, b, c) == sf.schur_dim(sf.hexagon_signature(a, b, c))


def test_macmahon_small_values():
    assert sf.macmahon_count(1, 1, 1) == 2
    assert sf.macmahon_count(2, 2, 2) == 20
    assert sf.macmahon_count(3, 3, 3) == 980


def test_schur_eval_against_bialternant():
    lam = (3, 1, 0)
    z = np.array([0.7, 1.3, 0.4 + 0.2j])
    N = len(z)
    num = np.linalg.det(np.array([[zi ** (lam[j] + N - 1 - j) for j in range(N)] for zi in z]))
    den = np.linalg.det(np.array([[zi ** (N - 1 - j) for j in range(N)] for zi in z]))
    assert abs(sf.schur_eval(lam, z) - num / den) < 1e-12


def test_schur_eval_coalescing_points():
    lam = (2, 1, 0)
    assert abs(sf.schur_eval(lam, np.ones(3)) - 8.0) < 1e-8


def test_interlacing_and_pattern_validation():
    assert sf.interlaces((2, 1), (3, 1, 0))
    assert not sf.interlaces((2, 2), (3, 1, 0))
    with pytest.raises(ValueError):
        sf.check_pattern([(1,), (0, 1)])
    with pytest.raises(ValueError):
        sf.as_signature((0, 1))


def test_hahn_pmf_sums_to_one():
    for h in (1, 2, 3):
        total = sum(sf.hahn_pmf(3, 3, 3, h, x) for x in sf.hahn_support(3, h))
        assert total == Fraction(1)


def test_q_pochhammer():
    q = 0.3
    assert abs(sf.q_pochhammer(0.5, q, 3) - (1 - 0.5) * (1 - 0.15) * (1 - 0.045)) < 1e-15
    # Euler: 1/(z;q)_inf = sum z^n / (q;q)_n
    z = 0.4
    series = sum(z**n / sf.q_pochhammer(q, q, n) for n in range(80))
    assert abs(1 / sf.q_pochhammer(z, q) - series) < 1e-13
    with pytest.raises(ValueError):
        sf.q_pochhammer(0.5, 1.0)


def test_q_factorial():
    q = 0.6
    assert abs(sf.q_factorial(4, q) - sf.q_pochhammer(q, q, 4) / (1 - q) ** 4) < 1e-14


def test_qwhittaker_principal_reduces_to_schur_at_q0():
    for lam in [(2, 1, 0), (3, 1, 1), (2, 2, 0, 0)]:
        assert abs(sf.qwhittaker_principal(lam, q=0.0) - float(sf.schur_dim(lam))) < 1e-12


@pytest.mark.parametrize("mode,q", [("schur", None), ("qwhittaker", 0.4)])
def test_link_kernel_is_stochastic(mode, q):
    lam = (3, 1, 0)
    total = sum(sf.link_kernel(mode, lam, mu, q) for mu in itertools.product(*sf.interlacing_ranges(lam)))
    assert abs(float(total) - 1.0) < 1e-12


def test_macdonald_d1_eigenvalue():
    lam, q, t = (2, 1, 0), 0.3, 0.5
    z = [0.9, 1.2, 0.7]
    got = sf.macdonald_d1_apply(lam, 3, q, t, z)
    assert abs(got - sf.macdonald_d1_eigenvalue(lam, q, t)) < 1e-8
