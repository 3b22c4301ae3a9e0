import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg, stats

from intprob import observables as obs
from intprob.contour import QuadratureError
from intprob.symfun import q_pochhammer


def qtasep_two_particle_law(q, t, M=60):
    """Exact law of (jumps of particle 1, jumps of particle 2) for two-particle q-TASEP.

    Forward equation on the truncated lattice 0 <= b <= a <= M.
    """
    states = [(a, b) for a in range(M + 1) for b in range(a + 1)]
    index = {s: i for i, s in enumerate(states)}
    G = np.zeros((len(states), len(states)))
    for (a, b), i in index.items():
        r1 = 1.0
        r2 = 1.0 - q ** (a - b)
        G[i, i] = -(r1 + r2)
        if (a + 1, b) in index:
            G[i, index[(a + 1, b)]] += r1
        if r2 > 0:
            G[i, index[(a, b + 1)]] += r2
    p0 = np.zeros(len(states))
    p0[index[(0, 0)]] = 1.0
    p = p0 @ linalg.expm(G * t)
    return states, p


@pytest.fixture(scope="module")
def law():
    return qtasep_two_particle_law(0.5, 1.5)


def test_density_h1_is_poisson():
    for t in (0.5, 1.0, 2.0):
        for n in range(11):
            assert abs(obs.density_vertical(t, 1, n) - stats.poisson.pmf(n, t)) < 1e-12


@pytest.mark.parametrize("h", [1, 2, 3, 4])
def test_density_sums_to_level(h):
    t = 1.5
    total = sum(obs.density_vertical(t, h, n) for n in range(int(t + 12 * math.sqrt(t) + 10 * h)))
    assert abs(total - h) < 1e-9


def test_density_contour_method_agrees():
    for h, n in [(2, 1), (3, 2), (3, 4)]:
        a = obs.density_vertical(1.2, h, n)
        b = obs.density_vertical(1.2, h, n, r_q=0.5, method="contour")
        assert abs(a - b) < 1e-10


def test_density_outside_support():
    assert obs.density_vertical(1.0, 2, -1) == 0.0
    assert abs(obs.density_vertical(1.0, 2, 60)) < 1e-14


def test_density_h2_against_dynamics(rng):
    # occupation at level 2 from the Schur dynamics, exact sampling of the pattern
    from intprob.dynamics import evolve_schur_independent

    t, runs = 1.0, 20_000
    occ = np.zeros(6)
    for _ in range(runs):
        lam = evolve_schur_independent(2, t, rng).rows[1]
        for x in (lam[0] + 1, lam[1]):
            if x < 6:
                occ[x] += 1
    occ /= runs
    exact = np.array([obs.density_vertical(t, 2, n) for n in range(6)])
    assert np.max(np.abs(occ - exact)) < 5 * math.sqrt(0.25 / runs)


def test_qmoment_k1_closed_form():
    for mode in ("nested", "unnested"):
        v = obs.qmoments(obs.MomentRequest(0.5, 2.0, (1,)), mode)
        assert abs(v - math.exp(-1.0)) < 1e-12


def test_qmoments_against_forward_equation(law):
    states, p = law
    b = np.array([s[1] for s in states])
    for k in (1, 2, 3):
        exact = float(np.sum(p * 0.5 ** (k * b)))
        for mode in ("nested", "unnested"):
            assert abs(obs.qmoments(obs.MomentRequest(0.5, 1.5, (2,) * k), mode) - exact) < 1e-10


def test_mixed_levels_against_forward_equation(law):
    states, p = law
    a = np.array([s[0] for s in states])
    b = np.array([s[1] for s in states])
    exact = float(np.sum(p * 0.5 ** (a + b)))
    assert abs(obs.qmoments(obs.MomentRequest(0.5, 1.5, (2, 1)), "nested") - exact) < 1e-10


def test_nested_k4_reports_work_limit():
    # the fully coupled 4-fold tensor sum does not reach 1e-12 within the work limit
    r = obs.MomentRequest(0.6, 1.0, (2, 2, 2, 2))
    with pytest.raises(QuadratureError, match="unnested"):
        obs.qmoments(r, "nested")


def test_nested_small_q_points_to_unnested():
    # the innermost nested circle shrinks like q^(k-1)
    with pytest.raises(QuadratureError, match="unnested"):
        obs.qmoments(obs.MomentRequest(0.2, 2.0, (3, 3, 3)), "nested")


def test_nested_unnested_agree_k3_mixed_q():
    for q in (0.4, 0.55, 0.8):
        r = obs.MomentRequest(q, 2.0, (3, 3, 3))
        assert abs(obs.qmoments(r, "nested") - obs.qmoments(r, "unnested")) < 1e-9


def test_unnested_requires_equal_levels():
    with pytest.raises(ValueError):
        obs.qmoments(obs.MomentRequest(0.5, 1.0, (2, 1)), "unnested")


def test_unnested_high_k_is_monotone():
    vals = [obs.qmoments(obs.MomentRequest(0.5, 1.0, (2,) * k)) for k in range(1, 7)]
    assert all(1 > x > y > 0 for x, y in zip(vals, vals[1:]))


def test_empty_moment_is_one():
    assert obs.qmoments(obs.MomentRequest(0.5, 1.0, ())) == 1.0


@pytest.mark.parametrize("bad", [dict(q=1.0, t=1.0, levels=(1,)), dict(q=0.5, t=-1.0, levels=(1,)),
                                 dict(q=0.5, t=1.0, levels=(0,)), dict(q=0.5, t=1.0, levels=(1, 2))])
def test_moment_request_validation(bad):
    with pytest.raises(ValueError):
        obs.MomentRequest(**bad)


def test_full_output_record():
    e = obs.qmoments(obs.MomentRequest(0.5, 1.0, (1, 1)), "nested", full_output=True)
    d = e.to_dict()
    assert d["formula"] == "qmoments" and d["error_estimate"] < 1e-10 and d["extra"]["nodes"] >= 64


def test_polymer_moments_closed_forms():
    for tau in (0.5, 1.0, 2.0):
        for N in (1, 2, 3, 4):
            exact = math.exp(tau / 2) * tau ** (N - 1) / math.factorial(N - 1)
            assert abs(obs.polymer_moments_integral(tau, (N,)) - exact) < 1e-12 * max(1, exact)
        assert abs(obs.polymer_moments_integral(tau, (1, 1)) - math.exp(2 * tau)) < 1e-10


@given(levels=st.lists(st.integers(1, 4), min_size=1, max_size=3), tau=st.sampled_from([0.5, 1.0, 2.0]))
@settings(max_examples=15, deadline=None)
def test_polymer_moments_vs_ode(levels, tau):
    levels = tuple(sorted(levels, reverse=True))
    a = obs.polymer_moments_integral(tau, levels)
    b = obs.polymer_moments_ode_oracle(tau, levels)
    assert abs(a - b) < 1e-8 * max(1.0, abs(b))


@pytest.mark.parametrize("zeta", [0.3, -0.7, 0.2 + 0.5j, -1.5])
def test_qlaplace_n1_oracles(zeta):
    v = obs.qlaplace_series(obs.LaplaceRequest(0.5, 1.0, 1, zeta, n_max=200))
    assert abs(v - obs.qlaplace_poisson_oracle(0.5, 1.0, zeta)) < 1e-11
    if abs(0.5 * zeta) < 1:
        assert abs(v - obs.qlaplace_n1_series(0.5, 1.0, zeta)) < 1e-11


def test_qlaplace_n2_against_forward_equation(law):
    states, p = law
    b = np.array([s[1] for s in states])
    for zeta in (0.4, -0.8, 0.3j):
        exact = sum(pi / q_pochhammer(0.5 * 0.5**bi * zeta, 0.5) for pi, bi in zip(p, b))
        v = obs.qlaplace_series(obs.LaplaceRequest(0.5, 1.5, 2, zeta))
        assert abs(v - exact) < 1e-10


def test_qlaplace_truncation_converges():
    req = lambda l: obs.LaplaceRequest(0.5, 1.0, 3, 0.4, ell_max=l)
    full = obs.qlaplace_series(obs.LaplaceRequest(0.5, 1.0, 3, 0.4))
    d = [abs(obs.qlaplace_series(req(l)) - full) for l in (1, 2, 3)]
    assert d[0] > d[1] > d[2]


@pytest.mark.parametrize("zeta", [-0.2, 0.2j, -3.0, -5.0, 1e-12j])
def test_mellin_barnes_vs_poisson(zeta):
    v = obs.mellin_barnes_n1(0.5, 1.0, zeta)
    assert abs(v - obs.qlaplace_poisson_oracle(0.5, 1.0, zeta)) < 1e-10


def test_mellin_barnes_rejects_positive_real_zeta():
    with pytest.raises(ValueError):
        obs.mellin_barnes_n1(0.5, 1.0, 0.2)


def test_qlaplace_slow_decay_is_reported():
    with pytest.raises(QuadratureError):
        obs.qlaplace_series(obs.LaplaceRequest(0.5, 1.0, 1, -1.5, n_max=60))


def test_closed_series_radius():
    with pytest.raises(ValueError):
        obs.qlaplace_n1_series(0.5, 1.0, -5.0)
