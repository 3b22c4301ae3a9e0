import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from intprob import dynamics as dyn
from intprob.rng import make_rng
from intprob.symfun import interlaces


@st.composite
def interlacing_pair(draw, max_h=5, max_part=6):
    h = draw(st.integers(2, max_h))
    lam = sorted(draw(st.lists(st.integers(0, max_part), min_size=h, max_size=h)), reverse=True)
    mu = [draw(st.integers(lam[i + 1], lam[i])) for i in range(h - 1)]
    return tuple(mu), tuple(lam)


def _equation_residuals(rates, mu, lam, q):
    """T_{j'} r_{j'} + T_j l_j + w_{j+1} - S_{j+1} over consecutive free indices."""
    F = rates.free
    out = []
    for m, f in enumerate(F):
        lhs = rates.w[f - 1]
        if m >= 1:
            lhs += dyn.T_coeff(f - 1, mu, lam, q) * rates.l[f - 2]
        if m + 1 < len(F):
            jn = F[m + 1] - 1
            lhs += dyn.T_coeff(jn, mu, lam, q) * rates.r[jn - 1]
        out.append(lhs - dyn.S_coeff(f, mu, lam, q))
    return out


@pytest.mark.parametrize("regime,choice,q", [("schur", "push_left", 0.0), ("schur", "push_right", 0.0),
                                             ("q", "push_left", 0.35)])
@given(pair=interlacing_pair())
@settings(max_examples=60, deadline=None)
def test_rate_equations_hold(regime, choice, q, pair):
    mu, lam = pair
    prof = dyn.DynamicsProfile(regime, choice, q)
    rates = dyn.solve_local_rates(prof, mu, lam)
    assert max(abs(x) for x in _equation_residuals(rates, mu, lam, prof.qq)) < 1e-10
    assert all(w >= -1e-12 for w in rates.w)
    assert all(-1e-12 <= p <= 1 + 1e-12 for p in rates.l + rates.r)


@given(pair=interlacing_pair(), q=st.floats(0.05, 0.9))
@settings(max_examples=80, deadline=None)
def test_qpush_right_probability_closed_form(pair, q):
    mu_pre, lam = pair
    prof = dyn.DynamicsProfile("q", "push_left", q)
    checked = 0
    for j in range(1, len(mu_pre) + 1):
        mu_post = list(mu_pre)
        mu_post[j - 1] += 1
        # the move must leave a signature that still sits below lam
        if j > 1 and mu_post[j - 1] > mu_post[j - 2]:
            continue
        if mu_post[j - 1] > lam[j - 1]:
            continue
        rates = dyn.solve_local_rates(prof, tuple(mu_post), lam)
        closed = dyn.qpush_r_closed(j, mu_pre, lam, q)
        assert abs(rates.r[j - 1] - closed) < 1e-10
        checked += 1
    assume(checked > 0)


def test_push_right_has_no_q_version():
    with pytest.raises(ValueError):
        dyn.DynamicsProfile("q", "push_right", 0.5)


@pytest.mark.parametrize("regime,choice,q", [("schur", "independent", 0.0), ("schur", "push_left", 0.0),
                                             ("schur", "push_right", 0.0), ("q", "push_left", 0.5),
                                             ("q", "independent", 0.5)])
def test_evolution_preserves_interlacing(regime, choice, q):
    prof = dyn.DynamicsProfile(regime, choice, q)
    st_, log = dyn.evolve_array(dyn.ArrayState.packed(5), 3.0, prof, make_rng(1), log=True, check=True)
    st_.check()
    assert log.to_csv().startswith("time,level,index,kind\n")
    assert {e[3] for e in log.events} <= set(dyn.KINDS)


def test_schur_independent_fast_path_interlaces():
    for s in range(20):
        dyn.evolve_schur_independent(6, 4.0, make_rng(s)).check()


def _mean_se(x):
    return x.mean(axis=0), x.std(axis=0, ddof=1) / math.sqrt(len(x))


def test_schur_independent_edge_is_tasep():
    runs, N, t = 3000, 3, 2.0
    rng = make_rng(5)
    edge = np.array([[s.rows[h][h] - (h + 1) for h in range(N)]
                     for s in (dyn.evolve_schur_independent(N, t, rng) for _ in range(runs))])
    batch = dyn.run_marginal_batch("tasep", N, 0.0, t, 20_000, make_rng(6))
    m1, s1 = _mean_se(edge)
    m2, s2 = _mean_se(batch)
    assert np.all(np.abs(m1 - m2) < 5 * np.hypot(s1, s2))


def test_q_push_left_edge_is_qpushtasep():
    runs, N, t, q = 600, 3, 1.5, 0.5
    prof = dyn.DynamicsProfile("q", "push_left", q)
    rng = make_rng(8)
    edge = []
    for _ in range(runs):
        s, _ = dyn.evolve_array(dyn.ArrayState.packed(N), t, prof, rng)
        edge.append([s.rows[h][0] + h for h in range(N)])
    batch = dyn.run_marginal_batch("qpushtasep", N, q, t, 20_000, make_rng(9))
    m1, s1 = _mean_se(np.array(edge, float))
    m2, s2 = _mean_se(batch)
    assert np.all(np.abs(m1 - m2) < 5 * np.hypot(s1, s2))


@pytest.mark.parametrize("kind,q", [("tasep", 0), ("qtasep", 0.4), ("pushtasep", 0), ("qpushtasep", 0.4)])
def test_batch_matches_event_driven_marginal(kind, q):
    N, t = 3, 1.5
    rng = make_rng(11)
    single = np.array([dyn.run_marginal(kind, N, q, t, rng) for _ in range(3000)], float)
    batch = dyn.run_marginal_batch(kind, N, q, t, 20_000, make_rng(12)).astype(float)
    m1, s1 = _mean_se(single)
    m2, s2 = _mean_se(batch)
    assert np.all(np.abs(m1 - m2) < 5 * np.hypot(s1, s2))


def test_marginal_order_preserved():
    y = dyn.run_marginal_batch("qtasep", 4, 0.3, 3.0, 500, make_rng(0))
    assert np.all(np.diff(y, axis=1) < 0)
    y = dyn.run_marginal_batch("pushtasep", 4, 0.0, 3.0, 500, make_rng(0))
    assert np.all(np.diff(y, axis=1) > 0)


def test_rsk_pattern_matches_last_passage():
    rng = make_rng(21)
    for _ in range(40):
        N = 3
        word = dyn.random_word(N, 2.0, rng)
        if len(word) > 12:
            continue
        rows = dyn.pattern_from_word(N, word)
        for h in range(1, N + 1):
            assert interlaces(rows[h - 2], rows[h - 1]) if h > 1 else True
            for j in range(1, h + 1):
                assert sum(rows[h - 1][:j]) == dyn.lpp_oracle(word, h, j)


def test_rsk_matches_level_law():
    # level-N marginal of the RSK pattern is the Schur process at time t
    N, t, runs = 2, 1.0, 4000
    rng = make_rng(31)
    a = np.array([dyn.rsk_from_words(N, t, rng)[-1] for _ in range(runs)], float)
    b = np.array([dyn.run_level_process(N, 0.0, t, rng) for _ in range(runs)], float)
    m1, s1 = _mean_se(a)
    m2, s2 = _mean_se(b)
    assert np.all(np.abs(m1 - m2) < 5 * np.hypot(s1, s2))
