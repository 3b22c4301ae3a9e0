import math

import numpy as np
import pytest

from intprob import polymer as pol
from intprob.asymptotics import kpz_constants


def test_first_moment_monte_carlo():
    N, t = 2, 1.0
    logZ = pol.simulate_partition_batch(N, t, 20_000, master_seed=11, delta=1e-2)
    Z = np.exp(logZ)
    exact = math.exp(t / 2) * t ** (N - 1) / math.factorial(N - 1)
    se = Z.std(ddof=1) / math.sqrt(len(Z))
    assert abs(Z.mean() - exact) < 4 * se + 5e-3


def test_level_one_is_brownian_endpoint(rng):
    env = pol.PolymerEnvironment.sample(3, 1.0, 0.01, rng)
    assert pol.simulate_partition(1, 1.0, env) == pytest.approx(env.increments[0].sum(), abs=1e-12)


def test_grid_refinement_converges():
    # coarsen fine paths by summing increments; RMS error should be first order in delta
    R = 200
    fine = pol.PolymerEnvironment.for_replicas(3, 1.0, 1 / 1600, 1, 0, R)
    ref = pol.simulate_partition(3, 1.0, fine)
    errs = []
    for f in (16, 8, 4):
        inc = fine.increments.reshape(R, 3, -1, f).sum(axis=-1)
        env = pol.PolymerEnvironment(f / 1600, 1.0, inc)
        errs.append(np.sqrt(np.mean((pol.simulate_partition(3, 1.0, env) - ref) ** 2)))
    assert errs[0] / errs[1] > 1.6 and errs[1] / errs[2] > 1.6
    assert errs[2] < 3e-3


def test_forced_path_identity(rng):
    N, tau = 4, 1.0
    env = pol.PolymerEnvironment.sample(N, tau, 0.01, rng)
    st = pol.simulate_hierarchy(N, tau, env)
    B = env.paths()[:, -1]
    for h in range(1, N + 1):
        assert st.row(h).sum() == pytest.approx(B[:h].sum(), abs=1e-8)


def test_hierarchy_first_column_is_partition_function(rng):
    N, tau = 4, 1.0
    env = pol.PolymerEnvironment.sample(N, tau, 0.01, rng)
    st = pol.simulate_hierarchy(N, tau, env)
    for h in range(1, N + 1):
        assert st.row(h)[0] == pytest.approx(pol.simulate_partition(h, tau, env), abs=1e-10)


def test_hierarchy_vectorized_over_replicas():
    env = pol.PolymerEnvironment.for_replicas(3, 1.0, 0.01, 5, 0, 4)
    batch = pol.simulate_hierarchy(3, 1.0, env)
    one = pol.PolymerEnvironment(0.01, 1.0, env.increments[2])
    single = pol.simulate_hierarchy(3, 1.0, one)
    for a, b in zip(batch.T, single.T):
        np.testing.assert_allclose(a[2], b, atol=1e-12)


def test_lgv_and_sde_agree_on_shared_noise():
    env = pol.PolymerEnvironment.for_replicas(3, 1.0, 1e-3, 9, 0, 5)
    a = pol.simulate_hierarchy(3, 1.0, env, "lgv")
    b = pol.simulate_hierarchy(3, 1.0, env, "sde")
    assert max(float(np.abs(x - y).max()) for x, y in zip(a.T, b.T)) < 0.05


def test_grid_checks(rng):
    env = pol.PolymerEnvironment.sample(2, 1.0, 0.02, rng)
    with pytest.raises(ValueError, match="coarse"):
        pol.simulate_partition(2, 1.0, env)
    env = pol.PolymerEnvironment.sample(2, 1.0, 0.01, rng)
    with pytest.raises(ValueError, match="cover"):
        pol.simulate_partition(2, 2.0, env)
    with pytest.raises(ValueError):
        pol.PolymerEnvironment.sample(2, 1.0, 0.3, rng)
    with pytest.raises(ValueError):
        pol.simulate_hierarchy(2, 1.0, env, method="euler")


def test_for_replicas_is_deterministic_and_sliceable():
    a = pol.PolymerEnvironment.for_replicas(2, 1.0, 0.1, 42, 0, 5)
    b = pol.PolymerEnvironment.for_replicas(2, 1.0, 0.1, 42, 3, 2)
    np.testing.assert_array_equal(a.increments[3:], b.increments)
    c = pol.PolymerEnvironment.for_replicas(2, 1.0, 0.1, 43, 0, 5)
    assert not np.array_equal(a.increments, c.increments)


def test_batch_is_independent_of_chunking():
    a = pol.simulate_partition_batch(3, 1.0, 7, 1, 1e-2, chunk=2)
    b = pol.simulate_partition_batch(3, 1.0, 7, 1, 1e-2, chunk=7)
    np.testing.assert_array_equal(a, b)


def test_median_of_means(rng):
    x = rng.standard_normal(64_000) + 2.0
    m, se = pol.median_of_means(x, 32)
    assert abs(m - 2.0) < 5 * se
    assert 0.5 * 1.2533 / math.sqrt(64_000) < se < 2 * 1.2533 / math.sqrt(64_000)


def test_lln_experiment_fields():
    r = pol.lln_experiment(8, 1.0, 6, master_seed=3)
    assert r.samples.shape == (6,)
    assert r.f_target == kpz_constants(1.0).f
    assert r.bias_scale == pytest.approx(8 ** (-2 / 3))
    assert math.isnan(pol.lln_experiment(8, 1.0, 1).stderr)
