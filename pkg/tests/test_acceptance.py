"""Acceptance criteria at full scale, one test per criterion.

Each test prints a single ``CRITERION n PASS|FAIL`` line summarizing its
checks, the measured values and the wall time against the time limit.
"""

import time

import pytest

from intprob import validation as val

CRITERIA = [
    (1, "exact combinatorics", 60,
     lambda: val.exact_combinatorics() + val.schur_identities()),
    (2, "Hahn slice laws", 120, lambda: val.hahn_slices(100_000)),
    (3, "density formula", 10, val.density_formula),
    (4, "limit shape", 600, lambda: val.limit_shape(200, L=100)),
    (5, "q-moments", None,
     lambda: val.qmoment_agreement() + val.qmoment_monte_carlo(100_000)
     + val.schur_dynamics_monte_carlo(20_000)),
    (6, "unnesting and q-Laplace", None, lambda: val.qlaplace_checks(100_000)),
    (7, "polymer moments", None,
     lambda: val.polymer_moment_checks() + val.polymer_first_moment_mc(100_000, 1e-3)),
    (8, "Lyapunov exponents", None, val.lyapunov_checks),
    (9, "KPZ constants", None, val.kpz_checks),
    (10, "Laplace transform series", None, val.laplace_checks),
    (11, "Tracy-Widom properties", None, val.tracy_widom_checks),
    (12, "law of large numbers", 900, lambda: val.lln_check(128, 200)),
    (13, "hierarchy identities", None,
     lambda: val.hierarchy_checks(10_000) + val.lgv_sde_check()),
]


@pytest.mark.acceptance
@pytest.mark.parametrize("num,name,limit,fn", CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, name, limit, fn, capsys):
    t0 = time.perf_counter()
    checks = fn()
    dt = time.perf_counter() - t0
    in_time = limit is None or dt <= limit
    ok = in_time and all(c.passed for c in checks)
    budget = f"{dt:.1f}s" + (f" / {limit}s" if limit else "")
    with capsys.disabled():
        print(f"\nCRITERION {num:2d} {'PASS' if ok else 'FAIL'} {name} [{budget}]")
        for c in checks:
            print("    " + c.line())
    assert in_time, f"criterion {num} took {dt:.1f}s, limit {limit}s"
    failed = [c.line() for c in checks if not c.passed]
    assert not failed, "\n".join(failed)
