"""Exact contour-integral evaluators.

The q-moment and q-Laplace integrals with identical contours are evaluated as
tensor-product quadratures. For Cauchy-type determinants the tensor sum
collapses to traces of products of node matrices (one matrix per part size),
so an ``l``-fold integral costs a handful of matrix products instead of
``nodes**l`` integrand calls. Generating-function sums become a Fredholm
determinant ``det(I + L)`` of a single node matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .contour import (Contour, NestingError, QuadratureError, QuadratureSpec, QuadResult,
                      _converge, build_nested, quad_contour, quad_multi, quad_pair_product)
from .symfun import _partitions, q_pochhammer

__all__ = [
    "Evaluation", "MomentRequest", "LaplaceRequest", "density_vertical",
    "density_vertical_poisson", "qmoments", "polymer_moments_integral",
    "polymer_moments_ode_oracle", "qlaplace_series", "qlaplace_n1_series",
    "qlaplace_poisson_oracle", "mellin_barnes_n1",
]

MAX_UNNESTED_K = 8


@dataclass
class Evaluation:
    """A formula value together with its numerical error estimate."""
    formula: str
    params: dict
    value: complex
    error_estimate: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        v = complex(self.value)
        d["value"] = v.real if v.imag == 0 else [v.real, v.imag]
        return d


@dataclass
class MomentRequest:
    q: float
    t: float
    levels: tuple[int, ...]

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        self.levels = tuple(int(n) for n in self.levels)
        if any(n < 1 for n in self.levels):
            raise ValueError("levels must be >= 1")
        if any(a < b for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("levels must be weakly decreasing")


@dataclass
class LaplaceRequest:
    q: float
    t: float
    N: int
    zeta: complex
    ell_max: int | None = None
    n_max: int = 60

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        if self.N < 1 or self.n_max < 1 or (self.ell_max is not None and self.ell_max < 1):
            raise ValueError("N, n_max and ell_max must be >= 1")


def _finish(res: QuadResult, formula, params, full_output, real=True, **extra):
    value = res.value
    if real:
        if abs(value.imag) > max(1e-9, 10 * res.error):
            raise QuadratureError(f"{formula}: imaginary part {value.imag:.3e} is not negligible")
        value = value.real
    if full_output:
        return Evaluation(formula, params, value, float(res.error), dict(extra, nodes=res.nodes))
    return value


# ---------------------------------------------------------------------------
# lozenge density
# ---------------------------------------------------------------------------

def _density_generating(qv: np.ndarray, t: float, h: int) -> np.ndarray:
    """Residue at w=1 of ((qw-1)/(w-1))^h e^{t(q-1)w} / ((q-1)w).

    Expanding ``qw - 1 = q(w-1) + (q-1)`` leaves only nonnegative powers of
    ``q - 1``, so the result is an entire function of q.
    """
    d = qv - 1.0
    x = t * d
    # taylor coefficients of e^{xu}/(1+u) at u=0, without the e^x/(q-1) factor
    coef = [np.ones_like(qv)]
    term = np.ones_like(qv)
    for k in range(1, h):
        term = term * x / k
        coef.append(term - coef[-1])
    out = np.zeros_like(qv)
    for j in range(h):
        m = h - j
        out = out + math.comb(h, j) * qv**j * d ** (m - 1) * coef[m - 1]
    return np.exp(x) * out


def density_vertical(t: float, h: int, n: int, r_q: float = 1.0, r_w: float = 0.25,
                     method: str = "residue", spec: QuadratureSpec | None = None,
                     full_output: bool = False):
    """Probability that position ``n`` is occupied on slice ``h`` at time ``t``.

    The occupied positions are ``mu_i + h - i``. The value is the coefficient
    of ``q^n`` in the generating function obtained from the first-order
    q-difference operator, extracted on ``|q| = r_q``.

    Parameters
    ----------
    method : {'residue', 'contour'}
        ``'residue'`` evaluates the w-integral exactly by residues;
        ``'contour'`` integrates it numerically on ``|w-1| = r_w`` (only
        usable with ``r_q < 1 - r_w``-type radii keeping ``qw != 1``).

    Notes
    -----
    Near ``q = -1`` the generating function is a product of ``e^{t(q-1)}``
    with alternating partial exponential sums, so roundoff grows like
    ``e^{2t}``. Results are reliable up to roughly ``t, h <= 25``; beyond
    that the node doubling does not settle and :class:`QuadratureError`
    is raised.
    """
    if t < 0 or h < 1:
        raise ValueError("need t >= 0 and h >= 1")
    params = {"t": t, "h": h, "n": n, "r_q": r_q, "method": method}
    if n < 0:
        res = QuadResult(0j, 0.0, 0)
        return _finish(res, "density_vertical", params, full_output)
    spec = spec or QuadratureSpec(nodes=max(64, 1 << int(np.ceil(np.log2(2 * n + 8 * t + 16)))))

    if method == "residue":
        def ev(M):
            theta = 2 * np.pi * (np.arange(M) + 0.5) / M
            qv = r_q * np.exp(1j * theta)
            g = _density_generating(qv, t, h)
            return complex(np.mean(g * qv ** (-n)))
        res = _converge(ev, spec, scale_abs=False)
    elif method == "contour":
        if r_q * (1 + r_w) >= 1:
            raise ValueError("contour method needs r_q (1 + r_w) < 1")
        cq, cw = Contour.circle(0.0, r_q), Contour.circle(1.0, r_w)

        def f(qv, w):
            return ((qv * w - 1) / (w - 1)) ** h * np.exp(t * (qv - 1) * w) / ((qv - 1) * w * qv ** (n + 1))
        res = quad_multi(f, [cq, cw], spec)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish(res, "density_vertical", params, full_output)


def density_vertical_poisson(t: float, n: int) -> float:
    """Single-slice oracle: for h = 1 the position is Poisson(t)."""
    return float(stats.poisson.pmf(n, t)) if n >= 0 else 0.0


# ---------------------------------------------------------------------------
# q-moments
# ---------------------------------------------------------------------------

def _f_qtasep(z, q, t, N):
    return np.exp((q - 1) * t * z) / (1 - z) ** N


def _chain(z, q, t, N, n):
    out = np.ones_like(z)
    for j in range(n):
        out = out * _f_qtasep(q**j * z, q, t, N)
    return out


def _node_matrix(z, c, q, t, N, n):
    """A[a, b] = c_a F_n(z_a) / (z_a q^n - z_b)."""
    return (c * _chain(z, q, t, N, n))[:, None] / (z[:, None] * q**n - z[None, :])


def _perm_cycles(perm):
    seen, cycles = [False] * len(perm), []
    for i in range(len(perm)):
        if not seen[i]:
            cyc, j = [], i
            while not seen[j]:
                seen[j] = True
                cyc.append(j)
                j = perm[j]
            cycles.append(cyc)
    return cycles


def _canonical_rotation(seq):
    return min(tuple(seq[i:] + seq[:i]) for i in range(len(seq)))


def _cauchy_det_integral(parts: Sequence[int], mats: dict) -> complex:
    """Tensor quadrature of det[1/(w_i q^{n_i} - w_j)] prod g_{n_i}(w_i).

    ``mats[n]`` is the node matrix for part ``n``. Each permutation
    contributes its sign times the product of cycle traces.
    """
    ell = len(parts)
    traces: dict[tuple, complex] = {}
    total = 0j
    for perm in itertools.permutations(range(ell)):
        cycles = _perm_cycles(perm)
        sign = (-1) ** (ell - len(cycles))
        prod = 1 + 0j
        for cyc in cycles:
            key = _canonical_rotation([parts[i] for i in cyc])
            if key not in traces:
                M = mats[key[0]]
                for p in key[1:]:
                    M = M @ mats[p]
                traces[key] = complex(np.trace(M))
            prod *= traces[key]
        total += sign * prod
    return total


def _qmoment_unnested(q, t, N, k, spec):
    circle = Contour.circle(1.0, (1 - q) / 4)
    parts_list = _partitions(k, k)
    qq_k = q_pochhammer(q, q, k)

    def ev(n):
        z, c = circle.nodes(n)
        mats = {m: _node_matrix(z, c, q, t, N, m) for m in range(1, k + 1)}
        total = 0j
        for lam in parts_list:
            mult = np.prod([math.factorial(lam.count(v)) for v in set(lam)])
            total += _cauchy_det_integral(lam, mats) / mult
        return qq_k * total

    return _converge(ev, spec)


def _qmoment_nested(q, t, levels, spec, geometry):
    k = len(levels)
    fam = build_nested("around_one_q", k, q=q, geometry=geometry)
    single = [lambda z, N=N: _f_qtasep(z, q, t, N) / z for N in levels]
    res = quad_pair_product(single, lambda a, b: (a - b) / (a - q * b), fam, spec)
    pre = (-1) ** k * q ** (k * (k - 1) / 2)
    return QuadResult(pre * res.value, abs(pre) * res.error, res.nodes)


def qmoments(req: MomentRequest, mode: str = "unnested", spec: QuadratureSpec | None = None,
             geometry: str = "concentric", full_output: bool = False):
    """E q^{lambda^{(N_1)}_{N_1} + ... + lambda^{(N_k)}_{N_k}} for q-TASEP.

    ``mode='nested'`` integrates over nested circles around 1 (k <= 4).
    ``mode='unnested'`` uses identical circles ``|w-1| = (1-q)/4`` and a
    sum over partitions of k; it requires all levels equal (k <= 8).
    """
    spec = spec or QuadratureSpec()
    k = len(req.levels)
    params = {"q": req.q, "t": req.t, "levels": list(req.levels), "mode": mode}
    if k == 0:
        return _finish(QuadResult(1 + 0j, 0.0, 0), "qmoments", params, full_output)
    if mode == "nested":
        if k > 4:
            raise ValueError("nested evaluation limited to k <= 4")
        try:
            res = _qmoment_nested(req.q, req.t, req.levels, spec, geometry)
        except NestingError as exc:
            raise NestingError(f"{exc}; use mode='unnested'") from exc
        except QuadratureError as exc:
            raise QuadratureError(f"{exc}; use mode='unnested'") from exc
    elif mode == "unnested":
        if len(set(req.levels)) != 1:
            raise ValueError("unnested evaluation needs identical levels")
        if k > MAX_UNNESTED_K:
            raise ValueError(f"unnested evaluation limited to k <= {MAX_UNNESTED_K}")
        res = _qmoment_unnested(req.q, req.t, req.levels[0], k, spec)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return _finish(res, "qmoments", params, full_output)


# ---------------------------------------------------------------------------
# polymer moments
# ---------------------------------------------------------------------------

def _check_levels(levels, allow_zero=False):
    levels = tuple(int(n) for n in levels)
    lo = 0 if allow_zero else 1
    if any(n < lo for n in levels) or any(a < b for a, b in zip(levels, levels[1:])):
        raise ValueError(f"levels must be weakly decreasing and >= {lo}")
    return levels


def polymer_moments_integral(tau: float, levels: Sequence[int], spec: QuadratureSpec | None = None,
                             rho: float = 0.3, mu: float | None = None, full_output: bool = False):
    """E exp(-T_{N_1,N_1} - ... - T_{N_k,N_k}) by nested integrals around 0."""
    levels = _check_levels(levels)
    k = len(levels)
    if k > 4:
        raise ValueError("polymer moment integral limited to k <= 4")
    params = {"tau": tau, "levels": list(levels)}
    if k == 0:
        return _finish(QuadResult(1 + 0j, 0.0, 0), "polymer_moments", params, full_output)
    spec = spec or QuadratureSpec()
    fam = build_nested("around_zero_shift", k, rho=rho, mu=mu)
    single = [lambda w, N=N: np.exp(tau * w) / w**N for N in levels]
    res = quad_pair_product(single, lambda a, b: (a - b) / (a - b - 1), fam, spec)
    pre = np.exp(tau * k / 2)
    return _finish(QuadResult(pre * res.value, pre * res.error, res.nodes),
                   "polymer_moments", params, full_output)


def _resolve(vec: tuple[int, ...]) -> dict[tuple[int, ...], int]:
    """Express F at a possibly unordered vector through ordered ones.

    Uses ``F(.., m-1, m, ..) = F(.., m, m-1, ..) + F(.., m, m, ..)`` and
    drops ordered vectors ending in 0.
    """
    for i in range(len(vec) - 1):
        if vec[i] < vec[i + 1]:
            if vec[i + 1] != vec[i] + 1:
                raise ValueError(f"unexpected state {vec}")
            swapped = vec[:i] + (vec[i + 1], vec[i]) + vec[i + 2:]
            raised = vec[:i] + (vec[i + 1], vec[i + 1]) + vec[i + 2:]
            out: dict = {}
            for part in (swapped, raised):
                for key, c in _resolve(part).items():
                    out[key] = out.get(key, 0) + c
            return out
    if vec and vec[-1] == 0:
        return {}
    return {vec: 1}


def polymer_moments_ode_oracle(tau: float, levels: Sequence[int], steps: int = 2000,
                               max_states: int = 5000) -> float:
    """Polymer moments from the closed linear evolution system.

    ``dF/dtau(N) = sum_i F(N - e_i)`` on weakly decreasing vectors, with the
    boundary identity resolving unordered arguments, ``F(0; N) = 1`` iff all
    ``N_j = 1``, integrated by classical RK4 with ``steps`` steps.
    """
    levels = _check_levels(levels)
    k = len(levels)
    if k == 0:
        return 1.0
    top = levels[0]
    states = [s for s in itertools.product(range(1, top + 1), repeat=k)
              if all(a >= b for a, b in zip(s, s[1:]))]
    if len(states) > max_states:
        raise ValueError("state space too large")
    index = {s: i for i, s in enumerate(states)}
    A = np.zeros((len(states), len(states)))
    for s, i in index.items():
        for j in range(k):
            lowered = s[:j] + (s[j] - 1,) + s[j + 1:]
            for key, c in _resolve(lowered).items():
                A[i, index[key]] += c
    F = np.array([1.0 if all(v == 1 for v in s) else 0.0 for s in states])
    h = tau / steps
    for _ in range(steps):
        k1 = A @ F
        k2 = A @ (F + 0.5 * h * k1)
        k3 = A @ (F + 0.5 * h * k2)
        k4 = A @ (F + h * k3)
        F = F + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return float(np.exp(tau * k / 2) * F[index[levels]])


# ---------------------------------------------------------------------------
# q-Laplace transform
# ---------------------------------------------------------------------------

def qlaplace_series(req: LaplaceRequest, spec: QuadratureSpec | None = None,
                    tolerance: float = 1e-13, full_output: bool = False):
    """E 1/((1-q) q^{lambda_N} zeta; q)_inf as a Fredholm-type series.

    The sum over ``l`` and ``n_1, ..., n_l`` of l-fold integrals on identical
    circles ``|w-1| = (1-q)/4`` equals ``det(I + L)`` for the node matrix
    ``L[a, b] = sum_n c_a ((1-q) zeta)^n F_n(w_a) / (q^n w_a - w_b)``.
    ``ell_max`` truncates the l-sum, i.e. keeps elementary symmetric
    functions of the eigenvalues of L up to that order.

    Terms beyond ``n_max`` are dropped; the geometric tail bound on the
    discarded n-terms is returned as part of the error estimate.
    """
    q, t, N = req.q, req.t, req.N
    zeta = complex(req.zeta)
    params = {"q": q, "t": t, "N": N, "zeta": [zeta.real, zeta.imag],
              "ell_max": req.ell_max, "n_max": req.n_max}
    spec = spec or QuadratureSpec()
    circle = Contour.circle(1.0, (1 - q) / 4)
    tail = [0.0]

    def ev(nodes):
        z, c = circle.nodes(nodes)
        L = np.zeros((nodes, nodes), complex)
        chain = np.ones_like(z)
        x = (1 - q) * zeta
        norms = []
        for n in range(1, req.n_max + 1):
            chain = chain * _f_qtasep(q ** (n - 1) * z, q, t, N)
            term = (c * x**n * chain)[:, None] / (q**n * z[:, None] - z[None, :])
            L += term
            norms.append(np.abs(term).sum(axis=1).max())
            if n >= 3 and norms[-1] < 1e-3 * tolerance and norms[-1] <= norms[-2]:
                break
        else:
            r = norms[-1] / norms[-2] if norms[-2] > 0 else 0.0
            if not (r < 1 and norms[-1] * r / (1 - r) < tolerance):
                raise QuadratureError(
                    f"q-Laplace terms not decaying by n_max={req.n_max} (last norm {norms[-1]:.3e})")
        r = norms[-1] / norms[-2] if len(norms) > 1 and norms[-2] > 0 else 0.0
        tail[0] = norms[-1] * r / (1 - r) if r < 1 else np.inf
        if req.ell_max is None:
            return complex(np.linalg.det(np.eye(nodes) + L))
        eig = np.linalg.eigvals(L)
        e = np.poly(eig)  # coefficients of prod (x - eig)
        return complex(sum((-1) ** l * e[l] for l in range(0, min(req.ell_max, nodes) + 1)))

    res = _converge(ev, spec)
    res = QuadResult(res.value, res.error + tail[0], res.nodes)
    real = zeta.imag == 0
    return _finish(res, "qlaplace_series", params, full_output, real=real)


def qlaplace_n1_series(q: float, t: float, zeta: complex, n_max: int = 400) -> complex:
    """Single-level closed series sum_n ((1-q) zeta)^n e^{(q^n - 1) t} / (q; q)_n."""
    total, coef = 0j, 1 + 0j
    x = (1 - q) * complex(zeta)
    if abs(x) >= 1:
        raise ValueError("series diverges for |(1-q) zeta| >= 1")
    for n in range(n_max + 1):
        if n > 0:
            coef *= x / (1 - q**n)
        term = coef * np.exp((q**n - 1) * t)
        total += term
        if n > 5 and abs(term) < 1e-18 * max(1.0, abs(total)):
            break
    return total


def qlaplace_poisson_oracle(q: float, t: float, zeta: complex) -> complex:
    """Direct average of 1/((1-q) q^lam zeta; q)_inf over lam ~ Poisson(t)."""
    hi = int(t + 20 * np.sqrt(t) + 40)
    lam = np.arange(hi + 1)
    pmf = stats.poisson.pmf(lam, t) if t > 0 else (lam == 0).astype(float)
    vals = [1 / q_pochhammer((1 - q) * q**l * complex(zeta), q) for l in lam]
    return complex(np.dot(pmf, vals))


# ---------------------------------------------------------------------------
# Mellin-Barnes representation
# ---------------------------------------------------------------------------

def _qpoch_shift(s: np.ndarray, q: float) -> np.ndarray:
    """(q^{s+1}; q)_inf / (q; q)_inf for complex s with Re s > -1."""
    M = int(np.ceil(np.log(1e-18) / np.log(q))) + 2
    out = np.ones_like(s)
    qs = q ** (s + 1)
    for m in range(M):
        out = out * (1 - qs * q**m) / (1 - q ** (m + 1))
    return out


def mellin_barnes_n1(q: float, t: float, zeta: complex, delta: float = 0.5,
                     bulge: float | None = None, tolerance: float = 1e-12,
                     spec: QuadratureSpec | None = None, full_output: bool = False):
    """Single-level q-Laplace transform as a Mellin-Barnes integral in s.

    The contour runs upward along ``Re s = delta``, bending left to
    ``-bulge`` (default ``delta/2``, smaller when ``|(q-1) zeta|`` is tiny) near the real axis so that s = 0 stays
    on its right. The integrand decays like ``exp(-(pi - |arg X|) |Im s|)``
    with ``X = (q - 1) zeta``, so real positive ``zeta`` (``arg X = pi``)
    has no decay and is rejected; use the series forms there.
    """
    if not 0 < delta < 1:
        raise ValueError("need 0 < delta < 1")
    zeta = complex(zeta)
    params = {"q": q, "t": t, "zeta": [zeta.real, zeta.imag], "delta": delta}
    if zeta == 0:
        return _finish(QuadResult(1 + 0j, 0.0, 0), "mellin_barnes_n1", params, full_output,
                       real=True)
    X = (q - 1) * zeta
    theta = abs(np.angle(X))
    decay = np.pi - theta
    if decay < 1e-3:
        raise ValueError("Mellin-Barnes integrand does not decay: (q-1) zeta lies on the "
                         "negative real axis (arg zeta = 0)")
    logX = np.log(X)
    if bulge is None:
        # keep |X^s| = O(1) on the bulge when |X| is far from 1
        bulge = min(delta / 2, 1.0 / max(abs(np.log(abs(X))), 1e-300))
    # tail: |Gamma(-s)Gamma(1+s)| ~ 2 pi e^{-pi|y|}, |X^s| = |X|^delta e^{theta|y|}
    growth = max(1.0, abs(X) ** delta) * 2 * np.pi * np.exp(2 * t) * 4
    T = (np.log(growth / tolerance) + 2) / decay
    c = 1.0
    pts = [delta - 1j * T, delta - 0.5j * T, delta - 1j * c, -bulge + 0j,
           delta + 1j * c, delta + 0.5j * T, delta + 1j * T]
    contour = Contour.polyline(pts)

    def f(s):
        gg = -np.pi / np.sin(np.pi * s)
        return gg * np.exp(s * logX) * np.exp((q**s - 1) * t) * _qpoch_shift(s, q)

    res = quad_contour(f, contour, spec or QuadratureSpec(nodes=32))
    return _finish(res, "mellin_barnes_n1", params, full_output, real=zeta.imag == 0)

