"""Asymptotic quantities: limit shapes, Lyapunov exponents, KPZ constants.

The Laplace-transform and Tracy-Widom series are Fredholm expansions. After
discretizing every contour on a shared grid, the inner variables (``s`` for
the polymer transform, ``b`` for the Airy series) are summed out, leaving a
single node matrix whose elementary symmetric functions of eigenvalues give
the truncated series and whose ``det(I + M)`` gives the full one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .contour import (Contour, QuadratureError, QuadratureSpec, QuadResult, _converge, digamma,
                      loggamma, tetragamma, trigamma)
from .rng import as_generator

__all__ = [
    "ShapePoint", "RegionLabel", "KPZConstants", "limit_shape_density", "empirical_density",
    "lyapunov_semidiscrete", "lyapunov_continuous", "kpz_constants", "laplace_fredholm",
    "lognormal_laplace", "tracy_widom_cdf", "airy_kernel_cdf",
]

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ShapePoint:
    tau: float
    nu: float
    eta: float

    def __post_init__(self):
        if not (self.tau > 0 and self.nu > 0 and self.eta > 0):
            raise ValueError("tau, nu, eta must be positive")


@dataclass(frozen=True)
class RegionLabel:
    label: str
    rho: float
    boundary: bool = False
    z_c: complex | None = None


@dataclass(frozen=True)
class KPZConstants:
    f: float
    s: float
    g: float


def _series_value(M: np.ndarray, ell_max: int | None) -> complex:
    """1 + sum_{l <= ell_max} e_l(eig M); ``None`` gives det(I + M)."""
    if ell_max is None:
        return complex(np.linalg.det(np.eye(len(M)) + M))
    coeffs = np.poly(np.linalg.eigvals(M))
    return complex(sum((-1) ** l * coeffs[l] for l in range(min(ell_max, len(M)) + 1)))


# ---------------------------------------------------------------------------
# limit shape
# ---------------------------------------------------------------------------

def limit_shape_density(p: ShapePoint | tuple) -> RegionLabel:
    """Classify ``(tau, nu, eta)`` and return the limiting vertical-lozenge density.

    In the liquid region ``rho = arg(z_c) / pi`` with ``z_c`` the root in the
    upper half plane of ``tau z (z-1) + eta z - nu (z-1) = 0``.
    """
    if not isinstance(p, ShapePoint):
        p = ShapePoint(*p)
    tau, nu, eta = p.tau, p.nu, p.eta
    st, se, sn = math.sqrt(tau), math.sqrt(eta), math.sqrt(nu)
    discr = (nu - (st - se) ** 2) * (nu - (st + se) ** 2)
    scale = max(1.0, nu, (st + se) ** 2) ** 2
    if abs(discr) <= BOUNDARY_TOL * scale:
        z = -(eta - tau - nu) / (2 * tau)
        rho = 0.0 if z > 0 else 1.0
        return RegionLabel("liquid", rho, boundary=True, z_c=complex(z))
    if discr < 0:
        roots = np.roots([tau, eta - tau - nu, nu])
        z_c = complex(roots[np.argmax(roots.imag)])
        return RegionLabel("liquid", float(np.angle(z_c) / np.pi), z_c=z_c)
    if sn > st + se:
        return RegionLabel("frozen_empty", 0.0)
    if tau > eta:
        return RegionLabel("frozen_empty", 0.0)
    return RegionLabel("frozen_full", 1.0)


def empirical_density(p: ShapePoint | tuple, L: int, replicas: int, rng=None,
                      window: int = 2) -> tuple[float, float]:
    """Monte Carlo vertical-lozenge density near ``(nu L, eta L)`` at time ``tau L``.

    Runs the independent Schur dynamics of depth ``ceil(eta L) + window`` and
    averages the occupation indicator over a ``(2 window + 1)^2`` block of
    positions and slices, clipped to the lattice. Returns ``(mean, standard error over replicas)``.
    """
    from .dynamics import evolve_schur_independent

    if not isinstance(p, ShapePoint):
        p = ShapePoint(*p)
    rng = as_generator(rng)
    n0, h0 = int(math.floor(p.nu * L)), int(math.floor(p.eta * L))
    hs = [h for h in range(h0 - window, h0 + window + 1) if h >= 1]
    # particle positions are nonnegative; the window is clipped at the edge
    ns = np.arange(max(n0 - window, 0), n0 + window + 1)
    depth = max(hs)
    vals = np.empty(replicas)
    for r in range(replicas):
        st = evolve_schur_independent(depth, p.tau * L, rng)
        occ = 0
        for h in hs:
            lam = np.asarray(st.rows[h - 1])
            pos = lam + h - np.arange(1, h + 1)
            occ += np.isin(ns, pos).sum()
        vals[r] = occ / (len(hs) * len(ns))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0


# ---------------------------------------------------------------------------
# Lyapunov exponents and KPZ constants
# ---------------------------------------------------------------------------

def lyapunov_semidiscrete(p: int) -> float:
    """gamma_p = min over z > 0 of p^2/2 + p z - sum_{m<p} log(z + m)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    m = np.arange(p)

    def dH(z):
        return p - np.sum(1.0 / (z + m))

    lo, hi = 1e-14, 1.0
    while dH(hi) < 0:
        hi *= 2
    z0 = optimize.brentq(dH, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return float(p * p / 2 + p * z0 - np.sum(np.log(z0 + m)))


def lyapunov_continuous(p: int) -> float:
    if p < 1:
        raise ValueError("p must be >= 1")
    return (p**3 - p) / 24


def kpz_constants(kappa: float) -> KPZConstants:
    """Minimum of ``kappa s - digamma(s)`` over s > 0 and the curvature ``-psi''``."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")

    def eq(s):
        return float(trigamma(s).real) - kappa

    lo, hi = 1e-6, 1.0
    while eq(lo) < 0:
        lo /= 10
    while eq(hi) > 0:
        hi *= 2
    s = optimize.brentq(eq, lo, hi, xtol=1e-14, rtol=1e-15)
    f = kappa * s - float(digamma(s).real)
    g = -float(tetragamma(s).real)
    return KPZConstants(f=f, s=s, g=g)


# ---------------------------------------------------------------------------
# Laplace transform of the polymer partition function
# ---------------------------------------------------------------------------

def _vline_truncation(t, N, delta2, tol):
    """Height T past which the s-integrand is below ``tol``.

    On ``Re s = delta2`` the integrand behaves like
    ``exp(-t y^2 / 2 + (N/2 - 1) pi |y|)``.
    """
    a, b = t / 2, max(0.0, (N / 2 - 1) * np.pi)
    c = math.log(1e4 / tol)
    return (b + math.sqrt(b * b + 4 * a * c)) / (2 * a) + 1.0


def laplace_fredholm(u: float, t: float, N: int, ell_max: int | None = 3,
                     delta1: float | None = None, delta2: float = 0.5,
                     spec: QuadratureSpec | None = None, segments: int = 8,
                     full_output: bool = False):
    """E exp(-u exp(-T_{N,N}(t))) from its Fredholm-type series.

    Each of the ``l``-fold ``v``-circle and ``s``-line integrals carries a
    ``1/(2 pi i)`` normalization. The ``s`` variables are summed out first,
    giving the node matrix
    ``L[a, b] = c_a sum_s c_s G(v_a, s) / (v_a + s - v_b)``, so the
    ``l``-th term equals ``e_l(eig L)``.
    """
    if not 0 < delta2 < 1:
        raise ValueError("need 0 < delta2 < 1")
    delta1 = delta2 / 4 if delta1 is None else delta1
    if not 0 < delta1 < delta2 / 2:
        raise ValueError("need 0 < delta1 < delta2 / 2")
    if u <= 0 or t <= 0 or N < 1:
        raise ValueError("need u > 0, t > 0, N >= 1")
    spec = spec or QuadratureSpec(nodes=32, tolerance=1e-10)
    T = _vline_truncation(t, N, delta2, spec.tolerance)
    pts = delta2 + 1j * np.linspace(-T, T, segments + 1)
    sline = Contour.polyline(list(pts))
    vcirc = Contour.circle(0.0, delta1)
    logu = math.log(u)

    def ev(n):
        v, cv = vcirc.nodes(n)
        s, cs = sline.nodes(n)
        V, S = v[:, None], s[None, :]
        gg = -np.pi / np.sin(np.pi * S)
        logG = N * (loggamma(V) - loggamma(S + V)) + S * logu + t * (S * S + 2 * S * V) / 2
        G = cs[None, :] * gg * np.exp(logG)
        L = np.empty((n, n), complex)
        for i in range(n):
            L[i] = cv[i] * (G[i] @ (1.0 / (v[i] + s[:, None] - v[None, :])))
        return _series_value(L, ell_max)

    res = _converge(ev, spec)
    value = res.value
    if abs(value.imag) > max(1e-8, 10 * res.error):
        raise QuadratureError(f"laplace_fredholm: imaginary part {value.imag:.3e}")
    if full_output:
        return value.real, res.error
    return value.real


def lognormal_laplace(u: float, t: float) -> float:
    """Independent oracle for N = 1: E exp(-u e^{B(t)}) by real quadrature."""
    from scipy import integrate

    sd = math.sqrt(t)

    def integrand(x):
        return math.exp(-x * x / (2 * t) - u * math.exp(x)) / (sd * math.sqrt(2 * math.pi))

    val, _ = integrate.quad(integrand, -40 * sd, 40 * sd, limit=400, epsabs=1e-14, epsrel=1e-13)
    return val


# ---------------------------------------------------------------------------
# Tracy-Widom distribution
# ---------------------------------------------------------------------------

def _wedge_truncation(g, r, tol):
    # |exp(-g a^3/6 + r a)| <= exp(-g x^3/6 + |r| x) along the rays
    f = lambda x: g * x**3 / 6 - abs(r) * x - math.log(1e4 / tol)
    hi = 1.0
    while f(hi) < 0:
        hi *= 1.5
    return optimize.brentq(f, 0.0, hi) + 0.5


def tracy_widom_cdf(r: float, g: float = 2.0, ell_max: int | None = None,
                    offset: float = 0.5, spec: QuadratureSpec | None = None,
                    full_output: bool = False):
    """F_GUE((g/2)^{-1/3} r) from the Airy-type contour series.

    The ``a`` contour is the wedge through ``-offset`` opening to the left
    with rays at angles ``+-2 pi/3``; the ``b`` contour is the wedge through
    ``+offset`` opening to the right. With ``alpha(a) = exp(-g a^3/6 + r a)``
    the ``b``-integrals are summed into
    ``M[a, a'] = c_a alpha(a) sum_b c_b / (beta(b) (a - b) (b - a'))``
    and the series equals ``det(I + M)``; ``ell_max`` truncates it.
    """
    if not g > 0:
        raise ValueError("g must be positive")
    spec = spec or QuadratureSpec(nodes=32, tolerance=1e-12)
    T = _wedge_truncation(g, r, 1e-16)
    ca = Contour.wedge(-offset, np.pi, np.pi / 3, T)
    cb = Contour.wedge(offset, 0.0, np.pi / 3, T)

    def ev(n):
        a, wa = ca.nodes(n)
        b, wb = cb.nodes(n)
        alpha = np.exp(-g * a**3 / 6 + r * a)
        ibeta = np.exp(g * b**3 / 6 - r * b)
        left = (wa * alpha)[:, None] / (a[:, None] - b[None, :])
        right = (wb * ibeta)[:, None] / (b[:, None] - a[None, :])
        return _series_value(left @ right, ell_max)

    res = _converge(ev, spec, scale_abs=False)
    value = res.value
    if abs(value.imag) > max(1e-9, 10 * res.error):
        raise QuadratureError(f"tracy_widom_cdf: imaginary part {value.imag:.3e}")
    if full_output:
        return value.real, res.error
    return value.real


def airy_kernel_cdf(x: float, nodes: int = 80, length: float = 16.0) -> float:
    """Independent oracle: F_GUE(x) = det(I - K_Airy) on (x, inf) by Gauss-Legendre."""
    z, w = np.polynomial.legendre.leggauss(nodes)
    y = x + (z + 1) * length / 2
    w = w * length / 2
    ai, aip, _, _ = special.airy(y)
    X, Y = y[:, None], y[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (ai[:, None] * aip[None, :] - aip[:, None] * ai[None, :]) / (X - Y)
    K[np.diag_indices(nodes)] = aip**2 - y * ai**2
    sw = np.sqrt(w)
    return float(np.linalg.det(np.eye(nodes) - sw[:, None] * K * sw[None, :]))
