"""Quadrature over parametrized complex contours and complex polygamma functions.

All integrals are normalized as ``(1/2 pi i) \\int f(z) dz``. Closed contours
use the trapezoid rule in the angle (exponentially convergent for analytic
integrands); open contours are unions of straight pieces integrated with
Gauss-Legendre rules. Accuracy is certified by node doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

TWO_PI_I = 2j * np.pi


class QuadratureError(RuntimeError):
    """Raised when node doubling fails to reach the requested tolerance."""


class NestingError(ValueError):
    """Raised when a nested contour family violates its containment margins."""


# ---------------------------------------------------------------------------
# contours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Contour:
    """Integration path.

    kind : {'circle', 'diameter_circle', 'vline', 'wedge', 'polyline'}
        ``circle`` uses ``center`` and ``radius``; ``diameter_circle`` the
        real interval ``(left, right)``; ``vline`` the abscissa ``re`` and
        ``truncation``; ``wedge`` a ``vertex``, a ``direction`` angle, a
        ``half_angle`` and ``truncation`` (ray length); ``polyline`` a list of
        ``points`` traversed in order.
    """
    kind: str
    center: complex = 0.0
    radius: float = 1.0
    left: float = 0.0
    right: float = 0.0
    re: float = 0.0
    truncation: float = 10.0
    vertex: complex = 0.0
    direction: float = 0.0
    half_angle: float = math.pi / 3
    points: tuple = ()

    def __post_init__(self):
        if self.kind in ("circle",) and self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.kind == "diameter_circle" and not self.right > self.left:
            raise ValueError("need right > left")
        if self.kind in ("vline", "wedge") and self.truncation <= 0:
            raise ValueError("truncation must be positive")
        if self.kind not in ("circle", "diameter_circle", "vline", "wedge", "polyline"):
            raise ValueError(f"unknown contour kind {self.kind!r}")

    @classmethod
    def circle(cls, center: complex, radius: float) -> "Contour":
        return cls("circle", center=complex(center), radius=float(radius))

    @classmethod
    def diameter(cls, left: float, right: float) -> "Contour":
        return cls("diameter_circle", left=float(left), right=float(right))

    @classmethod
    def vline(cls, re: float, truncation: float) -> "Contour":
        return cls("vline", re=float(re), truncation=float(truncation))

    @classmethod
    def wedge(cls, vertex: complex, direction: float, half_angle: float,
              truncation: float) -> "Contour":
        return cls("wedge", vertex=complex(vertex), direction=float(direction),
                   half_angle=float(half_angle), truncation=float(truncation))

    @classmethod
    def polyline(cls, points: Sequence[complex]) -> "Contour":
        return cls("polyline", points=tuple(complex(p) for p in points))

    @property
    def closed(self) -> bool:
        return self.kind in ("circle", "diameter_circle")

    @property
    def circle_params(self) -> tuple[complex, float]:
        if self.kind == "circle":
            return self.center, self.radius
        if self.kind == "diameter_circle":
            return complex((self.left + self.right) / 2), (self.right - self.left) / 2
        raise TypeError("not a circle")

    def segments(self) -> list[tuple[complex, complex]]:
        if self.kind == "vline":
            T = self.truncation
            return [(complex(self.re, -T), complex(self.re, T))]
        if self.kind == "wedge":
            a1 = self.direction - self.half_angle
            a2 = self.direction + self.half_angle
            # incoming ray lies in the lower half plane
            if math.sin(a1) > math.sin(a2):
                a1, a2 = a2, a1
            v, T = self.vertex, self.truncation
            return [(v + T * np.exp(1j * a1), v), (v, v + T * np.exp(1j * a2))]
        if self.kind == "polyline":
            p = self.points
            return [(p[i], p[i + 1]) for i in range(len(p) - 1)]
        raise TypeError("closed contour has no segments")

    def nodes(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Nodes ``z`` and weights ``w`` with ``sum(w f(z)) ~ (1/2 pi i) \\int f dz``.

        For open contours ``n`` is the number of Gauss-Legendre nodes per segment.
        """
        if self.closed:
            c, R = self.circle_params
            theta = 2 * np.pi * np.arange(n) / n
            z = c + R * np.exp(1j * theta)
            return z, (z - c) / n
        x, wx = np.polynomial.legendre.leggauss(n)
        zs, ws = [], []
        for a, b in self.segments():
            half = (b - a) / 2
            zs.append((a + b) / 2 + half * x)
            ws.append(wx * half / TWO_PI_I)
        return np.concatenate(zs), np.concatenate(ws)

    def distance_to(self, pts: np.ndarray, n: int = 2048) -> float:
        """Minimum distance from sampled contour points to a set of points."""
        z, _ = self.nodes(n if self.closed else 256)
        pts = np.atleast_1d(np.asarray(pts, dtype=complex))
        return float(np.min(np.abs(z[:, None] - pts[None, :])))


@dataclass
class QuadratureSpec:
    nodes: int = 64
    tolerance: float = 1e-12
    max_doublings: int = 8
    # accept a stalled sequence once its change sits below this level
    roundoff_floor: float = 1e-9

    def __post_init__(self):
        if self.nodes < 16 or self.nodes & (self.nodes - 1):
            raise ValueError("nodes must be a power of two, at least 16")


@dataclass
class QuadResult:
    value: complex
    error: float
    nodes: int

    def __iter__(self):
        return iter((self.value, self.error))


def _converge(evaluate: Callable[[int], complex], spec: QuadratureSpec, scale_abs=True) -> QuadResult:
    n = spec.nodes
    prev = evaluate(n)
    last_err, stalls = math.inf, 0
    for _ in range(spec.max_doublings):
        n *= 2
        cur = evaluate(n)
        err = abs(cur - prev)
        scale = max(1.0, abs(cur)) if scale_abs else 1.0
        if err <= spec.tolerance * scale:
            return QuadResult(cur, err, n)
        # cancellation noise: no longer halving under refinement
        stalls = stalls + 1 if err > 0.5 * last_err else 0
        if stalls >= 2 and max(err, last_err) <= spec.roundoff_floor * scale:
            return QuadResult(cur, max(err, last_err), n)
        last_err = err
        prev = cur
    raise QuadratureError(f"no convergence after {spec.max_doublings} doublings "
                          f"(last delta {err:.3e} at {n} nodes)")


def quad_contour(f: Callable[[np.ndarray], np.ndarray], c: Contour,
                 spec: QuadratureSpec | None = None) -> QuadResult:
    """(1/2 pi i) \\int_c f(z) dz with node-doubling error control.

    ``f`` must accept a complex array. The reported error is the change under
    the last doubling.
    """
    spec = spec or QuadratureSpec()

    def ev(n):
        z, w = c.nodes(n)
        return complex(np.sum(w * f(z)))

    return _converge(ev, spec)


@dataclass
class NestedFamily:
    contours: list[Contour]
    separation_margin: float = 0.0
    kind: str = ""
    params: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.contours)


def quad_multi(f: Callable[..., np.ndarray], fam: NestedFamily | Sequence[Contour],
               spec: QuadratureSpec | None = None, chunk: int = 64) -> QuadResult:
    """Tensor-product quadrature of a k-variable integrand (k <= 4).

    ``f(z1, ..., zk)`` receives broadcastable arrays. All variables share one
    node count, doubled until the value settles. The first variable is
    processed in chunks to bound memory.
    """
    spec = spec or QuadratureSpec()
    contours = fam.contours if isinstance(fam, NestedFamily) else list(fam)
    k = len(contours)
    if k > 4:
        raise ValueError("tensor quadrature limited to k <= 4")

    def ev(n):
        grids = [c.nodes(n) for c in contours]
        total = 0j
        z0, w0 = grids[0]
        for s in range(0, len(z0), chunk):
            args, wt = [], None
            zs = [z0[s:s + chunk]] + [g[0] for g in grids[1:]]
            ws = [w0[s:s + chunk]] + [g[1] for g in grids[1:]]
            for d in range(k):
                shape = [1] * k
                shape[d] = -1
                args.append(zs[d].reshape(shape))
                wd = ws[d].reshape(shape)
                wt = wd if wt is None else wt * wd
            total += complex(np.sum(wt * f(*args)))
        return total

    return _converge(ev, spec)


def quad_pair_product(single: Sequence[Callable[[np.ndarray], np.ndarray]],
                      pair: Callable[[np.ndarray, np.ndarray], np.ndarray],
                      fam: NestedFamily | Sequence[Contour],
                      spec: QuadratureSpec | None = None,
                      max_work: float = 1.1e9) -> QuadResult:
    """Quadrature of ``prod_j g_j(z_j) prod_{A<B} P(z_A, z_B)``.

    The tensor sum is contracted with ``numpy.einsum``. With every pair
    coupled the contraction still costs about ``nodes**k`` for k = 4 (three
    for k = 3 via matrix products), so node counts with ``nodes**k`` above
    ``max_work`` raise :class:`QuadratureError` instead of running.
    """
    spec = spec or QuadratureSpec()
    contours = fam.contours if isinstance(fam, NestedFamily) else list(fam)
    k = len(contours)
    letters = "abcdefgh"[:k]

    def ev(n):
        if float(n) ** k > max_work:
            raise QuadratureError(f"not converged before {n} nodes per contour, where the "
                                  f"{k}-fold tensor sum exceeds the work limit {max_work:.1e}")
        grids = [c.nodes(n) for c in contours]
        ops, subs = [], []
        for j in range(k):
            z, w = grids[j]
            ops.append(w * single[j](z))
            subs.append(letters[j])
        for A in range(k):
            for B in range(A + 1, k):
                ops.append(pair(grids[A][0][:, None], grids[B][0][None, :]))
                subs.append(letters[A] + letters[B])
        expr = ",".join(subs) + "->"
        return complex(np.einsum(expr, *ops, optimize="greedy"))

    return _converge(ev, spec)


# ---------------------------------------------------------------------------
# nested families
# ---------------------------------------------------------------------------

def _validate_scaled(contours, scale, shift, margin_req, exclude=()):
    """Check that contour j strictly contains ``scale*C_B + shift`` for all B > j."""
    margin = np.inf
    k = len(contours)
    for j in range(k):
        cj, Rj = contours[j].circle_params
        for B in range(j + 1, k):
            cB, RB = contours[B].circle_params
            c_img = scale * cB + shift
            R_img = abs(scale) * RB
            gap = Rj - (abs(c_img - cj) + R_img)
            margin = min(margin, gap)
        for p in exclude:
            margin = min(margin, abs(p - cj) - Rj)
    if not margin > margin_req:
        raise NestingError(f"nesting margin {margin:.3e} below required {margin_req:.3e}")
    return float(margin)


def build_nested(kind: str, k: int, q: float | None = None, delta: float = 0.1,
                 mu: float | None = None, rho: float = 0.3, geometry: str = "concentric",
                 margin: float = 0.0) -> NestedFamily:
    """Construct and validate a nested contour family.

    ``around_one_q``: contours ``C_1, ..., C_k`` around 1 excluding 0 with
    ``C_A`` containing ``q C_B`` for ``A < B``. ``geometry='diameter'`` uses
    diameters ``[l_j, 1+delta]`` with ``l_j = delta q^(k-j) (1-(k-j) mu)``;
    ``geometry='concentric'`` uses circles centred at 1 with radii chosen to
    equalize the separation from 0 and from the scaled inner contours.

    ``around_zero_shift``: circles with diameters ``[-rho, rho+(k-j)(1+mu)]``
    around 0 with ``C_A`` containing ``C_B + 1`` for ``A < B``.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    if kind == "around_one_q":
        if q is None or not 0 < q < 1:
            raise ValueError("around_one_q needs 0 < q < 1")
        if geometry == "diameter":
            mu = min(0.05, 0.5 / (k - 1)) if mu is None and k > 1 else (mu or 0.05)
            if (k - 1) * mu >= 1:
                raise NestingError("(k-1) mu >= 1: left endpoints would cross 0")
            cs = [Contour.diameter(delta * q ** (k - j) * (1 - (k - j) * mu), 1 + delta)
                  for j in range(1, k + 1)]
        elif geometry == "concentric":
            D = 1 + (1 - q ** (k - 1)) / (1 - q) if k > 1 else 1.0
            m = q ** (k - 1) / (D + q ** (k - 1)) if k > 1 else 0.5
            radii = [m]
            for _ in range(k - 1):
                radii.append((1 - q) + q * radii[-1] + m)
            cs = [Contour.circle(1.0, r) for r in reversed(radii)]
        else:
            raise ValueError(f"unknown geometry {geometry!r}")
        got = _validate_scaled(cs, q, 0.0, margin, exclude=(0.0,))
        return NestedFamily(cs, got, kind, {"q": q, "geometry": geometry})
    if kind == "around_zero_shift":
        mu = 0.5 if mu is None else mu
        cs = [Contour.diameter(-rho, rho + (k - j) * (1 + mu)) for j in range(1, k + 1)]
        got = _validate_scaled(cs, 1.0, 1.0, margin)
        return NestedFamily(cs, got, kind, {"rho": rho, "mu": mu})
    raise ValueError(f"unknown nesting kind {kind!r}")


# ---------------------------------------------------------------------------
# log-gamma and polygamma functions
# ---------------------------------------------------------------------------

# B_2, B_4, ..., B_20
_BERN = np.array([1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6,
                  -3617 / 510, 43867 / 798, -174611 / 330])
_SHIFT = 16.0


def _shifted(x):
    x = np.asarray(x, dtype=complex)
    if np.any((x.imag == 0) & (x.real <= 0) & (x.real == np.round(x.real))):
        raise ValueError("pole of the gamma function")
    n = np.maximum(0, np.ceil(_SHIFT - x.real)).astype(int)
    return x, n


def loggamma(x) -> np.ndarray:
    """Principal branch of log Gamma via upward recurrence and Stirling's series.

    On the negative real axis the sign of a zero imaginary part selects the
    side of the branch cut, as for ``scipy.special.loggamma``.
    """
    x = np.asarray(x, dtype=complex)
    # below the cut: use conjugate symmetry, since x + k would drop the sign of -0j
    lower = (x.imag == 0) & np.signbit(x.imag)
    x = np.where(lower, np.conj(x), x)
    x, n = _shifted(x)
    nmax = int(n.max()) if n.size else 0
    corr = np.zeros_like(x)
    for k in range(nmax):
        mask = k < n
        corr = corr + np.where(mask, np.log(np.where(mask, x + k, 1.0)), 0.0)
    z = x + n
    zi = 1 / z
    zi2 = zi * zi
    series = np.zeros_like(z)
    p = zi
    for k, B in enumerate(_BERN, start=1):
        series = series + B / (2 * k * (2 * k - 1)) * p
        p = p * zi2
    out = (z - 0.5) * np.log(z) - z + 0.5 * np.log(2 * np.pi) + series - corr
    return np.where(lower, np.conj(out), out)


def digamma(x) -> np.ndarray:
    x, n = _shifted(x)
    nmax = int(n.max()) if n.size else 0
    corr = np.zeros_like(x)
    for k in range(nmax):
        corr = corr + np.where(k < n, 1 / (x + k), 0.0)
    z = x + n
    zi2 = 1 / (z * z)
    series = np.zeros_like(z)
    p = zi2
    for k, B in enumerate(_BERN, start=1):
        series = series + B / (2 * k) * p
        p = p * zi2
    return np.log(z) - 0.5 / z - series - corr


def trigamma(x) -> np.ndarray:
    x, n = _shifted(x)
    nmax = int(n.max()) if n.size else 0
    corr = np.zeros_like(x)
    for k in range(nmax):
        corr = corr + np.where(k < n, 1 / (x + k) ** 2, 0.0)
    z = x + n
    zi = 1 / z
    zi2 = zi * zi
    series = np.zeros_like(z)
    p = zi2 * zi
    for B in _BERN:
        series = series + B * p
        p = p * zi2
    return zi + 0.5 * zi2 + series + corr


def tetragamma(x) -> np.ndarray:
    """Second derivative of the digamma function."""
    x, n = _shifted(x)
    nmax = int(n.max()) if n.size else 0
    corr = np.zeros_like(x)
    for k in range(nmax):
        corr = corr + np.where(k < n, 2 / (x + k) ** 3, 0.0)
    z = x + n
    zi = 1 / z
    zi2 = zi * zi
    series = np.zeros_like(z)
    p = zi2 * zi2
    for k, B in enumerate(_BERN, start=1):
        series = series + (2 * k + 1) * B * p
        p = p * zi2
    return -zi2 - zi2 * zi - series - corr


def gamma_suite(x):
    """(log Gamma, digamma, trigamma) at complex ``x``."""
    out = (loggamma(x), digamma(x), trigamma(x))
    if np.ndim(x) == 0:
        return tuple(complex(v) for v in out)
    return out


def gamma(x) -> np.ndarray:
    return np.exp(loggamma(x))
