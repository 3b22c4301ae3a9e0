"""Schur and q-Whittaker data: branching, dimensions, stochastic links, Hahn weights.

Signatures are plain tuples of integers ``(l_1 >= ... >= l_N)`` and
Gelfand-Tsetlin patterns are tuples of signatures of lengths ``1..N``.
Counting and probability computations use :class:`fractions.Fraction`;
complex evaluation uses numpy.
"""

from __future__ import annotations

import itertools
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

log = logging.getLogger(__name__)

Signature = tuple[int, ...]
GTPattern = tuple[Signature, ...]

COALESCENCE_REL = 1e-6
POCHHAMMER_TOL = 1e-16


class HexagonError(ValueError):
    pass


def as_signature(parts: Sequence[int]) -> Signature:
    """Validate and freeze a weakly decreasing integer sequence."""
    sig = tuple(int(p) for p in parts)
    if any(sig[i] < sig[i + 1] for i in range(len(sig) - 1)):
        raise ValueError(f"signature must be weakly decreasing, got {sig}")
    return sig


def interlaces(mu: Sequence[int], lam: Sequence[int]) -> bool:
    """True when ``mu`` (length N-1) interlaces with ``lam`` (length N)."""
    if len(mu) != len(lam) - 1:
        return False
    return all(lam[i + 1] <= mu[i] <= lam[i] for i in range(len(mu)))


def check_pattern(rows: Sequence[Sequence[int]]) -> GTPattern:
    """Validate a Gelfand-Tsetlin pattern given bottom row first."""
    pat = tuple(as_signature(r) for r in rows)
    for h, row in enumerate(pat, start=1):
        if len(row) != h:
            raise ValueError(f"row {h} has length {len(row)}")
        if h > 1 and not interlaces(pat[h - 2], row):
            raise ValueError(f"rows {h - 1} and {h} do not interlace")
    return pat


def hexagon_signature(a: int, b: int, c: int) -> Signature:
    """Top row ``(b^a, 0^c)`` of the pattern encoding an a,b,c hexagon."""
    if min(a, b, c) < 0:
        raise HexagonError("hexagon sides must be nonnegative")
    return (b,) * a + (0,) * c


# ---------------------------------------------------------------------------
# Schur functions
# ---------------------------------------------------------------------------

def interlacing_ranges(lam: Signature) -> list[range]:
    """Admissible values of each mu_i for mu interlacing with lam."""
    return [range(lam[i + 1], lam[i] + 1) for i in range(len(lam) - 1)]


def schur_branch(lam: Sequence[int], N: int | None = None) -> list[tuple[Signature, int]]:
    """All mu interlacing with lam, paired with the exponent |lam| - |mu| of z_N."""
    lam = as_signature(lam)
    if N is not None and N != len(lam):
        raise ValueError("N must equal the signature length")
    if not lam:
        return []
    total = sum(lam)
    return [(mu, total - sum(mu)) for mu in itertools.product(*interlacing_ranges(lam))]


def _schur_branching_value(lam: Signature, z: tuple[complex, ...]) -> complex:
    @lru_cache(maxsize=None)
    def rec(sig: Signature, n: int) -> complex:
        if n == 0:
            return 1.0
        zn = z[n - 1]
        total = sum(sig)
        acc = 0.0
        for mu in itertools.product(*interlacing_ranges(sig)):
            acc += rec(mu, n - 1) * zn ** (total - sum(mu))
        return acc

    return complex(rec(lam, len(lam)))


def schur_eval(lam: Sequence[int], z: Sequence[complex], N: int | None = None) -> complex:
    """Evaluate s_lam(z_1, ..., z_N).

    Uses the ratio of alternants unless two arguments nearly coincide, in
    which case the interlacing branching sum is used instead.
    """
    lam = as_signature(lam)
    z = tuple(complex(x) for x in z)
    N = len(lam) if N is None else N
    if len(z) != N or len(lam) != N:
        raise ValueError("need len(z) == len(lambda) == N")
    if N == 0:
        return 1.0 + 0j
    if any(x == 0 for x in z):
        raise ValueError("arguments must be nonzero")
    shift = min(0, lam[-1])
    if shift < 0:
        # negative parts: factor out a power of z_1...z_N
        prod = np.prod(np.asarray(z)) ** shift
        return prod * schur_eval(tuple(p - shift for p in lam), z, N)
    zz = np.asarray(z)
    scale = np.max(np.abs(zz))
    gaps = np.abs(zz[:, None] - zz[None, :])
    gaps[np.diag_indices(N)] = np.inf
    if np.min(gaps) < COALESCENCE_REL * scale:
        return _schur_branching_value(lam, z)
    j = np.arange(1, N + 1)
    num = np.linalg.det(zz[:, None] ** (N + np.asarray(lam) - j)[None, :])
    den = np.linalg.det(zz[:, None] ** (N - j)[None, :])
    return complex(num / den)


def schur_dim(lam: Sequence[int], N: int | None = None) -> Fraction:
    """Weyl dimension s_lam(1, ..., 1) as an exact rational."""
    lam = as_signature(lam)
    if N is not None and N != len(lam):
        raise ValueError("N must equal the signature length")
    out = Fraction(1)
    n = len(lam)
    for i in range(n):
        for j in range(i + 1, n):
            out *= Fraction((lam[i] - i) - (lam[j] - j), j - i)
    return out


def count_gt_patterns(lam: Sequence[int]) -> int:
    """Number of GT patterns with top row lam, by direct recursion."""

    @lru_cache(maxsize=None)
    def rec(sig: Signature) -> int:
        if len(sig) <= 1:
            return 1
        return sum(rec(mu) for mu in itertools.product(*interlacing_ranges(sig)))

    return rec(as_signature(lam))


def macmahon_count(a: int, b: int, c: int) -> int:
    """Number of lozenge tilings of the a,b,c hexagon (MacMahon product)."""
    if min(a, b, c) < 0:
        raise HexagonError("hexagon sides must be nonnegative")
    out = Fraction(1)
    for i in range(1, a + 1):
        for j in range(1, b + 1):
            for k in range(1, c + 1):
                out *= Fraction(i + j + k - 1, i + j + k - 2)
    assert out.denominator == 1
    return int(out)


# ---------------------------------------------------------------------------
# Hahn slice law
# ---------------------------------------------------------------------------

def hahn_weight(a: int, b: int, c: int, h: int, x: int) -> Fraction:
    """Single-particle weight of the horizontal slice ensemble at height h."""
    if not 0 <= x <= b + h - 1:
        return Fraction(0)
    f = math.factorial
    num = f(b + c - 1 - x) * f(a - h + x)
    den = f(x) * f(b + h - 1 - x)
    return Fraction(num, den)


def _hahn_unnormalized(a, b, c, h, x) -> Fraction:
    out = Fraction(1)
    for i in range(h):
        out *= hahn_weight(a, b, c, h, x[i])
        for j in range(i + 1, h):
            out *= (x[i] - x[j]) ** 2
    return out


@lru_cache(maxsize=256)
def _hahn_partition(a: int, b: int, c: int, h: int) -> Fraction:
    total = Fraction(0)
    for sub in itertools.combinations(range(b + h - 1, -1, -1), h):
        total += _hahn_unnormalized(a, b, c, h, sub)
    return total


def hahn_pmf(a: int, b: int, c: int, h: int, x: Sequence[int]) -> Fraction:
    """Exact probability of slice positions x at height h of a uniform a,b,c tiling.

    Parameters
    ----------
    a, b, c : int
        Hexagon sides; the tiling's top row is ``(b^a, 0^c)``.
    h : int
        Slice height, ``0 <= h <= min(a, c)``.
    x : sequence of int
        Shifted coordinates ``x_i = mu_i + h - i``, strictly decreasing.
    """
    if not 0 <= h <= min(a, c):
        raise ValueError(f"slice height {h} outside [0, {min(a, c)}]")
    x = tuple(int(v) for v in x)
    if len(x) != h:
        raise ValueError("need exactly h positions")
    if h == 0:
        return Fraction(1)
    if any(x[i] <= x[i + 1] for i in range(h - 1)) or x[-1] < 0 or x[0] > b + h - 1:
        return Fraction(0)
    return _hahn_unnormalized(a, b, c, h, x) / _hahn_partition(a, b, c, h)


def hahn_support(b: int, h: int) -> Iterator[tuple[int, ...]]:
    """All strictly decreasing h-tuples in [0, b+h-1]."""
    return itertools.combinations(range(b + h - 1, -1, -1), h)


# ---------------------------------------------------------------------------
# q-series primitives
# ---------------------------------------------------------------------------

def _check_q(q) -> None:
    if abs(q) >= 1:
        raise ValueError("need |q| < 1")


def q_pochhammer(a: complex, q: complex, n: int | float | None = None) -> complex:
    """(a; q)_n = prod_{m<n} (1 - a q^m); ``n=None`` or ``inf`` gives the infinite product.

    The infinite product stops once ``|a q^m| < 1e-16``; the geometric tail
    bound ``|a q^m| / (1 - |q|)`` is logged at debug level.
    """
    _check_q(q)
    if n is not None and not (isinstance(n, float) and math.isinf(n)):
        out = 1.0
        for m in range(int(n)):
            out *= 1 - a * q**m
        return out
    out = 1.0
    term = complex(a)
    m = 0
    while abs(term) >= POCHHAMMER_TOL:
        out *= 1 - term
        term *= q
        m += 1
        if m > 100000:
            raise RuntimeError("q-Pochhammer product did not terminate")
    log.debug("(a;q)_inf truncated after %d factors, tail bound %.3e", m, abs(term) / (1 - abs(q)))
    return out


def q_factorial(k: int, q: complex) -> complex:
    """k!_q = (q;q)_k / (1-q)^k, equal to 1 (1+q) ... (1+q+...+q^{k-1})."""
    _check_q(q)
    out = 1.0
    for m in range(1, k + 1):
        out *= sum(q**i for i in range(m))
    return out


def _qpoch_qq(k: int, q: float) -> float:
    out = 1.0
    for m in range(1, k + 1):
        out *= 1 - q**m
    return out


def qwhittaker_branch_coeff(lam: Sequence[int], mu: Sequence[int], q: float) -> float:
    """Branching coefficient of q-Whittaker polynomials for mu interlacing lam."""
    lam, mu = as_signature(lam), as_signature(mu)
    if not interlaces(mu, lam):
        raise ValueError(f"{mu} does not interlace {lam}")
    _check_q(q)
    num = 1.0
    den = 1.0
    for i in range(len(mu)):
        num *= _qpoch_qq(lam[i] - lam[i + 1], q)
        den *= _qpoch_qq(lam[i] - mu[i], q) * _qpoch_qq(mu[i] - lam[i + 1], q)
    return num / den


@lru_cache(maxsize=100000)
def _qwhit_principal(lam: Signature, q: float) -> float:
    if len(lam) <= 1:
        return 1.0
    acc = 0.0
    for mu in itertools.product(*interlacing_ranges(lam)):
        acc += qwhittaker_branch_coeff(lam, mu, q) * _qwhit_principal(mu, q)
    return acc


def qwhittaker_principal(lam: Sequence[int], N: int | None = None, q: float = 0.0) -> float:
    """P_lam(1, ..., 1) for the q-Whittaker polynomial, by the GT-pattern sum."""
    lam = as_signature(lam)
    if N is not None and N != len(lam):
        raise ValueError("N must equal the signature length")
    if len(lam) > 6:
        raise ValueError("principal evaluation is an oracle for N <= 6 only")
    if lam and lam[-1] < 0:
        raise ValueError("q-Whittaker evaluation needs nonnegative parts")
    _check_q(q)
    return _qwhit_principal(lam, float(q))


def link_kernel(mode: str, lam: Sequence[int], mu: Sequence[int], q: float | None = None):
    """Stochastic link from level-h signature lam to level-(h-1) signature mu.

    Schur mode returns an exact :class:`Fraction`, q-Whittaker mode a float.
    """
    lam, mu = as_signature(lam), as_signature(mu)
    if not interlaces(mu, lam):
        return Fraction(0) if mode == "schur" else 0.0
    if mode == "schur":
        return schur_dim(mu) / schur_dim(lam)
    if mode == "qwhittaker":
        if q is None:
            raise ValueError("q-Whittaker link needs q")
        return (qwhittaker_principal(mu, q=q) * qwhittaker_branch_coeff(lam, mu, q)
                / qwhittaker_principal(lam, q=q))
    raise ValueError(f"unknown link mode {mode!r}")


# ---------------------------------------------------------------------------
# First-order Macdonald operator
# ---------------------------------------------------------------------------

def _partitions(n: int, max_parts: int, max_part: int | None = None) -> list[Signature]:
    max_part = n if max_part is None else max_part
    if n == 0:
        return [()]
    if max_parts == 0:
        return []
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, max_parts - 1, first):
            out.append((first,) + rest)
    return out


def _dominates(lam: Signature, mu: Signature) -> bool:
    a = b = 0
    for i in range(max(len(lam), len(mu))):
        a += lam[i] if i < len(lam) else 0
        b += mu[i] if i < len(mu) else 0
        if a < b:
            return False
    return True


def _monomial(nu: Signature, z: np.ndarray) -> np.ndarray:
    """Monomial symmetric polynomial m_nu at points z of shape (P, N)."""
    N = z.shape[1]
    exps = set(itertools.permutations(nu + (0,) * (N - len(nu))))
    out = np.zeros(z.shape[0], dtype=complex)
    for e in exps:
        out += np.prod(z ** np.asarray(e), axis=1)
    return out


def _d1(fun, z: np.ndarray, q: complex, t: complex) -> np.ndarray:
    """Apply D1 = sum_i prod_{j != i} (t z_i - z_j)/(z_i - z_j) T_{q, z_i}."""
    N = z.shape[1]
    out = np.zeros(z.shape[0], dtype=complex)
    for i in range(N):
        coef = np.ones(z.shape[0], dtype=complex)
        for j in range(N):
            if j != i:
                coef *= (t * z[:, i] - z[:, j]) / (z[:, i] - z[:, j])
        zs = z.copy()
        zs[:, i] *= q
        out += coef * fun(zs)
    return out


def macdonald_d1_apply(lam: Sequence[int], N: int, q: complex, t: complex,
                       z: Sequence[complex], seed: int = 0) -> complex:
    """Return (D1 P_lam)(z) / P_lam(z) for the Macdonald polynomial P_lam(.; q, t).

    P_lam is constructed numerically as the eigenvector of D1 that is unitriangular
    in the monomial basis with respect to dominance order. The action of D1 on
    monomials is recovered by least squares from evaluations at random points,
    so the eigenvalue is never assumed.
    """
    lam = as_signature(lam)
    if len(lam) != N:
        raise ValueError("N must equal the signature length")
    zz = np.asarray(z, dtype=complex)
    if zz.shape != (N,):
        raise ValueError("need N evaluation points")
    gaps = np.abs(zz[:, None] - zz[None, :]) + np.eye(N)
    if np.min(gaps) < 1e-12:
        raise ValueError("evaluation points must be pairwise distinct")
    shift = lam[-1]
    lam0 = tuple(p - shift for p in lam)
    size = sum(lam0)
    basis = [nu for nu in _partitions(size, N)]
    lam_key = tuple(p for p in lam0 if p > 0)
    rng = np.random.default_rng(seed)
    P = 3 * len(basis) + 8
    pts = np.exp(2j * np.pi * rng.random((P, N))) * (0.6 + 0.5 * rng.random((P, N)))
    A = np.column_stack([_monomial(nu, pts) for nu in basis])
    B = np.column_stack([_d1(lambda w, nu=nu: _monomial(nu, w), pts, q, t) for nu in basis])
    X, *_ = np.linalg.lstsq(A, B, rcond=None)
    idx = [k for k, nu in enumerate(basis) if _dominates(lam_key, nu)]
    il = basis.index(lam_key)
    E = X[il, il]
    lower = [k for k in idx if k != il]
    coef = np.zeros(len(basis), dtype=complex)
    coef[il] = 1.0
    if lower:
        M = X[np.ix_(lower, lower)] - E * np.eye(len(lower))
        rhs = -X[np.ix_(lower, [il])][:, 0]
        coef[lower] = np.linalg.solve(M, rhs)
    Pz = sum(coef[k] * _monomial(basis[k], zz[None, :])[0] for k in idx)
    DPz = _d1(lambda w: sum(coef[k] * _monomial(basis[k], w) for k in idx), zz[None, :], q, t)[0]
    return complex(DPz / Pz * q**shift)


def macdonald_d1_eigenvalue(lam: Sequence[int], q: complex, t: complex) -> complex:
    """e_1(q^{lam_1} t^{N-1}, ..., q^{lam_N} t^0)."""
    lam = as_signature(lam)
    N = len(lam)
    return complex(sum(q ** lam[i] * t ** (N - 1 - i) for i in range(N)))
