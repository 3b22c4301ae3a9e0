"""Lozenge tilings of the a,b,c hexagon as Gelfand-Tsetlin patterns.

A tiling is a GT pattern of depth ``N = a + c`` whose top row is
``(b^a, 0^c)``. Level ``h`` carries ``h`` vertical lozenges at the shifted
positions ``x_i = lambda^(h)_i + h - i``.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .rng import as_generator, uniform_below
from .symfun import (GTPattern, Signature, check_pattern, hexagon_signature,
                     interlacing_ranges, schur_dim)

ENUM_LIMIT = 10**6
# interlacing boxes up to this size are sampled by enumeration with a cached CDF
ENUM_BOX = 4096


@dataclass(frozen=True)
class Hexagon:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 0:
            raise ValueError("hexagon sides must be nonnegative")

    @property
    def depth(self) -> int:
        return self.a + self.c

    @property
    def top(self) -> Signature:
        return hexagon_signature(self.a, self.b, self.c)


@dataclass(frozen=True)
class Tiling:
    hexagon: Hexagon
    pattern: GTPattern

    def to_json(self) -> list[list[int]]:
        return [list(r) for r in self.pattern]


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _count_below(top: Signature) -> int:
    @lru_cache(maxsize=None)
    def rec(sig):
        if len(sig) <= 1:
            return 1
        return sum(rec(mu) for mu in itertools.product(*interlacing_ranges(sig)))

    return rec(top)


def _iter_below(top: Signature) -> Iterator[tuple[Signature, ...]]:
    """Depth-first iteration over all patterns below ``top`` (bottom row first)."""
    if len(top) <= 1:
        yield (top,)
        return
    for mu in itertools.product(*interlacing_ranges(top)):
        for rest in _iter_below(mu):
            yield rest + (top,)


def enumerate_tilings(hexagon: Hexagon, limit: int = ENUM_LIMIT,
                      iterate: bool = True) -> tuple[int, Iterator[Tiling]]:
    """Exact tiling count together with an iterator over all tilings.

    The count is computed by memoized recursion and never fails; iterating
    raises once more than ``limit`` tilings would be produced.
    """
    top = hexagon.top
    if hexagon.depth == 0:
        return 1, iter([Tiling(hexagon, ())])
    count = _count_below(top)

    def gen():
        for k, pat in enumerate(_iter_below(top)):
            if k >= limit:
                raise RuntimeError(f"enumeration limit {limit} exceeded")
            yield Tiling(hexagon, pat)

    return count, gen()


# ---------------------------------------------------------------------------
# exact sampling
# ---------------------------------------------------------------------------

@lru_cache(maxsize=200000)
def _link_table(lam: Signature) -> tuple[list[Signature], list[int], int]:
    """Interlacing mu with integer weights dim(mu); their sum is dim(lam)."""
    mus = list(itertools.product(*interlacing_ranges(lam)))
    cum = []
    acc = 0
    for mu in mus:
        d = schur_dim(mu)
        acc += int(d)
        cum.append(acc)
    assert acc == int(schur_dim(lam))
    return mus, cum, acc


def _bareiss_det(M: list[list[int]]) -> int:
    """Exact integer determinant by fraction-free elimination."""
    n = len(M)
    if n == 0:
        return 1
    A = [row[:] for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def _sequential_weights(intervals: list[tuple[int, int]], fixed: list[int],
                        i: int) -> list[int]:
    """Unnormalized marginal weights of coordinate ``i`` over its interval.

    The remaining free coordinates ``i+1, ...`` are summed out exactly: the
    Vandermonde weight summed over a product of intervals is a determinant of
    per-interval moment sums.
    """
    lo, hi = intervals[i]
    rest = [iv for iv in intervals[i + 1:] if iv[1] > iv[0]]
    frozen = fixed + [iv[0] for iv in intervals[i + 1:] if iv[1] == iv[0]]
    base = min(iv[0] for iv in intervals)
    out = []
    for v in range(lo, hi + 1):
        pv = 1
        for f in frozen:
            pv *= abs(f - v)
        if pv == 0:
            out.append(0)
            continue
        n = len(rest)
        M = []
        for (a, b) in rest:
            row = [0] * n
            for y in range(a, b + 1):
                g = abs(v - y)
                for f in frozen:
                    g *= abs(f - y)
                p = 1
                d = y - base
                for col in range(n):
                    row[col] += g * p
                    p *= d
            M.append(row)
        out.append(pv * abs(_bareiss_det(M)))
    return out


def _sample_link_sequential(lam: Signature, rng) -> Signature:
    """Draw mu interlacing lam with probability dim(mu)/dim(lam), one coordinate at a time."""
    m = len(lam) - 1
    intervals = [(lam[i + 1] + m - 1 - i, lam[i] + m - 1 - i) for i in range(m)]
    fixed: list[int] = []
    xs = []
    for i in range(m):
        lo, hi = intervals[i]
        if lo == hi:
            xs.append(lo)
            fixed.append(lo)
            continue
        w = _sequential_weights(intervals, fixed, i)
        cum = list(itertools.accumulate(w))
        u = uniform_below(rng, cum[-1])
        k = bisect.bisect_right(cum, u)
        xs.append(lo + k)
        fixed.append(lo + k)
    return tuple(x - (m - 1 - i) for i, x in enumerate(xs))


def sample_link(lam: Signature, rng) -> Signature:
    """Exact draw from the Schur link Lambda(lam, .)."""
    box = math.prod(r.stop - r.start for r in interlacing_ranges(lam))
    if box <= ENUM_BOX:
        mus, cum, total = _link_table(lam)
        u = uniform_below(rng, total)
        return tuple(mus[bisect.bisect_right(cum, u)])
    return _sample_link_sequential(lam, rng)


def sample_tiling(hexagon: Hexagon, rng=None) -> Tiling:
    """Exactly uniform random tiling, sampled from the top row downwards."""
    rng = as_generator(rng)
    rows = [hexagon.top]
    for _ in range(hexagon.depth - 1):
        rows.append(sample_link(rows[-1], rng))
    return Tiling(hexagon, tuple(reversed(rows)))


def slice_positions(tiling: Tiling, h: int) -> tuple[int, ...]:
    """Shifted positions ``lambda^(h)_i + h - i`` of the vertical lozenges at level h."""
    N = tiling.hexagon.depth
    if not 1 <= h <= N:
        raise ValueError(f"level {h} outside [1, {N}]")
    row = tiling.pattern[h - 1]
    return tuple(row[i] + h - 1 - i for i in range(h))


def tiling_from_rows(hexagon: Hexagon, rows: Sequence[Sequence[int]]) -> Tiling:
    pat = check_pattern(rows)
    if len(pat) != hexagon.depth or (pat and pat[-1] != hexagon.top):
        raise ValueError("pattern does not encode a tiling of this hexagon")
    return Tiling(hexagon, pat)


# ---------------------------------------------------------------------------
# geometry and SVG output
# ---------------------------------------------------------------------------

SQRT3_2 = math.sqrt(3) / 2
DEFAULT_COLORS = {"vertical": "#e4572e", "left": "#29335c", "right": "#f3a712"}


def hexagon_vertices(hexagon: Hexagon) -> list[tuple[float, float]]:
    """Corners in (X, level) coordinates, counterclockwise from the bottom-left."""
    a, b, c = hexagon.a, hexagon.b, hexagon.c
    N = a + c
    return [(0.0, 0.0), (float(b), 0.0), (b + c / 2, float(c)),
            (b + (c - a) / 2, float(N)), ((c - a) / 2, float(N)), (-a / 2, float(a))]


def _inside(pt, verts) -> bool:
    x, y = pt
    n = len(verts)
    for k in range(n):
        (x0, y0), (x1, y1) = verts[k], verts[(k + 1) % n]
        if (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) < -1e-9:
            return False
    return True


def lozenges(tiling: Tiling) -> list[tuple[str, list[tuple[float, float]]]]:
    """List of (kind, polygon) with polygons in (X, level) coordinates.

    Line ``h`` of the lattice carries segments ``x = 0, ..., b+h-1`` whose
    left ends sit at ``X = x - h/2``. Vertical lozenges straddle a line; the
    other two kinds live inside a single strip and are recovered by matching
    the triangles not covered by vertical lozenges.
    """
    hexagon = tiling.hexagon
    N = hexagon.depth
    b = hexagon.b
    verts = hexagon_vertices(hexagon)
    pos = [set()] + [set(slice_positions(tiling, h)) for h in range(1, N + 1)]
    out = []
    for h in range(1, N):
        for x in sorted(pos[h]):
            X = x - h / 2
            poly = [(X, h), (X + 0.5, h - 1), (X + 1, h), (X + 0.5, h + 1)]
            if _inside((X + 0.5, h), verts):
                out.append(("vertical", poly))
    for h in range(1, N + 1):
        # strip between lines h-1 and h: D_0 U_0 D_1 U_1 ... U_{b+h-2} D_{b+h-1}
        seq = []
        for x in range(b + h):
            seq.append(("D", x, x in pos[h]))
            if x < b + h - 1:
                seq.append(("U", x, x in pos[h - 1]))
        k = 0
        while k < len(seq):
            kind, x, occ = seq[k]
            if occ:
                k += 1
                continue
            if k + 1 >= len(seq) or seq[k + 1][2]:
                raise AssertionError(f"unmatched triangle in strip {h}")
            X = x - h / 2
            if kind == "U":
                # U_x + D_{x+1}
                X = x + 1 - h / 2
                poly = [(X - 0.5, h - 1), (X + 0.5, h - 1), (X + 1, h), (X, h)]
                lean = "right"
            else:
                # D_x + U_x
                poly = [(X + 0.5, h - 1), (X + 1.5, h - 1), (X + 1, h), (X, h)]
                lean = "left"
            cx = sum(p[0] for p in poly) / 4
            cy = sum(p[1] for p in poly) / 4
            if _inside((cx, cy), verts):
                out.append((lean, poly))
            k += 2
    return out


def render_svg(tiling: Tiling, scale: float = 20.0, colors: dict | None = None,
               stroke: str = "#222222", stroke_width: float = 0.6) -> str:
    """SVG 1.1 document with one polygon element per lozenge."""
    colors = {**DEFAULT_COLORS, **(colors or {})}
    tiles = lozenges(tiling)
    verts = hexagon_vertices(tiling.hexagon)
    xs = [v[0] for v in verts]
    ys = [v[1] * SQRT3_2 for v in verts]
    pad = 1.0
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    W, H = (x1 - x0) * scale, (y1 - y0) * scale

    def tr(p):
        return f"{(p[0] - x0) * scale:.3f},{(y1 - p[1] * SQRT3_2) * scale:.3f}"

    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
             f'width="{W:.1f}" height="{H:.1f}" viewBox="0 0 {W:.1f} {H:.1f}">']
    for kind, poly in tiles:
        pts = " ".join(tr(p) for p in poly)
        lines.append(f'<polygon class="{kind}" points="{pts}" fill="{colors[kind]}" '
                     f'stroke="{stroke}" stroke-width="{stroke_width}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def slice_histogram(samples: np.ndarray) -> dict[tuple[int, ...], float]:
    """Empirical law of slice configurations from an (n_samples, h) integer array."""
    keys, counts = np.unique(samples, axis=0, return_counts=True)
    n = samples.shape[0]
    return {tuple(int(v) for v in k): c / n for k, c in zip(keys, counts)}
