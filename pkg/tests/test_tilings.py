import xml.etree.ElementTree as ET
from collections import Counter

import numpy as np
import pytest

from intprob import symfun as sf
from intprob import tilings as til


def _area(poly):
    x = np.array([p[0] for p in poly])
    y = np.array([p[1] for p in poly]) * til.SQRT3_2
    return 0.5 * abs(np.dot(x, np.roll(y, 1)) - np.dot(y, np.roll(x, 1)))


@pytest.mark.parametrize("abc", [(1, 1, 1), (2, 3, 1), (3, 3, 3), (2, 5, 2)])
def test_enumeration_matches_macmahon(abc):
    count, it = til.enumerate_tilings(til.Hexagon(*abc))
    assert count == sum(1 for _ in it) == sf.macmahon_count(*abc)


def test_enumeration_limit():
    _, it = til.enumerate_tilings(til.Hexagon(3, 3, 3), limit=10)
    with pytest.raises(RuntimeError):
        list(it)


def test_degenerate_hexagon():
    count, it = til.enumerate_tilings(til.Hexagon(0, 4, 0))
    assert count == 1 and len(list(it)) == 1


def test_sampler_is_uniform_on_small_hexagon(rng):
    hexagon = til.Hexagon(2, 2, 2)
    n = 20_000
    counts = Counter(til.sample_tiling(hexagon, rng).pattern for _ in range(n))
    assert len(counts) == 20
    freq = np.array(list(counts.values())) / n
    # each of 20 tilings has probability 1/20; sd of a frequency is about 0.0015
    assert np.max(np.abs(freq - 0.05)) < 0.008


@pytest.mark.parametrize("abc", [(3, 3, 3), (2, 5, 2), (4, 1, 6)])
def test_lozenge_counts_and_area(abc, rng):
    a, b, c = abc
    t = til.sample_tiling(til.Hexagon(a, b, c), rng)
    tiles = til.lozenges(t)
    kinds = Counter(k for k, _ in tiles)
    assert len(tiles) == a * b + b * c + c * a
    # each lozenge kind appears a fixed number of times in every tiling
    assert sorted(kinds.values()) == sorted([a * b, b * c, c * a])
    hexagon_area = _area(til.hexagon_vertices(t.hexagon))
    assert abs(sum(_area(p) for _, p in tiles) - hexagon_area) < 1e-9


def test_slice_positions_interlace(rng):
    t = til.sample_tiling(til.Hexagon(3, 4, 2), rng)
    for h in range(1, t.hexagon.depth + 1):
        x = til.slice_positions(t, h)
        assert list(x) == sorted(x, reverse=True) and len(set(x)) == h
        assert 0 <= min(x) and max(x) <= 4 + h - 1


def test_svg_is_valid_xml(rng):
    t = til.sample_tiling(til.Hexagon(4, 4, 4), rng)
    root = ET.fromstring(til.render_svg(t).split("\n", 1)[1])
    polys = [e for e in root if e.tag.endswith("polygon")]
    assert len(polys) == 48


def test_json_roundtrip(rng):
    hexagon = til.Hexagon(2, 3, 2)
    t = til.sample_tiling(hexagon, rng)
    assert til.tiling_from_rows(hexagon, t.to_json()) == t
    with pytest.raises(ValueError):
        til.tiling_from_rows(til.Hexagon(2, 4, 2), t.to_json())


def test_negative_side_rejected():
    with pytest.raises(ValueError):
        til.Hexagon(-1, 2, 2)
