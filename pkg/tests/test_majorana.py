import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from rotacov import (
    SpinKet,
    coherent_state,
    hrange,
    majorana_stars,
    rotate_constellation,
    rotate_state,
    so3_from_uv,
)

NORTH = np.array([0.0, 0.0, 1.0])
SOUTH = np.array([0.0, 0.0, -1.0])


def random_uv(rng):
    z = rng.normal(size=4)
    z /= np.linalg.norm(z)
    return z[0] + 1j * z[1], z[2] + 1j * z[3]


def match_distance(points_a, points_b):
    """Largest angular mismatch under the optimal pairing of two star lists."""
    assert len(points_a) == len(points_b)
    cost = np.array([[np.arccos(np.clip(np.dot(a, b), -1, 1)) for b in points_b]
                     for a in points_a])
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols].max()


def test_top_coherent_state_is_north_pile():
    c = majorana_stars(SpinKet.basis(2, 2))
    assert c.total_multiplicity() == 4
    assert len(c.stars) == 1
    n, mult = c.stars[0]
    assert mult == 4
    assert np.abs(n - NORTH).max() < 1e-12


def test_equator_state_splits_poles():
    c = majorana_stars(SpinKet.basis(1, 0))
    assert c.total_multiplicity() == 2
    points = sorted(c.points(), key=lambda n: n[2])
    assert np.abs(points[0] - SOUTH).max() < 1e-12
    assert np.abs(points[1] - NORTH).max() < 1e-12


def test_bottom_half_spin_is_south():
    c = majorana_stars(SpinKet.basis("1/2", "-1/2"))
    assert c.stars == [(pytest.approx(SOUTH), 1)]


def test_coherent_constellation_matches_direction():
    # a generic triple root scatters by ~eps^(1/3); every point must still
    # sit at the coherent direction within that conditioning limit
    rng = np.random.default_rng(0)
    for _ in range(10):
        z1, z2 = random_uv(rng)
        ket = coherent_state("3/2", z1, z2)
        c = majorana_stars(ket)
        n = np.array([2 * (z2 * np.conj(z1)).real, 2 * (z2 * np.conj(z1)).imag,
                      abs(z1) ** 2 - abs(z2) ** 2])
        assert c.total_multiplicity() == 3
        for point in c.points():
            assert np.abs(point - n).max() < 1e-4


def test_multi_irrep_rejected():
    ket = SpinKet({("1", "0"): 0.6, ("0", "0"): 0.8})
    with pytest.raises(ValueError):
        majorana_stars(ket)


def test_rotate_constellation_identity_and_flip():
    c = majorana_stars(SpinKet.basis(1, 1))
    same = rotate_constellation(c, np.eye(3))
    assert np.abs(same.stars[0][0] - NORTH).max() < 1e-12
    flip_x = np.diag([1.0, -1.0, -1.0])   # rotation by pi about x
    flipped = rotate_constellation(c, flip_x)
    assert np.abs(flipped.stars[0][0] - SOUTH).max() < 1e-12


def test_rotate_constellation_rejects_nonrotations():
    c = majorana_stars(SpinKet.basis(1, 1))
    with pytest.raises(ValueError):
        rotate_constellation(c, 2 * np.eye(3))
    with pytest.raises(ValueError):
        rotate_constellation(c, np.diag([1.0, 1.0, -1.0]))  # reflection


def test_so3_image_is_rotation():
    rng = np.random.default_rng(1)
    for _ in range(10):
        u, v = random_uv(rng)
        O = so3_from_uv(u, v)
        assert np.abs(O @ O.T - np.eye(3)).max() < 1e-10
        assert np.linalg.det(O) == pytest.approx(1.0)


def test_stars_rotate_rigidly():
    rng = np.random.default_rng(2)
    done = 0
    while done < 50:
        j = hrange("1/2", 3)[rng.integers(0, 6)]
        v = rng.normal(size=j.twice + 1) + 1j * rng.normal(size=j.twice + 1)
        ket = SpinKet.from_block_vector(j, v).normalized()
        u, w = random_uv(rng)
        before = majorana_stars(ket)
        after = majorana_stars(rotate_state(ket, u, w))
        rotated = rotate_constellation(before, so3_from_uv(u, w))
        assert match_distance(rotated.points(), after.points()) < 1e-6
        done += 1


def test_roots_reconstruct_overlap_polynomial():
    """Multiply out (w - root_i) from the returned stars and compare with the
    coefficients of the antipodal-overlap polynomial (constant ratio)."""
    rng = np.random.default_rng(3)
    for _ in range(10):
        j = hrange("1/2", 2)[rng.integers(0, 4)]
        tj = j.twice
        amps = rng.normal(size=tj + 1) + 1j * rng.normal(size=tj + 1)
        ket = SpinKet.from_block_vector(j, amps / np.linalg.norm(amps))
        c = majorana_stars(ket)
        finite, infinite = [], 0
        for n, mult in c.stars:
            if n[2] < -1 + 1e-9:
                infinite += mult
            else:
                finite.extend([complex(n[0], n[1]) / (1 + n[2])] * mult)
        rebuilt = np.array([1.0 + 0j])
        for w in finite:
            rebuilt = np.convolve(rebuilt, np.array([-w, 1.0]))
        original = np.array([(-1) ** k * math.sqrt(math.comb(tj, k))
                             * ket.block_vector(j)[tj - k] for k in range(tj + 1)])
        top = len(original) - 1
        while abs(original[top]) < 1e-10 * np.abs(original).max():
            top -= 1
        assert infinite == tj - top
        trimmed = original[: top + 1]
        ratios = trimmed[np.abs(rebuilt) > 1e-8] / rebuilt[np.abs(rebuilt) > 1e-8]
        assert np.abs(ratios - ratios[0]).max() < 1e-6 * abs(ratios[0])
