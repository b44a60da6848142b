"""Stellar representation of single-irrep pure states.

A spin-j state is encoded by 2j points on the unit sphere: the projective
roots of its overlap with the family of antipodal coherent states.  Rotating
the state rotates the constellation rigidly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .halfint import HalfInt
from .spin_core import SpinKet

LEADING_CUTOFF = 1e-10   # relative cutoff deciding degree deficiency
MERGE_DIST = 1e-6        # chordal distance below which roots merge


@dataclass
class Constellation:
    """Multiset of unit vectors (with multiplicities) for a spin-j state."""

    stars: list  # [(unit 3-vector, multiplicity), ...]
    j: HalfInt

    def total_multiplicity(self) -> int:
        return sum(mult for _, mult in self.stars)

    def points(self) -> list:
        """Stars repeated by multiplicity."""
        return [n for n, mult in self.stars for _ in range(mult)]


def _star_from_root(w: complex) -> np.ndarray:
    d = 1.0 + abs(w) ** 2
    return np.array([2 * w.real / d, 2 * w.imag / d, (1.0 - abs(w) ** 2) / d])


def _merge(points) -> list:
    clusters = []
    for n in points:
        for i, (rep, mult) in enumerate(clusters):
            if np.linalg.norm(rep - n) < MERGE_DIST:
                rep = (rep * mult + n) / (mult + 1)
                clusters[i] = (rep / np.linalg.norm(rep), mult + 1)
                break
        else:
            clusters.append((n, 1))
    return clusters


def majorana_stars(ket: SpinKet) -> Constellation:
    """Star constellation of a normalized state within a single irrep.

    The overlap with the antipodal coherent family is a degree-2j polynomial
    in w = z2/z1; its roots map to sphere points, and d vanishing leading
    coefficients contribute d stars at the south pole.
    """
    irreps = ket.irreps()
    if len(irreps) != 1:
        raise ValueError("stellar representation requires a single irrep")
    j = irreps[0]
    tj = j.twice
    amps = ket.block_vector(j)          # ordered m = j .. -j
    coeffs = np.zeros(tj + 1, dtype=complex)
    for idx in range(tj + 1):
        m_idx = tj - idx                # k = j + m; amps index is j - m
        coeffs[idx] = ((-1) ** idx * math.sqrt(math.comb(tj, idx))
                       * amps[m_idx])
    scale = np.abs(coeffs).max()
    if scale == 0:
        raise ValueError("zero state has no constellation")
    top = tj
    while top > 0 and abs(coeffs[top]) < LEADING_CUTOFF * scale:
        top -= 1
    deficiency = tj - top
    points = []
    if top > 0:
        roots = np.roots(coeffs[: top + 1][::-1])  # np.roots wants high-first
        points.extend(_star_from_root(complex(w)) for w in roots)
    points.extend(np.array([0.0, 0.0, -1.0]) for _ in range(deficiency))
    return Constellation(_merge(points), j)


def rotate_constellation(c: Constellation, O) -> Constellation:
    """Apply a proper rotation matrix to every star."""
    O = np.asarray(O, dtype=float)
    if O.shape != (3, 3) or np.abs(O @ O.T - np.eye(3)).max() > 1e-8:
        raise ValueError("O must be orthogonal")
    if np.linalg.det(O) < 0:
        raise ValueError("O must be a proper rotation (det +1)")
    return Constellation([(O @ n, mult) for n, mult in c.stars], c.j)


def so3_from_uv(u, v) -> np.ndarray:
    """3x3 rotation matrix corresponding to the group element (u, v)."""
    sig = [np.array([[0, 1], [1, 0]], dtype=complex),
           np.array([[0, -1j], [1j, 0]], dtype=complex),
           np.array([[1, 0], [0, -1]], dtype=complex)]
    V = np.array([[u, -np.conj(v)], [v, np.conj(u)]])
    O = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            O[a, b] = 0.5 * np.trace(sig[a] @ V @ sig[b] @ V.conj().T).real
    return O
