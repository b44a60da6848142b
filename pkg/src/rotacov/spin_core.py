"""Spin states, spin matrices, coherent states, Wigner 3j symbols, rotations.

States live on a multiplicity-free direct sum of spin irreps.  Inside each
irrep the basis is ordered m = j, j-1, ..., -j.  All operations are pure;
instances are treated as immutable values after construction.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .halfint import HalfInt, magnetic_range

TOL = 1e-9  # global absolute comparison tolerance


class SpinKet:
    """Pure state: sparse map (j, m) -> complex amplitude."""

    def __init__(self, amplitudes, prune=1e-14):
        amps = {}
        for (j, m), a in dict(amplitudes).items():
            j, m = HalfInt.of(j), HalfInt.of(m)
            if abs(m) > j:
                raise ValueError(f"|m| > j for (j, m) = ({j}, {m})")
            if not j.same_parity(m):
                raise ValueError(f"j and m differ in parity: ({j}, {m})")
            if abs(a) > prune:
                amps[(j, m)] = complex(a)
        self.amplitudes = amps

    @staticmethod
    def basis(j, m) -> "SpinKet":
        return SpinKet({(j, m): 1.0})

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def is_normalized(self, tol=1e-6) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "SpinKet":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero ket")
        return SpinKet({k: a / n for k, a in self.amplitudes.items()})

    def scaled(self, c) -> "SpinKet":
        return SpinKet({k: c * a for k, a in self.amplitudes.items()})

    def irreps(self) -> list:
        return sorted({j for j, _ in self.amplitudes})

    def jmax(self) -> HalfInt:
        if not self.amplitudes:
            raise ValueError("empty ket has no maximal spin")
        return max(j for j, _ in self.amplitudes)

    def block_vector(self, j) -> np.ndarray:
        """Amplitude vector of irrep j in basis m = j..-j."""
        j = HalfInt.of(j)
        v = np.zeros(j.twice + 1, dtype=complex)
        for i, m in enumerate(magnetic_range(j)):
            v[i] = self.amplitudes.get((j, m), 0.0)
        return v

    @staticmethod
    def from_block_vector(j, v) -> "SpinKet":
        j = HalfInt.of(j)
        return SpinKet({(j, m): v[i] for i, m in enumerate(magnetic_range(j))})

    def overlap(self, other: "SpinKet") -> complex:
        """<self|other>."""
        return sum(np.conj(a) * other.amplitudes.get(k, 0.0)
                   for k, a in self.amplitudes.items())

    def __add__(self, other: "SpinKet") -> "SpinKet":
        amps = dict(self.amplitudes)
        for k, a in other.amplitudes.items():
            amps[k] = amps.get(k, 0.0) + a
        return SpinKet(amps)

    def __repr__(self):
        terms = ", ".join(f"({j},{m}): {a:.4g}" for (j, m), a in sorted(
            self.amplitudes.items(), key=lambda kv: (kv[0][0].twice, -kv[0][1].twice)))
        return f"SpinKet({{{terms}}})"


class BlockDensity:
    """Mixed state: one Hermitian PSD matrix per irrep (block-diagonal)."""

    def __init__(self, blocks):
        self.blocks = {}
        for j, b in dict(blocks).items():
            j = HalfInt.of(j)
            b = np.asarray(b, dtype=complex)
            d = j.twice + 1
            if b.shape != (d, d):
                raise ValueError(f"block for j={j} must be {d}x{d}, got {b.shape}")
            self.blocks[j] = b

    @staticmethod
    def from_ket(ket: SpinKet) -> "BlockDensity":
        """Per-irrep projector blocks of |ket><ket| (cross-irrep parts dropped)."""
        out = {}
        for j in ket.irreps():
            v = ket.block_vector(j)
            out[j] = np.outer(v, v.conj())
        return BlockDensity(out)

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks.values()))

    def irreps(self) -> list:
        return sorted(self.blocks)

    def jmax(self, mass_tol=1e-12) -> HalfInt:
        occupied = [j for j, b in self.blocks.items()
                    if np.abs(b).max() > mass_tol]
        if not occupied:
            raise ValueError("empty density has no maximal spin")
        return max(occupied)

    def validate(self, tol=1e-8):
        """Check Hermiticity and positive semidefiniteness of every block."""
        for j, b in self.blocks.items():
            if np.abs(b - b.conj().T).max() > tol:
                raise ValueError(f"block j={j} is not Hermitian")
            lo = np.linalg.eigvalsh(b).min() if b.size else 0.0
            if lo < -tol:
                raise ValueError(f"block j={j} has negative eigenvalue {lo:.3e}")
        return self

    def scaled(self, c) -> "BlockDensity":
        return BlockDensity({j: c * b for j, b in self.blocks.items()})

    def __repr__(self):
        parts = ", ".join(f"j={j}: tr {np.trace(b).real:.4g}"
                          for j, b in sorted(self.blocks.items()))
        return f"BlockDensity({parts})"


def spin_matrices(j):
    """Angular momentum matrices (Jx, Jy, Jz) for spin j, basis m = j..-j."""
    j = HalfInt.of(j)
    if j.twice < 0:
        raise ValueError("j must be nonnegative")
    ms = [tm / 2 for tm in range(j.twice, -j.twice - 1, -2)]
    d = len(ms)
    jz = np.diag(np.array(ms, dtype=complex))
    jp = np.zeros((d, d), dtype=complex)
    jv = float(j)
    for i in range(1, d):
        m = ms[i]  # raising |j,m> -> |j,m+1>, row i-1
        jp[i - 1, i] = math.sqrt(jv * (jv + 1) - m * (m + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / (2 * 1j)
    return jx, jy, jz


def coherent_state(j, z1, z2) -> SpinKet:
    """Spin coherent state sum_m sqrt(C(2j, j-m)) z1^(j+m) z2^(j-m) |j, m>.

    (z1, z2) parameterize the direction; |z1|^2 + |z2|^2 must be 1.
    """
    j = HalfInt.of(j)
    if abs(abs(z1) ** 2 + abs(z2) ** 2 - 1.0) > 1e-9:
        raise ValueError("(z1, z2) must satisfy |z1|^2 + |z2|^2 = 1")
    amps = {}
    for m in magnetic_range(j):
        kp = (j + m).twice // 2   # j + m
        km = (j - m).twice // 2   # j - m
        amps[(j, m)] = math.sqrt(math.comb(j.twice, km)) * z1 ** kp * z2 ** km
    return SpinKet(amps)


def coherent_direction(z1, z2) -> np.ndarray:
    """Unit vector n with <J>_n = j*n for the coherent state at (z1, z2)."""
    nx = 2 * (z2 * np.conj(z1)).real
    ny = 2 * (z2 * np.conj(z1)).imag
    nz = abs(z1) ** 2 - abs(z2) ** 2
    return np.array([nx, ny, nz])


@lru_cache(maxsize=None)
def _w3j_twice(tj1, tj2, tj3, tm1, tm2, tm3) -> float:
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if tj3 > tj1 + tj2 or tj3 < abs(tj1 - tj2):
        return 0.0
    if (tj1 + tj2 + tj3) % 2 != 0:
        return 0.0
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        if abs(tm) > tj or (tj - tm) % 2 != 0:
            return 0.0

    def fact(twice):  # factorial of an exact integer given as 2n
        return math.factorial(twice // 2)

    delta = Fraction(
        fact(tj1 + tj2 - tj3) * fact(tj1 - tj2 + tj3) * fact(-tj1 + tj2 + tj3),
        fact(tj1 + tj2 + tj3 + 2))
    pref = delta * (fact(tj1 + tm1) * fact(tj1 - tm1) * fact(tj2 + tm2)
                    * fact(tj2 - tm2) * fact(tj3 + tm3) * fact(tj3 - tm3))
    tmin = max(0, tj2 - tj3 - tm1, tj1 - tj3 + tm2)
    tmax = min(tj1 + tj2 - tj3, tj1 - tm1, tj2 + tm2)
    series = Fraction(0)
    for tt in range(tmin, tmax + 1, 2):
        denom = (fact(tt) * fact(tj3 - tj2 + tm1 + tt) * fact(tj3 - tj1 - tm2 + tt)
                 * fact(tj1 + tj2 - tj3 - tt) * fact(tj1 - tm1 - tt)
                 * fact(tj2 + tm2 - tt))
        series += Fraction((-1) ** (tt // 2), denom)
    sign = (-1) ** ((tj1 - tj2 - tm3) // 2)
    return sign * float(series) * math.sqrt(float(pref))


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol; returns 0 for any invalid argument combination."""
    tw = [HalfInt.of(x).twice for x in (j1, j2, j3, m1, m2, m3)]
    return _w3j_twice(*tw)


def exp_rotation(j, n) -> np.ndarray:
    """Unitary exp(i (n_x Jx + n_y Jy + n_z Jz)) on the spin-j irrep.

    Computed from the eigendecomposition of the Hermitian generator.
    """
    n = np.asarray(n, dtype=float)
    jx, jy, jz = spin_matrices(j)
    h = n[0] * jx + n[1] * jy + n[2] * jz
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(1j * evals)) @ evecs.conj().T
