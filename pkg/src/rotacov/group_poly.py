"""Sparse polynomials in the group variables u, u*, v, v*.

An SU(2) element is the matrix [[u, -v*], [v, u*]] with |u|^2 + |v|^2 = 1.
Rotations of spin states, and the characteristic function chi(g) = <psi|U_g|psi>,
are polynomials in (u, u*, v, v*); equality of characteristic functions is
decided on canonical coefficient lists taken modulo the sphere relation
u u* + v v* = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import hyp2f1

from .halfint import HalfInt, magnetic_range
from .spin_core import BlockDensity, SpinKet

PRUNE_TOL = 1e-12

Key = tuple  # (a, b, c, d): exponents of u, u*, v, v*


class GroupPoly:
    """Sparse polynomial: map (a, b, c, d) -> complex coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for key, c in (terms or {}).items():
            a, b, cc, d = key
            if min(a, b, cc, d) < 0:
                raise ValueError(f"negative exponent in {key}")
            if abs(c) > PRUNE_TOL:
                clean[(int(a), int(b), int(cc), int(d))] = complex(c)
        self.terms = clean

    @staticmethod
    def zero() -> "GroupPoly":
        return GroupPoly()

    @staticmethod
    def one() -> "GroupPoly":
        return GroupPoly({(0, 0, 0, 0): 1.0})

    @staticmethod
    def monomial(key, coeff=1.0) -> "GroupPoly":
        return GroupPoly({tuple(key): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def __add__(self, other: "GroupPoly") -> "GroupPoly":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0.0) + c
        return GroupPoly(out)

    def __sub__(self, other: "GroupPoly") -> "GroupPoly":
        return self + other.scaled(-1.0)

    def __mul__(self, other):
        if not isinstance(other, GroupPoly):
            return self.scaled(other)
        out = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = (k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2], k1[3] + k2[3])
                out[k] = out.get(k, 0.0) + c1 * c2
        return GroupPoly(out)

    __rmul__ = __mul__

    def scaled(self, c) -> "GroupPoly":
        return GroupPoly({k: c * v for k, v in self.terms.items()})

    def conjugated(self) -> "GroupPoly":
        """Complex conjugate polynomial: swaps u <-> u*, v <-> v*."""
        return GroupPoly({(b, a, d, cc): np.conj(c)
                          for (a, b, cc, d), c in self.terms.items()})

    def evaluate(self, u, v) -> complex:
        uc, vc = np.conj(u), np.conj(v)
        return sum(c * u ** a * uc ** b * v ** cc * vc ** d
                   for (a, b, cc, d), c in self.terms.items())

    def max_abs_diff(self, other: "GroupPoly") -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0))
                    for k in keys), default=0.0)

    def allclose(self, other: "GroupPoly", tol=1e-8) -> bool:
        return self.max_abs_diff(other) <= tol

    def __repr__(self):
        names = ("u", "u*", "v", "v*")
        parts = []
        for k in sorted(self.terms):
            mono = " ".join(f"{n}^{e}" if e > 1 else n
                            for n, e in zip(names, k) if e)
            parts.append(f"({self.terms[k]:.6g}) {mono or '1'}")
        return "GroupPoly[" + " + ".join(parts or ["0"]) + "]"


def poly_add(p: GroupPoly, q: GroupPoly) -> GroupPoly:
    return p + q


def poly_mul(p: GroupPoly, q: GroupPoly) -> GroupPoly:
    return p * q


def poly_scale(p: GroupPoly, c) -> GroupPoly:
    return p.scaled(c)


def evaluate(p: GroupPoly, u, v) -> complex:
    return p.evaluate(u, v)


@dataclass(frozen=True)
class CanonicalCoeffs:
    """Coefficient list of the canonical representative mod u u* + v v* = 1.

    No stored monomial contains both u and u* (a*b = 0 for every key), which
    makes the list a unique fingerprint of the function on the group.
    """

    coeffs: dict

    def get(self, key, default=0.0) -> complex:
        return self.coeffs.get(key, default)

    def keys(self):
        return self.coeffs.keys()

    def as_poly(self) -> GroupPoly:
        return GroupPoly(self.coeffs)

    def evaluate(self, u, v) -> complex:
        return self.as_poly().evaluate(u, v)

    def max_abs_diff(self, other: "CanonicalCoeffs") -> float:
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self.coeffs.get(k, 0.0) - other.coeffs.get(k, 0.0))
                    for k in keys), default=0.0)

    def allclose(self, other: "CanonicalCoeffs", tol=1e-8) -> bool:
        return self.max_abs_diff(other) <= tol


def canonical(p: GroupPoly) -> CanonicalCoeffs:
    """Reduce by the rewrite u u* -> 1 - v v* until no monomial has both.

    This is the normal form for the single relation u u* + v v* - 1 = 0
    under any monomial order with leading term u u*; it is linear in p and
    leaves the value on the group unchanged.
    """
    out = {}
    for (a, b, c, d), coef in p.terms.items():
        k = min(a, b)
        if k == 0:
            out[(a, b, c, d)] = out.get((a, b, c, d), 0.0) + coef
            continue
        # (u u*)^k = (1 - v v*)^k, expanded binomially
        for i in range(k + 1):
            key = (a - k, b - k, c + i, d + i)
            term = coef * math.comb(k, i) * (-1) ** i
            out[key] = out.get(key, 0.0) + term
    return CanonicalCoeffs({k: v for k, v in out.items() if abs(v) > PRUNE_TOL})


def rep_matrix(j) -> list:
    """Polynomial rotation matrix on spin j: entries U[m', m], basis m = j..-j.

    Entry (m', m) is
        sqrt(C(2j,j-m)/C(2j,j-m')) * sum_a C(j-m,a) C(j+m, m-m'+a) (-1)^a
            u^(j+m'-a) u*^(j-m-a) v^(m-m'+a) v*^a.
    """
    j = HalfInt.of(j)
    if j.twice < 0:
        raise ValueError("j must be nonnegative")
    tj = j.twice
    dim = tj + 1
    mat = [[None] * dim for _ in range(dim)]
    for i1, mp in enumerate(magnetic_range(j)):
        for i2, m in enumerate(magnetic_range(j)):
            jm = (j - m).twice // 2       # j - m
            jpm = (j + m).twice // 2      # j + m
            jmp = (j - mp).twice // 2     # j - m'
            jpmp = (j + mp).twice // 2    # j + m'
            shift = (m - mp).twice // 2   # m - m'
            pref = math.sqrt(math.comb(tj, jm) / math.comb(tj, jmp))
            terms = {}
            for a in range(max(0, -shift), min(jm, jpmp) + 1):
                coef = pref * math.comb(jm, a) * math.comb(jpm, shift + a) * (-1) ** a
                key = (jpmp - a, jm - a, shift + a, a)
                terms[key] = terms.get(key, 0.0) + coef
            mat[i1][i2] = GroupPoly(terms)
    return mat


def rep_matrix_eval(j, u, v) -> np.ndarray:
    """Numeric rotation matrix on spin j at the group point (u, v)."""
    mat = rep_matrix(j)
    d = len(mat)
    out = np.empty((d, d), dtype=complex)
    for i1 in range(d):
        for i2 in range(d):
            out[i1, i2] = mat[i1][i2].evaluate(u, v)
    return out


def rep_matrix_hypergeom(j, mp, m, u, v) -> complex:
    """Closed-form rotation matrix element via a terminating 2F1 series.

    Valid on |u|^2 + |v|^2 = 1 with u != 0; u = 0 hits the removable
    singularity of the closed form and raises (use the sum form there).
    """
    j, mp, m = HalfInt.of(j), HalfInt.of(mp), HalfInt.of(m)
    if abs(abs(u) ** 2 + abs(v) ** 2 - 1.0) > 1e-9:
        raise ValueError("(u, v) must lie on the group: |u|^2 + |v|^2 = 1")
    if u == 0:
        raise ZeroDivisionError("closed form is singular at u = 0")
    tj = j.twice
    jm = (j - m).twice // 2
    jpm = (j + m).twice // 2
    jmp = (j - mp).twice // 2
    jpmp = (j + mp).twice // 2
    ratio = math.sqrt(math.comb(tj, jm) / math.comb(tj, jmp))
    x = -abs(v) ** 2 / abs(u) ** 2
    uc, vc = np.conj(u), np.conj(v)
    if m >= mp:
        s = (m - mp).twice // 2
        pre = math.comb(jpm, s) * ratio * v ** s * uc ** jm * u ** jpmp
        return pre * hyp2f1(-jm, -jpmp, s + 1, x)
    s = (mp - m).twice // 2
    pre = (math.comb(jm, s) * ratio * (-1) ** s
           * u ** jpm * vc ** s * uc ** jmp)
    return pre * hyp2f1(-jpm, -jmp, s + 1, x)


def rotate_state(ket: SpinKet, u, v) -> SpinKet:
    """Apply the rotation with parameters (u, v) blockwise to a state."""
    if abs(abs(u) ** 2 + abs(v) ** 2 - 1.0) > 1e-9:
        raise ValueError("(u, v) must lie on the group: |u|^2 + |v|^2 = 1")
    amps = {}
    for j in ket.irreps():
        w = rep_matrix_eval(j, u, v) @ ket.block_vector(j)
        for i, m in enumerate(magnetic_range(j)):
            amps[(j, m)] = w[i]
    return SpinKet(amps)


def charfun_pure(ket: SpinKet) -> GroupPoly:
    """Characteristic polynomial chi(g) = <psi|U_g|psi> of a pure state."""
    chi = GroupPoly.zero()
    for j in ket.irreps():
        mat = rep_matrix(j)
        v = ket.block_vector(j)
        for i1 in range(len(v)):
            if v[i1] == 0:
                continue
            for i2 in range(len(v)):
                if v[i2] == 0:
                    continue
                chi = chi + mat[i1][i2].scaled(np.conj(v[i1]) * v[i2])
    return chi


def charfun_mixed(rho: BlockDensity) -> GroupPoly:
    """Characteristic polynomial tr(U_g rho) of a block-diagonal density."""
    chi = GroupPoly.zero()
    for j, block in rho.blocks.items():
        mat = rep_matrix(j)
        d = block.shape[0]
        for i1 in range(d):
            for i2 in range(d):
                c = block[i2, i1]  # tr(U rho) pairs U[m',m] with rho[m,m']
                if c != 0:
                    chi = chi + mat[i1][i2].scaled(c)
    return chi


def su2_matrix(u, v) -> np.ndarray:
    """The defining 2x2 matrix [[u, -v*], [v, u*]]."""
    return np.array([[u, -np.conj(v)], [v, np.conj(u)]])


def uv_from_axis_angle(n) -> tuple:
    """(u, v) of the group element exp(i n . sigma / 2)."""
    n = np.asarray(n, dtype=float)
    r = float(np.linalg.norm(n))
    if r == 0:
        return 1.0 + 0j, 0.0 + 0j
    nh = n / r
    c, s = math.cos(r / 2), math.sin(r / 2)
    u = c + 1j * s * nh[2]
    v = s * (1j * nh[0] - nh[1])
    return u, v


def axis_angle_from_uv(u, v) -> np.ndarray:
    """Principal axis-angle vector n with exp(i n . sigma / 2) = [[u,-v*],[v,u*]].

    Raises near rotation angle pi (trace close to -2), where the principal
    logarithm's axis is numerically undefined.
    """
    c = u.real  # cos(r/2) = Re tr(V)/2
    c = min(1.0, max(-1.0, c))
    half_r = math.acos(c)
    s = math.sin(half_r)
    if abs(s) < 1e-6:
        if half_r < 1.0:
            return np.zeros(3)  # identity
        raise ValueError("axis undefined near rotation angle pi")
    nh = np.array([v.imag / s, -v.real / s, u.imag / s])
    return 2 * half_r * nh
