import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotacov import (
    BlockDensity,
    GroupPoly,
    HalfInt,
    SpinKet,
    canonical,
    charfun_mixed,
    charfun_pure,
    coherent_state,
    exp_rotation,
    hrange,
    poly_add,
    poly_mul,
    poly_scale,
    rep_matrix,
    rep_matrix_eval,
    rep_matrix_hypergeom,
    rotate_state,
)
from rotacov.group_poly import axis_angle_from_uv, su2_matrix, uv_from_axis_angle

SQ2 = math.sqrt(2)
U = GroupPoly.monomial((1, 0, 0, 0))
UC = GroupPoly.monomial((0, 1, 0, 0))
V = GroupPoly.monomial((0, 0, 1, 0))
VC = GroupPoly.monomial((0, 0, 0, 1))


def random_uv(rng):
    z = rng.normal(size=4)
    z /= np.linalg.norm(z)
    return z[0] + 1j * z[1], z[2] + 1j * z[3]


def random_ket(rng, jmax="2", n_irreps=2):
    js = list(rng.choice(len(hrange(0, jmax)), size=n_irreps, replace=False))
    amps = {}
    for idx in js:
        j = hrange(0, jmax)[idx]
        for m in hrange(-j, j, 1):
            if j.same_parity(m):
                amps[(j, m)] = rng.normal() + 1j * rng.normal()
    return SpinKet(amps).normalized()


# ---------------------------------------------------------------- algebra

def test_poly_mul_monomials():
    assert poly_mul(U, UC).terms == {(1, 1, 0, 0): 1.0 + 0j}


def test_poly_additive_inverse():
    p = GroupPoly({(1, 0, 2, 0): 1.5, (0, 0, 0, 0): -2j})
    assert poly_add(p, poly_scale(p, -1)).is_zero()


def test_charfun_product_of_top_states():
    chi = charfun_pure(SpinKet({("1", "1"): 1.0}))
    assert poly_mul(chi, chi).terms == {(4, 0, 0, 0): pytest.approx(1.0 + 0j)}


coeffs_strategy = st.dictionaries(
    st.tuples(*[st.integers(0, 2)] * 4),
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    max_size=4,
)


@settings(max_examples=60, deadline=None)
@given(coeffs_strategy, coeffs_strategy, coeffs_strategy)
def test_poly_ring_axioms(a, b, c):
    pa, pb, pc = GroupPoly(a), GroupPoly(b), GroupPoly(c)
    lhs = poly_mul(pa, poly_add(pb, pc))
    rhs = poly_add(poly_mul(pa, pb), poly_mul(pa, pc))
    assert lhs.max_abs_diff(rhs) < 1e-9
    assert poly_mul(pa, pb).max_abs_diff(poly_mul(pb, pa)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(coeffs_strategy, coeffs_strategy)
def test_evaluate_is_multiplicative(a, b):
    pa, pb = GroupPoly(a), GroupPoly(b)
    u, v = 0.3 + 0.4j, -0.2 + 0.1j
    prod = poly_mul(pa, pb).evaluate(u, v)
    assert prod == pytest.approx(pa.evaluate(u, v) * pb.evaluate(u, v), abs=1e-8)


def test_evaluate_examples():
    assert GroupPoly.monomial((2, 0, 0, 0)).evaluate(1.0, 0.0) == pytest.approx(1.0)
    sphere = poly_add(poly_mul(U, UC), poly_mul(V, VC))
    rng = np.random.default_rng(0)
    u, v = random_uv(rng)
    assert sphere.evaluate(u, v) == pytest.approx(1.0)


# ---------------------------------------------------------------- rep matrices

def test_rep_matrix_half_exact():
    mat = rep_matrix("1/2")
    assert mat[0][0].terms == {(1, 0, 0, 0): 1.0}
    assert mat[0][1].terms == {(0, 0, 0, 1): -1.0}
    assert mat[1][0].terms == {(0, 0, 1, 0): 1.0}
    assert mat[1][1].terms == {(0, 1, 0, 0): 1.0}


def test_rep_matrix_one_exact():
    mat = rep_matrix(1)
    assert mat[0][0].terms == {(2, 0, 0, 0): 1.0}
    assert mat[0][1].terms == {(1, 0, 0, 1): -SQ2}
    assert mat[0][2].terms == {(0, 0, 0, 2): 1.0}
    assert mat[1][0].terms == {(1, 0, 1, 0): SQ2}
    assert mat[1][1].terms == {(1, 1, 0, 0): 1.0, (0, 0, 1, 1): -1.0}
    assert mat[1][2].terms == {(0, 1, 0, 1): -SQ2}
    assert mat[2][0].terms == {(0, 0, 2, 0): 1.0}
    assert mat[2][1].terms == {(0, 1, 1, 0): SQ2}
    assert mat[2][2].terms == {(0, 2, 0, 0): 1.0}


def test_rep_matrix_unitary():
    rng = np.random.default_rng(1)
    for j in hrange(0, "5/2"):
        for _ in range(20):
            u, v = random_uv(rng)
            mat = rep_matrix_eval(j, u, v)
            assert np.abs(mat @ mat.conj().T - np.eye(j.twice + 1)).max() < 1e-9


def test_rep_matrix_homomorphism():
    rng = np.random.default_rng(2)
    for _ in range(10):
        u1, v1 = random_uv(rng)
        u2, v2 = random_uv(rng)
        prod = su2_matrix(u1, v1) @ su2_matrix(u2, v2)
        u3, v3 = prod[0, 0], prod[1, 0]
        for j in hrange(0, 2):
            lhs = rep_matrix_eval(j, u1, v1) @ rep_matrix_eval(j, u2, v2)
            assert np.abs(lhs - rep_matrix_eval(j, u3, v3)).max() < 1e-9


def test_rep_matrix_agrees_with_exponential():
    """Axis-angle route and polynomial route give the same rotation."""
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = rng.normal(size=3)
        n *= rng.uniform(0.1, 2.8) / np.linalg.norm(n)  # stay away from angle pi
        u, v = uv_from_axis_angle(n)
        back = axis_angle_from_uv(u, v)
        assert np.abs(back - n).max() < 1e-9
        for j in hrange(0, 2):
            assert np.abs(rep_matrix_eval(j, u, v) - exp_rotation(j, n)).max() < 1e-8


def test_hypergeom_entries():
    rng = np.random.default_rng(4)
    u, v = random_uv(rng)
    assert rep_matrix_hypergeom("1/2", "1/2", "1/2", u, v) == pytest.approx(u)
    assert rep_matrix_hypergeom(1, 1, -1, u, v) == pytest.approx(np.conj(v) ** 2)


def test_hypergeom_matches_sum_form():
    rng = np.random.default_rng(5)
    for _ in range(10):
        u, v = random_uv(rng)
        for j in hrange(0, 2):
            mat = rep_matrix(j)
            for i1, mp in enumerate(hrange(-j, j, 1)[::-1]):
                for i2, m in enumerate(hrange(-j, j, 1)[::-1]):
                    if not (j.same_parity(m) and j.same_parity(mp)):
                        continue
                    want = mat[(j - mp).twice // 2][(j - m).twice // 2].evaluate(u, v)
                    got = rep_matrix_hypergeom(j, mp, m, u, v)
                    assert got == pytest.approx(want, abs=1e-9)


def test_hypergeom_singular_at_u_zero():
    with pytest.raises(ZeroDivisionError):
        rep_matrix_hypergeom(1, 1, 1, 0.0, 1.0)


# ---------------------------------------------------------------- rotate_state

def test_rotate_state_identity():
    ket = SpinKet({("1", "0"): 0.6, ("0", "0"): 0.8})
    out = rotate_state(ket, 1.0, 0.0)
    assert out.amplitudes == pytest.approx(ket.amplitudes)


def test_rotate_state_half_column():
    rng = np.random.default_rng(6)
    u, v = random_uv(rng)
    out = rotate_state(SpinKet.basis("1/2", "1/2"), u, v)
    assert out.amplitudes[(HalfInt.of("1/2"), HalfInt.of("1/2"))] == pytest.approx(u)
    assert out.amplitudes[(HalfInt.of("1/2"), HalfInt.of("-1/2"))] == pytest.approx(v)


def test_rotate_state_composition():
    rng = np.random.default_rng(7)
    for _ in range(5):
        ket = random_ket(rng)
        u1, v1 = random_uv(rng)
        u2, v2 = random_uv(rng)
        prod = su2_matrix(u1, v1) @ su2_matrix(u2, v2)
        once = rotate_state(ket, prod[0, 0], prod[1, 0])
        twice = rotate_state(rotate_state(ket, u2, v2), u1, v1)
        for key in set(once.amplitudes) | set(twice.amplitudes):
            assert once.amplitudes.get(key, 0) == pytest.approx(
                twice.amplitudes.get(key, 0), abs=1e-9)


def test_rotate_state_norm_preserved():
    rng = np.random.default_rng(8)
    ket = random_ket(rng)
    u, v = random_uv(rng)
    assert rotate_state(ket, u, v).norm() == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        rotate_state(ket, 1.0, 1.0)


# ---------------------------------------------------------------- charfun

def test_charfun_pure_examples():
    assert charfun_pure(SpinKet.basis(1, 1)).terms == {(2, 0, 0, 0): pytest.approx(1.0)}
    mix = SpinKet({("1", "1"): 1 / SQ2, ("0", "0"): 1 / SQ2})
    assert canonical(charfun_pure(mix)).coeffs == pytest.approx(
        {(2, 0, 0, 0): 0.5, (0, 0, 0, 0): 0.5})
    assert charfun_pure(SpinKet.basis(0, 0)).terms == {(0, 0, 0, 0): pytest.approx(1.0)}


def test_charfun_matches_exponential_oracle():
    rng = np.random.default_rng(9)
    for _ in range(10):
        ket = random_ket(rng)
        n = rng.normal(size=3)
        n *= rng.uniform(0.1, 2.8) / np.linalg.norm(n)
        u, v = uv_from_axis_angle(n)
        want = sum(np.vdot(ket.block_vector(j), exp_rotation(j, n) @ ket.block_vector(j))
                   for j in ket.irreps())
        assert charfun_pure(ket).evaluate(u, v) == pytest.approx(want, abs=1e-9)


def test_charfun_mixed_consistency():
    rng = np.random.default_rng(10)
    ket = random_ket(rng)
    rho = BlockDensity.from_ket(ket)
    # single-irrep pieces: chi of the dephased density equals the sum of
    # per-irrep pure characteristic functions
    per_irrep = GroupPoly.zero()
    for j in ket.irreps():
        per_irrep = per_irrep + charfun_pure(SpinKet.from_block_vector(j, ket.block_vector(j)))
    assert charfun_mixed(rho).max_abs_diff(per_irrep) < 1e-10


def test_charfun_mixed_maximally_mixed():
    rho = BlockDensity({"1/2": np.eye(2) / 2})
    want = GroupPoly({(1, 0, 0, 0): 0.5, (0, 1, 0, 0): 0.5})
    assert charfun_mixed(rho).max_abs_diff(want) < 1e-12


def test_charfun_mixed_zero_state():
    rho = BlockDensity({"1": np.zeros((3, 3))})
    assert charfun_mixed(rho).is_zero()


def test_charfun_bounded_by_one():
    rng = np.random.default_rng(11)
    for _ in range(10):
        chi = charfun_pure(random_ket(rng))
        for _ in range(100):
            u, v = random_uv(rng)
            assert abs(chi.evaluate(u, v)) <= 1.0 + 1e-9


def test_charfun_decomposes_over_irreps():
    rng = np.random.default_rng(12)
    ket = random_ket(rng, jmax="2", n_irreps=3)
    total = charfun_pure(ket)
    parts = GroupPoly.zero()
    for j in ket.irreps():
        parts = parts + charfun_pure(SpinKet.from_block_vector(j, ket.block_vector(j)))
    assert total.max_abs_diff(parts) < 1e-12


# ---------------------------------------------------------------- canonical

def test_canonical_examples():
    usq = GroupPoly.monomial((2, 0, 0, 0))
    assert canonical(usq).coeffs == {(2, 0, 0, 0): 1.0}
    uus = GroupPoly.monomial((1, 1, 0, 0))
    assert canonical(uus).coeffs == pytest.approx(
        {(0, 0, 0, 0): 1.0, (0, 0, 1, 1): -1.0})


def test_canonical_value_at_identity():
    rng = np.random.default_rng(13)
    for _ in range(5):
        chi = charfun_pure(random_ket(rng))
        assert canonical(chi).evaluate(1.0, 0.0) == pytest.approx(1.0, abs=1e-9)


def test_canonical_preserves_values_on_sphere():
    rng = np.random.default_rng(14)
    for _ in range(100):
        terms = {tuple(rng.integers(0, 3, size=4)): rng.normal() + 1j * rng.normal()
                 for _ in range(4)}
        p = GroupPoly(terms)
        q = canonical(p)
        assert all(a * b == 0 for (a, b, _, _) in q.coeffs)
        u, v = random_uv(rng)
        assert q.evaluate(u, v) == pytest.approx(p.evaluate(u, v), abs=1e-9)


def test_canonical_is_linear():
    rng = np.random.default_rng(15)
    for _ in range(10):
        p = GroupPoly({tuple(rng.integers(0, 3, size=4)): rng.normal() for _ in range(3)})
        q = GroupPoly({tuple(rng.integers(0, 3, size=4)): rng.normal() for _ in range(3)})
        lhs = canonical(poly_add(p, poly_scale(q, 2.5))).coeffs
        rhs = poly_add(canonical(p).as_poly(), poly_scale(canonical(q).as_poly(), 2.5))
        assert GroupPoly(lhs).max_abs_diff(rhs) < 1e-10
