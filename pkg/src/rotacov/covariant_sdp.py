"""Feasibility, probability, and fidelity of rotationally covariant maps.

Reachability questions are decided on canonical coefficient lists of
characteristic polynomials: the transformation criteria become affine
constraints on auxiliary density blocks, solved as semidefinite programs.
Channels themselves are parameterized by one PSD coefficient block per
transfer spin J, contracted against the state with 3j symbols.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .halfint import HalfInt, hrange
from .spin_core import BlockDensity, SpinKet, wigner_3j
from .group_poly import GroupPoly, canonical, charfun_pure, rep_matrix
from .solver_adapter import SdpProblem, SolveReport, solve_problem

_I_POW = (1.0 + 0j, 1j, -1.0 + 0j, -1j)  # i^k, exact


def _phase(tdiff: int) -> complex:
    """e^(i pi x) for the half-integer x = tdiff / 2."""
    return _I_POW[tdiff % 4]


class SolverFailure(RuntimeError):
    """Raised when the conic solver cannot certify a solution."""

    def __init__(self, report: SolveReport):
        super().__init__(f"solver failed: {report.status} {report.message}")
        self.report = report


def jmax_of(state) -> HalfInt:
    """Largest total spin carrying more than 1e-12 of amplitude/block mass."""
    if isinstance(state, SpinKet):
        occupied = [j for (j, _), a in state.amplitudes.items() if abs(a) ** 2 > 1e-12]
        if not occupied:
            raise ValueError("empty state")
        return max(occupied)
    if isinstance(state, BlockDensity):
        return state.jmax(mass_tol=1e-12)
    raise TypeError(f"expected SpinKet or BlockDensity, got {type(state).__name__}")


# --------------------------------------------------------------------------
# characteristic-polynomial constraint assembly
# --------------------------------------------------------------------------

def _entry_canonicals(j: HalfInt, factor: GroupPoly):
    """Canonical coefficients of (rotation-matrix entry) * factor per entry.

    Yields (row, col, {key: coeff}) where the variable pairing is
    chi contribution = coeff * X[col, row] for a density block on irrep j.
    """
    mat = rep_matrix(j)
    d = j.twice + 1
    for i1 in range(d):
        for i2 in range(d):
            cc = canonical(mat[i1][i2] * factor)
            if cc.coeffs:
                yield i1, i2, cc.coeffs


def _charfun_constraints(problem: SdpProblem, target_coeffs: dict, parts):
    """Equate an affine characteristic polynomial with a fixed one.

    parts: list of (block_name_for_j, irrep j, factor GroupPoly); each part
    contributes sum over entries of canonical(U[m',m] * factor) * X[m, m'].
    One complex equality is added per monomial in the union support.
    """
    affine = {}
    for name_of, j, factor in parts:
        for i1, i2, coeffs in _entry_canonicals(j, factor):
            for key, c in coeffs.items():
                affine.setdefault(key, {})
                slot = (name_of, i2, i1)
                affine[key][slot] = affine[key].get(slot, 0.0) + c
    for key in sorted(set(target_coeffs) | set(affine)):
        problem.add_constraint(affine.get(key, {}), target_coeffs.get(key, 0.0))


def _blocks_from_solution(values: dict, prefix: str) -> BlockDensity:
    out = {}
    for name, mat in values.items():
        if name.startswith(prefix):
            tj = int(name[len(prefix):])
            out[HalfInt(tj)] = mat
    return BlockDensity(out)


MaxProbResult = namedtuple("MaxProbResult", "p rho sigma report")
DetFeasibleResult = namedtuple("DetFeasibleResult", "feasible xi report")
FidelityResult = namedtuple("FidelityResult", "fidelity channel report")


def deterministic_feasible(psi: SpinKet, phi: SpinKet, tol=None) -> DetFeasibleResult:
    """Whether a covariant channel maps psi to phi deterministically.

    Feasible iff some auxiliary state xi (supported on total spins up to
    jmax(psi) - jmax(phi)) makes the canonical coefficient lists of chi_psi
    and chi_xi * chi_phi coincide.
    """
    for name, k in (("psi", psi), ("phi", phi)):
        if not k.is_normalized():
            raise ValueError(f"{name} must be normalized")
    if jmax_of(phi) > jmax_of(psi):
        return DetFeasibleResult(False, None, SolveReport(
            "infeasible", None, None, {}, "target spin exceeds source"))
    cap = jmax_of(psi) - jmax_of(phi)
    chi_psi = canonical(charfun_pure(psi)).coeffs
    chi_phi = charfun_pure(phi)
    problem = SdpProblem({})
    xi_names = {}
    for j in hrange(0, cap):
        name = f"xi{j.twice}"
        xi_names[j] = name
        problem.add_block(name, j.twice + 1)
    _charfun_constraints(problem, chi_psi,
                         [(xi_names[j], j, chi_phi) for j in xi_names])
    trace_row = {}
    for j, name in xi_names.items():
        for i in range(j.twice + 1):
            trace_row[(name, i, i)] = 1.0
    problem.add_constraint(trace_row, 1.0)
    report = solve_problem(problem, tol=tol)
    if report.status == "infeasible":
        return DetFeasibleResult(False, None, report)
    if report.status != "optimal":
        raise SolverFailure(report)
    return DetFeasibleResult(True, _blocks_from_solution(report.block_values, "xi"),
                             report)


def max_prob(psi: SpinKet, phi: SpinKet, tol=None) -> MaxProbResult:
    """Maximum probability of a covariant transformation psi -> phi.

    Solves max tr(rho) over rho, sigma PSD subject to the canonical
    coefficient identity chi_psi = chi_rho * chi_phi + chi_sigma, with
    supports capped at jmax(psi) - jmax(phi) and jmax(psi) respectively.
    """
    for name, k in (("psi", psi), ("phi", phi)):
        if not k.is_normalized():
            raise ValueError(f"{name} must be normalized")
    if jmax_of(phi) > jmax_of(psi):
        return MaxProbResult(0.0, BlockDensity({}), BlockDensity({}), SolveReport(
            "optimal", 0.0, {}, {}, "spin increase forbidden"))
    cap_rho = jmax_of(psi) - jmax_of(phi)
    cap_sig = jmax_of(psi)
    chi_psi = canonical(charfun_pure(psi)).coeffs
    chi_phi = charfun_pure(phi)
    problem = SdpProblem({})
    parts = []
    for j in hrange(0, cap_rho):
        name = f"rho{j.twice}"
        problem.add_block(name, j.twice + 1)
        parts.append((name, j, chi_phi))
    for j in hrange(0, cap_sig):
        name = f"sig{j.twice}"
        problem.add_block(name, j.twice + 1)
        parts.append((name, j, GroupPoly.one()))
    _charfun_constraints(problem, chi_psi, parts)
    for j in hrange(0, cap_rho):
        for i in range(j.twice + 1):
            problem.objective[(f"rho{j.twice}", i, i)] = 1.0
    report = solve_problem(problem, tol=tol)
    if report.status != "optimal":
        raise SolverFailure(report)
    p = min(max(report.objective, 0.0), 1.0)
    return MaxProbResult(round(p, 6),
                         _blocks_from_solution(report.block_values, "rho"),
                         _blocks_from_solution(report.block_values, "sig"),
                         report)


# --------------------------------------------------------------------------
# covariant channels: coefficient blocks F_J and their action
# --------------------------------------------------------------------------

def _triangle_ok(tJ, tjp, tj) -> bool:
    return abs(tJ - tjp) <= tj <= tJ + tjp and (tJ + tjp + tj) % 2 == 0


def build_kraus_index(j_in_max, j_out_max) -> list:
    """All (J, [(j_out, j_in), ...]) with J <= j_in_max + j_out_max,
    j_in <= j_in_max, and triangle-compatible output spins."""
    j_in_max, j_out_max = HalfInt.of(j_in_max), HalfInt.of(j_out_max)
    out = []
    for tJ in range(0, j_in_max.twice + j_out_max.twice + 1):
        pairs = []
        for tj in range(0, j_in_max.twice + 1):
            for tjp in range(abs(tJ - tj), tJ + tj + 1, 2):
                if _triangle_ok(tJ, tjp, tj):
                    pairs.append((HalfInt(tjp), HalfInt(tj)))
        if pairs:
            pairs.sort(key=lambda pr: (pr[0].twice, pr[1].twice))
            out.append((HalfInt(tJ), pairs))
    return out


@dataclass
class KrausBlocks:
    """One Hermitian PSD coefficient matrix per transfer spin J.

    Rows/columns of mats[J] follow pairs[J], a list of (j_out, j_in)
    tuples.  Normalization: for every input irrep j, the diagonal entries
    at pairs (j', j) summed over all J and j' equal 2j + 1.
    """

    pairs: dict   # J -> [(j_out, j_in), ...]
    mats: dict    # J -> ndarray

    @staticmethod
    def from_index(index, mats=None) -> "KrausBlocks":
        pairs = {J: list(prs) for J, prs in index}
        if mats is None:
            mats = {J: np.zeros((len(prs), len(prs)), dtype=complex)
                    for J, prs in pairs.items()}
        return KrausBlocks(pairs, dict(mats))

    @staticmethod
    def identity(irreps) -> "KrausBlocks":
        """The do-nothing channel on the given irreps (single J = 0 block)."""
        irreps = sorted(HalfInt.of(j) for j in irreps)
        prs = [(j, j) for j in irreps]
        w = np.array([math.sqrt(j.twice + 1) for j in irreps])
        return KrausBlocks({HalfInt(0): prs}, {HalfInt(0): np.outer(w, w).astype(complex)})

    def input_irreps(self) -> list:
        return sorted({j for prs in self.pairs.values() for (_, j) in prs})

    def output_irreps(self) -> list:
        return sorted({jp for prs in self.pairs.values() for (jp, _) in prs})

    def normalization_residual(self) -> float:
        worst = 0.0
        for j in self.input_irreps():
            total = 0.0
            for J, prs in self.pairs.items():
                m = self.mats[J]
                for a, (jp, jin) in enumerate(prs):
                    if jin == j:
                        total += m[a, a].real
            worst = max(worst, abs(total - (j.twice + 1)))
        return worst

    def min_eigenvalue(self) -> float:
        return min((float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
                    for m in self.mats.values() if m.size), default=0.0)


def _contraction(tjp, tJ, tj, tm, tM) -> float:
    """3j(j', J, j; -m, M, m - M) in twice-integer arguments."""
    return wigner_3j(HalfInt(tjp), HalfInt(tJ), HalfInt(tj),
                     HalfInt(-tm), HalfInt(tM), HalfInt(tm - tM))


def channel_output(rho: BlockDensity, F: KrausBlocks, norm_tol=1e-6) -> BlockDensity:
    """Apply the channel with coefficient blocks F to a block-diagonal state.

    Only the per-irrep diagonal blocks of the output are formed (all that a
    BlockDensity represents); these depend on the diagonal entries of the
    F_J alone.  The input must satisfy the trace-preservation sums.
    """
    resid = F.normalization_residual()
    if resid > norm_tol:
        raise ValueError(f"channel normalization violated by {resid:.3e}")
    missing = set(rho.blocks) - set(F.input_irreps())
    if missing:
        raise ValueError(f"state has irreps outside the channel domain: "
                         f"{sorted(str(j) for j in missing)}")
    out_irreps = sorted({jp for J, prs in F.pairs.items() for (jp, j) in prs
                         if j in rho.blocks})
    out = {}
    for jp in out_irreps:
        d = jp.twice + 1
        block = np.zeros((d, d), dtype=complex)
        for J, prs in F.pairs.items():
            mat = F.mats[J]
            for a, (jp2, j) in enumerate(prs):
                if jp2 != jp or j not in rho.blocks:
                    continue
                weight = mat[a, a].real
                if abs(weight) < 1e-15:
                    continue
                R = rho.blocks[j]
                for i1, tm1 in enumerate(range(jp.twice, -jp.twice - 1, -2)):
                    for i2, tm2 in enumerate(range(jp.twice, -jp.twice - 1, -2)):
                        acc = 0.0
                        for tM in range(-J.twice, J.twice + 1, 2):
                            tmu1, tmu2 = tm1 - tM, tm2 - tM
                            if abs(tmu1) > j.twice or abs(tmu2) > j.twice:
                                continue
                            c1 = _contraction(jp.twice, J.twice, j.twice, tm1, tM)
                            c2 = _contraction(jp.twice, J.twice, j.twice, tm2, tM)
                            if c1 == 0.0 or c2 == 0.0:
                                continue
                            k1 = (j.twice - tmu1) // 2
                            k2 = (j.twice - tmu2) // 2
                            acc += c1 * c2 * R[k1, k2]
                        sign = (-1) ** (((tm2 - tm1) // 2) % 2)
                        block[i1, i2] += sign * weight * acc
        out[jp] = block
    return BlockDensity(out)


# --------------------------------------------------------------------------
# fidelity programs
# --------------------------------------------------------------------------

def _space(irreps):
    """Offsets and total dimension of the direct sum of the given irreps."""
    offsets, off = {}, 0
    for j in sorted(irreps):
        offsets[j] = off
        off += j.twice + 1
    return offsets, off


def _cross_blocks(state) -> dict:
    """Input blocks {(j1, j2): matrix}.  A pure state keeps its coherences
    between irreps; a BlockDensity contributes diagonal blocks only."""
    if isinstance(state, SpinKet):
        state = state if state.is_normalized() else state.normalized()
        vecs = {j: state.block_vector(j) for j in state.irreps()}
        return {(j1, j2): np.outer(vecs[j1], vecs[j2].conj())
                for j1 in vecs for j2 in vecs}
    if isinstance(state, BlockDensity):
        return {(j, j): b for j, b in state.blocks.items()}
    raise TypeError(f"expected SpinKet or BlockDensity, got {type(state).__name__}")


def _dense_state(state, irreps=None) -> tuple:
    """(offsets, n, dense matrix) of a state on the direct-sum space."""
    cross = _cross_blocks(state)
    own = sorted({j for (j, _) in cross})
    irreps = sorted(irreps) if irreps is not None else own
    offsets, n = _space(irreps)
    dense = np.zeros((n, n), dtype=complex)
    for (j1, j2), b in cross.items():
        if j1 in offsets and j2 in offsets:
            o1, o2 = offsets[j1], offsets[j2]
            dense[o1:o1 + b.shape[0], o2:o2 + b.shape[1]] = b
    return offsets, n, dense


def _window_output_affine(cross, index, window_offsets, n):
    """Affine map from F entries to the windowed channel output matrix.

    Returns {(row, col): {(J, a1, a2): complex}} so that
    E[row, col] = sum coeff * F_J[a1, a2] for the given input blocks.
    """
    entries = {}
    for (J, prs) in index:
        for a1, (tjp1, tj1) in enumerate((p[0].twice, p[1].twice) for p in prs):
            jp1 = HalfInt(tjp1)
            if jp1 not in window_offsets:
                continue
            for a2, (tjp2, tj2) in enumerate((p[0].twice, p[1].twice) for p in prs):
                jp2 = HalfInt(tjp2)
                if jp2 not in window_offsets:
                    continue
                key_in = (HalfInt(tj1), HalfInt(tj2))
                if key_in not in cross:
                    continue
                R = cross[key_in]
                if np.abs(R).max() < 1e-15:
                    continue
                o1, o2 = window_offsets[jp1], window_offsets[jp2]
                for i1, tm1 in enumerate(range(tjp1, -tjp1 - 1, -2)):
                    for i2, tm2 in enumerate(range(tjp2, -tjp2 - 1, -2)):
                        acc = 0.0 + 0j
                        for tM in range(-J.twice, J.twice + 1, 2):
                            tmu1, tmu2 = tm1 - tM, tm2 - tM
                            if abs(tmu1) > tj1 or abs(tmu2) > tj2:
                                continue
                            c1 = _contraction(tjp1, J.twice, tj1, tm1, tM)
                            c2 = _contraction(tjp2, J.twice, tj2, tm2, tM)
                            if c1 == 0.0 or c2 == 0.0:
                                continue
                            k1 = (tj1 - tmu1) // 2
                            k2 = (tj2 - tmu2) // 2
                            acc += c1 * c2 * R[k1, k2]
                        if acc == 0:
                            continue
                        ph = _phase((tj1 - tm1) - (tj2 - tm2))
                        slot = entries.setdefault((o1 + i1, o2 + i2), {})
                        fkey = (J, a1, a2)
                        slot[fkey] = slot.get(fkey, 0.0) + ph * acc
    return entries


def _add_channel_blocks(problem: SdpProblem, index):
    names = {}
    for (J, prs) in index:
        name = f"F{J.twice}"
        problem.add_block(name, len(prs))
        names[J] = name
    return names


def _add_normalization(problem: SdpProblem, index, names):
    input_irreps = sorted({j for (_, prs) in index for (_, j) in prs})
    for j in input_irreps:
        row = {}
        for (J, prs) in index:
            for a, (jp, jin) in enumerate(prs):
                if jin == j:
                    row[(names[J], a, a)] = row.get((names[J], a, a), 0.0) + 1.0
        problem.add_constraint(row, float(j.twice + 1))


def _channel_from_solution(index, values: dict) -> KrausBlocks:
    mats = {J: values[f"F{J.twice}"] for (J, _) in index}
    return KrausBlocks.from_index(index, mats)


def fidelity_sdp(rho, sigma, tol=None) -> float:
    """Fidelity tr sqrt(sqrt(sigma) rho sqrt(sigma)) via its conic program:
    maximize Re tr(X) subject to [[rho, X], [X^dag, sigma]] PSD."""
    union = sorted({j for state in (rho, sigma)
                    for (j1, j2) in _cross_blocks(state) for j in (j1, j2)})
    _, n, rho_d = _dense_state(rho, union)
    _, _, sig_d = _dense_state(sigma, union)
    problem = SdpProblem({})
    problem.add_block("Z", 2 * n)
    for r in range(n):
        for c in range(r, n):
            problem.add_constraint({("Z", r, c): 1.0}, rho_d[r, c])
            problem.add_constraint({("Z", n + r, n + c): 1.0}, sig_d[r, c])
    for i in range(n):
        problem.objective[("Z", i, n + i)] = 1.0
    report = solve_problem(problem, tol=tol)
    if report.status != "optimal":
        raise SolverFailure(report)
    return round(min(max(report.objective, 0.0), 1.0), 6)


def max_fidelity(rho, sigma, tol=None) -> FidelityResult:
    """Best fidelity between sigma and any covariant-channel image of rho.

    Joint program over the fidelity witness and the channel blocks:
    [[sigma, X], [X^dag, E(rho, {F_J})]] PSD on the target window,
    F_J PSD, trace-preservation equalities.  Pure inputs keep their
    coherences between irreps; the window spans sigma's support.
    """
    cross = _cross_blocks(rho)
    window = sorted({j for (j1, j2) in _cross_blocks(sigma) for j in (j1, j2)})
    offsets, n = _space(window)
    _, _, sig_d = _dense_state(sigma, window)
    j_in = max(j for (j, _) in cross)
    index = build_kraus_index(j_in, max(window))
    problem = SdpProblem({})
    problem.add_block("Z", 2 * n)
    names = _add_channel_blocks(problem, index)
    affine = _window_output_affine(cross, index, offsets, n)
    for r in range(n):
        for c in range(r, n):
            problem.add_constraint({("Z", r, c): 1.0}, sig_d[r, c])
            row = {("Z", n + r, n + c): 1.0}
            for (J, a1, a2), coeff in affine.get((r, c), {}).items():
                row[(names[J], a1, a2)] = row.get((names[J], a1, a2), 0.0) - coeff
            problem.add_constraint(row, 0.0)
    _add_normalization(problem, index, names)
    for i in range(n):
        problem.objective[("Z", i, n + i)] = 1.0
    report = solve_problem(problem, tol=tol)
    if report.status != "optimal":
        raise SolverFailure(report)
    fid = round(min(max(report.objective, 0.0), 1.0), 6)
    return FidelityResult(fid, _channel_from_solution(index, report.block_values),
                          report)


def max_fidelity_pure_target(rho, sigma_ket: SpinKet, tol=None) -> FidelityResult:
    """Best fidelity against a pure target: maximize <target|E(rho)|target>
    over normalized channel blocks, then take the square root."""
    if not sigma_ket.is_normalized():
        raise ValueError("target ket must be normalized")
    cross = _cross_blocks(rho)
    window = sigma_ket.irreps()
    offsets, n = _space(window)
    _, _, sig_d = _dense_state(sigma_ket, window)
    j_in = max(j for (j, _) in cross)
    index = build_kraus_index(j_in, max(window))
    problem = SdpProblem({})
    names = _add_channel_blocks(problem, index)
    affine = _window_output_affine(cross, index, offsets, n)
    objective = {}
    for (r, c), fcoeffs in affine.items():
        w = sig_d[c, r]  # tr(sigma E) pairs sigma[c, r] with E[r, c]
        if w == 0:
            continue
        for fkey, coeff in fcoeffs.items():
            J, a1, a2 = fkey
            slot = (names[J], a1, a2)
            objective[slot] = objective.get(slot, 0.0) + w * coeff
    problem.objective = objective
    _add_normalization(problem, index, names)
    report = solve_problem(problem, tol=tol)
    if report.status != "optimal":
        raise SolverFailure(report)
    fid_sq = min(max(report.objective, 0.0), 1.0)
    return FidelityResult(round(math.sqrt(fid_sq), 6),
                          _channel_from_solution(index, report.block_values),
                          report)


# --------------------------------------------------------------------------
# explicit Kraus operators
# --------------------------------------------------------------------------

KrausOp = namedtuple("KrausOp", "J M alpha matrix")


def kraus_from_blocks(F: KrausBlocks, eig_cutoff=1e-12) -> list:
    """Instantiate the Kraus operators of the channel described by F.

    Each F_J is eigendecomposed into coefficient vectors; every
    eigenvector alpha and transfer component M yields one operator
    mapping the input direct sum to the output direct sum.  The family
    resolves the identity on the input space within 1e-7.
    """
    resid = F.normalization_residual()
    if resid > 1e-6:
        raise ValueError(f"channel normalization violated by {resid:.3e}")
    in_irreps = F.input_irreps()
    out_irreps = F.output_irreps()
    in_off, in_dim = _space(in_irreps)
    out_off, out_dim = _space(out_irreps)
    ops = []
    for J in sorted(F.pairs):
        prs = F.pairs[J]
        herm = (F.mats[J] + F.mats[J].conj().T) / 2
        evals, evecs = np.linalg.eigh(herm)
        if evals.min() < -1e-8:
            raise ValueError(f"block J={J} has eigenvalue {evals.min():.3e} < 0")
        for alpha, lam in enumerate(evals):
            if lam <= eig_cutoff:
                continue
            f = math.sqrt(lam) * evecs[:, alpha]
            for tM in range(-J.twice, J.twice + 1, 2):
                K = np.zeros((out_dim, in_dim), dtype=complex)
                for a, (jp, j) in enumerate(prs):
                    if f[a] == 0:
                        continue
                    for i1, tm in enumerate(range(jp.twice, -jp.twice - 1, -2)):
                        tmu = tm - tM
                        if abs(tmu) > j.twice:
                            continue
                        c = _contraction(jp.twice, J.twice, j.twice, tm, tM)
                        if c == 0.0:
                            continue
                        row = out_off[jp] + i1
                        col = in_off[j] + (j.twice - tmu) // 2
                        K[row, col] += c * _phase(j.twice - tm) * f[a]
                ops.append(KrausOp(J, HalfInt(tM), alpha, K))
    total = sum(op.matrix.conj().T @ op.matrix for op in ops)
    if np.abs(total - np.eye(in_dim)).max() > 1e-7:
        raise ValueError("Kraus family does not resolve the identity")
    return ops


def dense_from_blocks(rho: BlockDensity, irreps) -> np.ndarray:
    """Block-diagonal dense matrix of a density on the given irrep list."""
    offsets, n = _space(irreps)
    out = np.zeros((n, n), dtype=complex)
    for j, b in rho.blocks.items():
        if j in offsets:
            o = offsets[j]
            out[o:o + b.shape[0], o:o + b.shape[1]] = b
    return out


def blocks_from_dense(mat: np.ndarray, irreps) -> BlockDensity:
    """Per-irrep diagonal blocks of a dense matrix on the direct-sum space."""
    offsets, n = _space(irreps)
    if mat.shape != (n, n):
        raise ValueError(f"matrix must be {n}x{n} for these irreps")
    return BlockDensity({j: mat[o:o + j.twice + 1, o:o + j.twice + 1]
                         for j, o in offsets.items()})
