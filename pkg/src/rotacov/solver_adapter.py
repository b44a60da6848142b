"""Bridge between abstract conic programs and a concrete SDP solver.

Problems are stated over named complex Hermitian PSD blocks with affine
equality constraints and a linear objective.  ``to_standard`` rewrites them
over real symmetric blocks through the embedding

    X = R + iI  ->  [[R, -I], [I, R]]  (symmetric, PSD iff X is),

after which any real PSD-cone solver applies.  ``solve`` runs an
interior-point backend and returns the recovered complex blocks together
with independently computed residuals.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-8


@dataclass
class SdpProblem:
    """maximize Re(sum objective) over Hermitian PSD blocks, subject to
    complex affine equalities.

    blocks:      name -> complex dimension
    constraints: list of (coeffs, rhs); coeffs maps (name, r, c) -> complex
                 coefficient on the matrix entry X[name][r, c]
    objective:   same coefficient encoding; the real part is maximized
    """

    blocks: dict
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)

    def add_block(self, name: str, dim: int):
        if name in self.blocks:
            raise ValueError(f"duplicate block {name!r}")
        self.blocks[name] = dim

    def add_constraint(self, coeffs: dict, rhs: complex):
        self.constraints.append((dict(coeffs), complex(rhs)))

    def check_indices(self):
        for coeffs, _ in self.constraints:
            for (name, r, c) in coeffs:
                d = self.blocks.get(name)
                if d is None:
                    raise ValueError(f"constraint references unknown block {name!r}")
                if not (0 <= r < d and 0 <= c < d):
                    raise ValueError(f"index ({r},{c}) outside block {name!r} of dim {d}")
        for (name, r, c) in self.objective:
            d = self.blocks.get(name)
            if d is None or not (0 <= r < d and 0 <= c < d):
                raise ValueError(f"objective references invalid entry {(name, r, c)}")
        return self


@dataclass
class StandardForm:
    """Real standard form: maximize <C, Y> s.t. <A_k, Y> = b_k, Y PSD blocks.

    Functionals are stored sparsely as {(block_index, i, j): coeff} with
    i <= j, meaning coeff * Y[i, j] (the symmetric partner entry is *not*
    double counted).  Embedded blocks are twice the complex dimension; the
    halving of paired entries built into the embedding keeps objective and
    constraint values equal to their complex counterparts.
    """

    block_dims: list
    block_names: list
    rows: list
    rhs: list
    objective: dict
    inconsistent: bool = False   # an equality row with no variables demanded a nonzero value

    def row_value(self, row: dict, mats: list) -> float:
        return sum(c * mats[b][i, j] for (b, i, j), c in row.items())


def _embed_entry(bi, dim, r, c, coeff):
    """Real-row entries representing coeff * X[r, c] on an embedded block.

    Returns (real_part, imag_part) of coeff * X[r, c] as sparse rows
    {(bi, i, j): weight} over upper-triangle entries of the embedded Y.
    The averaged extraction Re X[r,c] = (Y[r,c] + Y[d+r, d+c]) / 2 and
    Im X[lo,hi] = (Y[hi, d+lo] - Y[lo, d+hi]) / 2 makes the embedded and
    complex problems attain identical values in both directions; Hermitian
    diagonals carry no imaginary part.
    """
    re_c, im_c = coeff.real, coeff.imag
    real_rows, imag_rows = {}, {}

    def put(rows, key, val):
        if val != 0.0:
            rows[key] = rows.get(key, 0.0) + val

    lo, hi = min(r, c), max(r, c)
    sgn = 1.0 if r <= c else -1.0  # Im X[r,c] = -Im X[c,r]
    # R := Re X[r,c] = Re X[c,r]
    r_entries = (((bi, lo, hi), 0.5), ((bi, dim + lo, dim + hi), 0.5))
    # I := Im X[lo,hi]; Y[lo, dim+hi] = -I, Y[hi, dim+lo] stored as (lo', hi')
    if r != c:
        i_entries = (((bi, hi, dim + lo), 0.5), ((bi, lo, dim + hi), -0.5))
    else:
        i_entries = ()
    # coeff * X = (re_c * R - sgn * im_c * I) + i (im_c * R + sgn * re_c * I)
    for key, w in r_entries:
        put(real_rows, key, re_c * w)
        put(imag_rows, key, im_c * w)
    for key, w in i_entries:
        put(real_rows, key, -sgn * im_c * w)
        put(imag_rows, key, sgn * re_c * w)
    return real_rows, imag_rows


def to_standard(p: SdpProblem) -> StandardForm:
    """Embed a Hermitian-block problem into real symmetric standard form."""
    p.check_indices()
    names = sorted(p.blocks)
    index = {n: i for i, n in enumerate(names)}
    dims = [2 * p.blocks[n] for n in names]

    def embed_functional(coeffs):
        real_rows, imag_rows = {}, {}
        for (name, r, c), coeff in coeffs.items():
            rr, ii = _embed_entry(index[name], p.blocks[name], r, c, complex(coeff))
            for k, v in rr.items():
                real_rows[k] = real_rows.get(k, 0.0) + v
            for k, v in ii.items():
                imag_rows[k] = imag_rows.get(k, 0.0) + v
        return ({k: v for k, v in real_rows.items() if v != 0.0},
                {k: v for k, v in imag_rows.items() if v != 0.0})

    rows, rhs = [], []
    seen = {}
    flags = {"inconsistent": False}

    def push(row, target):
        if not row:
            if abs(target) > 1e-9:
                flags["inconsistent"] = True
            return
        # dedupe exact duplicates (conjugate-pair constraints collapse here)
        scale = max(row.values(), key=abs)
        sig = (tuple(sorted((k, round(v / scale, 12)) for k, v in row.items())),
               round(target / scale, 12))
        if sig in seen:
            return
        seen[sig] = True
        rows.append(row)
        rhs.append(target)

    for coeffs, target in p.constraints:
        re_row, im_row = embed_functional(coeffs)
        push(re_row, target.real)
        push(im_row, target.imag)
    obj_re, _ = embed_functional(p.objective)
    return StandardForm(dims, names, rows, rhs, obj_re, flags["inconsistent"])


def recover_complex(sf: StandardForm, mats: list) -> dict:
    """Extract Hermitian blocks from solved embedded blocks.

    X = (Y11 + Y22)/2 + i (Y21 - Y12)/2 is Hermitian and PSD whenever the
    symmetric Y is, and attains the same functional values.
    """
    out = {}
    for bi, name in enumerate(sf.block_names):
        Y = mats[bi]
        d = sf.block_dims[bi] // 2
        X = (Y[:d, :d] + Y[d:, d:]) / 2 + 1j * (Y[d:, :d] - Y[:d, d:]) / 2
        out[name] = (X + X.conj().T) / 2
    return out


@dataclass
class SolveReport:
    status: str                 # optimal | infeasible | numerical-trouble
    objective: float | None
    block_values: dict | None   # name -> complex Hermitian matrix
    residuals: dict
    message: str = ""


def _env_tol() -> float:
    raw = os.environ.get("ROTACOV_SOLVER_TOL", "")
    try:
        return float(raw) if raw else DEFAULT_TOL
    except ValueError:
        return DEFAULT_TOL


def solve(sf: StandardForm, tol=None, solver="CLARABEL") -> SolveReport:
    """Run the interior-point backend on a standard-form problem.

    Residuals in the report are recomputed from the returned iterate:
    worst equality violation, most negative block eigenvalue, and the
    duality gap b.y - <C, Y> evaluated from the constraint multipliers.
    """
    import cvxpy as cp

    if tol is None:
        tol = _env_tol()
    if sf.inconsistent:
        return SolveReport("infeasible", None, None, {},
                           "equality row with empty functional and nonzero target")
    mats = [cp.Variable((d, d), symmetric=True) for d in sf.block_dims]
    cons = [m >> 0 for m in mats]
    for row, b in zip(sf.rows, sf.rhs):
        cons.append(sum(c * mats[bi][i, j] for (bi, i, j), c in row.items()) == b)
    objective = sum(c * mats[bi][i, j] for (bi, i, j), c in sf.objective.items())
    problem = cp.Problem(cp.Maximize(objective), cons)
    solver_args = {}
    if solver == "CLARABEL":
        solver_args = {"tol_feas": tol, "tol_gap_abs": tol, "tol_gap_rel": tol}
    elif solver == "SCS":
        solver_args = {"eps": tol}
    try:
        problem.solve(solver=solver, **solver_args)
    except cp.error.SolverError as exc:
        return SolveReport("numerical-trouble", None, None, {}, str(exc))

    if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return SolveReport("infeasible", None, None, {}, problem.status)
    if problem.status not in (cp.OPTIMAL,):
        return SolveReport("numerical-trouble", None, None, {},
                           f"solver status {problem.status}")

    vals = [np.asarray(m.value) for m in mats]
    primal = max((abs(sf.row_value(row, vals) - b)
                  for row, b in zip(sf.rows, sf.rhs)), default=0.0)
    min_eig = min((float(np.linalg.eigvalsh((v + v.T) / 2).min())
                   for v in vals if v.size), default=0.0)
    gap = None
    duals = [c.dual_value for c in cons[len(mats):]]
    if all(d is not None for d in duals):
        dual_obj = sum(float(np.real(d)) * b for d, b in zip(duals, sf.rhs))
        gap = abs(dual_obj - problem.value) / (1 + abs(problem.value))
    residuals = {"primal_eq": float(primal), "min_eig": min_eig}
    if gap is not None:
        residuals["gap"] = float(gap)
    return SolveReport("optimal", float(problem.value),
                       recover_complex(sf, vals), residuals)


def solve_problem(p: SdpProblem, tol=None, solver="CLARABEL") -> SolveReport:
    return solve(to_standard(p), tol=tol, solver=solver)


def export_sdpa(sf: StandardForm, path: str):
    """Write the sparse SDPA encoding of the standard form.

    The file describes the pair
        (P) min  c.x  s.t.  X = sum_k x_k F_k - F_0, X PSD
        (D) max <F_0, Y> s.t. <F_k, Y> = c_k, Y PSD,
    whose dual (D) is exactly this standard form: F_0 holds the objective,
    F_k the k-th equality row, c the right-hand sides.  Off-diagonal
    functional coefficients are halved so that <F, Y> (which counts
    symmetric partners twice) reproduces the stored row value.
    """
    lines = [f"{len(sf.rows)}", f"{len(sf.block_dims)}",
             " ".join(str(d) for d in sf.block_dims),
             " ".join(f"{b:.17g}" for b in sf.rhs)]

    def emit(matno, func):
        for (bi, i, j), c in sorted(func.items()):
            val = c if i == j else c / 2
            lines.append(f"{matno} {bi + 1} {i + 1} {j + 1} {val:.17g}")

    emit(0, sf.objective)
    for k, row in enumerate(sf.rows):
        emit(k + 1, row)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
