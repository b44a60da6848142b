import numpy as np
import pytest

from rotacov import SdpProblem, StandardForm, export_sdpa, solve, to_standard
from rotacov.solver_adapter import solve_problem


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_problem(rng, n=2, n_cons=2):
    """Bounded random instance: maximize tr(C X) s.t. tr(X) = 1 plus random
    Hermitian equality rows pinned at a strictly feasible interior point."""
    prob = SdpProblem({})
    prob.add_block("X", n)
    base = random_hermitian(rng, n) + 2 * n * np.eye(n)
    base /= np.trace(base).real
    cms = [np.eye(n)] + [random_hermitian(rng, n) for _ in range(n_cons)]
    for cm in cms:
        coeffs = {("X", r, c): cm[c, r] for r in range(n) for c in range(n)}
        prob.add_constraint(coeffs, complex(np.trace(cm @ base)))
    cobj = random_hermitian(rng, n)
    prob.objective = {("X", r, c): cobj[c, r] for r in range(n) for c in range(n)}
    return prob, cobj


def solve_with_cvxpy_complex(prob: SdpProblem):
    """Independent route: hand the Hermitian problem to cvxpy directly."""
    import cvxpy as cp

    vars_ = {name: cp.Variable((d, d), hermitian=True) for name, d in prob.blocks.items()}
    cons = [v >> 0 for v in vars_.values()]
    for coeffs, rhs in prob.constraints:
        expr = sum(c * vars_[n][r, cc] for (n, r, cc), c in coeffs.items())
        cons.append(expr == rhs)
    obj = cp.real(sum(c * vars_[n][r, cc] for (n, r, cc), c in prob.objective.items()))
    problem = cp.Problem(cp.Maximize(obj), cons)
    problem.solve(solver=cp.CLARABEL)
    return problem.value


def test_scalar_block():
    prob = SdpProblem({})
    prob.add_block("x", 1)
    prob.add_constraint({("x", 0, 0): 1.0}, 3.0)
    prob.objective = {("x", 0, 0): 1.0}
    report = solve_problem(prob)
    assert report.status == "optimal"
    assert report.objective == pytest.approx(3.0, abs=1e-7)
    assert report.block_values["x"][0, 0].real == pytest.approx(3.0, abs=1e-7)


def test_infeasible_toy():
    prob = SdpProblem({})
    prob.add_block("x", 1)
    prob.add_constraint({("x", 0, 0): 1.0}, -1.0)
    prob.objective = {("x", 0, 0): 1.0}
    assert solve_problem(prob).status == "infeasible"


def test_hermitian_block_with_complex_constraint():
    # maximize Re X[0,1] with unit diagonal and pinned imaginary part
    prob = SdpProblem({})
    prob.add_block("X", 2)
    prob.add_constraint({("X", 0, 0): 1.0}, 1.0)
    prob.add_constraint({("X", 1, 1): 1.0}, 1.0)
    prob.add_constraint({("X", 0, 1): 1j}, 0.5j)  # forces Re X01 though i-weight
    prob.objective = {("X", 0, 1): 1.0}
    report = solve_problem(prob)
    assert report.status == "optimal"
    x = report.block_values["X"]
    assert x[0, 1].real == pytest.approx(0.5, abs=1e-6)
    # objective Re(X01) = 0.5 once the real part is pinned
    assert report.objective == pytest.approx(0.5, abs=1e-6)


def test_embedding_faithful_on_random_problems():
    rng = np.random.default_rng(0)
    for k in range(20):
        prob, _ = random_problem(rng, n=2 + k % 2, n_cons=2)
        ours = solve_problem(prob)
        assert ours.status == "optimal"
        theirs = solve_with_cvxpy_complex(prob)
        assert ours.objective == pytest.approx(theirs, abs=1e-7)


def test_recovered_blocks_are_hermitian_psd_and_feasible():
    rng = np.random.default_rng(1)
    prob, _ = random_problem(rng, n=3, n_cons=3)
    report = solve_problem(prob)
    x = report.block_values["X"]
    assert np.abs(x - x.conj().T).max() < 1e-10
    assert np.linalg.eigvalsh(x).min() > -1e-7
    for coeffs, rhs in prob.constraints:
        val = sum(c * x[r, cc] for (n, r, cc), c in coeffs.items())
        assert val == pytest.approx(rhs, abs=1e-6)


def test_residual_report():
    rng = np.random.default_rng(2)
    prob, _ = random_problem(rng)
    report = solve_problem(prob)
    assert report.residuals["primal_eq"] < 1e-7
    assert report.residuals["min_eig"] > -1e-7
    assert report.residuals["gap"] < 1e-7


def test_determinism():
    rng = np.random.default_rng(3)
    prob, _ = random_problem(rng, n=3, n_cons=2)
    a = solve_problem(prob).objective
    b = solve_problem(prob).objective
    assert abs(a - b) < 1e-9


def test_duplicate_conjugate_rows_are_merged():
    prob = SdpProblem({})
    prob.add_block("X", 2)
    prob.add_constraint({("X", 0, 1): 1.0}, 0.25)
    prob.add_constraint({("X", 1, 0): 1.0}, 0.25)  # conjugate statement
    sf = to_standard(prob)
    assert len(sf.rows) == 2  # one real + one imaginary row survive


def test_tolerance_env_override(monkeypatch):
    prob = SdpProblem({})
    prob.add_block("x", 1)
    prob.add_constraint({("x", 0, 0): 1.0}, 2.0)
    prob.objective = {("x", 0, 0): 1.0}
    monkeypatch.setenv("ROTACOV_SOLVER_TOL", "1e-10")
    assert solve_problem(prob).objective == pytest.approx(2.0, abs=1e-8)
    monkeypatch.setenv("ROTACOV_SOLVER_TOL", "not-a-number")
    assert solve_problem(prob).objective == pytest.approx(2.0, abs=1e-8)


def parse_sdpa(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    m = int(lines[0])
    nblocks = int(lines[1])
    dims = [int(x) for x in lines[2].split()]
    rhs = [float(x) for x in lines[3].split()]
    assert len(dims) == nblocks and len(rhs) == m
    rows = [dict() for _ in range(m + 1)]
    for ln in lines[4:]:
        k, b, i, j, v = ln.split()
        k, b, i, j, v = int(k), int(b) - 1, int(i) - 1, int(j) - 1, float(v)
        coeff = v if i == j else 2 * v  # symmetric partner folded back
        rows[k][(b, i, j)] = coeff
    return dims, rows[0], rows[1:], rhs


def test_sdpa_export_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    prob, _ = random_problem(rng, n=2, n_cons=1)
    sf = to_standard(prob)
    path = tmp_path / "problem.dat-s"
    export_sdpa(sf, str(path))
    dims, obj, rows, rhs = parse_sdpa(path)
    assert dims == sf.block_dims
    rebuilt = StandardForm(dims, sf.block_names, rows, rhs, obj)
    direct = solve(sf)
    via_file = solve(rebuilt)
    assert direct.objective == pytest.approx(via_file.objective, abs=1e-8)


def test_sdpa_field_order(tmp_path):
    sf = StandardForm([2], ["X"], [{(0, 0, 0): 1.0, (0, 0, 1): 2.0}], [1.0],
                      {(0, 1, 1): 3.0})
    path = tmp_path / "tiny.dat-s"
    export_sdpa(sf, str(path))
    content = path.read_text().splitlines()
    assert content[0] == "1"
    assert content[1] == "1"
    assert content[2] == "2"
    assert content[3] == "1"
    assert content[4] == "0 1 2 2 3"
    assert content[5] == "1 1 1 1 1"
    assert content[6] == "1 1 1 2 1"


def test_index_validation():
    prob = SdpProblem({})
    prob.add_block("X", 2)
    prob.add_constraint({("Y", 0, 0): 1.0}, 1.0)
    with pytest.raises(ValueError):
        to_standard(prob)
    prob2 = SdpProblem({})
    prob2.add_block("X", 2)
    prob2.add_constraint({("X", 0, 5): 1.0}, 1.0)
    with pytest.raises(ValueError):
        to_standard(prob2)
