"""Solver and uniqueness-check tests; the two routes validate each other."""

import numpy as np
import pytest

from stlscond import (
    GeneratorSpec,
    NongenericProblemError,
    ProblemFormatError,
    StlsProblem,
    check_genericity,
    generate,
    load_problem,
    problem_from_dict,
    save_problem,
    solve_stls,
    solve_stls_svd,
)


def test_validation_rejects_bad_inputs():
    with pytest.raises(ValueError):
        StlsProblem(np.eye(3), np.ones(3), 1.0)  # needs m > n
    with pytest.raises(ValueError):
        StlsProblem(np.ones((3, 1)), np.ones(2), 1.0)
    with pytest.raises(ValueError):
        StlsProblem(np.ones((3, 1)), np.ones(3), -1.0)
    with pytest.raises(ValueError):
        StlsProblem(np.array([[np.inf], [1.0], [0.0]]), np.ones(3), 1.0)


def test_check_genericity_orthogonal_columns_tie():
    p = StlsProblem(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]), 1.0)
    s_hat, s_aug, gap = check_genericity(p)
    assert s_hat == pytest.approx(1.0, abs=1e-15)
    assert s_aug == pytest.approx(1.0, abs=1e-15)
    assert gap == pytest.approx(0.0, abs=1e-15)


def test_check_genericity_block_diagonal(diagonal_problem):
    s_hat, s_aug, gap = check_genericity(diagonal_problem)
    assert s_hat == pytest.approx(1.0, abs=1e-15)
    assert s_aug == pytest.approx(0.5, abs=1e-15)
    assert gap == pytest.approx(0.5, abs=1e-15)


def test_check_genericity_generated_gap_within_construction_bound():
    gp = generate(GeneratorSpec(m=5, n=3, lam=1.0, e_p=0.1, seed=0))
    _, _, gap = check_genericity(gp.problem)
    # interlacing bounds the gap by the constructed spectral gap
    assert 0.0 < gap <= 0.1 + 1e-12


def test_solve_diagonal_fixture(diagonal_problem):
    sol = solve_stls(diagonal_problem)
    assert sol.sigma_np1 == pytest.approx(0.5, abs=1e-15)
    assert sol.sigma_hat_n == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(sol.x, [0.0, 0.0], atol=1e-15)
    assert np.allclose(sol.r, [0.0, 0.0, -0.5], atol=1e-15)
    # M = diag(3.75, 0.75)
    assert np.allclose(sol.M.solve(np.eye(2)), np.diag([1 / 3.75, 1 / 0.75]), rtol=1e-14)
    assert not sol.ill_posed


def test_solve_nongeneric_raises():
    p = StlsProblem(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]), 1.0)
    with pytest.raises(NongenericProblemError):
        solve_stls(p)
    with pytest.raises(NongenericProblemError):
        solve_stls_svd(p)


def test_solution_invariants_on_generated_problems():
    for seed in range(5):
        gp = generate(GeneratorSpec(m=12, n=7, lam=2.0, e_p=0.2, seed=seed))
        p = gp.problem
        sol = solve_stls(p)
        scale = np.linalg.norm(p.A) * np.linalg.norm(sol.x) + np.linalg.norm(p.b)
        assert np.linalg.norm(sol.r - (p.A @ sol.x - p.b)) <= 1e-12 * scale
        assert sol.genericity_gap > 0.0
        # normal-equation consistency: M x = A'b
        Mx = p.A.T @ (p.A @ sol.x) - sol.sigma_np1**2 * sol.x
        rhs = p.A.T @ p.b
        assert np.linalg.norm(Mx - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_route_equivalence_on_generated_problems():
    cases = [
        (30, 20, 5.0, 0.1, 7, 1e-9),
        (30, 20, 0.05, 0.001, 3, 1e-8),
        (10, 6, 1.0, 0.1, 0, 1e-9),
    ]
    for m, n, lam, e_p, seed, tol in cases:
        gp = generate(GeneratorSpec(m=m, n=n, lam=lam, e_p=e_p, seed=seed))
        sol = solve_stls(gp.problem)
        x_svd = solve_stls_svd(gp.problem)
        assert np.linalg.norm(sol.x - x_svd) <= tol * (1.0 + np.linalg.norm(sol.x))


def test_scale_coherence():
    # solving with scale lam equals the lam=1 solve on [A, lam*b], divided by lam
    gp = generate(GeneratorSpec(m=9, n=5, lam=3.0, e_p=0.4, seed=1))
    p = gp.problem
    unscaled = StlsProblem(p.A, p.lam * p.b, 1.0)
    x_direct = solve_stls(p).x
    x_unscaled = solve_stls(unscaled).x / p.lam
    assert np.linalg.norm(x_direct - x_unscaled) <= 1e-12 * (1.0 + np.linalg.norm(x_direct))


def test_svd_route_zero_solution_fixture(diagonal_problem):
    A, b = diagonal_problem.A, diagonal_problem.b
    assert np.allclose(solve_stls_svd(diagonal_problem), [0.0, 0.0], atol=1e-14)
    # A'b = 0 keeps x = 0 for any scale that preserves uniqueness ...
    assert np.allclose(solve_stls_svd(StlsProblem(A, b, 1.9)), [0.0, 0.0], atol=1e-12)
    # ... but at lam = 2 this fixture loses uniqueness exactly (both smallest
    # singular values equal 1), so the solver must refuse
    with pytest.raises(NongenericProblemError):
        solve_stls_svd(StlsProblem(A, b, 2.0))


def test_positive_definiteness_tracks_gap(diagonal_problem):
    # generic fixture factorizes; the nongeneric one is rejected before
    # factorization by the gap check with any tolerance
    sol = solve_stls(diagonal_problem)
    assert sol.genericity_gap > 0.0
    bad = StlsProblem(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]), 1.0)
    with pytest.raises(NongenericProblemError):
        solve_stls(bad, gap_tol=0.0)
    # and the shifted Gram matrix of the nongeneric fixture really is not
    # positive definite: a zero gap means a zero pivot
    from stlscond import NotPositiveDefiniteError, SpdFactorization, check_genericity

    _, sigma_aug, _ = check_genericity(bad)
    M = bad.A.T @ bad.A - sigma_aug**2 * np.eye(1)
    with pytest.raises(NotPositiveDefiniteError):
        SpdFactorization.from_matrix(M)


def test_ill_posed_flag_near_nongeneric():
    gp = generate(GeneratorSpec(m=6, n=3, lam=1.0, e_p=1e-9, seed=4))
    sol = solve_stls(gp.problem)
    assert sol.ill_posed
    assert 0.0 < sol.genericity_gap <= 1e-9 + 1e-15


def test_problem_json_roundtrip(tmp_path, diagonal_problem):
    path = tmp_path / "p.json"
    save_problem(diagonal_problem, path, provenance={"note": "fixture"})
    q = load_problem(path)
    assert np.array_equal(q.A, diagonal_problem.A)
    assert np.array_equal(q.b, diagonal_problem.b)
    assert q.lam == diagonal_problem.lam


def test_problem_json_rejects_dimension_mismatch():
    base = {"m": 3, "n": 1, "lambda": 1.0, "A": [[1.0], [0.0], [2.0]], "b": [0.0, 0.0, 1.0]}
    problem_from_dict(base)  # sanity: the honest document parses
    bad_rows = dict(base, A=[[1.0], [0.0]])
    with pytest.raises(ProblemFormatError):
        problem_from_dict(bad_rows)
    bad_cols = dict(base, A=[[1.0, 2.0], [0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ProblemFormatError):
        problem_from_dict(bad_cols)
    bad_b = dict(base, b=[0.0, 1.0])
    with pytest.raises(ProblemFormatError):
        problem_from_dict(bad_b)
    with pytest.raises(ProblemFormatError):
        problem_from_dict({"m": 3, "n": 1})
