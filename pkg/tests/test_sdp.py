import io

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermosteer.config import DEFAULT
from thermosteer.errors import ShapeError, SolverError, ValidationError
from thermosteer.objects import choi_of_map, identity_channel, replacement_channel, unitary_channel
from thermosteer.sdp import SdpBuilder, SdpProblem, Status, diamond_norm, solve_sdp

from test_acceptance import random_feasible_sdp


def _cvx_value(prob):
    Xs = [cp.Variable((d, d), hermitian=True) for d in prob.blocks]
    cons = [X >> 0 for X in Xs]
    for A, b in prob.constraints:
        cons.append(cp.real(sum(cp.trace(a @ X) for a, X in zip(A, Xs) if a is not None)) == b)
    obj = cp.Minimize(cp.real(sum(cp.trace(c @ X) for c, X in zip(prob.C, Xs))))
    return cp.Problem(obj, cons).solve(solver=cp.CLARABEL)


@pytest.mark.filterwarnings("ignore::UserWarning")
@pytest.mark.parametrize("seed", range(8))
def test_matches_cvxpy(seed):
    prob = random_feasible_sdp(np.random.default_rng(seed))
    sol = solve_sdp(prob).require_optimal()
    ref = _cvx_value(prob)
    assert sol.primal_obj == pytest.approx(ref, rel=1e-6, abs=1e-6)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_weak_duality_and_feasibility(seed):
    prob = random_feasible_sdp(np.random.default_rng(seed))
    sol = solve_sdp(prob)
    assert sol.ok
    assert sol.dual_obj <= sol.primal_obj + 1e-9 * (1 + abs(sol.primal_obj))
    for X, S in zip(sol.X, sol.S):
        assert np.linalg.eigvalsh(X)[0] >= -DEFAULT.tol_psd
        assert np.linalg.eigvalsh(S)[0] >= -DEFAULT.tol_psd
    assert sol.primal_residual <= 1e-8 * (1 + max(abs(b) for _, b in prob.constraints))


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 20.0))
def test_objective_scaling(seed, alpha):
    prob = random_feasible_sdp(np.random.default_rng(seed))
    base = solve_sdp(prob).require_optimal().primal_obj
    scaled_prob = SdpProblem(prob.blocks, [alpha * c for c in prob.C], prob.constraints)
    val = solve_sdp(scaled_prob).require_optimal().primal_obj
    assert val == pytest.approx(alpha * base, rel=1e-7, abs=1e-9)


def test_deterministic():
    prob = random_feasible_sdp(np.random.default_rng(5))
    a, b = solve_sdp(prob), solve_sdp(prob)
    assert a.primal_obj == b.primal_obj and a.iterations == b.iterations
    assert all(np.array_equal(x, y) for x, y in zip(a.X, b.X))


def test_small_closed_form():
    # min tr(C X) with tr X = 1: smallest eigenvalue of C
    C = np.array([[2.0, 1.0], [1.0, 2.0]])
    sol = solve_sdp(SdpProblem([2], [C], [([np.eye(2)], 1.0)])).require_optimal()
    assert sol.primal_obj == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(sol.X[0], np.array([[1, -1], [-1, 1]]) / 2, atol=1e-6)


def test_redundant_rows_presolved():
    cons = [([np.eye(2)], 1.0), ([2 * np.eye(2)], 2.0), ([np.diag([1.0, 0])], 0.25)]
    sol = solve_sdp(SdpProblem([2], [np.diag([0.0, 1.0])], cons)).require_optimal()
    assert sol.primal_obj == pytest.approx(0.75, abs=1e-8)


def test_infeasible_statuses():
    # tr X = -1 with X >= 0
    sol = solve_sdp(SdpProblem([2], [np.eye(2)], [([np.eye(2)], -1.0)]))
    assert sol.status is Status.PRIMAL_INFEASIBLE
    with pytest.raises(SolverError):
        sol.require_optimal()
    # inconsistent duplicate rows
    sol = solve_sdp(SdpProblem([1], [np.eye(1)], [([np.eye(1)], 1.0), ([np.eye(1)], 2.0)]))
    assert sol.status is Status.PRIMAL_INFEASIBLE
    # unbounded: min -X_00 subject to X_11 = 1
    sol = solve_sdp(SdpProblem([2], [np.diag([-1.0, 0])], [([np.diag([0.0, 1])], 1.0)]))
    assert sol.status is Status.DUAL_INFEASIBLE


def test_problem_validation():
    with pytest.raises(ShapeError):
        SdpProblem([2], [np.eye(3)])
    with pytest.raises(ValidationError):
        SdpProblem([2], [np.array([[0, 1], [0, 0]])])
    with pytest.raises(ShapeError):
        SdpProblem([2], [np.eye(2)], [([np.eye(2), np.eye(2)], 1.0)])


def test_trace_stream():
    buf = io.StringIO()
    solve_sdp(SdpProblem([2], [np.eye(2)], [([np.eye(2)], 1.0)]), DEFAULT.with_overrides(trace=buf))
    lines = buf.getvalue().splitlines()
    assert lines and "pobj=" in lines[0] and "gap=" in lines[-1]


def test_builder_blocks():
    sb = SdpBuilder()
    sb.add_block("a", 1, objective=[[1.0]])
    sb.add_block("b", 1, objective=[[2.0]])
    sb.add_scalar_eq({"a": [[1.0]], "b": [[1.0]]}, 3.0)
    sol = solve_sdp(sb.build()).require_optimal()
    assert sb.block(sol, "a")[0, 0].real == pytest.approx(3.0, abs=1e-8)
    with pytest.raises(ValueError):
        sb.add_block("a", 2)


def _rot(theta):
    return unitary_channel(np.diag([1, np.exp(1j * theta)]))


@pytest.mark.parametrize("theta", [0.1, 1.0, np.pi / 2, 2.5])
def test_diamond_unitaries(theta):
    val = diamond_norm(identity_channel(2).choi - _rot(theta).choi, (2, 2))
    assert val == pytest.approx(2 * np.sin(theta / 2), abs=1e-6)


def test_diamond_zero_and_depolarising():
    assert diamond_norm(np.zeros((4, 4)), (2, 2)) == 0.0
    d = diamond_norm(identity_channel(3).choi - replacement_channel(np.eye(3) / 3).choi, (3, 3))
    assert d == pytest.approx(2 * (1 - 1 / 9), abs=1e-6)


def _cvx_diamond(J, d_in, d_out):
    # Watrous primal with an unnormalised Choi matrix on out (x) in
    D = d_in * d_out
    W = cp.Variable((D, D), hermitian=True)
    rho = cp.Variable((d_in, d_in), hermitian=True)
    cons = [W >> 0, rho >> 0, cp.real(cp.trace(rho)) == 1, W - cp.kron(np.eye(d_out), rho) << 0]
    # ||Phi||_diamond = 2 max tr(J W) over 0 <= W <= I (x) rho for trace-annihilating Phi
    return 2 * cp.Problem(cp.Maximize(cp.real(cp.trace(J @ W))), cons).solve(solver=cp.CLARABEL)


def test_diamond_against_cvxpy(rng):
    # amplitude damping against a random unitary: difference of two channels
    g = 0.3
    ad = choi_of_map([np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]])])
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    delta = ad.choi - unitary_channel(q).choi
    ours = diamond_norm(delta, (2, 2))
    ref = _cvx_diamond(2 * delta, 2, 2)
    assert ours == pytest.approx(ref, abs=1e-5)
