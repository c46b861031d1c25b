import itertools

import numpy as np
import pytest

from polymin.sdp import (
    SdpOptions,
    SdpProblem,
    SdpStatus,
    check_duality,
    sdpa_dumps,
    sdpa_loads,
    solve,
    solve_lp,
)


def dense_to_constraints(Gs, b):
    cons = []
    for G, bk in zip(Gs, b):
        n = G.shape[0]
        d = {(i, j): G[i, j] for i in range(n) for j in range(i, n)
             if G[i, j] != 0.0}
        cons.append((d, float(bk)))
    return cons


def random_feasible_sdp(rng, normalized=True):
    """Instance built around a known strictly feasible primal-dual pair."""
    N = int(rng.integers(2, 9))
    M = int(rng.integers(1, min(8, N * (N + 1) // 2) + 1))
    Gs = []
    for _ in range(M):
        A = rng.normal(size=(N, N))
        A = (A + A.T) / 2
        if normalized:
            A /= np.linalg.norm(A)
        Gs.append(A)
    scale = np.sqrt(N) if normalized else 1.0
    R = rng.normal(size=(N, N)) / scale
    X0 = R @ R.T + 0.5 * np.eye(N)
    Q = rng.normal(size=(N, N)) / scale
    S0 = Q @ Q.T + 0.5 * np.eye(N)
    y0 = rng.normal(size=M)
    F = S0 + sum(y0[k] * Gs[k] for k in range(M))
    b = np.array([np.tensordot(Gs[k], X0) for k in range(M)])
    return SdpProblem(N, F, dense_to_constraints(Gs, b))


def lp_vertex_oracle(c, rows):
    """Brute-force optimum of min c@x, a_k@x = b_k, x >= 0 on tiny instances.

    Enumerates basic solutions: every choice of support of size rank(A).
    """
    c = np.asarray(c, dtype=float)
    V = len(c)
    A = np.array([a for a, _ in rows], dtype=float).reshape(len(rows), V)
    b = np.array([bk for _, bk in rows], dtype=float)
    r = np.linalg.matrix_rank(A) if len(rows) else 0
    best = None
    for support in itertools.combinations(range(V), r):
        As = A[:, support]
        x_s, res, rank, _ = np.linalg.lstsq(As, b, rcond=None)
        x = np.zeros(V)
        x[list(support)] = x_s
        if np.max(np.abs(A @ x - b)) > 1e-8 or np.min(x) < -1e-9:
            continue
        val = float(c @ x)
        if best is None or val < best:
            best = val
    return best


class TestSolveBasics:
    def test_scalar_equality(self):
        prob = SdpProblem(1, np.array([[1.0]]), [({(0, 0): 1.0}, 3.0)])
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.X[0, 0] == pytest.approx(3.0, abs=1e-7)
        assert sol.primal_obj == pytest.approx(3.0, abs=1e-7)

    def test_2x2_schur_boundary(self):
        # min trace X with X11 = 1, X12 = 1: X22 >= X12^2/X11 forces obj 2
        prob = SdpProblem(2, np.eye(2),
                          [({(0, 0): 1.0}, 1.0), ({(0, 1): 0.5}, 1.0)])
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.primal_obj == pytest.approx(2.0, abs=1e-6)
        assert np.allclose(sol.X, np.ones((2, 2)), atol=1e-5)

    def test_solution_invariants(self):
        rng = np.random.default_rng(1)
        prob = random_feasible_sdp(rng)
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        psd_tol = 1e-9 * max(1.0, np.linalg.norm(sol.X))
        assert np.linalg.eigvalsh(sol.X)[0] >= -psd_tol
        Smat = prob.F - sum(y * prob.constraint_dense(k)
                            for k, y in enumerate(sol.y))
        assert np.linalg.eigvalsh(Smat)[0] >= -1e-9 * max(1, np.linalg.norm(Smat))
        b = prob.b_vector()
        for k in range(prob.num_constraints):
            v = np.tensordot(prob.constraint_dense(k), sol.X)
            assert abs(v - b[k]) <= 1e-8 * (1 + abs(b[k]))
        assert sol.gap >= -1e-8
        assert sol.gap <= 1e-8 * (1 + abs(sol.primal_obj))

    def test_determinism(self):
        rng = np.random.default_rng(77)
        prob = random_feasible_sdp(rng)
        s1 = solve(prob)
        s2 = solve(prob)
        assert s1.iterations == s2.iterations
        assert np.array_equal(s1.X, s2.X)
        assert s1.primal_obj == s2.primal_obj


class TestRandomFeasible:
    def test_gap_and_slackness_batch(self):
        rng = np.random.default_rng(20240601)
        for _ in range(30):
            prob = random_feasible_sdp(rng)
            sol = solve(prob)
            assert sol.status is SdpStatus.OPTIMAL
            assert abs(sol.gap) <= 1e-7 * (1 + abs(sol.primal_obj))
            rep = check_duality(prob, sol)
            assert rep.complementary_ok
            assert rep.weak_duality_ok

    def test_embedding_gap_never_negative(self):
        rng = np.random.default_rng(5150)
        for _ in range(10):
            sol = solve(random_feasible_sdp(rng))
            for rec in sol.trace:
                assert rec.embedding_gap >= -1e-12

    def test_certified_iterate_weak_duality(self):
        # once an iterate's scaled residuals certify near-feasibility, its
        # objective pair must satisfy weak duality to 1e-9
        rng = np.random.default_rng(616)
        for _ in range(15):
            sol = solve(random_feasible_sdp(rng))
            for rec in sol.trace:
                if rec.rel_primal <= 1e-9 and rec.rel_dual <= 1e-9:
                    gap = rec.primal_obj - rec.dual_obj
                    assert gap >= -1e-9 * (1 + abs(rec.primal_obj))


class TestScalingInvariance:
    # scaling F alone or b alone multiplies the optimal value by gamma;
    # scaling both multiplies it by gamma^2 (the optimal X itself scales).
    # The status must be invariant in every case.

    def test_objective_scaling(self):
        rng = np.random.default_rng(7)
        prob = random_feasible_sdp(rng)
        base = solve(prob)
        for gamma in (1e-3, 1e3):
            sol = solve(SdpProblem(prob.dim, gamma * prob.F,
                                   list(prob.constraints)))
            assert sol.status is base.status is SdpStatus.OPTIMAL
            assert abs(sol.primal_obj / gamma - base.primal_obj) <= 1e-6 * (
                1 + abs(base.primal_obj)
            )

    def test_rhs_scaling(self):
        rng = np.random.default_rng(7)
        prob = random_feasible_sdp(rng)
        base = solve(prob)
        for gamma in (1e-3, 1e3):
            sol = solve(SdpProblem(prob.dim, prob.F,
                                   [(g, gamma * bk) for g, bk in prob.constraints]))
            assert sol.status is SdpStatus.OPTIMAL
            assert abs(sol.primal_obj / gamma - base.primal_obj) <= 1e-6 * (
                1 + abs(base.primal_obj)
            )

    def test_joint_scaling(self):
        rng = np.random.default_rng(7)
        prob = random_feasible_sdp(rng)
        base = solve(prob)
        for gamma in (1e-3, 1e3):
            sol = solve(SdpProblem(prob.dim, gamma * prob.F,
                                   [(g, gamma * bk) for g, bk in prob.constraints]))
            assert sol.status is SdpStatus.OPTIMAL
            target = gamma**2 * base.primal_obj
            # tolerance in the scaled problem's own units (the solver's gap
            # contract is absolute up to 1 + |objective|)
            assert abs(sol.primal_obj - target) <= 1e-6 * (1 + abs(target)) + 5e-8


class TestInfeasibility:
    def test_primal_infeasible_lp(self):
        res = solve_lp([1.0], [([1.0], -1.0)])
        assert res.status is SdpStatus.PRIMAL_INFEASIBLE

    def test_dual_infeasible_unbounded_lp(self):
        res = solve_lp([-1.0], [])
        assert res.status is SdpStatus.DUAL_INFEASIBLE

    def test_primal_infeasible_sdp(self):
        # trace X = -1 with X PSD is impossible
        prob = SdpProblem(2, np.zeros((2, 2)),
                          [({(0, 0): 1.0, (1, 1): 1.0}, -1.0)])
        assert solve(prob).status is SdpStatus.PRIMAL_INFEASIBLE

    def test_unbounded_sdp(self):
        # min -trace X with only X12 pinned: diverges
        prob = SdpProblem(2, -np.eye(2), [({(0, 1): 0.5}, 0.0)])
        assert solve(prob).status is SdpStatus.DUAL_INFEASIBLE


class TestRankFilter:
    def test_dependent_consistent_rows(self):
        prob = SdpProblem(1, np.array([[1.0]]),
                          [({(0, 0): 1.0}, 3.0), ({(0, 0): 2.0}, 6.0)])
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert any("dependent" in w for w in sol.warnings)
        assert sol.X[0, 0] == pytest.approx(3.0, abs=1e-7)
        assert len(sol.y) == 2  # original indexing preserved

    def test_dependent_inconsistent_rows(self):
        prob = SdpProblem(1, np.array([[1.0]]),
                          [({(0, 0): 1.0}, 3.0), ({(0, 0): 2.0}, 7.0)])
        assert solve(prob).status is SdpStatus.PRIMAL_INFEASIBLE


class TestCheckDuality:
    def test_contract_on_optimal(self):
        rng = np.random.default_rng(33)
        prob = random_feasible_sdp(rng)
        sol = solve(prob)
        rep = check_duality(prob, sol)
        assert rep.complementary_ok and rep.weak_duality_ok
        assert rep.slack_residual <= rep.slack_tol

    def test_hand_built_zero_product(self):
        X = np.diag([1.0, 0.0])
        S = np.diag([0.0, 1.0])
        assert np.max(np.abs(X @ S)) == 0.0

    def test_requires_optimal(self):
        res = solve_lp([1.0], [([1.0], -1.0)])
        prob = SdpProblem(1, np.array([[1.0]]), [({(0, 0): 1.0}, -1.0)])
        sol = solve(prob)
        with pytest.raises(ValueError):
            check_duality(prob, sol)


class TestLinearProgramming:
    def test_pinned_variable(self):
        res = solve_lp([1.0], [([1.0], 5.0)])
        assert res.status is SdpStatus.OPTIMAL
        assert res.value == pytest.approx(5.0, abs=1e-7)

    def test_degenerate_face_objective(self):
        # min -x1-x2 on the segment x1+x2 = 1: objective unique, point not
        res = solve_lp([-1.0, -1.0], [([1.0, 1.0], 1.0)])
        assert res.status is SdpStatus.OPTIMAL
        assert res.value == pytest.approx(-1.0, abs=1e-7)

    def test_two_constraint_vertex(self):
        res = solve_lp([1.0, 2.0], [([1.0, 1.0], 2.0), ([1.0, -1.0], 0.0)])
        assert res.value == pytest.approx(3.0, abs=1e-6)
        assert np.allclose(res.x, [1.0, 1.0], atol=1e-6)

    def test_against_vertex_enumeration(self):
        rng = np.random.default_rng(999)
        solved = 0
        for _ in range(25):
            V = int(rng.integers(2, 6))
            M = int(rng.integers(1, V))
            A = rng.normal(size=(M, V))
            x0 = rng.uniform(0.5, 2.0, size=V)  # strictly feasible by design
            b = A @ x0
            c = rng.normal(size=V)
            rows = [(A[k], b[k]) for k in range(M)]
            expected = lp_vertex_oracle(c, rows)
            res = solve_lp(c, rows)
            if res.status is SdpStatus.DUAL_INFEASIBLE:
                continue  # unbounded; the vertex oracle cannot see rays
            assert res.status is SdpStatus.OPTIMAL
            assert expected is not None
            assert res.value == pytest.approx(expected, abs=1e-5 * (1 + abs(expected)))
            solved += 1
        assert solved >= 10


class TestSdpaFormat:
    def test_roundtrip(self):
        rng = np.random.default_rng(4)
        prob = random_feasible_sdp(rng)
        prob2 = sdpa_loads(sdpa_dumps(prob))
        assert prob2.dim == prob.dim
        assert np.allclose(prob2.F, prob.F)
        assert len(prob2.constraints) == len(prob.constraints)
        for (g1, b1), (g2, b2) in zip(prob.constraints, prob2.constraints):
            assert b1 == pytest.approx(b2, abs=0)
            assert g1.keys() == g2.keys()
            for k in g1:
                assert g1[k] == g2[k]

    def test_solution_survives_roundtrip(self):
        rng = np.random.default_rng(42)
        prob = random_feasible_sdp(rng)
        v1 = solve(prob).primal_obj
        v2 = solve(sdpa_loads(sdpa_dumps(prob))).primal_obj
        assert v1 == pytest.approx(v2, rel=1e-9)

    def test_file_io(self, tmp_path):
        from polymin.sdp import read_sdpa, write_sdpa
        prob = SdpProblem(2, np.eye(2),
                          [({(0, 0): 1.0}, 1.0), ({(0, 1): 0.5}, 1.0)])
        path = str(tmp_path / "prob.dat-s")
        write_sdpa(prob, path)
        prob2 = read_sdpa(path)
        assert solve(prob2).primal_obj == pytest.approx(2.0, abs=1e-6)
