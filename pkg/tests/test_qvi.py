import numpy as np
import pytest

from lure_eq import (
    AffineMap,
    BoxNormalCone,
    LipschitzMap,
    QviProblem,
    SolverConfig,
    Status,
    dual_constants,
    eval_dual_map,
    graph_residual,
    moving_set_check,
    qvi_to_inclusion,
    solve_qvi,
    solve_qvi_dual,
)

from oracles import random_monotone_matrix, scalar_qvi_bruteforce, scalar_vi_bruteforce

RNG = np.random.default_rng(23)


def problem_1d():
    return QviProblem(AffineMap([[1.0]], [-2.0]), [[0.5]], BoxNormalCone([-1.0], [1.0]))


def test_lowering_shape():
    sys_ = qvi_to_inclusion(problem_1d())
    assert sys_.state_dim == sys_.output_dim == 1
    np.testing.assert_allclose(sys_.B, [[1.0]])
    np.testing.assert_allclose(sys_.C, [[1.0]])


def test_solve_qvi_1d_oracle_value():
    # frozen from the scanning oracle: 4/3
    expected = scalar_qvi_bruteforce(lambda x: x - 2.0, 0.5, -1.0, 1.0)
    assert expected == pytest.approx(4.0 / 3.0, abs=1e-9)
    rep = solve_qvi(problem_1d(), SolverConfig(tol=1e-10))
    assert rep.status is Status.CONVERGED
    assert rep.solution == pytest.approx([expected], abs=1e-8)
    assert rep.extras["qvi_residual"] <= 1e-9


def test_solve_qvi_reduces_to_vi_for_zero_perturbation():
    # D = 0: projection of the unconstrained zero
    expected = scalar_vi_bruteforce(lambda x: x - 5.0, -1.0, 1.0)
    p = QviProblem(AffineMap([[1.0]], [-5.0]), [[0.0]], BoxNormalCone([-1.0], [1.0]))
    rep = solve_qvi(p, SolverConfig(tol=1e-10))
    assert rep.solution == pytest.approx([expected], abs=1e-8)
    # interior case: f = id - a with a inside the box
    p2 = QviProblem(AffineMap([[1.0]], [-0.3]), [[0.0]], BoxNormalCone([-1.0], [1.0]))
    rep2 = solve_qvi(p2, SolverConfig(tol=1e-10))
    assert rep2.solution == pytest.approx([0.3], abs=1e-8)


def test_moving_set_description():
    p = problem_1d()
    ms = moving_set_check(p, [4.0 / 3.0])
    assert ms.lo == pytest.approx([-2.0 / 3.0])
    assert ms.hi == pytest.approx([4.0 / 3.0])
    assert ms.member  # boundary point
    # f(x) = 0 leaves the set unshifted
    ms0 = moving_set_check(p, [2.0])
    np.testing.assert_allclose(ms0.shift, [0.0])
    np.testing.assert_allclose(ms0.lo, [-1.0])


def test_eval_dual_map_values():
    # affine solve: A=2, b=0, D=0.5, y=3 -> 3
    assert eval_dual_map(AffineMap([[2.0]]), [[0.5]], [3.0]) == pytest.approx([3.0])
    # D = 0 reduces to f itself
    f = AffineMap([[1.0]], [-2.0])
    assert eval_dual_map(f, [[0.0]], [0.7]) == pytest.approx([-1.3])
    # 1-D instance: (y - 2) / 1.5 at y = 1
    assert eval_dual_map(f, [[0.5]], [1.0]) == pytest.approx([-2.0 / 3.0])


def test_eval_dual_map_nonlinear_certified():
    # nonlinear strongly monotone map via the damped fixed point
    fn = lambda x: 2.0 * x + 0.3 * np.tanh(x)
    f = LipschitzMap(fn, 1, lipschitz=2.3, strong_modulus=2.0)
    D = [[0.8]]
    for y in (-2.0, 0.3, 4.0):
        u = eval_dual_map(f, D, [y], tol=1e-12)
        assert np.linalg.norm(u - f([y] - np.asarray(D) @ u)) <= 1e-11


def test_eval_dual_map_requires_strong_monotonicity():
    with pytest.raises(ValueError):
        eval_dual_map(LipschitzMap(lambda x: x, 1, lipschitz=1.0), [[0.5]], [1.0])


def test_dual_constants_examples():
    c = dual_constants(AffineMap([[1.0]]), [[0.0]])
    assert (c.mu_inv, c.lip_inv, c.mu_phi, c.lip_phi) == (1.0, 1.0, 1.0, 1.0)
    c2 = dual_constants(AffineMap([[1.0]], [-2.0]), [[0.5]])
    assert c2.mu_phi == pytest.approx(1.0 / 2.25)
    assert c2.lip_phi == pytest.approx(1.0)
    c3 = dual_constants(AffineMap([[2.0]]), [[0.0]])
    assert (c3.mu_inv, c3.lip_inv, c3.mu_phi, c3.lip_phi) == (0.5, 0.5, 2.0, 2.0)


def test_dual_constants_bracket_difference_quotients():
    # sampled slopes of the dual map lie within [mu_phi, lip_phi]
    f = AffineMap([[1.0]], [-2.0])
    D = [[0.5]]
    c = dual_constants(f, D)
    ys = RNG.uniform(-3.0, 3.0, 20)
    for y1, y2 in zip(ys[:-1], ys[1:]):
        q = (eval_dual_map(f, D, [y1])[0] - eval_dual_map(f, D, [y2])[0]) / (y1 - y2)
        assert c.mu_phi - 1e-8 <= q <= c.lip_phi + 1e-8


def test_dual_route_1d():
    rep = solve_qvi_dual(problem_1d(), SolverConfig(tol=1e-11))
    assert rep.status is Status.CONVERGED
    assert rep.extras["y_star"] == pytest.approx([1.0], abs=1e-10)
    assert rep.solution == pytest.approx([4.0 / 3.0], abs=1e-9)


def test_dual_route_trivial_cases():
    # D = 0: y* = x*
    p = QviProblem(AffineMap([[1.0]], [-0.3]), [[0.0]], BoxNormalCone([-1.0], [1.0]))
    rep = solve_qvi_dual(p, SolverConfig(tol=1e-11))
    assert rep.solution == pytest.approx([0.3], abs=1e-9)
    np.testing.assert_allclose(rep.extras["y_star"], rep.solution)


def test_primal_dual_agreement_random():
    # well-conditioned strongly monotone instances: the dual constants are
    # composed conservatively, so mu/L must stay moderate for the dual route
    for _ in range(15):
        dim = int(RNG.integers(1, 4))
        K = RNG.uniform(-1.0, 1.0, (dim, dim))
        A = np.eye(dim) * RNG.uniform(1.0, 1.5) + 0.2 * (K - K.T)
        f = AffineMap(A, RNG.uniform(-2.0, 2.0, dim))
        D = np.diag(RNG.uniform(0.0, 0.4, dim))
        lo = RNG.uniform(-2.0, 0.0, dim)
        p = QviProblem(f, D, BoxNormalCone(lo, lo + RNG.uniform(0.5, 3.0, dim)))
        cfg = SolverConfig(tol=1e-10, max_iter=50_000)
        primal = solve_qvi(p, cfg)
        dual = solve_qvi_dual(p, cfg)
        assert primal.status is Status.CONVERGED and dual.status is Status.CONVERGED
        assert np.linalg.norm(primal.solution - dual.solution) <= 20 * cfg.tol


def test_equivalence_both_residual_forms():
    # solver output passes the inclusion form and the moving-set form; a
    # hand-certified point passes the inclusion certifier
    p = problem_1d()
    cfg = SolverConfig(tol=1e-10)
    rep = solve_qvi(p, cfg)
    assert rep.inclusion_residual <= 10 * cfg.tol
    assert rep.extras["qvi_residual"] <= 10 * cfg.tol
    from lure_eq import inclusion_residual
    assert inclusion_residual(qvi_to_inclusion(p), [4.0 / 3.0]) <= 1e-10


def test_qvi_requires_monotone_perturbation():
    with pytest.raises(ValueError):
        QviProblem(AffineMap([[1.0]]), [[-0.5]], BoxNormalCone([-1.0], [1.0]))
