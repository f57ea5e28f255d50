import warnings

import numpy as np
import pytest

from lure_eq import (
    AffineMap,
    BoxNormalCone,
    LureSystem,
    Mode,
    SignOperator,
    SolverConfig,
    Status,
    SystemValidationError,
    UnsupportedSchemeError,
    ZeroOperator,
    equilibrium,
    inclusion_residual,
    simulate,
    validate,
)

RELAY_A = np.array([[9.0, -1.0], [1.0, 8.0]])


def relay_system(P=None, D=None):
    D = np.diag([0.0, 1.0]) if D is None else D
    return LureSystem(f=AffineMap(RELAY_A), B=np.eye(2), C=np.eye(2), D=D,
                      F=SignOperator(2), P=P)


class TestValidate:
    def test_relay_benchmark_is_strict(self):
        rep = validate(relay_system(P=np.eye(2)))
        assert rep.mode is Mode.STRICT
        np.testing.assert_allclose(np.sort(rep.block_eigenvalues), [0.0, 2.0, 16.0, 18.0],
                                   atol=1e-9)
        assert rep.pb_equals_ct and rep.d_monotone and rep.pf_monotone and rep.passivity_psd

    def test_zero_drift_matched_gains_strict(self):
        n = 3
        B = np.array([[1.0, 0.0], [0.5, 1.0], [0.0, 2.0]])
        sys_ = LureSystem(f=AffineMap(np.zeros((n, n))), B=B, C=B.T,
                          D=np.zeros((2, 2)), F=SignOperator(2), P=np.eye(n))
        rep = validate(sys_)
        assert rep.mode is Mode.STRICT
        assert np.abs(rep.block_eigenvalues).max() <= 1e-12

    def test_negative_feedthrough_invalid(self):
        rep = validate(relay_system(D=-np.eye(2)))
        assert rep.mode is Mode.INVALID
        assert not rep.d_monotone

    def test_missing_P_defaults_with_warning(self):
        rep = validate(relay_system())
        assert rep.mode is Mode.STRICT
        assert any("identity" in note for note in rep.warnings)

    def test_passive_mode_when_pb_differs(self):
        # B = 2, C = 1, D = 1, f = id, P = I: PB - C^T = 1 but the block
        # quadratic form [[2, 1], [1, 2]] is PSD
        sys_ = LureSystem(f=AffineMap([[1.0]]), B=[[2.0]], C=[[1.0]], D=[[1.0]],
                          F=SignOperator(1), P=[[1.0]])
        rep = validate(sys_)
        assert rep.mode is Mode.PASSIVE
        assert not rep.pb_equals_ct
        assert rep.passivity_psd
        assert rep.d_semicoercive == pytest.approx(1.0)

    def test_strict_implies_passive_block_test(self):
        rep = validate(relay_system(P=np.eye(2)))
        assert rep.block_eigenvalues.min() >= -1e-9


class TestEquilibrium:
    def test_relay_benchmark_converges_to_origin(self):
        rep = equilibrium(relay_system(), SolverConfig(gamma=0.1, tol=1e-8, max_iter=2000),
                          x0=[1.0, 2.0])
        assert rep.status is Status.CONVERGED
        assert np.linalg.norm(rep.solution) <= 1e-6
        assert rep.inclusion_residual <= 10 * 1e-8

    def test_relay_benchmark_paper_step_diverges(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rep = equilibrium(relay_system(), SolverConfig(gamma=0.5, tol=1e-8, max_iter=2000),
                              x0=[1.0, 2.0])
        assert rep.status is Status.DIVERGED

    def test_zero_loop_reduces_to_drift_zero(self):
        # F = zero map makes the loop vanish: equilibrium solves f(x) = 0
        a = np.array([0.7, -1.3])
        sys_ = LureSystem(f=AffineMap(np.eye(2), -a), B=np.eye(2), C=np.eye(2),
                          D=np.zeros((2, 2)), F=ZeroOperator(2))
        rep = equilibrium(sys_, SolverConfig(tol=1e-10))
        assert rep.status is Status.CONVERGED
        np.testing.assert_allclose(rep.solution, a, atol=1e-8)

    def test_1d_moving_set_instance(self):
        # frozen from the scalar QVI oracle: x* = 4/3
        sys_ = LureSystem(f=AffineMap([[1.0]], [-2.0]), B=[[1.0]], C=[[1.0]],
                          D=[[0.5]], F=BoxNormalCone([-1.0], [1.0]))
        rep = equilibrium(sys_, SolverConfig(tol=1e-10))
        assert rep.solution == pytest.approx([4.0 / 3.0], abs=1e-8)
        assert rep.inclusion_residual <= 1e-8

    def test_passive_route(self):
        sys_ = LureSystem(f=AffineMap([[1.0]]), B=[[2.0]], C=[[1.0]], D=[[1.0]],
                          F=SignOperator(1), P=[[1.0]])
        rep = equilibrium(sys_, SolverConfig(tol=1e-9), x0=[2.0])
        assert rep.status is Status.CONVERGED
        assert rep.extras["mode"] is Mode.PASSIVE
        assert rep.inclusion_residual <= 1e-8

    def test_invalid_system_rejected(self):
        with pytest.raises(SystemValidationError):
            equilibrium(relay_system(D=-np.eye(2)))

    def test_certification_is_solver_independent(self):
        # the certificate accepts the exact equilibrium fed directly
        assert inclusion_residual(relay_system(), np.zeros(2)) <= 1e-12
        assert inclusion_residual(relay_system(), np.array([0.5, 0.0])) > 1e-3


class TestSimulate:
    def test_explicit_one_step_hand_values(self):
        traj = simulate(relay_system(), "explicit", [1.0, 2.0], 0.04, 0.04)
        np.testing.assert_allclose(traj.lambdas[0], [-1.0, -1.0])
        np.testing.assert_allclose(traj.states[1], [0.68, 1.28], atol=1e-14)

    def test_explicit_chattering_never_settles(self):
        traj = simulate(relay_system(), "explicit", [1.0, 2.0], 0.04, 40.0)
        assert traj.completed
        assert len(traj.times) == 1001
        assert np.min(np.linalg.norm(traj.states, axis=1)) > 1e-3

    def test_semi_implicit_settles(self):
        traj = simulate(relay_system(), "semi_implicit", [1.0, 2.0], 0.04, 10.0)
        assert traj.completed
        assert np.linalg.norm(traj.states[-1]) <= 1e-2

    def test_explicit_equals_forward_euler_for_zero_map(self):
        A = np.array([[2.0, 0.5], [-0.5, 1.0]])
        sys_ = LureSystem(f=AffineMap(A), B=np.eye(2), C=np.eye(2),
                          D=np.zeros((2, 2)), F=ZeroOperator(2))
        traj = simulate(sys_, "explicit", [1.0, -1.0], 0.1, 1.0)
        x = np.array([1.0, -1.0])
        for k in range(1, len(traj.times)):
            x = x + 0.1 * (-(A @ x))
            np.testing.assert_allclose(traj.states[k], x, atol=0.0)

    def test_scheme_consistency_semi_vs_fully_implicit(self):
        h = 0.04
        semi = simulate(relay_system(), "semi_implicit", [1.0, 2.0], h, 5.0)
        full = simulate(relay_system(), "fully_implicit", [1.0, 2.0], h, 5.0)
        assert full.completed
        gap = np.max(np.linalg.norm(semi.states - full.states, axis=1))
        assert gap <= 5 * h * (1.0 + np.linalg.norm([1.0, 2.0]))

    def test_implicit_requires_matched_gains(self):
        sys_ = LureSystem(f=AffineMap([[1.0]]), B=[[2.0]], C=[[1.0]], D=[[1.0]],
                          F=SignOperator(1), P=[[1.0]])
        with pytest.raises(UnsupportedSchemeError):
            simulate(sys_, "fully_implicit", [1.0], 0.1, 1.0)

    def test_trajectory_grid_invariants(self):
        traj = simulate(relay_system(), "semi_implicit", [1.0, 2.0], 0.1, 1.0)
        assert len(traj.times) == len(traj.states) == len(traj.lambdas) == 11
        np.testing.assert_allclose(np.diff(traj.times), 0.1)

    def test_multiplier_consistency_semi_implicit(self):
        # x_{n+1} = x_n + h (-f(x_n) + B lam_{n+1})
        sys_ = relay_system()
        traj = simulate(sys_, "semi_implicit", [1.0, 2.0], 0.05, 1.0)
        for n in range(len(traj.times) - 1):
            xn, xn1, lam = traj.states[n], traj.states[n + 1], traj.lambdas[n + 1]
            np.testing.assert_allclose(xn1, xn + 0.05 * (-(RELAY_A @ xn) + lam), atol=1e-9)
