"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance is fixed here exactly as stated.
"""

import warnings

import numpy as np

from lure_eq import (
    AffineMap,
    BoxNormalCone,
    CompositeOperator,
    FeedthroughOperator,
    L1Subdifferential,
    LinearCostGame,
    LinearGamePlayer,
    LureSystem,
    Mode,
    ProxCostGame,
    ProxGamePlayer,
    QviProblem,
    SignOperator,
    SolverConfig,
    Status,
    certify_equilibrium,
    dual_constants,
    equilibrium,
    inverse_resolvent,
    member_residual,
    proximal_point_solve,
    resolvent,
    simulate,
    solve_game,
    solve_qvi,
    solve_qvi_dual,
    validate,
)
from lure_eq.lure import inclusion_residual

from oracles import random_operator

RELAY_A = np.array([[9.0, -1.0], [1.0, 8.0]])


def relay_system(D=None):
    D = np.diag([0.0, 1.0]) if D is None else D
    return LureSystem(f=AffineMap(RELAY_A), B=np.eye(2), C=np.eye(2), D=D,
                      F=SignOperator(2), P=np.eye(2))


def _report(num, name, ok, detail=""):
    print(f"[acceptance {num:02d}] {'PASS' if ok else 'FAIL'}: {name}  {detail}")
    assert ok, f"criterion {num} failed: {name} {detail}"


def test_criterion_01_relay_equilibrium_reproduction():
    rep = equilibrium(relay_system(), SolverConfig(gamma=0.1, tol=1e-8, max_iter=2000),
                      x0=[1.0, 2.0])
    norm = float(np.linalg.norm(rep.solution))
    ok = rep.status is Status.CONVERGED and norm <= 1e-6 and rep.iterations <= 2000
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep05 = equilibrium(relay_system(), SolverConfig(gamma=0.5, tol=1e-8, max_iter=2000),
                            x0=[1.0, 2.0])
    ok = ok and rep05.status is Status.DIVERGED
    _report(1, "relay benchmark: gamma=0.1 converges to the origin, gamma=0.5 diverges",
            ok, f"|x*|={norm:.2e} in {rep.iterations} iters; 0.5-run={rep05.status.value}")


def test_criterion_02_explicit_chattering_vs_semi_implicit():
    expl = simulate(relay_system(), "explicit", [1.0, 2.0], 0.04, 40.0)
    min_norm = float(np.min(np.linalg.norm(expl.states, axis=1)))
    semi = simulate(relay_system(), "semi_implicit", [1.0, 2.0], 0.04, 10.0)
    end_norm = float(np.linalg.norm(semi.states[-1]))
    ok = expl.completed and min_norm > 1e-3 and semi.completed and end_norm <= 1e-2
    _report(2, "explicit scheme chatters while semi-implicit settles",
            ok, f"min|x|={min_norm:.2e} (explicit), |x(10)|={end_norm:.2e} (semi-implicit)")


def test_criterion_03_loop_resolvent_oracle_equivalence():
    rng = np.random.default_rng(101)
    worst_mem = 0.0
    worst_d0 = 0.0
    for _ in range(200):
        dim = int(rng.integers(1, 7))
        F = random_operator(rng, dim)
        d = rng.uniform(0.0, 3.0, dim)
        d[rng.random(dim) < 0.25] = 0.0
        D = np.diag(d)
        loop = FeedthroughOperator(F, D)
        loop0 = FeedthroughOperator(F, np.zeros((dim, dim)))
        x = rng.uniform(-5.0, 5.0, dim)
        for gamma in (0.1, 0.5, 2.0):
            y = loop.resolvent(gamma, x)
            lam = (x - y) / gamma
            worst_mem = max(worst_mem, member_residual(F, y + D @ (y - x) / gamma, lam))
            gap = np.linalg.norm(loop0.resolvent(gamma, x) - resolvent(F, gamma, x))
            worst_d0 = max(worst_d0, float(gap))
    ok = worst_mem <= 1e-8 and worst_d0 <= 1e-10
    _report(3, "loop resolvent certifies the defining inclusion on 200 random instances",
            ok, f"max membership residual {worst_mem:.2e}, max D=0 gap {worst_d0:.2e}")


def test_criterion_04_moreau_identity():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(200):
        dim = int(rng.integers(1, 7))
        F = random_operator(rng, dim)
        x = rng.uniform(-5.0, 5.0, dim)
        total = resolvent(F, 1.0, x) + inverse_resolvent(F, 1.0, x)
        worst = max(worst, float(np.abs(total - x).max()))
    ok = worst <= 1e-10
    _report(4, "resolvent + inverse resolvent sum to the identity (200 random instances)",
            ok, f"max componentwise gap {worst:.2e}")


def test_criterion_05_proximal_point_route():
    sys_ = relay_system()
    eqop = sys_.equilibrium_operator()
    L = eqop.lipschitz_part_constant()
    gamma = 0.05
    assert gamma <= 0.5 / L
    gaps = []

    def oracle(g, u):
        y = eqop.resolvent(g, u, tol=1e-10)
        again = eqop.composite.resolvent(g, u - g * eqop.lipschitz_part(y), tol=1e-13).point
        gaps.append(float(np.linalg.norm(y - again)))
        return y

    rep = proximal = __import__("lure_eq").proximal_point_solve(
        oracle, [1.0, 2.0], SolverConfig(tol=2e-7, max_iter=500), gamma=gamma)
    norm = float(np.linalg.norm(rep.solution))
    ok = rep.status is Status.CONVERGED and norm <= 1e-5 and max(gaps) <= 1e-10
    _report(5, "proximal point through the weighted resolvent reaches the origin",
            ok, f"|x*|={norm:.2e}, max inner fixed-point residual {max(gaps):.2e}")


def test_criterion_06_qvi_primal_dual_agreement():
    p = QviProblem(AffineMap([[1.0]], [-2.0]), [[0.5]], BoxNormalCone([-1.0], [1.0]))
    cfg = SolverConfig(tol=1e-10)
    primal = solve_qvi(p, cfg)
    dual = solve_qvi_dual(p, SolverConfig(tol=1e-12), y0=[-0.8])
    consts = dual_constants(p.f, p.D)
    agree = float(np.linalg.norm(primal.solution - dual.solution))
    ok = (primal.status is Status.CONVERGED and dual.status is Status.CONVERGED
          and abs(primal.solution[0] - 4.0 / 3.0) <= 1e-8
          and abs(dual.extras["y_star"][0] - 1.0) <= 1e-8
          and agree <= 1e-8)
    bound = float(np.sqrt(1.0 - consts.mu_phi ** 2 / consts.lip_phi ** 2)) + 0.05
    errs = [abs(y[0] - 1.0) for y in dual.extras["iterates"]]
    rate = max((e1 / e0 for e0, e1 in zip(errs, errs[1:]) if e0 > 1e-12), default=0.0)
    ok = ok and rate <= bound
    _report(6, "1-D moving-set problem agrees across primal and dual routes",
            ok, f"x*={primal.solution[0]:.10f}, agreement {agree:.2e}, "
                f"contraction {rate:.3f} <= {bound:.3f}")


def test_criterion_07_equivalence_property_random():
    rng = np.random.default_rng(103)
    worst_inc = 0.0
    worst_qvi = 0.0
    all_conv = True
    for _ in range(100):
        dim = int(rng.integers(1, 5))
        K = rng.uniform(-1.0, 1.0, (dim, dim))
        A = K @ K.T + 0.6 * (K - K.T) + rng.uniform(0.05, 1.0) * np.eye(dim)
        f = AffineMap(A, rng.uniform(-2.0, 2.0, dim))
        D = np.diag(rng.uniform(0.0, 1.0, dim))
        lo = rng.uniform(-2.0, 0.0, dim)
        p = QviProblem(f, D, BoxNormalCone(lo, lo + rng.uniform(0.5, 3.0, dim)))
        rep = solve_qvi(p, SolverConfig(tol=1e-8, max_iter=50_000))
        all_conv = all_conv and rep.status is Status.CONVERGED
        worst_inc = max(worst_inc, rep.inclusion_residual)
        worst_qvi = max(worst_qvi, rep.extras["qvi_residual"])
    ok = all_conv and worst_inc <= 1e-6 and worst_qvi <= 1e-6
    _report(7, "100 random box problems pass both residual forms at 1e-6",
            ok, f"max inclusion {worst_inc:.2e}, max moving-set {worst_qvi:.2e}")


def test_criterion_08_nash_games():
    lin = LinearCostGame([
        LinearGamePlayer(dim=1, cost_gradient=AffineMap([[0.0, 1.0]], [-1.0]),
                         strategy_set=BoxNormalCone([0.0], [2.0]), shift=1.0),
        LinearGamePlayer(dim=1, cost_gradient=AffineMap([[-1.0, 0.0]], [1.0]),
                         strategy_set=BoxNormalCone([0.0], [2.0]), shift=0.0)])
    certs = certify_equilibrium(lin, [1.0, 1.0], tol=1e-8)
    ok = all(c.ok for c in certs)

    prox = ProxCostGame([
        ProxGamePlayer(dim=1, cost_gradient=AffineMap([[0.0, 1.0]], [1.0]),
                       nonsmooth=L1Subdifferential(1), coupling=0.0),
        ProxGamePlayer(dim=1, cost_gradient=AffineMap([[-1.0, 0.0]], [1.0]),
                       nonsmooth=L1Subdifferential(1), coupling=0.0)])
    rep = solve_game(prox, SolverConfig(tol=1e-10), x0=[0.8, -1.3])
    x = rep.solution
    on_segment = abs(x[0]) <= 1e-8 and -2.0 - 1e-8 <= x[1] <= 1e-8
    pcerts = certify_equilibrium(prox, x, tol=1e-8)
    ok = ok and rep.status is Status.CONVERGED and on_segment and all(c.ok for c in pcerts)
    _report(8, "linear game certifies (1,1); prox game lands on the equilibrium segment",
            ok, f"prox solution ({x[0]:.2e}, {x[1]:.4f})")


def test_criterion_09_composite_resolvent_dual_path():
    rng = np.random.default_rng(104)
    worst_cert = 0.0
    worst_fast = 0.0
    for _ in range(100):
        n1 = int(rng.integers(1, 6))
        n2 = int(rng.integers(1, 6))
        F = random_operator(rng, n2, kinds=("sign", "l1", "box", "nonneg", "identity"))
        d = rng.uniform(0.5, 2.0, n2) if n2 > n1 else rng.uniform(0.0, 2.0, n2)
        loop = FeedthroughOperator(F, np.diag(d))
        C = rng.uniform(-2.0, 2.0, (n2, n1))
        comp = CompositeOperator(loop, C)
        gamma = float(rng.uniform(0.2, 1.5))
        w = rng.uniform(-3.0, 3.0, n1)
        cert = comp.resolvent(gamma, w, tol=1e-8)
        worst_cert = max(worst_cert, cert.residual,
                         loop.residual(cert.argument, cert.dual))
        # identity-C fast path against the loop resolvent
        comp_i = CompositeOperator(loop, np.eye(n2))
        wi = rng.uniform(-3.0, 3.0, n2)
        gap = np.linalg.norm(comp_i.resolvent(gamma, wi).point - loop.resolvent(gamma, wi))
        worst_fast = max(worst_fast, float(gap))
    ok = worst_cert <= 1e-6 and worst_fast <= 1e-8
    _report(9, "composite resolvent dual path certifies on 100 random instances",
            ok, f"max certificate {worst_cert:.2e}, max identity-C gap {worst_fast:.2e}")


def test_criterion_10_passivity_validator():
    rep = validate(relay_system())
    eigs = np.sort(rep.block_eigenvalues)
    ok = (rep.mode is Mode.STRICT
          and np.allclose(eigs, [0.0, 2.0, 16.0, 18.0], atol=1e-9))
    rep_bad = validate(relay_system(D=-np.eye(2)))
    ok = ok and rep_bad.mode is Mode.INVALID
    _report(10, "validator: relay benchmark Strict with block eigenvalues {18,16,0,2}; "
                "negated feedthrough Invalid",
            ok, f"eigs={np.round(eigs, 9).tolist()}, D=-I mode={rep_bad.mode.value}")
