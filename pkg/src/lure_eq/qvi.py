"""Quasi-variational inequalities with perturbation-shifted moving sets.

Problems of the form ``0 in f(x) + N_{K(x)}(x)`` with ``K(x) = Omega - D f(x)``
are equivalent to the monotone inclusion ``0 in f(x) + (N_Omega**-1 + D)**-1(x)``
and are solved by lowering to a Lur'e system with identity input and output
maps. When ``f`` is strongly monotone the problem also reduces to a strongly
monotone variational inequality in ``y = x + D f(x)`` whose operator
``(f**-1 + D)**-1`` is evaluated pointwise here.
"""

from dataclasses import dataclass

import numpy as np

from .lure import LureSystem, equilibrium
from .operators import (
    AffineMap,
    BoxNormalCone,
    ConvergenceError,
    DimensionError,
    as_matrix,
    as_vector,
    graph_residual,
)
from .solvers import SolverConfig, Status

__all__ = ["QviProblem", "MovingSet", "DualConstants", "qvi_to_inclusion",
           "moving_set_check", "solve_qvi", "eval_dual_map", "dual_constants",
           "solve_qvi_dual"]


class QviProblem:
    """Data ``(f, D, Omega)`` of the moving-set problem ``K(x) = Omega - D f(x)``."""

    def __init__(self, f, D, omega):
        self.f = f
        self.D = as_matrix(D, (f.dim_in, f.dim_in))
        if np.linalg.eigvalsh(0.5 * (self.D + self.D.T)).min() < -1e-12:
            raise ValueError("perturbation matrix D must be monotone")
        if not hasattr(omega, "project"):
            raise TypeError("omega must be a normal-cone operator carrying its projection")
        if omega.dim != f.dim_in:
            raise DimensionError("constraint set dimension must match the map")
        self.omega = omega
        self.dim = f.dim_in


def qvi_to_inclusion(p):
    """Lower to a Lur'e system with identity input/output maps."""
    n = p.dim
    return LureSystem(f=p.f, B=np.eye(n), C=np.eye(n), D=p.D, F=p.omega, P=np.eye(n))


@dataclass
class MovingSet:
    """The translate ``Omega - D f(x)`` at a given point, and membership of x."""

    shift: np.ndarray
    lo: np.ndarray | None
    hi: np.ndarray | None
    member: bool
    distance: float


def moving_set_check(p, x, tol=1e-10):
    """Describe ``K(x) = Omega - D f(x)`` and test ``x in K(x)``.

    For a box constraint the shifted bounds are returned; otherwise only
    membership (through the projection distance) is reported.
    """
    x = as_vector(x, p.dim)
    s = p.D @ p.f(x)
    # x in Omega - s  iff  x + s in Omega
    dist = float(np.linalg.norm((x + s) - p.omega.project(x + s)))
    lo = hi = None
    if isinstance(p.omega, BoxNormalCone):
        lo, hi = p.omega.lo - s, p.omega.hi - s
    return MovingSet(shift=s, lo=lo, hi=hi, member=dist <= tol, distance=dist)


def solve_qvi(p, cfg=None, x0=None):
    """Solve the QVI by lowering to the monotone inclusion.

    The report carries two independent certificates: the inclusion-form
    residual from the equilibrium solve and the QVI-form residual
    ``-f(x) in N_Omega(x + D f(x))`` measured as a graph distance.
    """
    cfg = cfg or SolverConfig()
    report = equilibrium(qvi_to_inclusion(p), cfg, x0=x0)
    x = report.solution
    fx = p.f(x)
    qvi_res = graph_residual(p.omega, x + p.D @ fx, -fx)
    report.extras["qvi_residual"] = qvi_res
    if report.status is Status.CONVERGED and qvi_res > 10 * cfg.tol:
        report.status = Status.STEP_REJECTED
        report.message = f"QVI-form residual {qvi_res:.3e} exceeds 10*tol"
    return report


def eval_dual_map(f, D, y, tol=1e-12, max_iter=100_000):
    """Evaluate ``(f**-1 + D)**-1`` at ``y`` for strongly monotone ``f``.

    The value ``u`` solves ``u = f(y - D u)``. Affine maps are solved
    directly; otherwise a damped fixed point ``u <- (1-t) u + t f(y - D u)``
    runs with a damping keeping ``t * L |D| < 1``.
    """
    if f.strong_modulus <= 0:
        raise ValueError("the dual map needs a strictly positive strong-monotonicity modulus")
    D = as_matrix(D, (f.dim_in, f.dim_in))
    y = as_vector(y, f.dim_in)
    if isinstance(f, AffineMap):
        try:
            u = np.linalg.solve(np.eye(f.dim_in) + f.A @ D, f.A @ y + f.b)
        except np.linalg.LinAlgError:
            raise ValueError("I + A D is singular; the data violate the strong monotonicity premises")
        return u
    LD = f.lipschitz * float(np.linalg.norm(D, 2))
    theta = 1.0 if LD < 1.0 else 1.0 / (1.0 + LD) ** 2
    u = f(y)
    for _ in range(int(max_iter)):
        fu = f(y - D @ u)
        if np.linalg.norm(u - fu) <= tol:
            return u
        u = (1.0 - theta) * u + theta * fu
    raise ConvergenceError("dual map fixed point did not converge",
                           best=u, residual=float(np.linalg.norm(u - f(y - D @ u))))


@dataclass
class DualConstants:
    """Strong-monotonicity and Lipschitz constants along the dual reduction."""

    mu_inv: float
    lip_inv: float
    mu_phi: float
    lip_phi: float


def dual_constants(f, D):
    """Constants of ``f**-1`` and of ``(f**-1 + D)**-1``.

    ``f**-1`` is ``mu/L^2``-strongly monotone and ``1/mu``-Lipschitz; adding a
    monotone ``D`` keeps the modulus and grows the Lipschitz bound by ``|D|``;
    inverting flips the pair once more.
    """
    mu, L = f.strong_modulus, f.lipschitz
    if mu <= 0:
        raise ValueError("dual constants need a strictly positive strong-monotonicity modulus")
    mu_inv = mu / (L * L)
    lip_inv = 1.0 / mu
    lip_sum = lip_inv + float(np.linalg.norm(as_matrix(D), 2))
    return DualConstants(mu_inv=mu_inv, lip_inv=lip_inv,
                         mu_phi=mu_inv / (lip_sum * lip_sum),
                         lip_phi=(L * L) / mu)


def solve_qvi_dual(p, cfg=None, y0=None):
    """Solve through the strongly monotone dual variational inequality.

    Runs the projected forward-backward method on ``(f**-1 + D)**-1`` over
    Omega, then recovers the primal point ``x = y - D Phi(y)``. The report's
    ``solution`` is the primal point; ``extras['y_star']`` holds the dual one.
    """
    from .solvers import fb_strongly_monotone_solve
    from .operators import LipschitzMap

    cfg = cfg or SolverConfig()
    consts = dual_constants(p.f, p.D)
    f, D = p.f, p.D

    phi = LipschitzMap(lambda y: eval_dual_map(f, D, y, tol=cfg.inner_tol,
                                               max_iter=cfg.inner_max_iter),
                       p.dim, lipschitz=consts.lip_phi, strong_modulus=consts.mu_phi)
    y0 = np.zeros(p.dim) if y0 is None else as_vector(y0, p.dim)
    report = fb_strongly_monotone_solve(phi, p.omega, y0, cfg)
    y_star = report.solution
    u = eval_dual_map(f, D, y_star, tol=cfg.inner_tol, max_iter=cfg.inner_max_iter)
    report.extras["y_star"] = y_star
    report.extras["phi_at_y"] = u
    report.extras["dual_constants"] = consts
    report.solution = y_star - D @ u
    return report
