"""Iterative engines for monotone inclusions.

Three solvers: a forward-backward-forward method for ``0 in f(x) + G(x)``
with monotone Lipschitz ``f`` and maximal monotone ``G`` given through a
resolvent oracle, the proximal point method for a maximal monotone operator
given through its resolvent, and a projected forward-backward method for
strongly monotone variational inequalities over a projectable set.
"""

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .operators import ConvergenceError, as_vector

__all__ = ["Status", "SolverConfig", "SolverReport",
           "tseng_solve", "proximal_point_solve", "fb_strongly_monotone_solve"]


class Status(str, Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIterReached"
    DIVERGED = "Diverged"
    STEP_REJECTED = "StepRejected"


DIVERGENCE_FACTOR = 1e6


@dataclass
class SolverConfig:
    """Step size, stopping tolerance and iteration budgets.

    ``gamma = None`` lets each solver pick its default step from the problem
    constants. Inner budgets control nested resolvent computations.
    """

    gamma: float | None = None
    tol: float = 1e-8
    max_iter: int = 10_000
    inner_tol: float = 1e-10
    inner_max_iter: int = 100_000

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass
class SolverReport:
    """Solution and diagnostics of one solver run.

    ``certified_residual`` is the solver's own stopping residual at the
    returned point. ``inclusion_residual`` is filled by front-ends that
    re-certify the solution against the original inclusion independently of
    the solver path.
    """

    solution: np.ndarray
    status: Status
    iterations: int
    residual_history: list
    certified_residual: float
    gamma: float
    message: str = ""
    inclusion_residual: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.status is Status.CONVERGED


def tseng_solve(ftilde, resolvent, x0, cfg=None):
    """Forward-backward-forward iteration on ``0 in ftilde(x) + G(x)``.

    Iterates

        y_n = J_{gamma G}(x_n - gamma * ftilde(x_n))
        x_{n+1} = y_n - gamma * (ftilde(y_n) - ftilde(x_n))

    and stops when the fixed-point residual ``|x_n - y_n| / gamma`` drops
    below ``cfg.tol``. Convergence requires monotone ``ftilde`` and
    ``gamma < 1 / L``; a violating step is allowed but warned about, and a
    divergence guard turns blow-ups into a ``Diverged`` status.

    Parameters
    ----------
    ftilde : LipschitzMap
        Single-valued monotone forward map with a declared Lipschitz bound.
    resolvent : callable
        ``resolvent(gamma, u) -> y``, the resolvent oracle of ``G``.
    x0 : array_like
        Initial point.
    cfg : SolverConfig, optional

    Returns
    -------
    SolverReport
        ``solution`` is the last backward point ``y_n`` (it lies in the
        domain of ``G``); ``extras['iterates']`` holds every ``x_n``.
    """
    cfg = cfg or SolverConfig()
    x = as_vector(x0)
    L = ftilde.lipschitz
    gamma = cfg.gamma if cfg.gamma is not None else (0.9 / L if L > 0 else 1.0)
    if L > 0 and gamma >= 1.0 / L:
        warnings.warn(
            f"step gamma={gamma:g} violates the convergence bound 1/L={1.0 / L:g}; proceeding",
            RuntimeWarning, stacklevel=2)

    guard = DIVERGENCE_FACTOR * (1.0 + np.linalg.norm(x))
    history = []
    iterates = [x.copy()]
    y = x
    for n in range(1, cfg.max_iter + 1):
        fx = ftilde(x)
        try:
            y = _point(resolvent(gamma, x - gamma * fx))
        except ConvergenceError as err:
            return SolverReport(solution=x, status=Status.STEP_REJECTED, iterations=n - 1,
                                residual_history=history, certified_residual=np.inf,
                                gamma=gamma, message=f"resolvent failure: {err}",
                                extras={"iterates": iterates})
        res = float(np.linalg.norm(x - y)) / gamma
        history.append(res)
        if res <= cfg.tol:
            return SolverReport(solution=y, status=Status.CONVERGED, iterations=n,
                                residual_history=history, certified_residual=res,
                                gamma=gamma, extras={"iterates": iterates, "x_final": x, "y_final": y})
        x = y - gamma * (ftilde(y) - fx)
        iterates.append(x.copy())
        if np.linalg.norm(x) > guard:
            return SolverReport(solution=x, status=Status.DIVERGED, iterations=n,
                                residual_history=history, certified_residual=res,
                                gamma=gamma, message="iterate norm exceeded the divergence guard",
                                extras={"iterates": iterates})
    return SolverReport(solution=y, status=Status.MAX_ITER, iterations=cfg.max_iter,
                        residual_history=history, certified_residual=history[-1],
                        gamma=gamma, extras={"iterates": iterates})


def proximal_point_solve(resolvent, x0, cfg=None, gamma=None):
    """Proximal point iteration ``x_{n+1} = J_{gamma H}(x_n)``.

    The resolvent oracle must belong to a maximal monotone operator at the
    fixed step ``gamma``; the residual is the scaled displacement
    ``|x_{n+1} - x_n| / gamma``, which by firm nonexpansiveness is
    non-increasing along the iteration.

    Parameters
    ----------
    resolvent : callable
        ``resolvent(gamma, x) -> y``.
    x0 : array_like
    cfg : SolverConfig, optional
    gamma : float, optional
        Overrides ``cfg.gamma``.

    Returns
    -------
    SolverReport
    """
    cfg = cfg or SolverConfig()
    g = gamma if gamma is not None else (cfg.gamma if cfg.gamma is not None else 1.0)
    x = as_vector(x0)
    history = []
    iterates = [x.copy()]
    for n in range(1, cfg.max_iter + 1):
        try:
            x_next = _point(resolvent(g, x))
        except (ConvergenceError, ValueError) as err:
            return SolverReport(solution=x, status=Status.STEP_REJECTED, iterations=n - 1,
                                residual_history=history, certified_residual=np.inf,
                                gamma=g, message=f"resolvent failure: {err}",
                                extras={"iterates": iterates})
        res = float(np.linalg.norm(x_next - x)) / g
        history.append(res)
        x = x_next
        iterates.append(x.copy())
        if res <= cfg.tol:
            return SolverReport(solution=x, status=Status.CONVERGED, iterations=n,
                                residual_history=history, certified_residual=res,
                                gamma=g, extras={"iterates": iterates})
    return SolverReport(solution=x, status=Status.MAX_ITER, iterations=cfg.max_iter,
                        residual_history=history, certified_residual=history[-1],
                        gamma=g, extras={"iterates": iterates})


def fb_strongly_monotone_solve(phi, omega, y0, cfg=None):
    """Projected forward-backward method for a strongly monotone map over a set.

    Solves ``0 in phi(y) + N(y)`` for the normal cone of a projectable set by

        y_{k+1} = proj(y_k - sigma * phi(y_k)),   sigma = mu / L**2,

    which contracts with factor ``sqrt(1 - mu**2 / L**2)`` per step.

    Parameters
    ----------
    phi : LipschitzMap
        Must declare ``strong_modulus > 0``.
    omega : operator with a ``project`` method
        Normal-cone catalog operator of the constraint set.
    y0 : array_like
    cfg : SolverConfig, optional

    Returns
    -------
    SolverReport
    """
    cfg = cfg or SolverConfig()
    mu, L = phi.strong_modulus, phi.lipschitz
    if mu <= 0:
        raise ValueError("projected forward-backward needs a strictly positive strong-monotonicity modulus")
    sigma = mu / (L * L)
    y = as_vector(y0)
    history = []
    iterates = [y.copy()]
    for k in range(1, cfg.max_iter + 1):
        y_next = omega.project(y - sigma * phi(y))
        res = float(np.linalg.norm(y_next - y)) / sigma
        history.append(res)
        y = y_next
        iterates.append(y.copy())
        if res <= cfg.tol:
            return SolverReport(solution=y, status=Status.CONVERGED, iterations=k,
                                residual_history=history, certified_residual=res,
                                gamma=sigma, extras={"iterates": iterates, "sigma": sigma})
    return SolverReport(solution=y, status=Status.MAX_ITER, iterations=cfg.max_iter,
                        residual_history=history, certified_residual=history[-1],
                        gamma=sigma, extras={"iterates": iterates, "sigma": sigma})


def _point(res):
    """Accept either a bare point or a certificate carrying ``point``."""
    return res.point if hasattr(res, "point") else res
