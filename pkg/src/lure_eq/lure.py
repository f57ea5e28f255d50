"""Set-valued Lur'e system model: validation, equilibria, and time-stepping.

A system couples a Lipschitz drift ``f`` with a static set-valued nonlinearity
``F`` through matrices ``B, C, D``:

    dx/dt = -f(x) + B lam,   y = C x + D lam,   lam in -F(y).

Equilibria are the zeros of ``f + B (F**-1 + D)**-1 C`` and are computed by
operator splitting on the weighted reformulation; trajectories come from
explicit, semi-implicit or fully implicit time-stepping.
"""

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .calculus import CompositeOperator, EquilibriumOperator, FeedthroughOperator, semicoercivity
from .operators import (
    ConvergenceError,
    DimensionError,
    DomainViolation,
    AffineMap,
    LipschitzMap,
    as_matrix,
    as_vector,
)
from .solvers import SolverConfig, SolverReport, Status, proximal_point_solve, tseng_solve

__all__ = ["LureSystem", "Mode", "Scheme", "ValidationReport", "Trajectory",
           "SystemValidationError", "UnsupportedSchemeError",
           "validate", "equilibrium", "inclusion_residual", "simulate"]

PB_TOL = 1e-10
PSD_TOL = 1e-9
_SAMPLE_SEED = 20240601


class SystemValidationError(ValueError):
    """The system fails the assumptions required by the requested operation."""


class UnsupportedSchemeError(ValueError):
    """The requested time-stepping scheme does not apply to this system."""


class Mode(str, Enum):
    STRICT = "Strict"
    PASSIVE = "Passive"
    INVALID = "Invalid"


class Scheme(str, Enum):
    EXPLICIT = "explicit"
    SEMI_IMPLICIT = "semi_implicit"
    FULLY_IMPLICIT = "fully_implicit"


class LureSystem:
    """The tuple ``(f, B, C, D, F)`` with an optional weighting certificate P."""

    def __init__(self, f, B, C, D, F, P=None):
        self.B = as_matrix(B)
        self.state_dim = self.B.shape[0]
        self.output_dim = self.B.shape[1]
        if F.dim != self.output_dim:
            raise DimensionError("nonlinearity dimension must match the columns of B")
        self.C = as_matrix(C, (self.output_dim, self.state_dim))
        self.D = as_matrix(D, (self.output_dim, self.output_dim))
        if f.dim_in != self.state_dim or f.dim_out != self.state_dim:
            raise DimensionError("drift must map the state space to itself")
        self.f = f
        self.F = F
        if P is not None:
            P = as_matrix(P, (self.state_dim, self.state_dim))
            if not np.allclose(P, P.T, atol=1e-12):
                raise SystemValidationError("certificate P must be symmetric")
            if np.linalg.eigvalsh(P).min() <= 0:
                raise SystemValidationError("certificate P must be positive definite")
        self.P = P

    def weight(self):
        """The weighting matrix actually used: supplied P or the identity."""
        return np.eye(self.state_dim) if self.P is None else self.P

    def loop(self):
        """The feedthrough loop operator ``(F**-1 + D)**-1`` (needs monotone D)."""
        return FeedthroughOperator(self.F, self.D)

    def composite(self):
        """The pullback ``C^T loop C`` used by the splitting solvers."""
        return CompositeOperator(self.loop(), self.C)

    def equilibrium_operator(self, inner_tol=1e-10, inner_max_iter=100_000):
        return EquilibriumOperator(self.f, self.B, self.C, self.D, self.F,
                                   P=self.weight(), inner_tol=inner_tol,
                                   inner_max_iter=inner_max_iter)


@dataclass
class ValidationReport:
    """Outcome of the assumption checks behind the two solver routes."""

    mode: Mode
    pb_equals_ct: bool
    passivity_psd: bool
    d_monotone: bool
    pf_monotone: bool
    d_semicoercive: float | None
    pb_gap: float
    block_eigenvalues: np.ndarray | None
    warnings: list = field(default_factory=list)


def _sampled_pf_monotone(f, P, rng, trials=40, tol=PSD_TOL):
    for _ in range(trials):
        x = rng.uniform(-5.0, 5.0, f.dim_in)
        y = rng.uniform(-5.0, 5.0, f.dim_in)
        d = x - y
        if (P @ (f(x) - f(y))) @ d < -tol * max(1.0, d @ d):
            return False
    return True


def _sampled_passivity(f, P, gap, D, rng, trials=40, tol=PSD_TOL):
    n2 = D.shape[0]
    for _ in range(trials):
        x1 = rng.uniform(-5.0, 5.0, f.dim_in)
        x2 = rng.uniform(-5.0, 5.0, f.dim_in)
        y = rng.uniform(-5.0, 5.0, n2)
        dx = x1 - x2
        val = (P @ (f(x1) - f(x2))) @ dx + (gap @ y) @ dx + (D @ y) @ y
        if val < -tol * max(1.0, dx @ dx + y @ y):
            return False
    return True


def validate(system):
    """Check the solver assumptions and classify the system.

    ``Strict`` requires ``P B = C^T`` together with monotone ``P f`` and
    ``D``; ``Passive`` requires positive semidefiniteness of the block
    quadratic-supply matrix (exact for affine drifts, sampled otherwise).
    A missing P is replaced by the identity and recorded as a warning.
    """
    notes = []
    if system.P is None:
        notes.append("no certificate P supplied; defaulting to the identity")
    P = system.weight()
    B, C, D, f = system.B, system.C, system.D, system.f

    gap = P @ B - C.T
    pb_gap = float(np.linalg.norm(gap, 2)) if gap.size else 0.0
    pb_equals_ct = pb_gap <= PB_TOL

    d_eigs = np.linalg.eigvalsh(0.5 * (D + D.T))
    d_monotone = bool(d_eigs.min() >= -1e-12)

    rng = np.random.default_rng(_SAMPLE_SEED)
    block_eigs = None
    if isinstance(f, AffineMap):
        PA = P @ f.A
        pf_monotone = bool(np.linalg.eigvalsh(PA + PA.T).min() >= -PSD_TOL)
        block = np.block([[PA + PA.T, gap], [gap.T, D + D.T]])
        block_eigs = np.linalg.eigvalsh(block)
        passivity_psd = bool(block_eigs.min() >= -PSD_TOL)
    else:
        pf_monotone = _sampled_pf_monotone(f, P, rng)
        passivity_psd = _sampled_passivity(f, P, gap, D, rng)

    semico = semicoercivity(D).constant if d_monotone else None

    if pb_equals_ct and d_monotone and pf_monotone:
        mode = Mode.STRICT
    elif passivity_psd and d_monotone and semico is not None:
        mode = Mode.PASSIVE
    else:
        mode = Mode.INVALID

    return ValidationReport(mode=mode, pb_equals_ct=pb_equals_ct,
                            passivity_psd=passivity_psd, d_monotone=d_monotone,
                            pf_monotone=pf_monotone, d_semicoercive=semico,
                            pb_gap=pb_gap, block_eigenvalues=block_eigs,
                            warnings=notes)


def inclusion_residual(system, x, tol=1e-10, max_iter=100_000):
    """Independent certificate that ``x`` solves ``0 in f(x) + B loop(C x)``.

    Searches for a multiplier ``lam`` and scores the pair by the joint
    natural residual ``max(|f(x) + B lam|, graph gap of lam in loop(C x))``.
    The graph gap (distance to the graph of F) keeps the certificate
    continuous at relay switching surfaces, where the image of the loop
    jumps. Candidates: the least-squares multiplier and a certified loop
    element seeded from it.
    """
    x = as_vector(x, system.state_dim)
    loop = system.loop()
    fx = system.f(x)
    c = system.C @ x

    lam_ls = np.linalg.lstsq(system.B, -fx, rcond=None)[0]
    scores = [max(float(np.linalg.norm(fx + system.B @ lam_ls)), loop.graph_gap(c, lam_ls))]
    try:
        v = loop.evaluate(c, tol=tol, max_iter=max_iter, init=lam_ls)
        scores.append(max(float(np.linalg.norm(fx + system.B @ v)), loop.graph_gap(c, v)))
    except (ConvergenceError, DomainViolation):
        pass
    return min(scores)


def equilibrium(system, cfg=None, x0=None):
    """Compute an equilibrium through the route matching the validation mode.

    Strict systems run the forward-backward-forward iteration on the weighted
    drift plus pullback; passive systems run proximal point on the resolvent
    of the full weighted operator with a step below ``0.5 / L``. The returned
    report carries an independently computed inclusion residual; a converged
    run whose certificate exceeds ``10 * tol`` is downgraded.
    """
    cfg = cfg or SolverConfig()
    report_v = validate(system)
    if report_v.mode is Mode.INVALID:
        raise SystemValidationError("system fails both the strict and passive assumption sets")
    x0 = np.zeros(system.state_dim) if x0 is None else as_vector(x0, system.state_dim)
    P = system.weight()

    if report_v.mode is Mode.STRICT:
        if system.P is None:
            ftilde = system.f
        elif isinstance(system.f, AffineMap):
            ftilde = AffineMap(P @ system.f.A, P @ system.f.b)
        else:
            f = system.f
            ftilde = LipschitzMap(lambda z: P @ f(z), f.dim_in,
                                  lipschitz=float(np.linalg.norm(P, 2)) * f.lipschitz)
        composite = system.composite()

        def res_oracle(g, u):
            return composite.resolvent(g, u, tol=cfg.inner_tol,
                                       max_iter=cfg.inner_max_iter,
                                       inner_tol=cfg.inner_tol)

        report = tseng_solve(ftilde, res_oracle, x0, cfg)
    else:
        eqop = system.equilibrium_operator(inner_tol=cfg.inner_tol,
                                           inner_max_iter=cfg.inner_max_iter)
        L = eqop.lipschitz_part_constant()
        gamma = min(cfg.gamma, 0.5 / L) if cfg.gamma is not None else 0.5 / L

        def res_oracle(g, u):
            return eqop.resolvent(g, u, tol=cfg.inner_tol, max_iter=cfg.inner_max_iter)

        report = proximal_point_solve(res_oracle, x0, cfg, gamma=gamma)

    report.extras["mode"] = report_v.mode
    try:
        report.inclusion_residual = inclusion_residual(
            system, report.solution, tol=cfg.inner_tol, max_iter=cfg.inner_max_iter)
    except (ConvergenceError, DomainViolation) as err:
        report.inclusion_residual = np.inf
        report.message = (report.message + "; " if report.message else "") + f"certification failed: {err}"

    if report.status is Status.CONVERGED and report.inclusion_residual > 10 * cfg.tol:
        report.status = Status.STEP_REJECTED
        report.message = (f"certified inclusion residual {report.inclusion_residual:.3e} "
                          f"exceeds 10*tol; range condition possibly violated")
    elif report.status is not Status.CONVERGED and report.inclusion_residual > 10 * cfg.tol:
        report.message = (report.message + "; " if report.message else "") + \
            "range condition possibly violated"
    return report


@dataclass
class Trajectory:
    """Discrete trajectory: states and multipliers on a uniform time grid."""

    times: np.ndarray
    states: np.ndarray
    lambdas: np.ndarray
    scheme: Scheme
    h: float
    completed: bool = True
    note: str = ""


def _implicit_supported(system):
    if float(np.linalg.norm(system.B - system.C.T, 2)) > PB_TOL:
        raise UnsupportedSchemeError("implicit schemes require B = C^T (identity weighting)")
    if np.linalg.eigvalsh(0.5 * (system.D + system.D.T)).min() < -1e-12:
        raise UnsupportedSchemeError("implicit schemes require a monotone feedthrough D")
    if isinstance(system.f, AffineMap):
        if np.linalg.eigvalsh(system.f.A + system.f.A.T).min() < -PSD_TOL:
            raise UnsupportedSchemeError("implicit schemes require a monotone drift")
    else:
        rng = np.random.default_rng(_SAMPLE_SEED)
        if not _sampled_pf_monotone(system.f, np.eye(system.state_dim), rng):
            raise UnsupportedSchemeError("implicit schemes require a monotone drift")


def simulate(system, scheme, x0, h, T, cfg=None):
    """Integrate the system over ``[0, T]`` with step ``h``.

    Explicit stepping replaces the set-valued nonlinearity by its
    minimal-norm selection (classical sign for relays) and updates the
    multiplier one step behind the state. The semi-implicit scheme performs
    one pullback resolvent per step; the fully implicit scheme solves a
    strongly monotone inclusion per step with an inner forward-backward-
    forward iteration. Implicit schemes require ``B = C^T``.

    Inner failures abort the run and return the partial trajectory with
    ``completed=False``.
    """
    scheme = Scheme(scheme)
    cfg = cfg or SolverConfig(tol=1e-10)
    h = float(h)
    if h <= 0 or T <= 0:
        raise ValueError("step and horizon must be positive")
    x = as_vector(x0, system.state_dim)
    n_steps = int(round(T / h))
    f, B, C, D, F = system.f, system.B, system.C, system.D, system.F

    times = [0.0]
    states = [x.copy()]
    lambdas = []
    note = ""
    completed = True

    if scheme is Scheme.EXPLICIT:
        try:
            lam = -F.minimal_element(C @ x)
        except DomainViolation as err:
            raise UnsupportedSchemeError(
                f"explicit scheme needs C x0 in the domain of F ({err})")
        lambdas.append(lam.copy())
        for n in range(n_steps):
            x = x + h * (-f(x) + B @ lam)
            y = C @ states[-1] + D @ lam
            states.append(x.copy())
            times.append((n + 1) * h)
            try:
                lam = -F.minimal_element(y)
            except DomainViolation as err:
                note = f"aborted at t={times[-1]:g}: output left the domain of F ({err})"
                completed = False
                lambdas.append(np.full(system.output_dim, np.nan))
                break
            lambdas.append(lam.copy())
    else:
        _implicit_supported(system)
        composite = system.composite()
        loop = composite.loop
        try:
            lam0 = -loop.evaluate(C @ x, tol=cfg.inner_tol, max_iter=cfg.inner_max_iter)
        except (ConvergenceError, DomainViolation):
            lam0 = np.zeros(system.output_dim)
            note = "multiplier at t=0 not determined; reported as zero"
        lambdas.append(lam0)

        for n in range(n_steps):
            if scheme is Scheme.SEMI_IMPLICIT:
                try:
                    cert = composite.resolvent(h, x - h * f(x), tol=cfg.inner_tol,
                                               max_iter=cfg.inner_max_iter,
                                               inner_tol=cfg.inner_tol)
                except ConvergenceError as err:
                    note = f"aborted at t={(n + 1) * h:g}: {err}"
                    completed = False
                    break
                x = cert.point
                lam = -cert.dual
            else:
                fx_prev = x

                def fhat(z, x_n=fx_prev):
                    return z - x_n + h * f(z)

                step_map = LipschitzMap(fhat, system.state_dim,
                                        lipschitz=1.0 + h * f.lipschitz,
                                        strong_modulus=1.0)

                def res_oracle(g, u):
                    return composite.resolvent(g * h, u, tol=cfg.inner_tol,
                                               max_iter=cfg.inner_max_iter,
                                               inner_tol=cfg.inner_tol)

                inner = tseng_solve(step_map, res_oracle, x,
                                    SolverConfig(tol=cfg.inner_tol, max_iter=cfg.max_iter,
                                                 inner_tol=cfg.inner_tol,
                                                 inner_max_iter=cfg.inner_max_iter))
                if inner.status is not Status.CONVERGED:
                    note = f"aborted at t={(n + 1) * h:g}: inner solve {inner.status.value}"
                    completed = False
                    break
                z = inner.solution
                lam = np.linalg.lstsq(B, (z - x) / h + f(z), rcond=None)[0]
                x = z
            states.append(x.copy())
            times.append((n + 1) * h)
            lambdas.append(lam.copy())

    return Trajectory(times=np.asarray(times), states=np.vstack(states),
                      lambdas=np.vstack(lambdas), scheme=scheme, h=h,
                      completed=completed, note=note)
