"""Resolvent compositions for feedback loops with feedthrough.

Builds the loop operator ``(F**-1 + D)**-1`` from a catalog nonlinearity F and
a monotone feedthrough matrix D, pulls it back through an output matrix C, and
assembles the weighted equilibrium operator ``P f + P B (F**-1 + D)**-1 C``
whose zeros are the system equilibria. Resolvents of all three are computed
from the resolvent of F alone.
"""

from dataclasses import dataclass

import numpy as np

from .operators import (
    ConvergenceError,
    DimensionError,
    DomainViolation,
    MonotoneLinear,
    IdentityOperator,
    PositiveDefiniteMap,
    ZeroOperator,
    as_matrix,
    as_vector,
    member_residual,
    resolvent_wrt,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass
class SemiCoercivity:
    """Coercivity of a monotone matrix restricted to the range of its symmetric part.

    ``constant`` is infinite when the symmetric part vanishes (the restriction
    is vacuous).
    """

    constant: float
    range_basis: np.ndarray


def semicoercivity(D, tol=1e-10):
    """Smallest positive eigenvalue of ``(D + D^T)/2`` and the matching range basis."""
    D = as_matrix(D)
    lam, vecs = np.linalg.eigh(0.5 * (D + D.T))
    pos = lam > tol
    constant = float(lam[pos].min()) if pos.any() else np.inf
    return SemiCoercivity(constant=constant, range_basis=vecs[:, pos])


@dataclass
class ResolventCertificate:
    """Outcome of a composite resolvent solve, with its membership witness.

    ``dual`` is an exact element of the loop operator at ``argument``;
    ``residual`` is the gap between ``argument`` and the output image it
    should equal at the fixed point.
    """

    point: np.ndarray
    dual: np.ndarray
    argument: np.ndarray
    residual: float
    iterations: int
    converged: bool = True


class FeedthroughOperator:
    """Maximal monotone map ``(F**-1 + D)**-1`` of a loop with feedthrough.

    Closing the algebraic loop ``v in F(c - D v)`` around the nonlinearity F
    yields exactly this operator: ``v`` belongs to its image at ``c`` iff the
    loop equation holds. Its resolvent reduces to a resolvent of F weighted
    by the positive definite matrix ``(gamma I + D)**-1``.
    """

    def __init__(self, F, D, psd_tol=1e-12):
        self.F = F
        D = as_matrix(D, (F.dim, F.dim))
        lam_min = float(np.linalg.eigvalsh(0.5 * (D + D.T)).min()) if F.dim else 0.0
        if lam_min < -psd_tol:
            raise ValueError(f"feedthrough matrix is not monotone (min eigenvalue {lam_min:.3e})")
        self.D = D
        self.dim = F.dim
        self.norm_D = float(np.linalg.norm(D, 2))
        d = np.diagonal(D)
        self._diag = d if np.allclose(D, np.diag(d), atol=0.0) else None
        self._weights = {}

    def _weight(self, gamma):
        """Cached positive definite weight ``(gamma I + D)**-1``."""
        E = self._weights.get(gamma)
        if E is None:
            if self._diag is not None:
                mat = np.diag(1.0 / (gamma + self._diag))
            else:
                mat = np.linalg.inv(gamma * np.eye(self.dim) + self.D)
            E = PositiveDefiniteMap(mat)
            self._weights[gamma] = E
        return E

    def resolvent(self, gamma, x, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        """y with ``x - y in gamma * (F**-1 + D)**-1 (y)``.

        Composition: with ``E = (gamma I + D)**-1``, the solution is
        ``y = E (gamma z + D x)`` where ``z`` solves the E-weighted resolvent
        of F at ``E x``.
        """
        gamma = float(gamma)
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        x = as_vector(x, self.dim)
        E = self._weight(gamma)
        z = resolvent_wrt(self.F, E, E(x), tol=tol, max_iter=max_iter)
        return E(gamma * z + self.D @ x)

    def residual(self, c, v):
        """Membership residual of ``v`` in the image at ``c``: ``v in F(c - D v)``."""
        c = as_vector(c, self.dim)
        v = as_vector(v, self.dim)
        return member_residual(self.F, c - self.D @ v, v)

    def graph_gap(self, c, v):
        """Continuous certificate for ``v in F(c - D v)`` (graph distance in F)."""
        c = as_vector(c, self.dim)
        v = as_vector(v, self.dim)
        return self.F.graph_residual(c - self.D @ v, v)

    def evaluate(self, c, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, init=None):
        """Some certified element of the image at ``c``.

        The image may be empty when ``c`` misses the range of ``F**-1 + D``;
        that surfaces as :class:`ConvergenceError` from the inner iteration.
        When the image is a continuum, the returned element depends on
        ``init``; downstream users must only rely on quantities that are
        constant across the image.
        """
        c = as_vector(c, self.dim)
        F = self.F
        if self.norm_D == 0.0:
            v = F.minimal_element(c)
            return v
        if isinstance(F, IdentityOperator):
            return np.linalg.solve(np.eye(self.dim) + self.D, c)
        if isinstance(F, MonotoneLinear):
            M = F.matrix
            try:
                return np.linalg.solve(np.eye(self.dim) + M @ self.D, M @ c)
            except np.linalg.LinAlgError:
                raise ConvergenceError("loop evaluation failed: image is possibly empty")
        if self._diag is not None and F.componentwise():
            return F.scalar_feedthrough_solve(self._diag, c)

        # Tseng iteration on 0 in F**-1(v) + (D v - c): handles merely
        # monotone forward terms without cocoercivity.
        sigma = 0.9 / self.norm_D
        v = np.zeros(self.dim) if init is None else as_vector(init, self.dim)
        best, best_r = v, np.inf
        guard = 1e8 * (1.0 + np.linalg.norm(c))
        for _ in range(int(max_iter)):
            y = F.inverse_resolvent(sigma, v - sigma * (self.D @ v - c))
            v = y - sigma * (self.D @ (y - v))
            try:
                r = self.residual(c, y)
            except DomainViolation as err:
                r = err.distance
            if r < best_r:
                best, best_r = y, r
            if r <= tol:
                return y
            if np.linalg.norm(v) > guard:
                break
        raise ConvergenceError(
            f"loop evaluation stalled at residual {best_r:.3e} (image possibly empty)",
            best=best, residual=best_r,
        )


class CompositeOperator:
    """Pullback ``C^T o loop o C`` of a feedthrough loop through an output matrix."""

    def __init__(self, loop, C):
        self.loop = loop
        self.C = as_matrix(C)
        if self.C.shape[0] != loop.dim:
            raise DimensionError("output matrix row count must match the loop dimension")
        self.dim = self.C.shape[1]
        self._is_identity = self.C.shape[0] == self.C.shape[1] and np.array_equal(self.C, np.eye(self.dim))
        self._is_zero = not self.C.any()
        self.norm_CCT = float(np.linalg.norm(self.C @ self.C.T, 2))

    def resolvent(self, gamma, w, tol=1e-8, max_iter=DEFAULT_MAX_ITER,
                  inner_tol=DEFAULT_TOL, init=None):
        """y solving ``0 in y - w + gamma C^T loop(C y)``, with certificate.

        For identity C this is the plain loop resolvent. Otherwise the dual
        variable ``v`` is driven by a forward-backward fixed point: the
        forward map ``gamma C C^T`` is cocoercive and the backward resolvent
        of ``loop**-1`` comes from the loop resolvent by the Moreau identity.
        """
        gamma = float(gamma)
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        w = as_vector(w, self.dim)

        if self._is_zero:
            z = np.zeros(self.loop.dim)
            return ResolventCertificate(point=w.copy(), dual=z, argument=z,
                                        residual=0.0, iterations=0)
        if self._is_identity:
            y = self.loop.resolvent(gamma, w, tol=inner_tol, max_iter=max_iter)
            v = (w - y) / gamma
            return ResolventCertificate(point=y, dual=v, argument=y.copy(),
                                        residual=0.0, iterations=1)

        sigma = 1.0 / (gamma * self.norm_CCT)
        v = np.zeros(self.loop.dim) if init is None else as_vector(init, self.loop.dim)
        Cw = self.C @ w
        CCT = self.C @ self.C.T
        best = None
        best_r = np.inf
        for k in range(1, int(max_iter) + 1):
            u = v - sigma * (gamma * (CCT @ v) - Cw)
            b = self.loop.resolvent(1.0 / sigma, u / sigma, tol=inner_tol, max_iter=max_iter)
            v = u - sigma * b
            y = w - gamma * (self.C.T @ v)
            r = float(np.linalg.norm(self.C @ y - b))
            if r < best_r:
                best = ResolventCertificate(point=y, dual=v.copy(), argument=b,
                                            residual=r, iterations=k)
                best_r = r
            if r <= tol:
                return best
        best.converged = False
        raise ConvergenceError(
            f"composite resolvent stalled at residual {best_r:.3e}",
            best=best, residual=best_r,
        )


class EquilibriumOperator:
    """Weighted system operator ``P f + P B (F**-1 + D)**-1 C``.

    Its zeros are exactly the system equilibria (P is invertible). The
    operator splits into the maximal monotone pullback part handled by
    :class:`CompositeOperator` plus a single-valued Lipschitz remainder
    ``P f + (P B - C^T) loop(C .)``, which vanishes down to ``P f`` whenever
    ``P B = C^T``.
    """

    def __init__(self, f, B, C, D, F, P=None,
                 inner_tol=DEFAULT_TOL, inner_max_iter=DEFAULT_MAX_ITER):
        self.f = f
        self.B = as_matrix(B)
        self.C = as_matrix(C, (F.dim, self.B.shape[0]))
        if self.B.shape[1] != F.dim:
            raise DimensionError("input matrix column count must match the loop dimension")
        self.dim = self.B.shape[0]
        self.P = np.eye(self.dim) if P is None else as_matrix(P, (self.dim, self.dim))
        self.loop = FeedthroughOperator(F, D)
        self.composite = CompositeOperator(self.loop, self.C)
        self.gap_matrix = self.P @ self.B - self.C.T
        self.gap_norm = float(np.linalg.norm(self.gap_matrix, 2)) if self.gap_matrix.size else 0.0
        self.inner_tol = inner_tol
        self.inner_max_iter = inner_max_iter

    def lipschitz_part(self, x, tol=None):
        """Single-valued part ``P f(x) + (P B - C^T) loop(C x)``.

        Well defined no matter which loop element the evaluation returns:
        the ``(P B - C^T)``-image of the loop at a point is a singleton.
        """
        x = as_vector(x, self.dim)
        base = self.P @ self.f(x)
        if self.gap_norm <= 1e-14:
            return base
        v = self.loop.evaluate(self.C @ x, tol=tol or self.inner_tol,
                               max_iter=self.inner_max_iter)
        return base + self.gap_matrix @ v

    def lipschitz_part_constant(self):
        """Lipschitz bound ``|P| L_f + |C| |P B - C^T| / c`` of the single-valued part."""
        norm_P = float(np.linalg.norm(self.P, 2))
        base = norm_P * self.f.lipschitz
        if self.gap_norm <= 1e-14:
            return base
        c = semicoercivity(self.loop.D).constant
        if not np.isfinite(c):
            raise ValueError(
                "feedthrough with vanishing symmetric part requires P B = C^T")
        if c <= 0:
            raise ValueError("semi-coercivity constant must be positive")
        return base + float(np.linalg.norm(self.C, 2)) * self.gap_norm / c

    def resolvent(self, gamma, x, tol=DEFAULT_TOL, max_iter=10_000):
        """y with ``0 in y - x + gamma (P f + P B loop C)(y)``.

        Banach iteration on ``y -> J_{gamma G}(x - gamma * lipschitz_part(y))``
        with contraction factor ``gamma * L``; rejected unless that factor is
        below one.
        """
        gamma = float(gamma)
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        L = self.lipschitz_part_constant()
        if gamma * L >= 1.0:
            raise ValueError(f"gamma * L = {gamma * L:.3f} >= 1: resolvent iteration is not contractive")
        x = as_vector(x, self.dim)
        y = x.copy()
        for _ in range(int(max_iter)):
            cert = self.composite.resolvent(
                gamma, x - gamma * self.lipschitz_part(y),
                tol=max(tol * 0.1, 1e-14), inner_tol=self.inner_tol,
                max_iter=self.inner_max_iter)
            gap = float(np.linalg.norm(cert.point - y))
            y = cert.point
            if gap <= tol:
                return y
        raise ConvergenceError("weighted resolvent fixed point did not converge",
                               best=y, residual=gap)
