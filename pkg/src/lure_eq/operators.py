"""Catalog of maximal monotone operators with exact resolvents and residuals.

Every operator in the catalog exposes three oracles: a closed-form resolvent
``(I + gamma*F)**-1``, an exact distance from a vector to the image set
``F(x)`` (membership residual), and a minimal-norm selection. The catalog is
closed: only kinds with exact formulas are admitted, so every certification
performed downstream is exact up to rounding.
"""

import numpy as np

__all__ = [
    "DimensionError",
    "DomainViolation",
    "ConvergenceError",
    "MonotoneOperator",
    "SignOperator",
    "L1Subdifferential",
    "BoxNormalCone",
    "NonnegativeOrthantCone",
    "BallNormalCone",
    "ZeroOperator",
    "IdentityOperator",
    "MonotoneLinear",
    "BlockDiagonal",
    "PositiveDefiniteMap",
    "LipschitzMap",
    "AffineMap",
    "resolvent",
    "inverse_resolvent",
    "resolvent_wrt",
    "member_residual",
    "graph_residual",
    "as_vector",
    "as_matrix",
]

# Bounds/boundary classification tolerance: points within this distance of a
# constraint set are treated as boundary points, so that resolvent outputs
# computed in floating point certify cleanly.
DOMAIN_SLACK = 1e-9


class DimensionError(ValueError):
    """Operands with incompatible dimensions."""


class DomainViolation(Exception):
    """A point lies outside the domain of a set-valued operator.

    Carries ``distance``, the Euclidean distance from the point to the domain.
    """

    def __init__(self, distance, message=None):
        self.distance = float(distance)
        super().__init__(message or f"point outside operator domain (distance {distance:.3e})")


class ConvergenceError(RuntimeError):
    """An inner iteration exhausted its budget.

    Carries the best iterate found and its residual so callers can degrade
    gracefully instead of losing the work.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


def as_vector(x, dim=None):
    """Coerce to a finite 1-D float array, checking ``dim`` if given."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise DimensionError(f"expected dimension {dim}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_matrix(M, shape=None):
    """Coerce to a finite 2-D float array, checking ``shape`` if given."""
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {A.shape}")
    if shape is not None and A.shape != shape:
        raise DimensionError(f"expected shape {shape}, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _interval_distance(v, lo, hi):
    """Componentwise distance from v to the box [lo, hi]."""
    return np.maximum(lo - v, 0.0) + np.maximum(v - hi, 0.0)


class MonotoneOperator:
    """Base class for the catalog of maximal monotone operators."""

    def __init__(self, dim):
        if dim <= 0:
            raise DimensionError("operator dimension must be positive")
        self.dim = int(dim)

    # -- oracles ---------------------------------------------------------

    def resolvent(self, gamma, x):
        """y = (I + gamma*F)**-1 (x), single-valued and nonexpansive."""
        raise NotImplementedError

    def residual(self, x, v):
        """Distance from ``v`` to the set ``F(x)``; 0 iff ``v in F(x)``.

        Raises :class:`DomainViolation` when ``x`` is farther than the
        boundary slack from the domain of ``F``.
        """
        raise NotImplementedError

    def graph_residual(self, x, v):
        """Distance from the pair ``(x, v)`` to the graph of ``F``.

        Unlike :meth:`residual` this is continuous in ``x``, which makes it
        the right certificate for inclusions evaluated at points that are
        themselves only known up to solver tolerance.
        """
        raise NotImplementedError

    def minimal_element(self, x):
        """The minimal-norm element of ``F(x)`` (single-valued selection)."""
        raise NotImplementedError

    def domain_distance(self, x):
        """Distance from ``x`` to the domain of ``F`` (0 for full domain)."""
        return 0.0

    # -- derived oracles -------------------------------------------------

    def inverse_resolvent(self, gamma, x):
        """y = (I + gamma*F**-1)**-1 (x), via x = J_{gF}(x) + g*J_{F/g}(x/g)."""
        gamma = float(gamma)
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        x = as_vector(x, self.dim)
        return x - gamma * self.resolvent(1.0 / gamma, x / gamma)

    def componentwise(self):
        """Whether the operator factors over coordinates (scalar solves apply)."""
        return False

    def scalar_weighted_resolvent(self, e, w):
        """Componentwise solve of ``e*z + F(z) in w`` for diagonal weights e > 0."""
        raise NotImplementedError

    def scalar_feedthrough_solve(self, d, c):
        """Componentwise solve of ``v in F(c - d*v)`` for diagonal gains d >= 0."""
        raise NotImplementedError

    def _check_dim(self, x):
        return as_vector(x, self.dim)


class L1Subdifferential(MonotoneOperator):
    """Subdifferential of the weighted l1 norm: componentwise ``w*Sign``."""

    def __init__(self, dim, weight=1.0):
        super().__init__(dim)
        w = np.broadcast_to(np.asarray(weight, dtype=float), (self.dim,)).copy()
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("l1 weights must be positive and finite")
        self.weight = w

    def resolvent(self, gamma, x):
        # soft threshold at gamma*w
        x = self._check_dim(x)
        t = float(gamma) * self.weight
        return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)

    def residual(self, x, v):
        x = self._check_dim(x)
        v = as_vector(v, self.dim)
        w = self.weight
        pos = x > DOMAIN_SLACK
        neg = x < -DOMAIN_SLACK
        r = np.where(pos, np.abs(v - w), np.where(neg, np.abs(v + w), _interval_distance(v, -w, w)))
        return float(np.linalg.norm(r))

    def graph_residual(self, x, v):
        x = self._check_dim(x)
        v = as_vector(v, self.dim)
        w = self.weight
        # pieces: value +w over x >= 0, value -w over x <= 0, segment [-w, w] at x = 0
        d_pos = np.hypot(np.minimum(x, 0.0), v - w)
        d_neg = np.hypot(np.maximum(x, 0.0), v + w)
        d_seg = np.hypot(x, np.maximum(np.abs(v) - w, 0.0))
        return float(np.linalg.norm(np.minimum(np.minimum(d_pos, d_neg), d_seg)))

    def minimal_element(self, x):
        x = self._check_dim(x)
        return self.weight * np.sign(x)

    def inverse_resolvent(self, gamma, x):
        # inverse is the normal cone to [-w, w]; its resolvent is the projection
        x = self._check_dim(x)
        return np.clip(x, -self.weight, self.weight)

    def componentwise(self):
        return True

    def scalar_weighted_resolvent(self, e, w):
        t = self.weight
        return np.where(w > t, (w - t) / e, np.where(w < -t, (w + t) / e, 0.0))

    def scalar_feedthrough_solve(self, d, c):
        w = self.weight
        interior = np.divide(c, d, out=np.zeros_like(c), where=d > 0)
        v = np.where(c > d * w, w, np.where(c < -d * w, -w, interior))
        return np.where(d > 0, v, w * np.sign(c))


class SignOperator(L1Subdifferential):
    """Componentwise relay: ``Sign(x) = {1}, [-1, 1], {-1}`` for x >, =, < 0."""

    def __init__(self, dim):
        super().__init__(dim, weight=1.0)


class BoxNormalCone(MonotoneOperator):
    """Normal cone to the box ``[lo, hi]`` (entries may be infinite)."""

    def __init__(self, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionError("box bounds must be vectors of equal length")
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi")
        super().__init__(lo.size)
        self.lo = lo
        self.hi = hi

    def project(self, x):
        return np.clip(self._check_dim(x), self.lo, self.hi)

    def contains(self, x, tol=DOMAIN_SLACK):
        return self.domain_distance(x) <= tol

    def domain_distance(self, x):
        x = self._check_dim(x)
        return float(np.linalg.norm(x - self.project(x)))

    def resolvent(self, gamma, x):
        # projection, independent of gamma
        return self.project(x)

    def residual(self, x, v):
        x = self._check_dim(x)
        v = as_vector(v, self.dim)
        d = self.domain_distance(x)
        if d > DOMAIN_SLACK:
            raise DomainViolation(d)
        x = self.project(x)
        at_lo = x <= self.lo + DOMAIN_SLACK
        at_hi = x >= self.hi - DOMAIN_SLACK
        lo_cone = np.where(at_lo, -np.inf, 0.0)
        hi_cone = np.where(at_hi, np.inf, 0.0)
        r = _interval_distance(v, lo_cone, hi_cone)
        return float(np.hypot(np.linalg.norm(r), d))

    def graph_residual(self, x, v):
        x = self._check_dim(x)
        v = as_vector(v, self.dim)
        # pieces per coordinate: flat {0} inside, downward ray at lo, upward ray at hi
        d_flat = np.hypot(x - np.clip(x, self.lo, self.hi), v)
        with np.errstate(invalid="ignore"):
            d_lo = np.where(np.isfinite(self.lo),
                            np.hypot(x - np.where(np.isfinite(self.lo), self.lo, 0.0), np.maximum(v, 0.0)),
                            np.inf)
            d_hi = np.where(np.isfinite(self.hi),
                            np.hypot(x - np.where(np.isfinite(self.hi), self.hi, 0.0), np.maximum(-v, 0.0)),
                            np.inf)
        return float(np.linalg.norm(np.minimum(d_flat, np.minimum(d_lo, d_hi))))

    def minimal_element(self, x):
        d = self.domain_distance(x)
        if d > DOMAIN_SLACK:
            raise DomainViolation(d)
        return np.zeros(self.dim)

    def componentwise(self):
        return True

    def scalar_weighted_resolvent(self, e, w):
        return np.clip(w / e, self.lo, self.hi)

    def scalar_feedthrough_solve(self, d, c):
        with np.errstate(invalid="ignore"):
            above = np.maximum(c - self.hi, 0.0)
            below = np.minimum(c - self.lo, 0.0)
        above = np.where(np.isfinite(self.hi), above, 0.0)
        below = np.where(np.isfinite(self.lo), below, 0.0)
        v = np.divide(above + below, d, out=np.zeros_like(c), where=d > 0)
        free = d <= 0
        if np.any(free):
            dist = _interval_distance(c[free], self.lo[free], self.hi[free])
            if np.any(dist > DOMAIN_SLACK):
                raise DomainViolation(float(np.linalg.norm(dist)),
                                      "loop image is empty: zero feedthrough and point outside the box")
        return v

    def shifted(self, s):
        """The box translated by ``-s`` (bounds ``lo - s, hi - s``)."""
        s = as_vector(s, self.dim)
        return BoxNormalCone(self.lo - s, self.hi - s)


class NonnegativeOrthantCone(BoxNormalCone):
    """Normal cone to the nonnegative orthant."""

    def __init__(self, dim):
        BoxNormalCone.__init__(self, np.zeros(dim), np.full(dim, np.inf))


class BallNormalCone(MonotoneOperator):
    """Normal cone to the Euclidean ball ``{x : |x - center| <= radius}``."""

    def __init__(self, center, radius):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        super().__init__(center.size)
        if not radius > 0:
            raise ValueError("ball radius must be positive")
        self.center = center
        self.radius = float(radius)

    def project(self, x):
        x = self._check_dim(x)
        d = x - self.center
        n = np.linalg.norm(d)
        if n <= self.radius:
            return x.copy()
        return self.center + (self.radius / n) * d

    def contains(self, x, tol=DOMAIN_SLACK):
        return self.domain_distance(x) <= tol

    def domain_distance(self, x):
        x = self._check_dim(x)
        return max(0.0, float(np.linalg.norm(x - self.center)) - self.radius)

    def resolvent(self, gamma, x):
        return self.project(x)

    def residual(self, x, v):
        x = self._check_dim(x)
        v = as_vector(v, self.dim)
        d = x - self.center
        n = float(np.linalg.norm(d))
        slack = DOMAIN_SLACK * max(1.0, self.radius)
        if n > self.radius + slack:
            raise DomainViolation(n - self.radius)
        if n < self.radius - slack:
            return float(np.linalg.norm(v))
        # boundary: cone is the outward ray through d
        t = max(0.0, float(v @ d) / (n * n))
        return float(np.linalg.norm(v - t * d))

    def graph_residual(self, x, v):
        # upper bound over three candidate graph points (exact when v = 0)
        x = self._check_dim(x)
        v = as_vector(v, self.dim)
        d = x - self.center
        n = float(np.linalg.norm(d))
        cands = [float(np.hypot(np.linalg.norm(x - self.project(x)), np.linalg.norm(v)))]
        if n > 0:
            u = d / n
            t = max(0.0, float(v @ u))
            cands.append(float(np.hypot(np.linalg.norm(x - (self.center + self.radius * u)),
                                        np.linalg.norm(v - t * u))))
        nv = float(np.linalg.norm(v))
        if nv > 0:
            cands.append(float(np.linalg.norm(x - (self.center + self.radius * v / nv))))
        return min(cands)

    def minimal_element(self, x):
        d = self.domain_distance(x)
        if d > DOMAIN_SLACK * max(1.0, self.radius):
            raise DomainViolation(d)
        return np.zeros(self.dim)


class ZeroOperator(MonotoneOperator):
    """The constant map ``F(x) = {0}``."""

    def __init__(self, dim):
        super().__init__(dim)

    def resolvent(self, gamma, x):
        return self._check_dim(x).copy()

    def residual(self, x, v):
        self._check_dim(x)
        return float(np.linalg.norm(as_vector(v, self.dim)))

    def graph_residual(self, x, v):
        return self.residual(x, v)

    def minimal_element(self, x):
        self._check_dim(x)
        return np.zeros(self.dim)

    def inverse_resolvent(self, gamma, x):
        # inverse has domain {0}; the resolvent collapses everything to 0
        self._check_dim(x)
        return np.zeros(self.dim)

    def componentwise(self):
        return True

    def scalar_weighted_resolvent(self, e, w):
        return w / e

    def scalar_feedthrough_solve(self, d, c):
        return np.zeros(self.dim)


class MonotoneLinear(MonotoneOperator):
    """Single-valued linear map ``x -> M x`` with ``M + M^T`` positive semidefinite."""

    def __init__(self, M, psd_tol=1e-12):
        M = as_matrix(M)
        if M.shape[0] != M.shape[1]:
            raise DimensionError("linear operator matrix must be square")
        lam = np.linalg.eigvalsh(0.5 * (M + M.T))
        if lam.min() < -psd_tol:
            raise ValueError(f"matrix is not monotone (min symmetric eigenvalue {lam.min():.3e})")
        super().__init__(M.shape[0])
        self.matrix = M

    def resolvent(self, gamma, x):
        x = self._check_dim(x)
        return np.linalg.solve(np.eye(self.dim) + float(gamma) * self.matrix, x)

    def residual(self, x, v):
        x = self._check_dim(x)
        v = as_vector(v, self.dim)
        return float(np.linalg.norm(v - self.matrix @ x))

    def graph_residual(self, x, v):
        # exact projection onto the subspace {(t, M t)}
        x = self._check_dim(x)
        v = as_vector(v, self.dim)
        M = self.matrix
        t = np.linalg.solve(np.eye(self.dim) + M.T @ M, x + M.T @ v)
        return float(np.hypot(np.linalg.norm(x - t), np.linalg.norm(v - M @ t)))

    def minimal_element(self, x):
        return self.matrix @ self._check_dim(x)


class IdentityOperator(MonotoneLinear):
    """The identity map ``F(x) = {x}``."""

    def __init__(self, dim):
        MonotoneLinear.__init__(self, np.eye(dim))

    def resolvent(self, gamma, x):
        return self._check_dim(x) / (1.0 + float(gamma))

    def inverse_resolvent(self, gamma, x):
        return self._check_dim(x) / (1.0 + float(gamma))

    def componentwise(self):
        return True

    def scalar_weighted_resolvent(self, e, w):
        return w / (e + 1.0)

    def scalar_feedthrough_solve(self, d, c):
        return c / (1.0 + d)


class BlockDiagonal(MonotoneOperator):
    """Cartesian product of catalog operators acting on stacked coordinates."""

    def __init__(self, blocks):
        blocks = list(blocks)
        if not blocks:
            raise ValueError("product operator needs at least one block")
        for b in blocks:
            if not isinstance(b, MonotoneOperator):
                raise TypeError("blocks must be catalog operators")
        super().__init__(sum(b.dim for b in blocks))
        self.blocks = blocks
        self._offsets = np.cumsum([0] + [b.dim for b in blocks])

    def _split(self, x):
        x = self._check_dim(x)
        return [x[self._offsets[i]:self._offsets[i + 1]] for i in range(len(self.blocks))]

    def resolvent(self, gamma, x):
        return np.concatenate([b.resolvent(gamma, xi) for b, xi in zip(self.blocks, self._split(x))])

    def residual(self, x, v):
        parts = [b.residual(xi, vi) for b, xi, vi in zip(self.blocks, self._split(x), self._split(v))]
        return float(np.linalg.norm(parts))

    def graph_residual(self, x, v):
        parts = [b.graph_residual(xi, vi) for b, xi, vi in zip(self.blocks, self._split(x), self._split(v))]
        return float(np.linalg.norm(parts))

    def minimal_element(self, x):
        return np.concatenate([b.minimal_element(xi) for b, xi in zip(self.blocks, self._split(x))])

    def domain_distance(self, x):
        return float(np.linalg.norm([b.domain_distance(xi) for b, xi in zip(self.blocks, self._split(x))]))

    def project(self, x):
        """Blockwise projection; available when every block is a normal cone."""
        return np.concatenate([b.project(xi) for b, xi in zip(self.blocks, self._split(x))])

    def inverse_resolvent(self, gamma, x):
        return np.concatenate([b.inverse_resolvent(gamma, xi) for b, xi in zip(self.blocks, self._split(x))])

    def componentwise(self):
        return all(b.componentwise() for b in self.blocks)

    def scalar_weighted_resolvent(self, e, w):
        e_parts = [e[self._offsets[i]:self._offsets[i + 1]] for i in range(len(self.blocks))]
        w_parts = [w[self._offsets[i]:self._offsets[i + 1]] for i in range(len(self.blocks))]
        return np.concatenate([b.scalar_weighted_resolvent(ei, wi)
                               for b, ei, wi in zip(self.blocks, e_parts, w_parts)])

    def scalar_feedthrough_solve(self, d, c):
        d_parts = [d[self._offsets[i]:self._offsets[i + 1]] for i in range(len(self.blocks))]
        c_parts = [c[self._offsets[i]:self._offsets[i + 1]] for i in range(len(self.blocks))]
        return np.concatenate([b.scalar_feedthrough_solve(di, ci)
                               for b, di, ci in zip(self.blocks, d_parts, c_parts)])


class PositiveDefiniteMap:
    """Square matrix with a certified coercivity constant ``<Ex, x> >= c|x|^2``."""

    def __init__(self, matrix, min_coercivity=0.0):
        E = as_matrix(matrix)
        if E.shape[0] != E.shape[1]:
            raise DimensionError("positive definite map must be square")
        self.matrix = E
        self.dim = E.shape[0]
        self.coercivity = float(np.linalg.eigvalsh(0.5 * (E + E.T)).min())
        if self.coercivity <= min_coercivity:
            raise ValueError(f"map is not positive definite (coercivity {self.coercivity:.3e})")
        self.norm = float(np.linalg.norm(E, 2))
        d = np.diagonal(E)
        self.diagonal = d if np.allclose(E, np.diag(d), atol=0.0) else None

    def __call__(self, x):
        return self.matrix @ as_vector(x, self.dim)


class LipschitzMap:
    """Single-valued map with declared Lipschitz bound and strong-monotonicity modulus."""

    def __init__(self, fn, dim_in, dim_out=None, lipschitz=None, strong_modulus=0.0):
        self.fn = fn
        self.dim_in = int(dim_in)
        self.dim_out = int(dim_out) if dim_out is not None else self.dim_in
        if lipschitz is None or lipschitz < 0:
            raise ValueError("a nonnegative Lipschitz bound is required")
        self.lipschitz = float(lipschitz)
        self.strong_modulus = float(strong_modulus)
        if self.strong_modulus < 0:
            raise ValueError("strong-monotonicity modulus must be nonnegative")

    def __call__(self, x):
        return as_vector(self.fn(as_vector(x, self.dim_in)), self.dim_out)

    def check_sampled(self, rng, trials=50, scale=10.0, tol=1e-9):
        """Sampled verification of the declared Lipschitz/strong-monotonicity bounds."""
        for _ in range(trials):
            x = rng.uniform(-scale, scale, self.dim_in)
            y = rng.uniform(-scale, scale, self.dim_in)
            dx = np.linalg.norm(x - y)
            df = self(x) - self(y)
            if np.linalg.norm(df) > self.lipschitz * dx + tol * (1.0 + dx):
                return False
            if self.strong_modulus > 0 and self.dim_out == self.dim_in:
                if df @ (x - y) < self.strong_modulus * dx * dx - tol * (1.0 + dx * dx):
                    return False
        return True


class AffineMap(LipschitzMap):
    """Affine map ``x -> A x + b`` with exact Lipschitz and monotonicity constants."""

    def __init__(self, A, b=None):
        A = as_matrix(A)
        b = np.zeros(A.shape[0]) if b is None else as_vector(b, A.shape[0])
        lip = float(np.linalg.norm(A, 2)) if A.size else 0.0
        mu = 0.0
        if A.shape[0] == A.shape[1]:
            mu = max(0.0, float(np.linalg.eigvalsh(0.5 * (A + A.T)).min()))
        super().__init__(None, A.shape[1], A.shape[0], lipschitz=lip, strong_modulus=mu)
        self.A = A
        self.b = b

    def __call__(self, x):
        return self.A @ as_vector(x, self.dim_in) + self.b


# -- module-level oracle functions ----------------------------------------


def resolvent(F, gamma, x):
    """y = (I + gamma*F)**-1 (x) for a catalog operator ``F``."""
    gamma = float(gamma)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return F.resolvent(gamma, as_vector(x, F.dim))


def inverse_resolvent(F, gamma, x):
    """y = (I + gamma*F**-1)**-1 (x) for a catalog operator ``F``."""
    gamma = float(gamma)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return F.inverse_resolvent(gamma, as_vector(x, F.dim))


def member_residual(F, x, v):
    """Distance from ``v`` to ``F(x)``; raises :class:`DomainViolation` off-domain."""
    return F.residual(x, v)


def graph_residual(F, x, v):
    """Distance from the pair ``(x, v)`` to the graph of ``F`` (continuous in x)."""
    return F.graph_residual(x, v)


def resolvent_wrt(F, E, w, tol=1e-10, max_iter=100_000):
    """Solve ``w - E z in F(z)`` for a positive definite linear ``E``.

    Uses a closed-form componentwise solve when ``E`` is diagonal and ``F``
    factors over coordinates, a direct linear solve for linear ``F``, and a
    forward-backward iteration with step ``c/|E|^2`` otherwise.
    """
    if not isinstance(E, PositiveDefiniteMap):
        E = PositiveDefiniteMap(E)
    if E.dim != F.dim:
        raise DimensionError("weight map and operator dimensions differ")
    w = as_vector(w, F.dim)

    if E.diagonal is not None and F.componentwise():
        return F.scalar_weighted_resolvent(E.diagonal, w)
    if isinstance(F, MonotoneLinear):
        return np.linalg.solve(E.matrix + F.matrix, w)
    if isinstance(F, ZeroOperator):
        return np.linalg.solve(E.matrix, w)

    sigma = E.coercivity / (E.norm ** 2)
    z = np.zeros(F.dim)
    best, best_r = z, np.inf
    for _ in range(int(max_iter)):
        z = F.resolvent(sigma, z - sigma * (E(z) - w))
        try:
            r = F.residual(z, w - E(z))
        except DomainViolation as err:
            r = err.distance
        if r < best_r:
            best, best_r = z, r
        if r <= tol:
            return z
    raise ConvergenceError(
        f"weighted resolvent did not reach tol={tol:g} in {max_iter} iterations",
        best=best, residual=best_r,
    )
