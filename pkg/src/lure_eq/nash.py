"""Nash quasi-equilibrium games assembled into monotone inclusions.

Two game templates are supported. In a linear-cost game each player minimizes
``<g_i(x_others), x_i>`` over a strategy set that the other players shift:
``K_i - c_i g_i(x_others)``. In a prox-cost game each player minimizes a cost
that is linear in the own strategy plus a convex nonsmooth term evaluated at a
shifted argument. Both stationarity systems stack into the moving-set
inclusion ``0 in f(x) + F(x + D f(x))`` handled by the QVI machinery.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .lure import LureSystem, equilibrium
from .operators import (
    AffineMap,
    BlockDiagonal,
    BoxNormalCone,
    DimensionError,
    LipschitzMap,
    as_vector,
    graph_residual,
)
from .qvi import QviProblem, solve_qvi
from .solvers import SolverConfig

__all__ = ["LinearGamePlayer", "ProxGamePlayer", "LinearCostGame", "ProxCostGame",
           "assemble_linear_game", "assemble_prox_game", "certify_equilibrium",
           "solve_game", "PlayerCertificate"]

_SAMPLE_SEED = 20240602


@dataclass
class LinearGamePlayer:
    """One player of a linear-cost game.

    ``cost_gradient`` maps the full strategy profile to this player's cost
    coefficient vector; it must not depend on the player's own block (affine
    maps are checked for that, callables are trusted). ``strategy_set`` is a
    box or ball normal-cone operator, shifted by ``shift`` times the
    coefficient vector.
    """

    dim: int
    cost_gradient: LipschitzMap
    strategy_set: object
    shift: float = 0.0


@dataclass
class ProxGamePlayer:
    """One player of a prox-cost game: linear own-strategy cost plus a
    convex nonsmooth term (weighted absolute value or box indicator) at an
    argument shifted by ``coupling`` times the cost coefficient."""

    dim: int
    cost_gradient: LipschitzMap
    nonsmooth: object
    coupling: float = 0.0


class _GameBase:
    def __init__(self, players):
        self.players = list(players)
        if not self.players:
            raise ValueError("a game needs at least one player")
        self.dims = [p.dim for p in self.players]
        self.total_dim = int(sum(self.dims))
        self.offsets = np.cumsum([0] + self.dims)
        for p in self.players:
            if p.cost_gradient.dim_in != self.total_dim:
                raise DimensionError("cost gradients must take the full strategy profile")
            if p.cost_gradient.dim_out != p.dim:
                raise DimensionError("cost gradient output must match the player dimension")

    def block(self, x, i):
        x = as_vector(x, self.total_dim)
        return x[self.offsets[i]:self.offsets[i + 1]]

    def stacked_map(self):
        """The profile map ``x -> (g_1(x), ..., g_m(x))`` with exact constants
        when every player is affine."""
        players = self.players
        if all(isinstance(p.cost_gradient, AffineMap) for p in players):
            A = np.vstack([p.cost_gradient.A for p in players])
            b = np.concatenate([p.cost_gradient.b for p in players])
            for i, p in enumerate(players):
                own = p.cost_gradient.A[:, self.offsets[i]:self.offsets[i + 1]]
                if own.size and np.abs(own).max() > 1e-12:
                    raise ValueError(f"player {i} cost gradient depends on the own strategy block")
            return AffineMap(A, b)
        lip = float(np.sqrt(sum(p.cost_gradient.lipschitz ** 2 for p in players)))
        maps = [p.cost_gradient for p in players]

        def fn(x):
            return np.concatenate([g(x) for g in maps])

        return LipschitzMap(fn, self.total_dim, lipschitz=lip)

    def _warn_if_not_monotone(self, f):
        rng = np.random.default_rng(_SAMPLE_SEED)
        for _ in range(40):
            x = rng.uniform(-3.0, 3.0, self.total_dim)
            y = rng.uniform(-3.0, 3.0, self.total_dim)
            d = x - y
            if (f(x) - f(y)) @ d < -1e-9 * max(1.0, d @ d):
                warnings.warn("stacked game map failed a sampled monotonicity check; "
                              "the splitting solvers may not converge", RuntimeWarning,
                              stacklevel=3)
                return

    def shift_matrix(self):
        blocks = [self._shift_of(p) * np.eye(p.dim) for p in self.players]
        out = np.zeros((self.total_dim, self.total_dim))
        for i, blk in enumerate(blocks):
            sl = slice(self.offsets[i], self.offsets[i + 1])
            out[sl, sl] = blk
        return out


class LinearCostGame(_GameBase):
    def __init__(self, players):
        super().__init__(players)
        for i, p in enumerate(self.players):
            if p.shift < 0:
                raise ValueError(f"player {i} has a negative set shift")
            if p.strategy_set.dim != p.dim:
                raise DimensionError(f"player {i} strategy set dimension mismatch")

    @staticmethod
    def _shift_of(p):
        return p.shift


class ProxCostGame(_GameBase):
    def __init__(self, players):
        super().__init__(players)
        for i, p in enumerate(self.players):
            if p.coupling < 0:
                raise ValueError(f"player {i} has a negative coupling")
            if p.nonsmooth.dim != p.dim:
                raise DimensionError(f"player {i} nonsmooth term dimension mismatch")

    @staticmethod
    def _shift_of(p):
        return p.coupling


def _product_set(blocks):
    """Merge per-player constraint cones, keeping a plain box when possible."""
    if all(isinstance(b, BoxNormalCone) for b in blocks):
        return BoxNormalCone(np.concatenate([b.lo for b in blocks]),
                             np.concatenate([b.hi for b in blocks]))
    if len(blocks) == 1:
        return blocks[0]
    return BlockDiagonal(blocks)


def assemble_linear_game(game):
    """Stack a linear-cost game into a moving-set QVI."""
    f = game.stacked_map()
    game._warn_if_not_monotone(f)
    omega = _product_set([p.strategy_set for p in game.players])
    return QviProblem(f=f, D=game.shift_matrix(), omega=omega)


def assemble_prox_game(game):
    """Stack a prox-cost game into a Lur'e system with identity maps."""
    f = game.stacked_map()
    game._warn_if_not_monotone(f)
    F = _product_set([p.nonsmooth for p in game.players])
    n = game.total_dim
    return LureSystem(f=f, B=np.eye(n), C=np.eye(n), D=game.shift_matrix(),
                      F=F, P=np.eye(n))


def solve_game(game, cfg=None, x0=None):
    """Solve either game template through its assembled inclusion."""
    cfg = cfg or SolverConfig()
    if isinstance(game, LinearCostGame):
        return solve_qvi(assemble_linear_game(game), cfg, x0=x0)
    if isinstance(game, ProxCostGame):
        return equilibrium(assemble_prox_game(game), cfg, x0=x0)
    raise TypeError("unknown game type")


@dataclass
class PlayerCertificate:
    player: int
    ok: bool
    residual: float


def certify_equilibrium(game, x, tol=1e-8):
    """Player-by-player stationarity check at a candidate profile.

    For each player the own-cost coefficient ``g`` must satisfy
    ``-g in T(x_i + shift * g)`` where ``T`` is the player's normal cone or
    subdifferential. The residual is the graph distance, so candidates that
    sit on a switching surface up to solver accuracy certify cleanly.
    """
    x = as_vector(x, game.total_dim)
    out = []
    for i, p in enumerate(game.players):
        g = p.cost_gradient(x)
        shift = game._shift_of(p)
        cone = p.strategy_set if isinstance(game, LinearCostGame) else p.nonsmooth
        arg = game.block(x, i) + shift * g
        r = graph_residual(cone, arg, -g)
        out.append(PlayerCertificate(player=i, ok=r <= tol, residual=r))
    return out
