"""JSON problem files for the command-line front-end.

A file carries one problem (``lure``, ``qvi``, ``nash_linear`` or
``nash_prox``) plus optional solver and simulation blocks. Matrices are
row-major nested arrays; dimension and shape checks mirror the library
constructors, and unknown fields are rejected so typos fail loudly.
"""

import json
import math

import numpy as np

from .lure import LureSystem
from .nash import LinearCostGame, LinearGamePlayer, ProxCostGame, ProxGamePlayer
from .operators import (
    AffineMap,
    BallNormalCone,
    BlockDiagonal,
    BoxNormalCone,
    IdentityOperator,
    L1Subdifferential,
    MonotoneLinear,
    NonnegativeOrthantCone,
    SignOperator,
    ZeroOperator,
)
from .qvi import QviProblem
from .solvers import SolverConfig

__all__ = ["ProblemFormatError", "ProblemBundle", "load_problem", "parse_problem"]

SCHEMA_VERSION = 1
KINDS = ("lure", "qvi", "nash_linear", "nash_prox")


class ProblemFormatError(ValueError):
    """The problem file is malformed (syntax, schema or shape errors)."""


class ProblemBundle:
    """Parsed problem plus its solver and simulation settings."""

    def __init__(self, kind, system=None, qvi=None, game=None,
                 solver=None, x0=None, simulate=None):
        self.kind = kind
        self.system = system
        self.qvi = qvi
        self.game = game
        self.solver = solver or SolverConfig()
        self.x0 = x0
        self.simulate = simulate


def _require(obj, key, ctx):
    if key not in obj:
        raise ProblemFormatError(f"{ctx}: missing required field '{key}'")
    return obj[key]


def _check_fields(obj, allowed, ctx):
    if not isinstance(obj, dict):
        raise ProblemFormatError(f"{ctx}: expected an object")
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ProblemFormatError(f"{ctx}: unknown field(s) {sorted(unknown)}")


def _vector(raw, dim, ctx):
    try:
        v = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise ProblemFormatError(f"{ctx}: expected a numeric array")
    if v.ndim != 1 or (dim is not None and v.size != dim):
        raise ProblemFormatError(f"{ctx}: expected a vector of length {dim}")
    return v


def _matrix(raw, shape, ctx):
    try:
        m = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise ProblemFormatError(f"{ctx}: expected a numeric matrix")
    if m.ndim != 2 or (shape is not None and m.shape != shape):
        raise ProblemFormatError(f"{ctx}: expected a {shape[0]}x{shape[1]} row-major matrix")
    return m


def _bound(raw, lo_side, dim, ctx):
    # JSON has no infinity literal: null means the bound is absent
    out = np.full(dim, -math.inf if lo_side else math.inf)
    if raw is None:
        return out
    if not isinstance(raw, list) or len(raw) != dim:
        raise ProblemFormatError(f"{ctx}: expected an array of length {dim} (null entries = unbounded)")
    for i, entry in enumerate(raw):
        if entry is not None:
            out[i] = float(entry)
    return out


def _parse_operator(spec, dim, ctx):
    _check_fields(spec, {"kind", "weight", "lo", "hi", "center", "radius", "M", "blocks", "dim"}, ctx)
    kind = _require(spec, "kind", ctx)
    if kind == "sign":
        return SignOperator(dim)
    if kind == "l1":
        return L1Subdifferential(dim, weight=spec.get("weight", 1.0))
    if kind == "box":
        lo = _bound(spec.get("lo"), True, dim, ctx)
        hi = _bound(spec.get("hi"), False, dim, ctx)
        return BoxNormalCone(lo, hi)
    if kind == "ball":
        return BallNormalCone(_vector(_require(spec, "center", ctx), dim, ctx),
                              float(_require(spec, "radius", ctx)))
    if kind == "nonneg":
        return NonnegativeOrthantCone(dim)
    if kind == "zero":
        return ZeroOperator(dim)
    if kind == "identity":
        return IdentityOperator(dim)
    if kind == "linear":
        return MonotoneLinear(_matrix(_require(spec, "M", ctx), (dim, dim), ctx))
    if kind == "stack":
        blocks_raw = _require(spec, "blocks", ctx)
        blocks = []
        for j, braw in enumerate(blocks_raw):
            bdim = braw.get("dim")
            if bdim is None:
                raise ProblemFormatError(f"{ctx}.blocks[{j}]: stacked blocks need an explicit 'dim'")
            blocks.append(_parse_operator(braw, int(bdim), f"{ctx}.blocks[{j}]"))
        op = BlockDiagonal(blocks)
        if op.dim != dim:
            raise ProblemFormatError(f"{ctx}: stacked blocks sum to dimension {op.dim}, expected {dim}")
        return op
    raise ProblemFormatError(f"{ctx}: unknown operator kind '{kind}'")


def _parse_affine(spec, dim_out, dim_in, ctx):
    _check_fields(spec, {"type", "A", "b"}, ctx)
    if spec.get("type", "affine") != "affine":
        raise ProblemFormatError(f"{ctx}: only affine maps are supported in problem files")
    A = _matrix(_require(spec, "A", ctx), (dim_out, dim_in), ctx)
    b = _vector(spec["b"], dim_out, ctx) if "b" in spec and spec["b"] is not None else None
    return AffineMap(A, b)


def _parse_solver(spec, ctx):
    if spec is None:
        return SolverConfig(), None
    _check_fields(spec, {"gamma", "tol", "max_iter", "inner_tol", "inner_max_iter", "x0"}, ctx)
    x0 = np.asarray(spec["x0"], dtype=float) if "x0" in spec else None
    kwargs = {k: spec[k] for k in ("gamma", "tol", "max_iter", "inner_tol", "inner_max_iter")
              if k in spec}
    try:
        return SolverConfig(**kwargs), x0
    except ValueError as err:
        raise ProblemFormatError(f"{ctx}: {err}")


def _parse_simulate(spec, dim, ctx):
    if spec is None:
        return None
    _check_fields(spec, {"scheme", "x0", "h", "T"}, ctx)
    return {
        "scheme": str(_require(spec, "scheme", ctx)),
        "x0": _vector(_require(spec, "x0", ctx), dim, ctx),
        "h": float(_require(spec, "h", ctx)),
        "T": float(_require(spec, "T", ctx)),
    }


def parse_problem(doc):
    """Build a :class:`ProblemBundle` from a decoded JSON document."""
    _check_fields(doc, {"schema_version", "kind", "dims", "f", "B", "C", "D", "F",
                        "P", "omega", "players", "solver", "simulate"}, "problem")
    version = _require(doc, "schema_version", "problem")
    if version != SCHEMA_VERSION:
        raise ProblemFormatError(f"unsupported schema_version {version}")
    kind = _require(doc, "kind", "problem")
    if kind not in KINDS:
        raise ProblemFormatError(f"unknown problem kind '{kind}'")

    solver, x0 = _parse_solver(doc.get("solver"), "solver")

    if kind == "lure":
        dims = _require(doc, "dims", "problem")
        _check_fields(dims, {"state", "output"}, "dims")
        n1 = int(_require(dims, "state", "dims"))
        n2 = int(_require(dims, "output", "dims"))
        f = _parse_affine(_require(doc, "f", "problem"), n1, n1, "f")
        B = _matrix(_require(doc, "B", "problem"), (n1, n2), "B")
        C = _matrix(_require(doc, "C", "problem"), (n2, n1), "C")
        D = _matrix(_require(doc, "D", "problem"), (n2, n2), "D")
        F = _parse_operator(_require(doc, "F", "problem"), n2, "F")
        P = _matrix(doc["P"], (n1, n1), "P") if doc.get("P") is not None else None
        system = LureSystem(f=f, B=B, C=C, D=D, F=F, P=P)
        sim = _parse_simulate(doc.get("simulate"), n1, "simulate")
        return ProblemBundle(kind, system=system, solver=solver, x0=x0, simulate=sim)

    if kind == "qvi":
        dims = _require(doc, "dims", "problem")
        _check_fields(dims, {"state"}, "dims")
        n = int(_require(dims, "state", "dims"))
        f = _parse_affine(_require(doc, "f", "problem"), n, n, "f")
        D = _matrix(_require(doc, "D", "problem"), (n, n), "D")
        omega = _parse_operator(_require(doc, "omega", "problem"), n, "omega")
        problem = QviProblem(f=f, D=D, omega=omega)
        return ProblemBundle(kind, qvi=problem, solver=solver, x0=x0)

    players_raw = _require(doc, "players", "problem")
    if not isinstance(players_raw, list) or not players_raw:
        raise ProblemFormatError("players: expected a non-empty array")
    dims = [int(_require(p, "dim", f"players[{i}]")) for i, p in enumerate(players_raw)]
    total = sum(dims)
    players = []
    for i, praw in enumerate(players_raw):
        ctx = f"players[{i}]"
        if kind == "nash_linear":
            _check_fields(praw, {"dim", "cost_gradient", "set", "shift"}, ctx)
            grad = _parse_affine(_require(praw, "cost_gradient", ctx), dims[i], total,
                                 f"{ctx}.cost_gradient")
            sset = _parse_operator(_require(praw, "set", ctx), dims[i], f"{ctx}.set")
            players.append(LinearGamePlayer(dim=dims[i], cost_gradient=grad,
                                            strategy_set=sset,
                                            shift=float(praw.get("shift", 0.0))))
        else:
            _check_fields(praw, {"dim", "cost_gradient", "nonsmooth", "coupling"}, ctx)
            grad = _parse_affine(_require(praw, "cost_gradient", ctx), dims[i], total,
                                 f"{ctx}.cost_gradient")
            h = _parse_operator(_require(praw, "nonsmooth", ctx), dims[i], f"{ctx}.nonsmooth")
            players.append(ProxGamePlayer(dim=dims[i], cost_gradient=grad,
                                          nonsmooth=h,
                                          coupling=float(praw.get("coupling", 0.0))))
    game = LinearCostGame(players) if kind == "nash_linear" else ProxCostGame(players)
    return ProblemBundle(kind, game=game, solver=solver, x0=x0)


def load_problem(path):
    """Parse a problem file; all format errors surface as :class:`ProblemFormatError`."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as err:
        raise ProblemFormatError(f"cannot read {path}: {err}")
    except json.JSONDecodeError as err:
        raise ProblemFormatError(f"{path} is not valid JSON: {err}")
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem file must contain a JSON object")
    return parse_problem(doc)
