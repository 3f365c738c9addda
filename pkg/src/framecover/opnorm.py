"""Induced operator norms between the supported spaces.

Exact branches cover the classical cases (euclidean-to-euclidean via SVD,
ell_1 domains via columns, sup-norm codomains via rows, small sup-norm
domains via sign enumeration, and diagonal operators on a fixed space).
Everything else falls back to a deterministic multistart ascent whose
result is a certified *lower* bound only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .rng import stream
from .spaces import (
    INF,
    SpaceSpec,
    Vector,
    dual_space,
    format_spec,
    norms_batch,
    vector_norm,
)

_ZERO_TOL = 1e-300
_MULTISTART_SEED = 0x66726163  # fixed; starts depend only on the space shapes


@dataclass(frozen=True)
class Operator:
    """Matrix acting from domain to codomain; shape (cod.dim, dom.dim)."""

    matrix: np.ndarray
    domain: SpaceSpec
    codomain: SpaceSpec

    def __post_init__(self):
        arr = np.asarray(self.matrix, dtype=float)
        if arr.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {arr.shape} does not match "
                f"({self.codomain.dim}, {self.domain.dim})"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "matrix", arr)

    def apply(self, coords) -> np.ndarray:
        return self.matrix @ np.asarray(coords, dtype=float)


def compose(a: Operator, b: Operator) -> Operator:
    """a after b."""
    if a.domain != b.codomain:
        raise ValueError("composition spaces do not match")
    return Operator(a.matrix @ b.matrix, b.domain, a.codomain)


def transpose_dual(op: Operator) -> Operator:
    """The adjoint acting between the dual spaces."""
    return Operator(op.matrix.T, dual_space(op.codomain), dual_space(op.domain))


def identity(s: SpaceSpec) -> Operator:
    return Operator(np.eye(s.dim), s, s)


@dataclass(frozen=True)
class NormEstimate:
    lower: float
    witness: Vector
    upper: float | None
    method: str
    restarts: int
    certified: bool


@dataclass(frozen=True)
class OpNormOptions:
    restarts: int = 32
    tol: float = 1e-8
    max_iter: int = 500


@dataclass(frozen=True)
class TailModel:
    """Coordinate truncation P_k on the domain; an opt-in surrogate for the
    compact-quotient seminorm, which is identically zero at finite dimension."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("cutoff must be nonnegative")

    def projection(self, dim: int) -> np.ndarray:
        if self.k > dim:
            raise ValueError(f"cutoff {self.k} exceeds dimension {dim}")
        return np.diag((np.arange(dim) < self.k).astype(float))


# --- norming maps ----------------------------------------------------------


def norming_functional(s: SpaceSpec, y: np.ndarray) -> np.ndarray:
    """Coordinates of f with ||f||_{s*} <= 1 and <f, y> = ||y||_s (0 at y=0)."""
    y = np.asarray(y, dtype=float)
    if s.kind == "wlp":
        w = np.asarray(s.weights)
        return w * _plain_norming(s.p, w * y)
    if s.kind == "sum":
        out = np.zeros(s.dim)
        at = 0
        ts = []
        for b in s.blocks:
            ts.append(vector_norm(b, y[at : at + b.dim]))
            at += b.dim
        gs = _plain_norming(s.p, np.asarray(ts))
        at = 0
        for g, b in zip(gs, s.blocks):
            if g != 0.0:
                out[at : at + b.dim] = g * norming_functional(b, y[at : at + b.dim])
            at += b.dim
        return out
    return _plain_norming(s.p, y)


def _plain_norming(p: float, y: np.ndarray) -> np.ndarray:
    a = np.abs(y)
    m = a.max() if a.size else 0.0
    if m <= _ZERO_TOL:
        return np.zeros_like(y)
    if p == 1:
        return np.sign(y)
    if p == INF:
        f = np.zeros_like(y)
        i = int(np.argmax(a))
        f[i] = math.copysign(1.0, y[i])
        return f
    scaled = a / m
    powers = scaled ** (p - 1.0)
    denom = np.power((scaled**p).sum(), (p - 1.0) / p)
    return np.sign(y) * powers / denom


def norming_vector(s: SpaceSpec, f: np.ndarray) -> np.ndarray:
    """Unit vector x of s with f(x) = dual norm of f (reflexivity)."""
    return norming_functional(dual_space(s), f)


# --- exact branches --------------------------------------------------------


def euclidean_scaling(s: SpaceSpec) -> np.ndarray | None:
    """Diagonal d with ||x||_s = ||d*x||_2, when the space is an inner-product
    space in disguise; None otherwise."""
    if s.kind == "lp":
        return np.ones(s.dim) if s.p == 2 else None
    if s.kind == "wlp":
        return np.asarray(s.weights) if s.p == 2 else None
    if s.p != 2:
        return None
    parts = [euclidean_scaling(b) for b in s.blocks]
    if any(p is None for p in parts):
        return None
    return np.concatenate(parts)


def _finish(op: Operator, witness: np.ndarray, formula: float, method: str,
            restarts: int = 0) -> NormEstimate:
    wnorm = vector_norm(op.domain, witness)
    if wnorm > 0:
        witness = witness / wnorm
    lower = vector_norm(op.codomain, op.matrix @ witness)
    return NormEstimate(
        lower=lower,
        witness=Vector(witness, op.domain),
        upper=max(formula, lower),
        method=method,
        restarts=restarts,
        certified=True,
    )


def _sign_matrix(dim: int, offset: int, count: int) -> np.ndarray:
    idx = np.arange(offset, offset + count, dtype=np.uint64)
    bits = (idx[:, None] >> np.arange(dim, dtype=np.uint64)) & 1
    return bits.astype(float) * 2.0 - 1.0


def op_norm(op: Operator, opts: OpNormOptions | None = None) -> NormEstimate:
    """Estimate the induced norm; certified=True means lower == the norm."""
    opts = opts or OpNormOptions()
    A, dom, cod = op.matrix, op.domain, op.codomain

    if not np.any(A):
        e0 = np.zeros(dom.dim)
        e0[0] = 1.0
        return _finish(op, e0, 0.0, "zero")

    if dom == cod and not np.any(A - np.diag(np.diag(A))):
        d = np.diag(A)
        j = int(np.argmax(np.abs(d)))
        ej = np.zeros(dom.dim)
        ej[j] = 1.0
        return _finish(op, ej, float(np.abs(d[j])), "diagonal")

    d_dom, d_cod = euclidean_scaling(dom), euclidean_scaling(cod)
    if d_dom is not None and d_cod is not None:
        B = (d_cod[:, None] * A) / d_dom[None, :]
        _, svals, vt = np.linalg.svd(B)
        witness = vt[0] / d_dom
        return _finish(op, witness, float(svals[0]), "svd")

    if dom.kind in ("lp", "wlp") and dom.p == 1:
        w = np.asarray(dom.weights) if dom.kind == "wlp" else np.ones(dom.dim)
        colnorms = norms_batch(cod, A.T) / w
        j = int(np.argmax(colnorms))
        ej = np.zeros(dom.dim)
        ej[j] = 1.0 / w[j]
        return _finish(op, ej, float(colnorms[j]), "columns")

    if cod.kind in ("lp", "wlp") and cod.p == INF:
        w = np.asarray(cod.weights) if cod.kind == "wlp" else np.ones(cod.dim)
        rownorms = w * norms_batch(dual_space(dom), A)
        i = int(np.argmax(rownorms))
        witness = norming_vector(dom, A[i])
        return _finish(op, witness, float(rownorms[i]), "rows")

    if dom.kind in ("lp", "wlp") and dom.p == INF and dom.dim <= 20:
        w = np.asarray(dom.weights) if dom.kind == "wlp" else np.ones(dom.dim)
        best, best_s = -1.0, None
        total = 1 << (dom.dim - 1)  # antipodal halves agree
        chunk = 1 << 16
        for off in range(0, total, chunk):
            S = _sign_matrix(dom.dim, off, min(chunk, total - off))
            X = S / w[None, :]
            vals = norms_batch(cod, X @ A.T)
            i = int(np.argmax(vals))
            if vals[i] > best:
                best, best_s = float(vals[i]), X[i]
        return _finish(op, best_s, best, "signs")

    lower, witness = multistart_lower(op, opts)
    return NormEstimate(
        lower=lower,
        witness=Vector(witness, dom),
        upper=None,
        method="multistart",
        restarts=opts.restarts,
        certified=False,
    )


# --- multistart ascent -----------------------------------------------------


def multistart_lower(op: Operator, opts: OpNormOptions | None = None
                     ) -> tuple[float, np.ndarray]:
    """Dual-norming ascent from seeded starts; deterministic, ties go to the
    lowest start index.  Returns (value, unit witness)."""
    opts = opts or OpNormOptions()
    A, dom, cod = op.matrix, op.domain, op.codomain
    dual_dom = dual_space(dom)
    gen = stream(_MULTISTART_SEED, "opnorm", format_spec(dom), format_spec(cod))
    starts = gen.normal(size=(opts.restarts, dom.dim))

    best_val, best_x = -1.0, None
    for r in range(opts.restarts):
        x = starts[r]
        nx = vector_norm(dom, x)
        if nx <= _ZERO_TOL:
            continue
        x = x / nx
        val = vector_norm(cod, A @ x)
        for _ in range(opts.max_iter):
            y = A @ x
            u = norming_functional(cod, y)
            z = A.T @ u
            x_new = norming_functional(dual_dom, z)
            if vector_norm(dom, x_new) <= _ZERO_TOL:
                break
            x_new = x_new / vector_norm(dom, x_new)
            val_new = vector_norm(cod, A @ x_new)
            if val_new <= val + opts.tol * max(1.0, val):
                if val_new > val:
                    x, val = x_new, val_new
                break
            x, val = x_new, val_new
        if val > best_val:
            best_val, best_x = val, x
    if best_x is None:  # all starts degenerate; fall back to a basis direction
        best_x = np.zeros(dom.dim)
        best_x[0] = 1.0
        best_x /= vector_norm(dom, best_x)
        best_val = vector_norm(cod, A @ best_x)
    return best_val, best_x


# --- independent small-dimension oracle ------------------------------------


_DEFAULT_DENSITY = {1: 1, 2: 4096, 3: 192, 4: 64}


def _angles_to_dirs(dim: int, grids: list[np.ndarray]) -> np.ndarray:
    if dim == 2:
        (t,) = grids
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if dim == 3:
        t, f = np.meshgrid(*grids, indexing="ij")
        t, f = t.ravel(), f.ravel()
        return np.stack([np.sin(f) * np.cos(t), np.sin(f) * np.sin(t), np.cos(f)], axis=1)
    a, b, c = np.meshgrid(*grids, indexing="ij")
    a, b, c = a.ravel(), b.ravel(), c.ravel()
    return np.stack(
        [
            np.cos(a),
            np.sin(a) * np.cos(b),
            np.sin(a) * np.sin(b) * np.cos(c),
            np.sin(a) * np.sin(b) * np.sin(c),
        ],
        axis=1,
    )


def _angles_to_one(dim: int, ang: np.ndarray) -> np.ndarray:
    return _angles_to_dirs(dim, [np.atleast_1d(a) for a in ang])[0]


def op_norm_oracle(op: Operator, grid_density: int | None = None) -> float:
    """Dense angular grid plus simplex polish; domain dimension <= 4 only.

    Deliberately shares no code path with op_norm's ascent so the two can
    check each other.
    """
    dom, cod, A = op.domain, op.codomain, op.matrix
    if dom.dim > 4:
        raise ValueError("oracle supports domain dimension <= 4")
    if dom.dim == 1:
        return vector_norm(cod, A[:, 0]) / vector_norm(dom, np.ones(1))

    density = grid_density or _DEFAULT_DENSITY[dom.dim]
    if dom.dim == 2:
        grids = [np.linspace(0.0, math.pi, density, endpoint=False)]
    elif dom.dim == 3:
        grids = [
            np.linspace(0.0, 2 * math.pi, 2 * density, endpoint=False),
            np.linspace(0.0, math.pi, density),
        ]
    else:
        grids = [
            np.linspace(0.0, math.pi, density),
            np.linspace(0.0, math.pi, density),
            np.linspace(0.0, 2 * math.pi, 2 * density, endpoint=False),
        ]

    dirs = _angles_to_dirs(dom.dim, grids)
    ratios = norms_batch(cod, dirs @ A.T) / norms_batch(dom, dirs)
    order = np.argsort(ratios)[::-1]

    def neg_ratio(ang):
        x = _angles_to_one(dom.dim, ang)
        return -vector_norm(cod, A @ x) / vector_norm(dom, x)

    n_angles = dom.dim - 1
    flat = np.meshgrid(*grids, indexing="ij")
    flat = [g.ravel() for g in flat] if dom.dim > 2 else [grids[0]]
    best = float(ratios[order[0]])
    for idx in order[:6]:
        ang0 = np.array([g[idx] for g in flat][:n_angles])
        res = scipy.optimize.minimize(
            neg_ratio,
            ang0,
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-13, "maxiter": 4000},
        )
        best = max(best, float(-res.fun))
    return best


# --- renormed operator norm ------------------------------------------------


def alpha_norm(op: Operator, alpha: float, tail: TailModel | None = None) -> float:
    """alpha*||A|| + (1-alpha)*q(A), with q the compact-quotient part.

    At finite dimension the quotient seminorm is identically zero, so q = 0
    unless a TailModel supplies the surrogate q(A) = ||A o (id - P_k)||.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0, 1]")
    plain = op_norm(op).lower
    if tail is None:
        return alpha * plain
    if tail.k > op.domain.dim:
        raise ValueError("tail cutoff exceeds domain dimension")
    mask = np.ones(op.domain.dim)
    mask[: tail.k] = 0.0
    tail_part = op_norm(Operator(op.matrix * mask[None, :], op.domain, op.codomain)).lower
    return alpha * plain + (1.0 - alpha) * tail_part
