"""Ball-intersection feasibility in a finite-dimensional ambient space.

An instance asks whether the subspace spanned by X_basis meets every ball
B(y + x_i, ||y - x_i|| + eps).  Feasibility is a convex program in the
basis coefficients: g(c) = max_i (||Bc - (y+x_i)|| - r_i) <= 0.  Hilbert
ambient norms use exact cyclic projections; everything else runs projected
subgradient descent.  Infeasibility is certified, not just reported: g is
Lipschitz in the coefficients and every feasible point lies in an explicit
box, so a fine grid minimum minus the Lipschitz slack lower-bounds g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .opnorm import Operator, norming_functional, op_norm
from .spaces import SpaceSpec, Vector, norms_batch, vector_norm

SPAN_TOL = 1e-10
OFF_SPAN_TOL = 1e-9
PROJECTION_TOL = 1e-10


@dataclass(frozen=True)
class BipInstance:
    Z: SpaceSpec
    X_basis: tuple[Vector, ...]
    y: Vector
    points: tuple[Vector, ...]
    eps: float

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not self.X_basis:
            raise ValueError("subspace basis is empty")
        for v in (*self.X_basis, self.y, *self.points):
            if v.space != self.Z:
                raise ValueError("all vectors must live in Z")
        B = self.basis_matrix()
        sv = np.linalg.svd(B, compute_uv=False)
        if sv[-1] <= 1e-12 * max(sv[0], 1.0):
            raise ValueError("subspace basis is numerically dependent")
        # residual of least-squares projection onto the span (euclidean;
        # equivalent to any norm at finite dimension for a yes/no gate)
        proj = B @ np.linalg.lstsq(B, self.y.coords, rcond=None)[0]
        if np.linalg.norm(self.y.coords - proj) <= OFF_SPAN_TOL:
            raise ValueError("y lies inside the subspace")
        for x in self.points:
            px = B @ np.linalg.lstsq(B, x.coords, rcond=None)[0]
            if np.linalg.norm(x.coords - px) > SPAN_TOL:
                raise ValueError("a test point leaves the subspace")

    def basis_matrix(self) -> np.ndarray:
        return np.stack([v.coords for v in self.X_basis], axis=1)


def three_point_instance(Z: SpaceSpec, X_basis: tuple[Vector, ...], y: Vector,
                         x: Vector, eps: float) -> BipInstance:
    """The three-ball specialization: test points x, -x, 0."""
    zero = Vector(np.zeros(Z.dim), Z)
    return BipInstance(Z, tuple(X_basis), y, (x, Vector(-x.coords, Z), zero), eps)


@dataclass(frozen=True)
class BipResult:
    feasible: bool
    witness: Vector | None
    value: float                  # g at the witness / best point found
    violation: float | None       # certified lower bound on g when infeasible
    slacks: tuple[float, ...]     # r_i - ||w - (y+x_i)|| at the final point
    method: str
    iters: int


def _euclid_lower(s: SpaceSpec) -> float:
    """gamma with ||v||_s >= gamma * ||v||_2 for all v."""
    if s.kind in ("lp", "wlp"):
        if s.p <= 2.0:
            base = 1.0
        elif math.isinf(s.p):
            base = s.dim ** -0.5
        else:
            base = s.dim ** (1.0 / s.p - 0.5)
        return base if s.kind == "lp" else base * min(s.weights)
    inner = min(_euclid_lower(b) for b in s.blocks)
    if s.p <= 2.0:
        outer = 1.0
    elif math.isinf(s.p):
        outer = len(s.blocks) ** -0.5
    else:
        outer = len(s.blocks) ** (1.0 / s.p - 0.5)
    return inner * outer


def _hilbert_weights(s: SpaceSpec) -> np.ndarray | None:
    """Diagonal weights when the norm is a weighted euclidean one."""
    if s.kind == "lp" and s.p == 2.0:
        return np.ones(s.dim)
    if s.kind == "wlp" and s.p == 2.0:
        return np.asarray(s.weights, dtype=float)
    if s.kind == "sum" and s.p == 2.0:
        parts = [_hilbert_weights(b) for b in s.blocks]
        if any(p is None for p in parts):
            return None
        return np.concatenate(parts)
    return None


def _grid_certificate(
    g, k: int, box: float, lipschitz: float, tol: float, rounds: int = 8
) -> tuple[float, np.ndarray, float]:
    """(certified lower bound over the box, grid argmin, grid min)."""
    per_axis = max(3, int(math.ceil(40 ** (1.0 / k) * 4 / k)))
    per_axis = min(per_axis, 81 if k == 1 else (41 if k == 2 else 11))
    center = np.zeros(k)
    half = box
    lb, best_c, best_v = -np.inf, center, np.inf
    for _ in range(rounds):
        axes = [np.linspace(c - half, c + half, per_axis) for c in center]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
        vals = np.array([g(c) for c in mesh])
        j = int(np.argmin(vals))
        h = 2.0 * half / (per_axis - 1)
        slack = lipschitz * h * math.sqrt(k) / 2.0
        lb = float(vals[j] - slack)
        best_c, best_v = mesh[j], float(vals[j])
        if lb > tol or best_v <= tol:
            break
        # convexity: the minimizer over the box lies within one cell of the
        # grid argmin, so shrink around it
        center, half = best_c, h
    return lb, best_c, best_v


def bip_feasible(
    inst: BipInstance,
    tol: float = 1e-8,
    diagnostic_offset: float | None = None,
    max_iter: int = 2000,
) -> BipResult:
    """Decide whether span(X_basis) meets every ball B(y+x_i, ||y-x_i||+eps).

    diagnostic_offset replaces eps in the radii (it may be negative); the
    shrunk-radius diagnostic of the u-ideal test uses -0.5.
    """
    offset = inst.eps if diagnostic_offset is None else diagnostic_offset
    B = inst.basis_matrix()
    k = B.shape[1]
    zs = np.stack([inst.y.coords + x.coords for x in inst.points])
    radii = norms_batch(inst.Z, np.stack([inst.y.coords - x.coords
                                          for x in inst.points])) + offset

    def g_and_slacks(c: np.ndarray) -> tuple[float, np.ndarray]:
        d = norms_batch(inst.Z, (B @ c)[None, :] - zs)
        return float((d - radii).max()), radii - d

    def g(c: np.ndarray) -> float:
        return g_and_slacks(c)[0]

    def result(c, feasible, violation, method, iters):
        val, slacks = g_and_slacks(c)
        witness = Vector(B @ c, inst.Z) if feasible else None
        return BipResult(feasible, witness, val, violation,
                         tuple(float(s) for s in slacks), method, iters)

    c = np.zeros(k)
    if g(c) <= tol:
        return result(c, True, None, "origin", 0)

    w = _hilbert_weights(inst.Z)
    iters = 0
    if w is not None:
        # exact cyclic projections in the (weighted) inner product
        WB = w[:, None] * B
        gram = WB.T @ WB
        v = B @ c
        method = "cyclic-projections"
        for sweep in range(max_iter):
            iters = sweep + 1
            for i in range(len(zs)):
                diff = v - zs[i]
                dist = math.sqrt(float(np.sum((w * diff) ** 2)))
                if dist > radii[i] and radii[i] >= 0:
                    v = zs[i] + diff * (radii[i] / dist)
            c = np.linalg.solve(gram, WB.T @ (w * v))
            v = B @ c
            if g(c) <= tol:
                return result(c, True, None, method, iters)
    else:
        # projected subgradient on the coefficients
        method = "subgradient"
        step0 = float(vector_norm(inst.Z, inst.y.coords) + abs(radii).max() + 1.0)
        best_c, best_v = c.copy(), g(c)
        for t in range(max_iter):
            iters = t + 1
            d = norms_batch(inst.Z, (B @ c)[None, :] - zs)
            i = int(np.argmax(d - radii))
            u = norming_functional(inst.Z, B @ c - zs[i])
            sub = B.T @ u
            n = np.linalg.norm(sub)
            if n <= 1e-14:
                break
            c = c - step0 / math.sqrt(t + 1.0) * sub / n
            v = g(c)
            if v < best_v:
                best_c, best_v = c.copy(), v
            if best_v <= tol:
                return result(best_c, True, None, method, iters)
        c = best_c

    # no witness found: certify.  Any feasible point satisfies
    # ||Bc||_Z <= ||y+x_0||_Z + r_0, and ||Bc||_Z >= gamma*smin*||c||_2.
    gamma = _euclid_lower(inst.Z)
    smin = float(np.linalg.svd(B, compute_uv=False)[-1])
    reach = float(min(norms_batch(inst.Z, zs) + np.maximum(radii, 0.0)))
    box = reach / (gamma * smin) + 1.0
    col_norms = norms_batch(inst.Z, B.T)
    lipschitz = float(math.sqrt(k) * col_norms.max())
    lb, grid_c, grid_v = _grid_certificate(g, k, box, lipschitz, tol)
    if grid_v <= tol:
        return result(grid_c, True, None, "certificate-grid", iters)
    if lb > tol:
        return result(c, False, lb, "certificate-grid", iters)
    raise RuntimeError(
        f"feasibility undecided: grid minimum {grid_v:.6g} vs certified "
        f"lower bound {lb:.6g} straddles tol={tol:.6g}"
    )


def dual_reflection_defect(P: Operator, opts=None) -> float:
    """||id - 2P|| for a projection P; equals 1 exactly when the reflection
    through ran(P) along ker(P) is an isometry."""
    if P.domain != P.codomain:
        raise ValueError("projection must act on a single space")
    m = P.matrix
    if np.abs(m @ m - m).max() > PROJECTION_TOL:
        raise ValueError("not a projection: ||P^2 - P|| exceeds 1e-10")
    refl = np.eye(P.domain.dim) - 2.0 * m
    return op_norm(Operator(refl, P.domain, P.codomain), opts).lower
