"""Block-unconditional Schauder frames by dilating approximating sequences.

Each difference block A_n is expanded into M_n repetitions of a normalized
basis of its range paired with rescaled coordinate functionals, so that the
k-th block of the frame sums exactly to A_k while every partial sum and
every block sign combination stays uniformly bounded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .approx import ApproximatingSequence, SignSupResult, sign_sup, signed_prefix_sup
from .opnorm import Operator, OpNormOptions, op_norm
from .spaces import SpaceSpec, Vector, dual_space, format_spec, norms_batch, parse_spec, vector_norm

PAIR_NORM_TOL = 1e-12
BLOCK_SUM_TOL = 1e-12
RANK_TOL = 1e-10


@dataclass(frozen=True)
class SchauderFrame:
    """Ordered pairs (x_i, f_i) with unit x_i, ||f_i|| <= 1, and a block
    partition given by boundaries 0 = N_1 < N_2 < ... < N_{K+1} = len."""

    space: SpaceSpec
    vectors: np.ndarray      # (len, dim)
    functionals: np.ndarray  # (len, dim), coordinates of dual vectors
    boundaries: tuple[int, ...]

    def __post_init__(self):
        xs = np.asarray(self.vectors, dtype=float)
        fs = np.asarray(self.functionals, dtype=float)
        if xs.ndim != 2 or xs.shape != fs.shape or xs.shape[1] != self.space.dim:
            raise ValueError("vector/functional arrays must share shape (len, dim)")
        n = xs.shape[0]
        b = tuple(int(x) for x in self.boundaries)
        if len(b) < 2 or b[0] != 0 or b[-1] != n or any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError("boundaries must strictly increase from 0 to len")
        xnorms = norms_batch(self.space, xs)
        if np.abs(xnorms - 1.0).max() > PAIR_NORM_TOL:
            raise ValueError("frame vectors must have unit norm")
        fnorms = norms_batch(dual_space(self.space), fs)
        if fnorms.max() > 1.0 + PAIR_NORM_TOL:
            raise ValueError("frame functionals must lie in the dual unit ball")
        for arr in (xs, fs):
            arr.flags.writeable = False
        object.__setattr__(self, "vectors", xs)
        object.__setattr__(self, "functionals", fs)
        object.__setattr__(self, "boundaries", b)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def block_count(self) -> int:
        return len(self.boundaries) - 1

    def pairs(self) -> list[tuple[Vector, Vector]]:
        dual = dual_space(self.space)
        return [
            (Vector(x, self.space), Vector(f, dual))
            for x, f in zip(self.vectors, self.functionals)
        ]

    def block_slice(self, k: int) -> slice:
        return slice(self.boundaries[k], self.boundaries[k + 1])

    def block_sums(self) -> list[np.ndarray]:
        """Matrix of sum_{i in block k} f_i (x) x_i for each k."""
        out = []
        for k in range(self.block_count):
            sl = self.block_slice(k)
            out.append(np.einsum("id,ie->de", self.vectors[sl], self.functionals[sl]))
        return out

    def prefix_matrices(self) -> np.ndarray:
        """All partial sums sum_{i<=m} x_i f_i^T, m = 1..len; shape (len, d, d)."""
        outers = np.einsum("id,ie->ide", self.vectors, self.functionals)
        return np.cumsum(outers, axis=0)


@dataclass(frozen=True)
class DilationPlan:
    eps: float
    sign_sup_value: float
    lam: float
    clipped: bool                     # lambda was floored at 1
    dims: tuple[int, ...]             # d_n per retained block
    basis_constants: tuple[float, ...]
    repetitions: tuple[int, ...]      # M_n
    source_blocks: tuple[int, ...]    # indices n of the sequence actually dilated
    bumped: tuple[bool, ...]          # M_n raised beyond the two formulas

    def __post_init__(self):
        for d, c, m in zip(self.dims, self.basis_constants, self.repetitions):
            if m < 2 * self.lam + self.eps - 1e-9:
                raise ValueError("repetition count violates M >= 2*lam + eps")
            if c / m > self.eps / (4 * self.lam + 2 * self.eps) + 1e-12:
                raise ValueError("repetition count violates C/M <= eps/(4lam+2eps)")


def _range_basis(a: np.ndarray) -> np.ndarray:
    """Well-conditioned (euclidean-orthonormal) basis of range(a), columns."""
    q, r, _ = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    scale = diag[0] if diag.size and diag[0] > 0 else 0.0
    rank = int(np.sum(diag > RANK_TOL * max(scale, 1.0)))
    return q[:, :rank]


def _basis_constant(s: SpaceSpec, Z: np.ndarray) -> float:
    """Basis constant of the columns of Z inside their span, in the norm of s.

    Dense directional search plus simplex polish for up to three columns,
    Auerbach-style bound d beyond that.
    """
    d = Z.shape[1]
    if d == 1:
        return 1.0
    if d > 3:
        return float(d)
    grids = 4096 if d == 2 else 64
    if d == 2:
        t = np.linspace(0.0, 2 * math.pi, grids, endpoint=False)
        coeff = np.stack([np.cos(t), np.sin(t)], axis=1)
    else:
        t = np.linspace(0.0, 2 * math.pi, 2 * grids, endpoint=False)
        f = np.linspace(0.0, math.pi, grids)
        tt, ff = np.meshgrid(t, f, indexing="ij")
        tt, ff = tt.ravel(), ff.ravel()
        coeff = np.stack(
            [np.sin(ff) * np.cos(tt), np.sin(ff) * np.sin(tt), np.cos(ff)], axis=1
        )
    denom = norms_batch(s, coeff @ Z.T)
    best = 1.0
    for j in range(1, d):
        num = norms_batch(s, coeff[:, :j] @ Z[:, :j].T)
        ratio = num / denom
        i = int(np.argmax(ratio))
        best = max(best, float(ratio[i]))

        def neg(c, j=j):
            dn = vector_norm(s, Z @ c)
            if dn <= 1e-300:
                return 0.0
            return -vector_norm(s, Z[:, :j] @ c[:j]) / dn

        res = scipy.optimize.minimize(
            neg, coeff[i], method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000},
        )
        best = max(best, float(-res.fun))
    return best


def dilate_to_frame(
    seq: ApproximatingSequence,
    eps: float,
    mode: str = "exhaustive",
    budget: int = 4096,
    opts: OpNormOptions | None = None,
) -> tuple[SchauderFrame, DilationPlan]:
    """Dilate the difference blocks of seq into a block-unconditional frame.

    Repetition counts come from M_n = ceil(max(2*lam + eps,
    C_n (4*lam + 2*eps)/eps)) with lam the measured sign supremum minus
    eps/2, floored at 1; M_n is bumped further only if the functional
    normalization ||f_i|| <= 1 requires it (recorded per block).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    s = seq.space
    ss = sign_sup(seq, mode, budget, opts=opts)
    lam = ss.value - eps / 2.0
    clipped = lam < 1.0
    lam = max(lam, 1.0)

    xs_rows, fs_rows = [], []
    boundaries = [0]
    dims, consts, reps, kept, bumped = [], [], [], [], []
    for n, A in enumerate(seq.differences()):
        Z = _range_basis(A)
        d = Z.shape[1]
        if d == 0:
            continue  # zero difference contributes no block
        # normalize columns in the space norm
        Z = Z / norms_batch(s, Z.T)[None, :]
        W = Z @ np.linalg.inv(Z.T @ Z)  # biorthogonal: W^T Z = I
        C = _basis_constant(s, Z)
        M = math.ceil(max(2 * lam + eps, C * (4 * lam + 2 * eps) / eps) - 1e-12)
        raw_f = A.T @ W  # column j holds coordinates of z_j^* o A
        f_norms = norms_batch(dual_space(s), raw_f.T)
        bump = False
        needed = math.ceil(f_norms.max() - 1e-12)
        if needed > M:
            M, bump = needed, True  # keeps ||f_i|| <= 1 for skewed ranges
        for _ in range(M):
            for j in range(d):
                xs_rows.append(Z[:, j])
                fs_rows.append(raw_f[:, j] / M)
        boundaries.append(boundaries[-1] + M * d)
        dims.append(d)
        consts.append(C)
        reps.append(M)
        kept.append(n)
        bumped.append(bump)

    if not kept:
        raise ValueError("sequence has no nonzero difference blocks")
    frame = SchauderFrame(s, np.array(xs_rows), np.array(fs_rows), tuple(boundaries))
    plan = DilationPlan(
        eps=eps,
        sign_sup_value=ss.value,
        lam=lam,
        clipped=clipped,
        dims=tuple(dims),
        basis_constants=tuple(consts),
        repetitions=tuple(reps),
        source_blocks=tuple(kept),
        bumped=tuple(bumped),
    )
    # block-exactness: block k of the frame must reproduce A_k
    diffs = seq.differences()
    scale = max(1.0, max(np.abs(d).max() for d in diffs))
    sums = frame.block_sums()
    for k, n in enumerate(kept):
        if np.abs(sums[k] - diffs[n]).max() > 1e-10 * scale:
            raise AssertionError(f"block {k} fails to reproduce difference {n}")
    return frame, plan


def reconstruct(fr: SchauderFrame, x) -> tuple[Vector, float]:
    """(sum_i f_i(x) x_i, max over prefixes m of ||sum_{i<=m} f_i(x) x_i||)."""
    coords = x.coords if isinstance(x, Vector) else np.asarray(x, dtype=float)
    coeff = fr.functionals @ coords
    partial = np.cumsum(coeff[:, None] * fr.vectors, axis=0)
    prefix_norms = norms_batch(fr.space, partial)
    return Vector(partial[-1], fr.space), float(prefix_norms.max())


def frame_bound(fr: SchauderFrame, opts: OpNormOptions | None = None) -> float:
    """max over m of ||sum_{i<=m} f_i (x) x_i|| (identity-approximation bound)."""
    prefixes = fr.prefix_matrices()
    return max(
        op_norm(Operator(m, fr.space, fr.space), opts).lower for m in prefixes
    )


def block_unconditional_bound(
    fr: SchauderFrame,
    mode: str = "exhaustive",
    budget: int = 4096,
    opts: OpNormOptions | None = None,
) -> SignSupResult:
    """Sign supremum of the frame's block sums over block prefixes."""
    if mode == "exhaustive" and fr.block_count > 20:
        mode = "randomized"
    return signed_prefix_sup(fr.block_sums(), fr.space, fr.space, mode, budget, opts=opts)


def frame_to_json(fr: SchauderFrame) -> str:
    payload = {
        "pairs": [
            {"x": [float(v) for v in x], "f": [float(v) for v in f]}
            for x, f in zip(fr.vectors, fr.functionals)
        ],
        "blocks": list(fr.boundaries),
        "space": format_spec(fr.space),
    }
    return json.dumps(payload, indent=2)


def frame_from_json(text: str) -> SchauderFrame:
    payload = json.loads(text)
    space = parse_spec(payload["space"])
    xs = np.array([p["x"] for p in payload["pairs"]], dtype=float)
    fs = np.array([p["f"] for p in payload["pairs"]], dtype=float)
    return SchauderFrame(space, xs, fs, tuple(payload["blocks"]))
