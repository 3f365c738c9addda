"""The dilation space attached to a block frame.

Elements are coefficient sequences over the frame indices; the norm is the
max of (a) the supremum over block sign patterns and block prefixes of the
signed block-sum norms and (b) the supremum over raw index prefixes of the
partial-sum norms.  The space embeds the frame's base space complementably
via T (coefficients of x) and S (summation).  The completion step of the
infinite construction is a no-op at finite length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import DilationPlan, SchauderFrame, block_unconditional_bound, frame_bound
from .rng import stream
from .spaces import Vector, norms_batch, sample_sphere, vector_norm

EXHAUSTIVE_BLOCK_LIMIT = 20
EMBED_TOL = 1e-8


def _sign_tails(n: int) -> np.ndarray:
    """All sign rows of length n with leading +1 (antipodes dropped)."""
    if n == 1:
        return np.ones((1, 1))
    idx = np.arange(1 << (n - 1), dtype=np.uint64)
    bits = (idx[:, None] >> np.arange(n - 1, dtype=np.uint64)) & 1
    return np.hstack([np.ones((len(idx), 1)), bits.astype(float) * 2.0 - 1.0])


class DilationSpace:
    """Wraps a frame; optionally carries the plan that built it, whose
    lambda + eps certifies the embedding bound."""

    def __init__(self, frame: SchauderFrame, plan: DilationPlan | None = None):
        self.frame = frame
        self.plan = plan
        self._embed_bound: float | None = None

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def block_count(self) -> int:
        return self.frame.block_count

    def embed_bound(self) -> float:
        """Certified bound for the coefficient map: lam+eps when the frame was
        dilated, otherwise the measured frame/block bounds."""
        if self._embed_bound is None:
            if self.plan is not None:
                self._embed_bound = self.plan.lam + self.plan.eps
            else:
                self._embed_bound = max(
                    frame_bound(self.frame),
                    block_unconditional_bound(self.frame).value,
                )
        return self._embed_bound

    def block_vectors(self, a: np.ndarray) -> np.ndarray:
        """v_k = sum_{i in block k} a_i x_i, shape (K, dim)."""
        fr = self.frame
        out = np.empty((fr.block_count, fr.space.dim))
        for k in range(fr.block_count):
            sl = fr.block_slice(k)
            out[k] = a[sl] @ fr.vectors[sl]
        return out


def _check_coeffs(d: DilationSpace, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (len(d),):
        raise ValueError(f"coefficient length {a.shape} does not match frame {len(d)}")
    return a


def sign_component(d: DilationSpace, a) -> float:
    """sup over block prefixes and sign patterns of ||sum theta_k v_k||."""
    a = _check_coeffs(d, a)
    V = d.block_vectors(a)
    K = len(V)
    if K > EXHAUSTIVE_BLOCK_LIMIT:
        raise ValueError(f"exhaustive sign enumeration capped at {EXHAUSTIVE_BLOCK_LIMIT} blocks")
    best = 0.0
    for n_prime in range(1, K + 1):
        rows = _sign_tails(n_prime) @ V[:n_prime]
        best = max(best, float(norms_batch(d.frame.space, rows).max()))
    return best


def prefix_component(d: DilationSpace, a) -> float:
    """sup over raw prefixes m of ||sum_{i<=m} a_i x_i||."""
    a = _check_coeffs(d, a)
    partial = np.cumsum(a[:, None] * d.frame.vectors, axis=0)
    return float(norms_batch(d.frame.space, partial).max())


def dilation_norm(d: DilationSpace, a) -> float:
    """max of the block-sign supremum and the raw prefix supremum."""
    return max(sign_component(d, a), prefix_component(d, a))


def embed_T(d: DilationSpace, x) -> np.ndarray:
    """Coefficients a_i = f_i(x); asserts the certified embedding bound."""
    coords = x.coords if isinstance(x, Vector) else np.asarray(x, dtype=float)
    if coords.shape != (d.frame.space.dim,):
        raise ValueError("vector does not live in the frame space")
    a = d.frame.functionals @ coords
    bound = d.embed_bound() * vector_norm(d.frame.space, coords) + EMBED_TOL
    got = dilation_norm(d, a)
    if got > bound:
        raise AssertionError(f"embedding norm {got:.12g} exceeds certified bound {bound:.12g}")
    return a


def recover_S(d: DilationSpace, a) -> Vector:
    """S(a) = sum a_i x_i; contractive since the full sum is the last prefix."""
    a = _check_coeffs(d, a)
    return Vector(a @ d.frame.vectors, d.frame.space)


def ufdd_constant(d: DilationSpace, samples: int, seed: int) -> float:
    """sup over sampled coefficients and all block sign flips of
    norm(theta*a)/norm(a).

    The sign component is asserted bitwise invariant under flips (flipping
    inside the enumerated patterns is a bijection); only the prefix
    component can move the ratio.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    fr = d.frame
    K = fr.block_count
    if K > EXHAUSTIVE_BLOCK_LIMIT:
        raise ValueError(f"exhaustive block flips capped at {EXHAUSTIVE_BLOCK_LIMIT} blocks")
    gen = stream(seed, "ufdd", str(len(fr)))
    flips = _sign_tails(K)  # leading block fixed +; global flips are isometric
    index_block = np.repeat(np.arange(K), np.diff(fr.boundaries))
    worst = 1.0
    for _ in range(samples):
        a = gen.normal(size=len(fr))
        base_sign = sign_component(d, a)
        base_prefix = prefix_component(d, a)
        base = max(base_sign, base_prefix)
        if base <= 1e-14:
            continue
        # prefix component of every flip at once: (F, len, dim) cumsum
        per_index = flips[:, index_block]  # (F, len)
        rows = per_index[:, :, None] * (a[:, None] * fr.vectors)[None, :, :]
        partial = np.cumsum(rows, axis=1).reshape(-1, fr.space.dim)
        pref = norms_batch(fr.space, partial).reshape(len(flips), len(fr)).max(axis=1)
        for f_idx, theta in enumerate(flips):
            flipped_sign = sign_component(d, per_index[f_idx] * a)
            if flipped_sign != base_sign:
                raise AssertionError(
                    "sign component not invariant under block flips: "
                    f"{flipped_sign!r} vs {base_sign!r}"
                )
            worst = max(worst, max(flipped_sign, float(pref[f_idx])) / base)
    return worst


@dataclass(frozen=True)
class DilationReport:
    frame_bound: float
    block_bound: float
    s_norm: float
    t_norm: float
    p_norm: float
    ufdd_constant: float


def norm_estimates(d: DilationSpace, samples: int, seed: int) -> DilationReport:
    """Lower-bound estimates of ||S||, ||T||, ||P|| over sampled directions,
    plus the frame bounds and the measured UFDD constant."""
    fr = d.frame
    gen = stream(seed, "dilation-norms", str(len(fr)))
    s_norm = 0.0
    p_norm = 0.0
    for _ in range(samples):
        a = gen.normal(size=len(fr))
        na = dilation_norm(d, a)
        if na <= 1e-14:
            continue
        x = recover_S(d, a)
        s_norm = max(s_norm, x.norm() / na)
        p_norm = max(p_norm, dilation_norm(d, fr.functionals @ x.coords) / na)
    t_norm = 0.0
    for v in sample_sphere(fr.space, samples, seed):
        t_norm = max(t_norm, dilation_norm(d, embed_T(d, v)))
    return DilationReport(
        frame_bound=frame_bound(fr),
        block_bound=block_unconditional_bound(fr).value,
        s_norm=s_norm,
        t_norm=t_norm,
        p_norm=p_norm,
        ufdd_constant=ufdd_constant(d, samples, seed),
    )
