"""Finite-dimensional normed sequence spaces and their duals.

Supported spaces: plain ell_p, weighted ell_p (weights multiply coordinates
before the p-sum, so the weighted space is a diagonal isometry away from the
plain one), and finite ell_p-sums of such spaces.  p = inf is a first-class
value, never a large float stand-in.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import stream

INF = math.inf

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SpaceSpec:
    """Description of a space: kind is one of "lp", "wlp", "sum".

    For "wlp" the weights are strictly positive and len(weights) == dim.
    For "sum" the blocks concatenate to the full coordinate range and p is
    the outer exponent.
    """

    kind: str
    p: float
    dim: int
    weights: tuple[float, ...] = ()
    blocks: tuple["SpaceSpec", ...] = ()

    def __post_init__(self):
        if self.kind not in ("lp", "wlp", "sum"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if not (self.p >= 1):
            raise ValueError(f"exponent must satisfy p >= 1, got {self.p}")
        if self.dim <= 0:
            raise ValueError("dimension must be positive")
        if self.kind == "wlp":
            if len(self.weights) != self.dim:
                raise ValueError("weight count must equal dimension")
            if any(w <= 0 for w in self.weights):
                raise ValueError("weights must be strictly positive")
        if self.kind == "sum":
            if not self.blocks:
                raise ValueError("sum space needs at least one block")
            if sum(b.dim for b in self.blocks) != self.dim:
                raise ValueError("block dimensions must sum to dim")


def lp(p: float, n: int) -> SpaceSpec:
    return SpaceSpec("lp", float(p), int(n))


def wlp(p: float, weights) -> SpaceSpec:
    w = tuple(float(x) for x in weights)
    return SpaceSpec("wlp", float(p), len(w), weights=w)


def lp_sum(p: float, blocks) -> SpaceSpec:
    bl = tuple(blocks)
    return SpaceSpec("sum", float(p), sum(b.dim for b in bl), blocks=bl)


@dataclass(frozen=True)
class Vector:
    """Coordinates tagged with the space they are measured in.

    A functional is the same structure tagged with the *dual* spec; the
    pairing is the plain dot product of coordinates.
    """

    coords: np.ndarray
    space: SpaceSpec

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=float)
        if arr.shape != (self.space.dim,):
            raise ValueError(
                f"coordinate shape {arr.shape} does not match dim {self.space.dim}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    def norm(self) -> float:
        return vector_norm(self.space, self.coords)


Functional = Vector


def pairing(f: Vector, v: Vector) -> float:
    """<f, v> as a dot product; shapes must agree."""
    if f.coords.shape != v.coords.shape:
        raise ValueError("functional/vector dimension mismatch")
    return float(f.coords @ v.coords)


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def dual_space(s: SpaceSpec) -> SpaceSpec:
    """Conjugate exponent everywhere; weights invert; sums dualize blockwise."""
    q = conjugate_exponent(s.p)
    if s.kind == "lp":
        return SpaceSpec("lp", q, s.dim)
    if s.kind == "wlp":
        return SpaceSpec("wlp", q, s.dim, weights=tuple(1.0 / w for w in s.weights))
    return SpaceSpec("sum", q, s.dim, blocks=tuple(dual_space(b) for b in s.blocks))


def _lp_norms(p: float, absrows: np.ndarray) -> np.ndarray:
    # absrows: (m, d) nonnegative.  Scaled power sums keep large p stable.
    if p == 1:
        return absrows.sum(axis=1)
    if p == 2:
        return np.sqrt(np.einsum("ij,ij->i", absrows, absrows))
    if p == INF:
        return absrows.max(axis=1)
    peak = absrows.max(axis=1)
    out = np.zeros(absrows.shape[0])
    nz = peak > 0
    if np.any(nz):
        scaled = absrows[nz] / peak[nz, None]
        out[nz] = peak[nz] * np.power(np.power(scaled, p).sum(axis=1), 1.0 / p)
    return out


def norms_batch(s: SpaceSpec, rows: np.ndarray) -> np.ndarray:
    """Norms of many vectors at once; rows has shape (m, s.dim)."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != s.dim:
        raise ValueError(f"expected shape (m, {s.dim}), got {rows.shape}")
    if s.kind == "lp":
        return _lp_norms(s.p, np.abs(rows))
    if s.kind == "wlp":
        return _lp_norms(s.p, np.abs(rows) * np.asarray(s.weights))
    cols = []
    at = 0
    for b in s.blocks:
        cols.append(norms_batch(b, rows[:, at : at + b.dim]))
        at += b.dim
    return _lp_norms(s.p, np.stack(cols, axis=1))


def vector_norm(s: SpaceSpec, coords) -> float:
    coords = np.asarray(coords, dtype=float)
    return float(norms_batch(s, coords[None, :])[0])


def sample_sphere(s: SpaceSpec, count: int, seed: int) -> list[Vector]:
    """count unit vectors, deterministic in (spec, count prefix, seed)."""
    gen = stream(seed, "sphere", format_spec(s))
    out = np.empty((count, s.dim))
    got = 0
    while got < count:
        draw = gen.normal(size=(count - got, s.dim))
        norms = norms_batch(s, draw)
        keep = norms > NORM_TOL
        draw = draw[keep] / norms[keep, None]
        out[got : got + len(draw)] = draw
        got += len(draw)
    # one renormalization pass eats the first-division rounding
    out /= norms_batch(s, out)[:, None]
    return [Vector(row, s) for row in out]


@dataclass(frozen=True)
class UnitNet:
    """Finite subset of the unit ball.

    When ``exhaustive`` is set the points are the full dyadic grid of step
    ``step`` intersected with the ball, and rounding any unit vector toward
    zero onto the grid lands within ``eta`` per coordinate while staying in
    the ball (the norms here are absolute, so shrinking coordinates never
    grows the norm).  Otherwise the points are a seeded sample of size
    ``cap`` with no covering guarantee.
    """

    space: SpaceSpec
    eta: float
    step: float
    points: tuple[Vector, ...]
    cap: int
    exhaustive: bool

    def covering_radius(self) -> float:
        """Guaranteed covering radius of the net in the space norm."""
        if not self.exhaustive:
            return INF
        return self.step * vector_norm(self.space, np.ones(self.space.dim))


def dyadic_step(eta: float) -> float:
    """Largest power of two that is <= eta."""
    if eta <= 0:
        raise ValueError("resolution must be positive")
    return 2.0 ** math.floor(math.log2(eta))


def _grid_values(step: float) -> np.ndarray:
    kmax = math.floor(1.0 / step + NORM_TOL)
    return step * np.arange(-kmax, kmax + 1)


def unit_net(s: SpaceSpec, eta: float, cap: int, seed: int = 0) -> UnitNet:
    """Dyadic grid of step <= eta in the unit ball, or a sampled fallback.

    The grid is enumerated only when its ambient cube size fits under cap;
    otherwise returns cap seeded points in the ball with exhaustive=False.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    h = dyadic_step(eta)
    vals = _grid_values(h)
    total = len(vals) ** s.dim
    if total <= cap:
        cols = np.array(list(itertools.product(vals, repeat=s.dim)))
        keep = norms_batch(s, cols) <= 1.0 + NORM_TOL
        pts = tuple(Vector(row, s) for row in cols[keep])
        return UnitNet(s, eta, h, pts, cap, exhaustive=True)
    gen = stream(seed, "unit-net", format_spec(s))
    dirs = gen.normal(size=(cap, s.dim))
    norms = norms_batch(s, dirs)
    norms[norms <= NORM_TOL] = 1.0
    radii = gen.uniform(size=cap) ** (1.0 / s.dim)
    pts_arr = dirs / norms[:, None] * radii[:, None]
    return UnitNet(s, eta, h, tuple(Vector(r, s) for r in pts_arr), cap, exhaustive=False)


# --- spec string grammar ---------------------------------------------------
#
#   lp:p=<float|inf>:n=<int>
#   wlp:p=<float|inf>:w=<comma separated weights>
#   sum:p=<float|inf>:[<spec>;<spec>;...]


def _format_p(p: float) -> str:
    if p == INF:
        return "inf"
    if p == int(p):
        return str(int(p))
    return repr(p)


def format_spec(s: SpaceSpec) -> str:
    if s.kind == "lp":
        return f"lp:p={_format_p(s.p)}:n={s.dim}"
    if s.kind == "wlp":
        w = ",".join(_format_p(x) for x in s.weights)
        return f"wlp:p={_format_p(s.p)}:w={w}"
    inner = ";".join(format_spec(b) for b in s.blocks)
    return f"sum:p={_format_p(s.p)}:[{inner}]"


def _parse_p(tok: str) -> float:
    tok = tok.strip()
    if tok in ("inf", "Inf", "INF"):
        return INF
    return float(tok)


def _split_top(body: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == ";" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def parse_spec(text: str) -> SpaceSpec:
    """Inverse of format_spec; raises ValueError on malformed input."""
    text = text.strip()
    kind, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"malformed space spec {text!r}")
    if kind in ("lp", "wlp"):
        fields = {}
        for chunk in rest.split(":"):
            key, sep2, val = chunk.partition("=")
            if not sep2:
                raise ValueError(f"malformed field {chunk!r} in {text!r}")
            fields[key] = val
        if kind == "lp":
            if set(fields) != {"p", "n"}:
                raise ValueError(f"lp spec needs p and n, got {sorted(fields)}")
            return lp(_parse_p(fields["p"]), int(fields["n"]))
        if set(fields) != {"p", "w"}:
            raise ValueError(f"wlp spec needs p and w, got {sorted(fields)}")
        return wlp(_parse_p(fields["p"]), [_parse_p(x) for x in fields["w"].split(",")])
    if kind == "sum":
        if not rest.startswith("p="):
            raise ValueError(f"malformed sum spec {text!r}")
        phead, sep2, bracketed = rest.partition(":")
        if not sep2 or not (bracketed.startswith("[") and bracketed.endswith("]")):
            raise ValueError(f"malformed sum spec {text!r}")
        p = _parse_p(phead[2:])
        return lp_sum(p, [parse_spec(part) for part in _split_top(bracketed[1:-1])])
    raise ValueError(f"unknown space kind {kind!r}")
