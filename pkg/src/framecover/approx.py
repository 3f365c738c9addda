"""Commuting approximating sequences and their unconditionality constants.

A sequence S_1..S_N of operators on one space with S_m S_n = S_n for n <= m
and S_N = id plays the role of partial-sum projections; the difference
blocks A_n = S_n - S_{n-1} carry the sign-supremum quantities measured here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .rng import stream
from .spaces import SpaceSpec, Vector, format_spec
from .opnorm import NormEstimate, Operator, OpNormOptions, identity, op_norm

NESTING_TOL = 1e-12
EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class ApproximatingSequence:
    space: SpaceSpec
    maps: tuple[np.ndarray, ...]

    def __post_init__(self):
        maps = tuple(np.asarray(m, dtype=float) for m in self.maps)
        if not maps:
            raise ValueError("sequence must contain at least one map")
        d = self.space.dim
        for m in maps:
            if m.shape != (d, d):
                raise ValueError(f"map shape {m.shape} does not match dim {d}")
        scale = max(1.0, max(np.abs(m).max() for m in maps))
        for i, Sm in enumerate(maps):
            for j, Sn in enumerate(maps[: i + 1]):
                if np.abs(Sm @ Sn - Sn).max() > NESTING_TOL * scale:
                    raise ValueError(f"nesting S_{i+1} S_{j+1} = S_{j+1} fails")
        frozen = []
        for m in maps:
            m = m.copy()
            m.flags.writeable = False
            frozen.append(m)
        object.__setattr__(self, "maps", tuple(frozen))

    def __len__(self) -> int:
        return len(self.maps)

    def differences(self) -> list[np.ndarray]:
        """A_n = S_n - S_{n-1} with S_0 = 0."""
        prev = np.zeros_like(self.maps[0])
        out = []
        for m in self.maps:
            out.append(m - prev)
            prev = m
        return out

    def as_operator(self, n: int) -> Operator:
        return Operator(self.maps[n], self.space, self.space)


def from_basis(basis, s: SpaceSpec) -> ApproximatingSequence:
    """Partial-sum projections of a (possibly non-orthogonal) basis.

    basis: iterable of Vectors or coordinate rows spanning the space.
    """
    rows = []
    for b in basis:
        rows.append(b.coords if isinstance(b, Vector) else np.asarray(b, dtype=float))
    B = np.stack(rows, axis=1)
    if B.shape != (s.dim, s.dim):
        raise ValueError(f"need {s.dim} independent vectors of dimension {s.dim}")
    try:
        Binv = np.linalg.inv(B)
    except np.linalg.LinAlgError as exc:
        raise ValueError("basis vectors are linearly dependent") from exc
    cond = np.linalg.cond(B)
    if not np.isfinite(cond) or cond > 1e12:
        raise ValueError(f"basis is numerically dependent (cond={cond:.3e})")
    maps = [B[:, : n + 1] @ Binv[: n + 1, :] for n in range(s.dim)]
    return ApproximatingSequence(s, tuple(maps))


@dataclass(frozen=True)
class SignSupResult:
    value: float
    exhaustive: bool


def _sign_patterns(n: int):
    return itertools.product((1.0, -1.0), repeat=n)


def signed_prefix_sup(
    blocks: list[np.ndarray],
    dom: SpaceSpec,
    cod: SpaceSpec,
    mode: str = "exhaustive",
    budget: int = 4096,
    seed: int = 0,
    opts: OpNormOptions | None = None,
) -> SignSupResult:
    """sup over prefixes N' and sign patterns in {+-1}^{N'} of
    ||sum_{n<=N'} theta_n blocks[n]||.

    Exhaustive up to EXHAUSTIVE_LIMIT blocks (and only if requested);
    otherwise a seeded randomized lower bound within the evaluation budget.
    """
    if mode not in ("exhaustive", "randomized"):
        raise ValueError(f"unknown mode {mode!r}")
    n = len(blocks)
    if n == 0:
        raise ValueError("need at least one block")
    stack = np.stack(blocks)

    def value_of(theta: np.ndarray) -> float:
        m = np.tensordot(theta, stack[: len(theta)], axes=1)
        return op_norm(Operator(m, dom, cod), opts).lower

    best = 0.0
    if mode == "exhaustive" and n <= EXHAUSTIVE_LIMIT:
        for n_prime in range(1, n + 1):
            # first sign fixed: theta and -theta give the same norm
            for tail in _sign_patterns(n_prime - 1):
                best = max(best, value_of(np.array((1.0,) + tail)))
        return SignSupResult(best, True)

    gen = stream(seed, "sign-sup", format_spec(dom), str(n))
    for _ in range(budget):
        n_prime = int(gen.integers(1, n + 1))
        theta = gen.integers(0, 2, size=n_prime) * 2.0 - 1.0
        best = max(best, value_of(theta))
    # always include the plain prefixes
    for n_prime in range(1, n + 1):
        best = max(best, value_of(np.ones(n_prime)))
    return SignSupResult(best, False)


def sign_sup(
    seq: ApproximatingSequence,
    mode: str = "exhaustive",
    budget: int = 4096,
    seed: int = 0,
    opts: OpNormOptions | None = None,
) -> SignSupResult:
    """Unconditionality supremum of the difference blocks over all prefixes."""
    if mode == "exhaustive" and len(seq) > EXHAUSTIVE_LIMIT:
        mode = "randomized"
    return signed_prefix_sup(
        seq.differences(), seq.space, seq.space, mode, budget, seed, opts
    )


def reflection_defect(seq: ApproximatingSequence, rho: float,
                      opts: OpNormOptions | None = None) -> list[NormEstimate]:
    """Norm estimates of id - rho*S_n for each n."""
    eye = np.eye(seq.space.dim)
    return [
        op_norm(Operator(eye - rho * m, seq.space, seq.space), opts)
        for m in seq.maps
    ]


@dataclass(frozen=True)
class MultiplierCheck:
    lhs: float
    rhs: float
    passed: bool
    exhaustive: bool


def multiplier_bound_check(seq: ApproximatingSequence, a,
                           opts: OpNormOptions | None = None) -> MultiplierCheck:
    """Checks ||sum a_n A_n|| <= max|a_n| * sign_sup within 1e-8."""
    a = np.asarray(a, dtype=float)
    if a.shape != (len(seq),):
        raise ValueError("coefficient count must match sequence length")
    blocks = seq.differences()
    m = np.tensordot(a, np.stack(blocks), axes=1)
    lhs = op_norm(Operator(m, seq.space, seq.space), opts).lower
    ss = sign_sup(seq, opts=opts)
    rhs = float(np.abs(a).max()) * ss.value
    return MultiplierCheck(lhs, rhs, lhs <= rhs + 1e-8, ss.exhaustive)


@dataclass(frozen=True)
class ConstantsReport:
    bc: float
    ubc: float
    sign_sup: float
    reflection: dict[float, float]
    exhaustive: bool
    findings: tuple[str, ...]


def constants_report(basis, s: SpaceSpec, rhos=(2.0,),
                     opts: OpNormOptions | None = None) -> ConstantsReport:
    """Basis constant, unconditional constant, sign supremum, and reflection
    defects for the partial-sum projections of a basis."""
    seq = from_basis(basis, s)
    blocks = seq.differences()
    bc = max(op_norm(seq.as_operator(n), opts).lower for n in range(len(seq)))

    exhaustive = len(seq) <= EXHAUSTIVE_LIMIT
    stack = np.stack(blocks)

    def full_pattern_value(theta: np.ndarray) -> float:
        m = np.tensordot(theta, stack, axes=1)
        return op_norm(Operator(m, s, s), opts).lower

    if exhaustive:
        ubc = max(
            full_pattern_value(np.array((1.0,) + tail))
            for tail in _sign_patterns(len(seq) - 1)
        )
        ss = sign_sup(seq, "exhaustive", opts=opts)
    else:
        # randomized lower bounds; full-length patterns only for ubc
        gen = stream(0, "ubc", format_spec(s), str(len(seq)))
        ubc = full_pattern_value(np.ones(len(seq)))
        for _ in range(512):
            ubc = max(ubc, full_pattern_value(gen.integers(0, 2, len(seq)) * 2.0 - 1.0))
        ss = sign_sup(seq, "randomized", opts=opts)

    reflection = {}
    for rho in rhos:
        reflection[float(rho)] = max(e.lower for e in reflection_defect(seq, rho, opts))

    findings = []
    if bc > (1.0 + ubc) / 2.0 + 1e-8:
        findings.append(
            f"basis constant {bc:.12g} exceeds (1+ubc)/2 = {(1 + ubc) / 2:.12g}"
        )
    return ConstantsReport(bc, ubc, ss.value, reflection, exhaustive, tuple(findings))


@dataclass(frozen=True)
class UbapEstimate:
    value: float
    eps: float | None
    in_z_eps: bool | None  # one-sided: True certifies membership, False is "not shown"


def operator_ubap_estimate(
    T: Operator,
    side: str,
    seq: ApproximatingSequence,
    eps: float | None = None,
    mode: str = "exhaustive",
    budget: int = 4096,
    opts: OpNormOptions | None = None,
) -> UbapEstimate:
    """Sign supremum of {A_n T} (codomain side) or {T A_n} (domain side),
    normalized by ||T||; upper estimate of the unconditional approximation
    quantity of T/||T||."""
    if side not in ("domain", "codomain"):
        raise ValueError("side must be domain or codomain")
    tnorm = op_norm(T, opts).lower
    if tnorm <= 1e-14:
        raise ValueError("zero operator has no normalized estimate")
    if side == "codomain":
        if seq.space != T.codomain:
            raise ValueError("sequence must live on the codomain")
        blocks = [a @ T.matrix for a in seq.differences()]
    else:
        if seq.space != T.domain:
            raise ValueError("sequence must live on the domain")
        blocks = [T.matrix @ a for a in seq.differences()]
    if mode == "exhaustive" and len(blocks) > EXHAUSTIVE_LIMIT:
        mode = "randomized"
    res = signed_prefix_sup(blocks, T.domain, T.codomain, mode, budget, opts=opts)
    value = res.value / tnorm
    verdict = None if eps is None else bool(value <= 2.0 - eps + 1e-12)
    return UbapEstimate(value, eps, verdict)
