"""Quantitative ball coverings of operator-space unit spheres.

cover_one executes the constructive covering step for a single operator:
locate the smallest block prefix whose composed partial sum clears the
threshold max(||T|| - eps2/16, 3/4), replace each rank-one factor by a net
point, normalize the net sum to a center of norm 2 (2*alpha in renormed
mode), and certify the distance against the bound 2 - eps + sigma.
verify_cover attacks a claimed cover adversarially on the unit sphere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .frames import SchauderFrame
from .opnorm import (
    Operator,
    OpNormOptions,
    TailModel,
    alpha_norm,
    norming_functional,
    op_norm,
)
from .rng import stream
from .spaces import (
    INF,
    SpaceSpec,
    UnitNet,
    Vector,
    dual_space,
    dyadic_step,
    format_spec,
    norms_batch,
    vector_norm,
)

XI_SLACK_UNCERTIFIED = 1e-6


class CoarseNetError(ValueError):
    """Net cannot deliver the per-factor tolerance; carries the required eta."""

    def __init__(self, message: str, required_eta: float):
        super().__init__(message)
        self.required_eta = required_eta


class NoThresholdError(ValueError):
    """No block prefix clears the threshold (operator norm below 3/4)."""


@dataclass(frozen=True)
class NormMode:
    """plain (alpha is None) or alpha-renormed with an optional tail surrogate."""

    alpha: float | None = None
    tail: TailModel | None = None

    @property
    def plain(self) -> bool:
        return self.alpha is None

    def describe(self) -> str:
        if self.plain:
            return "plain"
        t = "none" if self.tail is None else f"k={self.tail.k}"
        return f"alpha({self.alpha}, tail={t})"


@dataclass(frozen=True)
class CoverParams:
    """Proof parameters.  eps is the UBAP surplus (2 - eps is the frame's
    certified sign bound), and the strict inequalities eps1 < sigma/2,
    eps2 < sigma/2 (plain) or sigma/4 (renormed) are enforced."""

    eps: float
    sigma: float
    eps1: float | None = None
    eps2: float | None = None
    eta: float | None = None          # None: automatic, half the required tolerance
    alpha: float | None = None        # None: plain mode
    tail: TailModel | None = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.alpha is None:
            if self.sigma >= self.eps:
                raise ValueError("plain mode needs 0 < sigma < eps")
            eps2_cap = self.sigma / 2.0
        else:
            if not (1.0 - self.eps / 2.0 < self.alpha <= 1.0):
                raise ValueError("alpha must lie in (1 - eps/2, 1]")
            if self.sigma >= 2.0 * self.alpha + self.eps - 2.0:
                raise ValueError("renormed mode needs sigma < 2*alpha + eps - 2")
            eps2_cap = self.sigma / 4.0
        if self.eps1 is None:
            object.__setattr__(self, "eps1", 0.9 * (self.sigma / 2.0))
        if self.eps2 is None:
            object.__setattr__(self, "eps2", 0.9 * eps2_cap)
        if not (0.0 < self.eps1 < self.sigma / 2.0):
            raise ValueError("eps1 must lie in (0, sigma/2)")
        if not (0.0 < self.eps2 < eps2_cap):
            raise ValueError(f"eps2 must lie in (0, {eps2_cap:.6g}) in this mode")

    @property
    def mode(self) -> NormMode:
        return NormMode(self.alpha, self.tail)

    def threshold(self, t_norm: float) -> float:
        return max(t_norm - self.eps2 / 16.0, 0.75)

    def factor_tolerance(self, n_k0: int) -> float:
        return min(1.0 / (8.0 * n_k0), self.eps2 / (64.0 * n_k0))

    def bound(self) -> float:
        # plain: 2 - eps + sigma; renormed: 2a - (2a + eps - 2 - sigma), equal values
        return 2.0 - self.eps + self.sigma


@dataclass(frozen=True)
class BallCover:
    centers: tuple[Operator, ...]
    radii: tuple[float, ...]
    claimed_r: float
    claimed_delta: float
    norm_mode: NormMode = NormMode()

    def __post_init__(self):
        if len(self.centers) == 0:
            raise ValueError("cover must contain at least one ball")
        if len(self.centers) != len(self.radii):
            raise ValueError("center and radius counts differ")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")


@dataclass(frozen=True)
class CoverCertificate:
    max_min_gap: float
    worst_T: Operator
    samples: int
    adversarial_iters: int
    verdict: str                 # covered | counterexample | inconclusive
    off_origin_ok: bool = True   # every ball misses the origin: ||c_n|| > r_n
    delta_ok: bool = True        # ||c_n|| >= r_n + claimed_delta, checked exactly
    norms_certified: bool = True


def _mode_norm(m: Operator, mode: NormMode, opts: OpNormOptions | None = None
               ) -> tuple[float, bool]:
    """(norm in the mode, certified flag)."""
    est = op_norm(m, opts)
    if mode.plain:
        return est.lower, est.certified
    if mode.tail is None:
        return mode.alpha * est.lower, est.certified
    return alpha_norm(m, mode.alpha, mode.tail), False  # surrogate, never certified


# --- BCP point sets ---------------------------------------------------------


def generate_bcp_points(
    netA: UnitNet,
    netB: UnitNet,
    m_max: int,
    dom: SpaceSpec | None = None,
    opts: OpNormOptions | None = None,
) -> list[Operator]:
    """All centers 2 * sum(g_i (x) s_i) / ||sum(g_i (x) s_i)|| over selections
    g_i from netA (functionals) and s_i from netB (vectors), i = 1..m <= m_max.

    Zero sums are skipped.  Selections grow exponentially; keep nets and
    m_max small.
    """
    if not netA.points or not netB.points:
        raise ValueError("nets must be nonempty")
    dom = dom or dual_space(netA.space)
    cod = netB.space
    A = np.stack([p.coords for p in netA.points])
    B = np.stack([p.coords for p in netB.points])
    out: list[Operator] = []
    for m in range(1, m_max + 1):
        for ga in itertools.product(range(len(A)), repeat=m):
            ga_mat = A[list(ga)]
            for sb in itertools.product(range(len(B)), repeat=m):
                s = np.einsum("id,ie->de", B[list(sb)], ga_mat)
                if np.abs(s).max() <= 1e-14:
                    continue
                cand = Operator(s, dom, cod)
                norm = op_norm(cand, opts).lower
                if norm <= 1e-12:
                    continue
                out.append(Operator(2.0 / norm * s, dom, cod))
    return out


# --- the constructive covering step -----------------------------------------


@dataclass(frozen=True)
class _NetLookup:
    space: SpaceSpec
    tol: float                    # strict per-factor requirement
    step: float | None            # dyadic step for implicit grids
    points: np.ndarray | None     # explicit net points

    def locate(self, target: np.ndarray) -> tuple[np.ndarray, float]:
        if self.points is not None:
            dists = norms_batch(self.space, self.points - target[None, :])
            j = int(np.argmin(dists))
            return self.points[j], float(dists[j])
        # dyadic rounding toward zero: stays in the ball of the target
        rounded = np.trunc(target / self.step) * self.step
        return rounded, vector_norm(self.space, target - rounded)


def _make_lookup(space: SpaceSpec, tol: float, net: UnitNet | None,
                 eta_override: float | None) -> _NetLookup:
    eta_goal = tol / 2.0 if eta_override is None else eta_override
    if net is None:
        ones = vector_norm(space, np.ones(space.dim))
        step = dyadic_step(eta_goal / ones)
        return _NetLookup(space, tol, step, None)
    if not (net.space == space or _specs_close(net.space, space)):
        raise ValueError(
            f"net lives on {format_spec(net.space)}, needed {format_spec(space)}"
        )
    if net.exhaustive and net.covering_radius() > tol:
        raise CoarseNetError(
            f"net resolution eta={net.eta:.6g} too coarse; required eta {eta_goal:.6g}",
            required_eta=eta_goal,
        )
    pts = np.stack([p.coords for p in net.points])
    return _NetLookup(space, tol, None, pts)


def _specs_close(a: SpaceSpec, b: SpaceSpec, tol: float = 1e-12) -> bool:
    if a.kind != b.kind or a.dim != b.dim:
        return False
    if (a.p == INF) != (b.p == INF):
        return False
    if a.p != INF and abs(a.p - b.p) > tol * max(1.0, abs(a.p)):
        return False
    if a.kind == "wlp" and not np.allclose(a.weights, b.weights, rtol=tol, atol=0):
        return False
    if a.kind == "sum":
        return len(a.blocks) == len(b.blocks) and all(
            _specs_close(x, y, tol) for x, y in zip(a.blocks, b.blocks)
        )
    return True


@dataclass(frozen=True)
class CoverOneResult:
    center: Operator
    distance: float
    bound: float
    margin: float
    k0: int
    n_k0: int
    xi: float
    xi_bracket: tuple[float, float]
    branch_values: tuple[float, float]   # (|1 - 2/xi|, 1)
    active_branch: str                   # which branch of the max was active
    threshold: float
    factor_tol: float
    net_error_bound: float               # certified aggregate approximation error
    center_norm: float
    t_norm: float
    scale: float                         # scalar applied to T (renormed mode)
    mode: str
    certified: bool


def cover_one(
    T: Operator,
    fr: SchauderFrame,
    side: str,
    params: CoverParams,
    nets: tuple[UnitNet, UnitNet] | None = None,
    opts: OpNormOptions | None = None,
) -> CoverOneResult:
    """One constructive covering step; see module docstring.

    nets: optional (net on the dual of T's domain, net on T's codomain);
    omitted nets use implicit dyadic grids fine enough for the run.
    """
    if side not in ("codomain", "domain"):
        raise ValueError("side must be codomain or domain")
    frame_space = T.codomain if side == "codomain" else T.domain
    if not (fr.space == frame_space or _specs_close(fr.space, frame_space)):
        raise ValueError("frame does not live on the requested side of T")

    mode = params.mode
    certified = True
    scale = 1.0
    mat = T.matrix
    if not mode.plain:
        mnorm, cert = _mode_norm(T, mode, opts)
        certified &= cert
        if mnorm <= 1e-14:
            raise ValueError("zero operator cannot be normalized")
        scale = 1.0 / mnorm
        mat = mat * scale
        T = Operator(mat, T.domain, T.codomain)

    est_T = op_norm(T, opts)
    certified &= est_T.certified
    t_norm = est_T.lower

    # smallest block boundary whose composed partial sum clears the threshold
    threshold = params.threshold(t_norm)
    prefixes = fr.prefix_matrices()
    k0 = None
    for k in range(fr.block_count):
        m_edge = fr.boundaries[k + 1]
        pm = prefixes[m_edge - 1]
        composed = pm @ mat if side == "codomain" else mat @ pm
        est = op_norm(Operator(composed, T.domain, T.codomain), opts)
        certified &= est.certified
        if est.lower > threshold:
            k0 = k + 1
            break
    if k0 is None:
        raise NoThresholdError(
            f"no block prefix clears threshold {threshold:.6g} "
            f"(||T|| = {t_norm:.6g}; precondition requires unit norm)"
        )
    n_k0 = fr.boundaries[k0]

    # factors of the rank-one expansion of the chosen partial sum
    dualX = dual_space(T.domain)
    if side == "codomain":
        a_fact = fr.functionals[:n_k0] @ mat          # rows: f_n o T in X*
        b_fact = fr.vectors[:n_k0]                    # y_n in Y
    else:
        a_fact = fr.functionals[:n_k0]                # f_n in X*
        b_fact = fr.vectors[:n_k0] @ mat.T            # T x_n in Y
    tol_req = params.factor_tolerance(n_k0)
    reach = max(1.0, t_norm)
    factor_tol = tol_req / reach

    netA = netB = None
    if nets is not None:
        netA, netB = nets
    lookA = _make_lookup(dualX, factor_tol, netA, params.eta)
    lookB = _make_lookup(T.codomain, factor_tol, netB, params.eta)

    a_net = np.empty_like(a_fact)
    b_net = np.empty_like(b_fact)
    err = 0.0
    worst = 0.0
    for n in range(n_k0):
        a_net[n], da = lookA.locate(a_fact[n])
        b_net[n], db = lookB.locate(b_fact[n])
        worst = max(worst, da, db)
        err += da * vector_norm(T.codomain, b_fact[n]) + vector_norm(dualX, a_net[n]) * db
    budget = min(0.25, params.eps2 / 32.0)
    if worst >= tol_req or err >= budget:
        raise CoarseNetError(
            f"net approximation error {err:.6g} reaches budget {budget:.6g} "
            f"(worst factor distance {worst:.6g}, tolerance {tol_req:.6g}); "
            f"required eta {factor_tol / 2.0:.6g}",
            required_eta=factor_tol / 2.0,
        )

    net_sum = np.einsum("id,ie->de", b_net, a_net)
    est_xi = op_norm(Operator(net_sum, T.domain, T.codomain), opts)
    certified &= est_xi.certified
    xi = est_xi.lower
    slack = 0.0 if certified else XI_SLACK_UNCERTIFIED
    lo = max(t_norm - 3.0 * params.eps2 / 32.0, 0.5)
    hi = min(17.0 / 4.0, 2.0 * t_norm + params.eps2 / 16.0)
    if not (lo - slack < xi < hi + slack):
        raise AssertionError(f"xi = {xi:.12g} escapes bracket ({lo:.12g}, {hi:.12g})")

    # never rescale xi; both branches of max(|1 - 2/xi|, 1) are recorded
    branch_values = (abs(1.0 - 2.0 / xi), 1.0)
    active = "|1-2/xi|" if branch_values[0] >= 1.0 else "1"

    center_mat = (2.0 / xi) * net_sum
    center = Operator(center_mat, T.domain, T.codomain)
    center_plain = op_norm(center, opts).lower
    # finite-rank centers have vanishing quotient part, so the alpha norm of a
    # center is alpha times its plain norm even when a tail surrogate is set
    center_norm = center_plain if mode.plain else mode.alpha * center_plain

    diff = Operator(mat - center_mat, T.domain, T.codomain)
    if mode.plain:
        est_d = op_norm(diff, opts)
        certified &= est_d.certified
        distance = est_d.lower
    else:
        distance, cert = _mode_norm(diff, mode, opts)
        certified &= cert
    bound = params.bound()
    if not distance < bound:
        raise AssertionError(
            f"distance {distance:.12g} does not beat the bound {bound:.12g}"
        )
    return CoverOneResult(
        center=center,
        distance=distance,
        bound=bound,
        margin=bound - distance,
        k0=k0,
        n_k0=n_k0,
        xi=xi,
        xi_bracket=(lo, hi),
        branch_values=branch_values,
        active_branch=active,
        threshold=threshold,
        factor_tol=tol_req,
        net_error_bound=err,
        center_norm=center_norm,
        t_norm=t_norm,
        scale=scale,
        mode=mode.describe(),
        certified=certified,
    )


# --- adversarial verification ------------------------------------------------


@dataclass(frozen=True)
class SearchOptions:
    samples: int = 256
    restarts: int = 64
    iters: int = 200
    step0: float = 0.25


def _norm_gradient(m: np.ndarray, dom: SpaceSpec, cod: SpaceSpec,
                   opts: OpNormOptions | None) -> tuple[float, np.ndarray, bool]:
    """(||m||, a subgradient matrix of the norm at m, certified flag)."""
    est = op_norm(Operator(m, dom, cod), opts)
    x = est.witness.coords
    u = norming_functional(cod, m @ x)
    return est.lower, np.outer(u, x), est.certified


def verify_cover(
    cover: BallCover,
    dom: SpaceSpec,
    cod: SpaceSpec,
    search: SearchOptions | None = None,
    seed: int = 0,
    opts: OpNormOptions | None = None,
) -> CoverCertificate:
    """Exact off-origin/separation checks, then adversarial max-min search
    for a unit-norm operator outside every ball."""
    search = search or SearchOptions()
    mode = cover.norm_mode
    if mode.tail is not None and mode.tail.k > dom.dim:
        raise ValueError("norm_mode tail cutoff exceeds the search domain dimension")
    for c in cover.centers:
        if not (_specs_close(c.domain, dom) and _specs_close(c.codomain, cod)):
            raise ValueError("cover centers do not act on the search spaces")

    # exact algebraic invariant checks from certified center norms; recorded,
    # not fatal — the verdict below concerns coverage only
    norms_ok = True
    center_norms = []
    for c_op in cover.centers:
        cn, cert = _mode_norm(c_op, mode, opts)
        norms_ok &= cert
        center_norms.append(cn)
    off_origin_ok = all(cn > r for cn, r in zip(center_norms, cover.radii))
    delta_ok = all(
        cn >= r + cover.claimed_delta - 1e-12
        for cn, r in zip(center_norms, cover.radii)
    )

    centers = np.stack([c.matrix for c in cover.centers])
    radii = np.asarray(cover.radii)

    def mode_norm_mat(m: np.ndarray) -> tuple[float, bool]:
        return _mode_norm(Operator(m, dom, cod), mode, opts)

    def gap(m: np.ndarray) -> tuple[float, np.ndarray, bool]:
        s, cert_all = mode_norm_mat(m)
        t = m / s
        vals = np.empty(len(centers))
        for i, c in enumerate(centers):
            v, cert = mode_norm_mat(t - c)
            vals[i] = v - radii[i]
            cert_all &= cert
        return float(vals.min()), t, cert_all

    gen = stream(seed, "verify-cover", format_spec(dom), format_spec(cod))
    shape = (cod.dim, dom.dim)
    pool = [gen.normal(size=shape) for _ in range(search.samples)]
    pool += [c.copy() for c in centers]  # ball directions are natural probes
    scored = []
    for m in pool:
        if np.abs(m).max() <= 1e-14:
            continue
        g, _, _ = gap(m)
        scored.append((g, m))
    scored.sort(key=lambda t: -t[0])

    best_gap, best_m, best_cert = -INF, None, True
    iters_done = 0
    for g0, m0 in scored[: search.restarts]:
        m = m0.copy()
        g, t, cert = gap(m)
        if g > best_gap:
            best_gap, best_m, best_cert = g, m.copy(), cert
        for it in range(search.iters):
            iters_done += 1
            s, grad_s, _ = _norm_gradient(m, dom, cod, opts)
            t = m / s
            vals = []
            for i, c in enumerate(centers):
                v, _, _ = _norm_gradient(t - c, dom, cod, opts)
                vals.append(v - radii[i])
            i_star = int(np.argmin(vals))
            _, G, _ = _norm_gradient(t - centers[i_star], dom, cod, opts)
            if mode.alpha is not None:
                G = G * mode.alpha  # tail surrogate ignored in the ascent direction
            grad = G / s - (float(np.sum(G * m)) / s**2) * grad_s
            gn = np.linalg.norm(grad)
            if gn <= 1e-14:
                break
            m = m + search.step0 / (1.0 + it / 25.0) * grad / gn
            g, _, cert = gap(m)
            if g > best_gap:
                best_gap, best_m, best_cert = g, m.copy(), cert

    # derivative-free polish to locate the worst point sharply
    def neg_gap(flat: np.ndarray) -> float:
        m = flat.reshape(shape)
        if np.abs(m).max() <= 1e-14:
            return INF
        return -gap(m)[0]

    res = scipy.optimize.minimize(
        neg_gap, best_m.ravel(), method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
    )
    if -res.fun > best_gap:
        best_m = res.x.reshape(shape)

    s_best, _ = mode_norm_mat(best_m)
    worst = Operator(best_m / s_best, dom, cod)
    final_gap, _, final_cert = gap(best_m)
    norms_ok &= final_cert

    if final_gap > 1e-9 and final_cert:
        verdict = "counterexample"
    elif final_gap < -1e-9:
        verdict = "covered"
    else:
        verdict = "inconclusive"
    return CoverCertificate(
        max_min_gap=final_gap,
        worst_T=worst,
        samples=search.samples,
        adversarial_iters=iters_done,
        verdict=verdict,
        off_origin_ok=off_origin_ok,
        delta_ok=delta_ok,
        norms_certified=norms_ok,
    )
