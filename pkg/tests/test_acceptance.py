"""End-to-end acceptance gate.

Each test exercises one advertised guarantee of the package at its stated
tolerance and prints a single pass/fail line; run with `pytest -v` to get
one line per criterion from the test ids as well.
"""

import itertools
import math
import time

import numpy as np
import pytest

from framecover.approx import constants_report, from_basis, reflection_defect
from framecover.bip import bip_feasible, three_point_instance
from framecover.covering import BallCover, CoverParams, cover_one, verify_cover
from framecover.dilation import (
    DilationSpace,
    embed_T,
    norm_estimates,
    recover_S,
    sign_component,
)
from framecover.frames import (
    block_unconditional_bound,
    dilate_to_frame,
    frame_bound,
    reconstruct,
)
from framecover.opnorm import Operator, op_norm, op_norm_oracle
from framecover.rng import stream
from framecover.spaces import INF, Vector, format_spec, lp, sample_sphere, vector_norm

FRAME_GRID = tuple(itertools.product((1.0, 2.0, 4.0), (0.5, 1.0)))  # (p, eps)
COVER_BATCHES = ((lp(2, 4), lp(2, 4)), (lp(1, 3), lp(2, 4)))
SKEW_L1 = np.array([[1.0, 0.0], [1.0, 1.0]])


def _line(criterion: int, ok: bool, detail: str):
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'} — {detail}", flush=True)


@pytest.fixture(scope="module")
def dilated_instances():
    out = {}
    for p, eps in FRAME_GRID:
        s = lp(p, 8)
        fr, plan = dilate_to_frame(from_basis(np.eye(8), s), eps=eps)
        out[(p, eps)] = (s, fr, plan)
    return out


def test_criterion_1_frame_dilation(dilated_instances):
    t0 = time.monotonic()
    recon, fb_excess, bb_excess = 0.0, -math.inf, -math.inf
    for (p, eps), (s, fr, _) in dilated_instances.items():
        for v in sample_sphere(s, 1000, seed=101):
            xhat, _ = reconstruct(fr, v)
            recon = max(recon, vector_norm(s, xhat.coords - v.coords))
        bb = block_unconditional_bound(fr)
        assert fr.block_count == 8 and bb.exhaustive
        fb_excess = max(fb_excess, frame_bound(fr) - (1 + eps))
        bb_excess = max(bb_excess, bb.value - (1 + eps))
    elapsed = time.monotonic() - t0
    ok = recon <= 1e-9 and fb_excess <= 1e-6 and bb_excess <= 1e-6 and elapsed < 60
    _line(1, ok, f"6 instances: recon_max={recon:.2e}, frame_bound-(1+eps)<="
                 f"{fb_excess:.2e}, block_bound-(1+eps)<={bb_excess:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_dilation_embedding(dilated_instances):
    st_err, s_max, p_excess, flips_bad = 0.0, 0.0, -math.inf, 0
    ufdd = {}
    for (p, eps), (s, fr, plan) in dilated_instances.items():
        d = DilationSpace(fr, plan)
        rep = norm_estimates(d, samples=100, seed=5)
        s_max = max(s_max, rep.s_norm)
        p_excess = max(p_excess, rep.p_norm - (1 + eps))
        ufdd[(p, eps)] = rep.ufdd_constant
        for v in sample_sphere(s, 100, seed=7):
            back = recover_S(d, embed_T(d, v))
            st_err = max(st_err, vector_norm(s, back.coords - v.coords))
        gen = stream(9, "acceptance-flips", format_spec(s), str(eps))
        blocks = np.repeat(np.arange(8), np.diff(fr.boundaries))
        for _ in range(100):
            a = gen.normal(size=len(fr))
            base = sign_component(d, a)
            for theta in itertools.product((-1.0, 1.0), repeat=8):
                if sign_component(d, np.asarray(theta)[blocks] * a) != base:
                    flips_bad += 1
    hilbert_ufdd = max(v for (p, _), v in ufdd.items() if p == 2.0)
    ok = (s_max <= 1 + 1e-6 and st_err <= 1e-9 and p_excess <= 2 * 1e-6
          and flips_bad == 0 and hilbert_ufdd <= 1 + 1e-6)
    _line(2, ok, f"||S||<={s_max:.9f}, S∘T-id<={st_err:.2e}, ||P||-(1+eps)<="
                 f"{p_excess:.2e}, bad flips={flips_bad}/153600, "
                 f"ufdd(l2)<={hilbert_ufdd:.9f}, ufdd per instance={ {k: round(v, 9) for k, v in ufdd.items()} }")
    assert ok


def _cover_batch(dom, cod, params, count=200, seed=20260815):
    fr, _ = dilate_to_frame(from_basis(np.eye(cod.dim), cod), eps=params.eps1)
    gen = stream(seed, "acceptance-cover", format_spec(dom), format_spec(cod))
    results = []
    for _ in range(count):
        m = gen.normal(size=(cod.dim, dom.dim))
        T = Operator(m, dom, cod)
        if params.alpha is None:
            T = Operator(m / op_norm(T).lower, dom, cod)
        results.append(cover_one(T, fr, "codomain", params))
    return results


def test_criterion_3_ubcp_construction():
    t0 = time.monotonic()
    dev, dist, margin = 0.0, 0.0, math.inf
    for dom, cod in COVER_BATCHES:
        rs = _cover_batch(dom, cod, CoverParams(eps=1.0, sigma=0.2))
        dev = max(dev, max(abs(r.center_norm - 2.0) for r in rs))
        dist = max(dist, max(r.distance for r in rs))
        margin = min(margin, min(r.margin for r in rs))
    elapsed = time.monotonic() - t0
    ok = dev <= 1e-9 and dist <= 1.2 and margin > 0 and elapsed < 300
    _line(3, ok, f"400 runs: | ||c||-2 |<={dev:.2e}, distance<={dist:.6f}, "
                 f"margin>={margin:.6f}, {elapsed:.1f}s")
    assert ok


def test_criterion_4_renormed_ubcp():
    worst = {}
    for alpha in (0.8, 1.0):
        for dom, cod in COVER_BATCHES:
            rs = _cover_batch(dom, cod, CoverParams(eps=1.0, sigma=0.2, alpha=alpha))
            key = (alpha, format_spec(dom))
            worst[key] = max(r.distance for r in rs)
            assert all(abs(r.center_norm - 2 * alpha) <= 1e-9 for r in rs)
    ok = all(v <= 1.2 for v in worst.values())  # 1 + sigma
    _line(4, ok, "800 runs: distance_alpha max = "
                 + ", ".join(f"{k}: {v:.6f}" for k, v in worst.items()))
    assert ok


def test_criterion_5_reflection_defects():
    canon = max(
        max(e.lower for e in reflection_defect(from_basis(np.eye(4), lp(p, 4)), 2.0))
        for p in (1.0, 2.0, 4.0, INF)
    )
    skew = max(e.lower for e in reflection_defect(from_basis(SKEW_L1, lp(1, 2)), 2.0))
    ok = abs(canon - 1.0) <= 1e-9 and abs(skew - 3.0) <= 1e-9
    _line(5, ok, f"canonical defect={canon:.12f} (want 1), "
                 f"skew l1 defect={skew:.12f} (want 3, negative control)")
    assert ok


def test_criterion_6_constants_ledger():
    cases = [
        (SKEW_L1, lp(1, 2)),
        (np.eye(3), lp(1, 3)),
        (np.eye(3), lp(2, 3)),
        (np.eye(3), lp(4, 3)),
        (np.eye(3), lp(INF, 3)),
        (np.array([[1.0, 1.0], [1.0, -1.0]]), lp(2, 2)),
    ]
    reports = [constants_report(b, s) for b, s in cases]
    gap = max(r.bc - ((1 + r.ubc) / 2 + 1e-8) for r in reports)
    skew = reports[0]
    ok = (gap <= 0 and all(r.exhaustive for r in reports)
          and abs(skew.bc - 1.0) <= 1e-9 and abs(skew.ubc - 3.0) <= 1e-9)
    _line(6, ok, f"{len(reports)} bases, max bc-(1+ubc)/2-1e-8 = {gap:.2e}, "
                 f"skew bc={skew.bc:.9f} ubc={skew.ubc:.9f}")
    assert ok


def test_criterion_7_norm_engine():
    t0 = time.monotonic()
    ps = (1.0, 1.5, 2.0, 3.0, INF)
    gen = stream(20260815, "acceptance-norm-engine")
    exact_dev, ms_dev, n_exact = 0.0, 0.0, 0
    for _ in range(100):
        p, q = ps[int(gen.integers(len(ps)))], ps[int(gen.integers(len(ps)))]
        n, m = int(gen.integers(1, 5)), int(gen.integers(1, 5))
        op = Operator(gen.normal(size=(m, n)), lp(p, n), lp(q, m))
        est = op_norm(op)
        rel = abs(est.lower - op_norm_oracle(op)) / max(est.lower, 1e-300)
        if est.certified:
            n_exact += 1
            exact_dev = max(exact_dev, rel)
        else:
            ms_dev = max(ms_dev, rel)
    elapsed = time.monotonic() - t0
    ok = (exact_dev <= 1e-9 and ms_dev <= 1e-3 and 0 < n_exact < 100
          and elapsed < 120)
    _line(7, ok, f"100 operators ({n_exact} exact-branch): exact rel dev<="
                 f"{exact_dev:.2e}, multistart rel dev<={ms_dev:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_8_covering_verification():
    dom, cod = lp(2, 1), lp(2, 2)
    mats = ([[2.0], [0.0]], [[-2.0], [0.0]], [[0.0], [2.0]], [[0.0], [-2.0]])
    centers = tuple(Operator(np.array(m), dom, cod) for m in mats)
    oracle = math.sqrt(5 - 2 * math.sqrt(2))
    good = verify_cover(BallCover(centers, (1.5,) * 4, 1.5, 0.5), dom, cod, seed=0)
    bad = verify_cover(BallCover(centers, (1.4,) * 4, 1.4, 0.5), dom, cod, seed=0)
    worst_dev = np.abs(np.abs(bad.worst_T.matrix.ravel()) - math.sqrt(0.5)).max()
    ok = (good.verdict == "covered" and bad.verdict == "counterexample"
          and worst_dev <= 1e-3
          and abs(good.max_min_gap - (oracle - 1.5)) <= 1e-6
          and abs(bad.max_min_gap - (oracle - 1.4)) <= 1e-6)
    _line(8, ok, f"r=1.5 {good.verdict} (gap {good.max_min_gap:.9f}), "
                 f"r=1.4 {bad.verdict} (gap {bad.max_min_gap:.9f}, "
                 f"oracle {oracle - 1.4:.9f}), worst point dev {worst_dev:.2e}")
    assert ok


def test_criterion_9_ball_intersection():
    Z = lp(2, 2)
    e1, e2 = Vector(np.array([1.0, 0.0]), Z), Vector(np.array([0.0, 1.0]), Z)
    inst = three_point_instance(Z, (e1,), e2, e1, eps=0.01)
    res = bip_feasible(inst)
    violation = max(0.0, -min(res.slacks))
    diag = bip_feasible(inst, diagnostic_offset=-0.5)
    ok = (res.feasible and violation <= 1e-6
          and not diag.feasible and diag.violation is not None
          and diag.violation > 0)
    _line(9, ok, f"witness violation={violation:.2e}; diagnostic infeasible with "
                 f"certified floor {diag.violation:.6f}")
    assert ok
