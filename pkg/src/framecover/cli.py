"""Command-line front end and scenario runner.

Reports are deterministic: floats are rounded to 12 significant digits at
emission, field order is fixed by construction, and nothing time- or
path-dependent is written, so identical configs and seeds produce
byte-identical bytes.  Exit codes: 0 all assertions passed, 1 an assertion
or expectation failed (findings listed in the report), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .approx import constants_report, from_basis
from .bip import BipInstance, bip_feasible
from .covering import CoverParams, SearchOptions, BallCover, NormMode, cover_one, \
    generate_bcp_points, verify_cover
from .dilation import DilationSpace, norm_estimates
from .frames import SchauderFrame, block_unconditional_bound, dilate_to_frame, \
    frame_bound, frame_from_json, frame_to_json, reconstruct
from .opnorm import Operator, TailModel, alpha_norm, op_norm
from .rng import stream
from .spaces import Vector, dual_space, format_spec, parse_spec, sample_sphere, \
    unit_net, vector_norm


class ScenarioError(ValueError):
    """Malformed scenario config: missing keys, bad values (exit code 2)."""


def _threads() -> int:
    raw = os.environ.get("FRAMECOVER_THREADS", "").strip()
    if raw:
        return max(1, int(raw))
    return min(os.cpu_count() or 1, 8)


def _pmap(fn, items):
    items = list(items)
    n = _threads()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# --- report emission ---------------------------------------------------------


def _sig12(x: float) -> float:
    return float(f"{float(x):.12g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _sig12(obj)
    return obj


def emit_report(report: dict, format: str = "json") -> bytes:
    """Serialize a report; idempotent and byte-stable for equal inputs."""
    if format == "json":
        return (json.dumps(_clean(report), indent=2) + "\n").encode()
    if format == "csv":
        table = report.get("table")
        if not table:
            raise ValueError("report has no table for csv emission")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table["columns"])
        for row in table["rows"]:
            w.writerow([v if isinstance(v, str) else f"{_sig12(v):.12g}"
                        if isinstance(v, float) else v for v in row])
        return buf.getvalue().encode()
    raise ValueError(f"unknown report format {format!r}")


# --- shared loading helpers --------------------------------------------------


def _load_rows(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)


def _basis_from(source, base_dir: Path) -> np.ndarray:
    """Basis vectors, one per row (inline arrays or a csv path)."""
    if isinstance(source, str):
        return _load_rows(base_dir / source)
    return np.asarray(source, dtype=float)


def _estimate_dict(est) -> dict:
    return {
        "lower": est.lower,
        "upper": est.upper,
        "method": est.method,
        "witness": est.witness.coords,
        "certified": est.certified,
        "restarts": est.restarts,
    }


# --- subcommand handlers ------------------------------------------------------


def _cmd_opnorm(args) -> tuple[dict, list[str]]:
    dom, cod = parse_spec(args.dom), parse_spec(args.cod)
    op = Operator(_load_rows(args.matrix), dom, cod)
    est = op_norm(op)
    report = {"dom": format_spec(dom), "cod": format_spec(cod)}
    report.update(_estimate_dict(est))
    if args.alpha is not None:
        tail = TailModel(args.tail) if args.tail else None
        report["alpha"] = args.alpha
        report["alpha_norm"] = alpha_norm(op, args.alpha, tail)
    return report, []


def _cmd_constants(args) -> tuple[dict, list[str]]:
    s = parse_spec(args.space)
    basis = _load_rows(args.basis)
    rhos = tuple(args.rho) if args.rho else (2.0,)
    rep = constants_report(basis, s, rhos)
    report = {
        "space": format_spec(s),
        "bc": rep.bc,
        "ubc": rep.ubc,
        "sign_sup": rep.sign_sup,
        "reflection": {f"{r:g}": v for r, v in rep.reflection.items()},
        "exhaustive": rep.exhaustive,
        "findings": list(rep.findings),
    }
    return report, list(rep.findings)


def _frame_summary(fr: SchauderFrame, samples: int, seed: int) -> tuple[dict, list[str]]:
    worst = 0.0
    for v in sample_sphere(fr.space, samples, seed):
        xhat, _ = reconstruct(fr, v)
        worst = max(worst, vector_norm(fr.space, xhat.coords - v.coords))
    findings = []
    if worst > 1e-9:
        findings.append(f"reconstruction error {worst:.6g} exceeds 1e-9")
    summary = {
        "space": format_spec(fr.space),
        "pairs": len(fr),
        "boundaries": list(fr.boundaries),
        "frame_bound": frame_bound(fr),
        "block_bound": block_unconditional_bound(fr).value,
        "reconstruction_max": worst,
    }
    return summary, findings


def _cmd_frame(args) -> tuple[dict, list[str]]:
    if args.frame_cmd == "build":
        s = parse_spec(args.space)
        seq = from_basis(_load_rows(args.basis), s)
        fr, plan = dilate_to_frame(seq, args.eps)
        summary, findings = _frame_summary(fr, args.samples, args.seed)
        report = {
            "eps": plan.eps,
            "lam": plan.lam,
            "clipped": plan.clipped,
            "repetitions": list(plan.repetitions),
            "bumped": list(plan.bumped),
        }
        report.update(summary)
        report["findings"] = findings
        if args.out:
            Path(args.out).write_text(frame_to_json(fr))
        return report, findings
    fr = frame_from_json(Path(args.frame).read_text())
    summary, findings = _frame_summary(fr, args.samples, args.seed)
    summary["findings"] = findings
    return summary, findings


def _cmd_dilate(args) -> tuple[dict, list[str]]:
    s = parse_spec(args.space)
    seq = from_basis(_load_rows(args.basis), s)
    fr, plan = dilate_to_frame(seq, args.eps)
    d = DilationSpace(fr, plan)
    rep = norm_estimates(d, args.samples, args.seed)
    report = {
        "space": format_spec(s),
        "eps": args.eps,
        "lam": plan.lam,
        "samples": args.samples,
        "seed": args.seed,
        "frame_bound": rep.frame_bound,
        "block_bound": rep.block_bound,
        "S_norm": rep.s_norm,
        "T_norm": rep.t_norm,
        "P_norm": rep.p_norm,
        "ufdd_constant": rep.ufdd_constant,
    }
    findings = []
    if rep.s_norm > 1.0 + 1e-6:
        findings.append(f"||S|| estimate {rep.s_norm:.12g} exceeds 1")
    if rep.t_norm > plan.lam + plan.eps + 1e-6:
        findings.append(f"||T|| estimate {rep.t_norm:.12g} exceeds lam+eps")
    report["findings"] = findings
    return report, findings


def _cover_params(eps, sigma, alpha, eta=None, eps1=None, eps2=None) -> CoverParams:
    a = None if alpha in (None, "plain") else float(alpha)
    return CoverParams(eps=float(eps), sigma=float(sigma), eps1=eps1, eps2=eps2,
                       eta=eta, alpha=a)


def _cmd_cover(args) -> tuple[dict, list[str]]:
    dom, cod = parse_spec(args.dom), parse_spec(args.cod)
    if args.cover_cmd == "generate":
        netA = unit_net(dual_space(dom), args.eta, args.cap, args.seed)
        netB = unit_net(cod, args.eta, args.cap, args.seed)
        pts = generate_bcp_points(netA, netB, args.m_max, dom=dom)
        norms = [op_norm(c).lower for c in pts]
        report = {
            "dom": format_spec(dom), "cod": format_spec(cod),
            "eta": args.eta, "m_max": args.m_max, "count": len(pts),
            "net_sizes": [len(netA.points), len(netB.points)],
            "norm_deviation_max": max((abs(n - 2.0) for n in norms), default=0.0),
        }
        return report, []
    if args.cover_cmd == "one":
        params = _cover_params(args.eps, args.sigma, args.alpha, eta=args.eta)
        frame_space = cod if args.side == "codomain" else dom
        seq = from_basis(np.eye(frame_space.dim), frame_space)
        fr, _ = dilate_to_frame(seq, params.eps1)
        T = Operator(_load_rows(args.matrix), dom, cod)
        if params.alpha is None:
            n = op_norm(T).lower
            if n <= 1e-14:
                raise ValueError("zero operator")
            T = Operator(T.matrix / n, dom, cod)
        r = cover_one(T, fr, args.side, params)
        report = {
            "dom": format_spec(dom), "cod": format_spec(cod), "side": args.side,
            "mode": r.mode, "k0": r.k0, "n_k0": r.n_k0, "xi": r.xi,
            "active_branch": r.active_branch, "center_norm": r.center_norm,
            "distance": r.distance, "bound": r.bound, "margin": r.margin,
            "certified": r.certified,
        }
        return report, []
    # verify
    centers_rows = _load_rows(args.centers)
    shape = (cod.dim, dom.dim)
    centers = tuple(
        Operator(row.reshape(shape), dom, cod) for row in centers_rows
    )
    if args.radius is None and not args.radii:
        raise ValueError("give --radius or --radii")
    radii = tuple(float(r) for r in args.radii) if args.radii else \
        (float(args.radius),) * len(centers)
    mode = NormMode(float(args.alpha) if args.alpha not in (None, "plain") else None)
    cover = BallCover(centers, radii, claimed_r=max(radii),
                      claimed_delta=args.delta, norm_mode=mode)
    cert = verify_cover(
        cover, dom, cod,
        SearchOptions(samples=args.samples, restarts=args.restarts, iters=args.iters),
        seed=args.seed,
    )
    report = {
        "dom": format_spec(dom), "cod": format_spec(cod),
        "balls": len(centers), "verdict": cert.verdict,
        "max_min_gap": cert.max_min_gap,
        "worst_T": cert.worst_T.matrix,
        "samples": cert.samples, "adversarial_iters": cert.adversarial_iters,
        "off_origin_ok": cert.off_origin_ok, "delta_ok": cert.delta_ok,
        "norms_certified": cert.norms_certified,
    }
    findings = [] if cert.verdict != "inconclusive" else ["verification inconclusive"]
    return report, findings


def _cmd_bip(args) -> tuple[dict, list[str]]:
    Z = parse_spec(args.space)
    basis = tuple(Vector(r, Z) for r in _load_rows(args.subspace))
    y = Vector(_load_rows(args.y).ravel(), Z)
    pts = tuple(Vector(r, Z) for r in _load_rows(args.points))
    inst = BipInstance(Z, basis, y, pts, args.eps)
    res = bip_feasible(inst, tol=args.tol, diagnostic_offset=args.offset)
    report = {
        "space": format_spec(Z),
        "eps": args.eps,
        "offset": args.offset,
        "feasible": res.feasible,
        "value": res.value,
        "violation": res.violation,
        "witness": None if res.witness is None else res.witness.coords,
        "slacks": list(res.slacks),
        "method": res.method,
        "iters": res.iters,
    }
    return report, []


# --- scenario runner ----------------------------------------------------------


def _require(table: dict, keys: tuple[str, ...], where: str):
    for k in keys:
        if k not in table:
            raise ScenarioError(f"scenario key [{where}].{k} must be explicit")


def _check_expectations(report: dict, cfg: dict) -> list[str]:
    expect = cfg.get("expect", {})
    atol = float(expect.get("atol", 1e-9))
    findings = []
    for key, want in expect.items():
        if key == "atol":
            continue
        got = report.get(key)
        if isinstance(want, bool) or isinstance(got, bool):
            ok = got == want
        elif isinstance(want, (int, float)) and isinstance(got, (int, float)):
            ok = abs(float(got) - float(want)) <= atol
        else:
            ok = got == want
        if not ok:
            findings.append(f"expected {key} = {want}, got {got}")
    return findings


def _pipeline_cover(cfg: dict, base_dir: Path) -> tuple[dict, list[str]]:
    _require(cfg, ("space", "params"), "scenario")
    _require(cfg["space"], ("dom", "cod"), "space")
    _require(cfg["params"], ("eps", "sigma", "alpha"), "params")
    p = cfg["params"]
    dom, cod = parse_spec(cfg["space"]["dom"]), parse_spec(cfg["space"]["cod"])
    params = _cover_params(p["eps"], p["sigma"], p["alpha"], eta=p.get("eta"),
                           eps1=p.get("eps1"), eps2=p.get("eps2"))
    side = p.get("side", "codomain")
    count, seed = int(p.get("count", 1)), int(p.get("seed", 0))
    frame_space = cod if side == "codomain" else dom
    seq = from_basis(np.eye(frame_space.dim), frame_space)
    fr, _ = dilate_to_frame(seq, params.eps1)

    gen = stream(seed, "cover-batch", format_spec(dom), format_spec(cod))
    mats = [gen.normal(size=(cod.dim, dom.dim)) for _ in range(count)]

    def one(m: np.ndarray):
        T = Operator(m, dom, cod)
        if params.alpha is None:
            T = Operator(m / op_norm(T).lower, dom, cod)
        return cover_one(T, fr, side, params)

    results = _pmap(one, mats)
    target = 2.0 if params.alpha is None else 2.0 * params.alpha
    rows, findings = [], []
    for i, r in enumerate(results):
        rows.append([i, r.distance, r.bound, r.margin])
        if not r.margin > 0:
            findings.append(f"run {i}: margin {r.margin:.6g} not positive")
        if abs(r.center_norm - target) > 1e-9:
            findings.append(
                f"run {i}: center norm {r.center_norm:.12g} deviates from {target:g}"
            )
    margins = [r.margin for r in results]
    report = {
        "pipeline": "cover",
        "dom": format_spec(dom), "cod": format_spec(cod), "side": side,
        "eps": params.eps, "sigma": params.sigma,
        "alpha": "plain" if params.alpha is None else params.alpha,
        "eps1": params.eps1, "eps2": params.eps2,
        "count": count, "seed": seed,
        "frame_pairs": len(fr),
        "margin_min": min(margins), "margin_mean": sum(margins) / len(margins),
        "center_norm_dev_max": max(abs(r.center_norm - target) for r in results),
        "k0_max": max(r.k0 for r in results),
        "certified_runs": sum(1 for r in results if r.certified),
        "table": {
            "columns": ["id", "distance", "bound", "margin"],
            "rows": rows,
        },
    }
    return report, findings


def _pipeline_constants(cfg: dict, base_dir: Path) -> tuple[dict, list[str]]:
    _require(cfg, ("space", "basis"), "scenario")
    s = parse_spec(cfg["space"] if isinstance(cfg["space"], str) else cfg["space"]["space"])
    basis = _basis_from(cfg["basis"], base_dir)
    rhos = tuple(float(r) for r in cfg.get("rho", [2.0]))
    rep = constants_report(basis, s, rhos)
    report = {
        "pipeline": "constants",
        "space": format_spec(s),
        "bc": rep.bc,
        "ubc": rep.ubc,
        "sign_sup": rep.sign_sup,
        "reflection": {f"{r:g}": v for r, v in rep.reflection.items()},
        "exhaustive": rep.exhaustive,
    }
    return report, list(rep.findings)


def _pipeline_frame(cfg: dict, base_dir: Path) -> tuple[dict, list[str]]:
    _require(cfg, ("space", "basis", "params"), "scenario")
    _require(cfg["params"], ("eps",), "params")
    s = parse_spec(cfg["space"] if isinstance(cfg["space"], str) else cfg["space"]["space"])
    seq = from_basis(_basis_from(cfg["basis"], base_dir), s)
    fr, plan = dilate_to_frame(seq, float(cfg["params"]["eps"]))
    samples = int(cfg["params"].get("samples", 100))
    seed = int(cfg["params"].get("seed", 0))
    summary, findings = _frame_summary(fr, samples, seed)
    report = {"pipeline": "frame", "eps": plan.eps, "lam": plan.lam}
    report.update(summary)
    return report, findings


def _pipeline_dilate(cfg: dict, base_dir: Path) -> tuple[dict, list[str]]:
    _require(cfg, ("space", "basis", "params"), "scenario")
    _require(cfg["params"], ("eps",), "params")
    s = parse_spec(cfg["space"] if isinstance(cfg["space"], str) else cfg["space"]["space"])
    seq = from_basis(_basis_from(cfg["basis"], base_dir), s)
    fr, plan = dilate_to_frame(seq, float(cfg["params"]["eps"]))
    d = DilationSpace(fr, plan)
    samples = int(cfg["params"].get("samples", 100))
    seed = int(cfg["params"].get("seed", 0))
    rep = norm_estimates(d, samples, seed)
    findings = []
    if rep.s_norm > 1.0 + 1e-6:
        findings.append(f"||S|| estimate {rep.s_norm:.12g} exceeds 1")
    report = {
        "pipeline": "dilate", "space": format_spec(s), "eps": plan.eps,
        "lam": plan.lam, "samples": samples, "seed": seed,
        "frame_bound": rep.frame_bound, "block_bound": rep.block_bound,
        "S_norm": rep.s_norm, "T_norm": rep.t_norm, "P_norm": rep.p_norm,
        "ufdd_constant": rep.ufdd_constant,
    }
    return report, findings


def _pipeline_bip(cfg: dict, base_dir: Path) -> tuple[dict, list[str]]:
    _require(cfg, ("space", "params"), "scenario")
    _require(cfg["params"], ("eps",), "params")
    p = cfg["params"]
    Z = parse_spec(cfg["space"] if isinstance(cfg["space"], str) else cfg["space"]["space"])
    basis = tuple(Vector(np.asarray(r, dtype=float), Z) for r in p["subspace"])
    y = Vector(np.asarray(p["y"], dtype=float), Z)
    pts = tuple(Vector(np.asarray(r, dtype=float), Z) for r in p["points"])
    inst = BipInstance(Z, basis, y, pts, float(p["eps"]))
    offset = p.get("offset")
    res = bip_feasible(inst, tol=float(p.get("tol", 1e-8)),
                       diagnostic_offset=None if offset is None else float(offset))
    report = {
        "pipeline": "bip", "space": format_spec(Z), "eps": float(p["eps"]),
        "feasible": res.feasible, "value": res.value,
        "violation": res.violation,
        "witness": None if res.witness is None else res.witness.coords,
        "method": res.method,
    }
    return report, []


_PIPELINES = {
    "cover": _pipeline_cover,
    "constants": _pipeline_constants,
    "frame": _pipeline_frame,
    "dilate": _pipeline_dilate,
    "bip": _pipeline_bip,
}


def run_scenario(config_path: str | Path) -> tuple[dict, list[str], dict[str, bytes]]:
    """Execute a TOML scenario; returns (report, findings, output files)."""
    path = Path(config_path)
    if not path.is_file():
        raise ScenarioError(f"config file not found: {path}")
    try:
        cfg = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as e:
        raise ScenarioError(f"malformed config: {e}") from e
    meta = cfg.get("scenario", {})
    _require(meta, ("name", "pipeline"), "scenario")
    pipeline = meta["pipeline"]
    if pipeline not in _PIPELINES:
        raise ScenarioError(f"unknown pipeline {pipeline!r}")
    body, findings = _PIPELINES[pipeline](cfg, path.parent)
    findings = list(findings) + _check_expectations(body, cfg)
    report = {"name": meta["name"]}
    report.update(body)
    report["findings"] = findings
    report["passed"] = not findings

    outputs: dict[str, bytes] = {}
    rep_cfg = cfg.get("report", {})
    if "json" in rep_cfg:
        outputs[rep_cfg["json"]] = emit_report(report, "json")
    if "csv" in rep_cfg:
        outputs[rep_cfg["csv"]] = emit_report(report, "csv")
    return report, findings, outputs


def _cmd_run(args) -> tuple[dict, list[str]]:
    report, findings, outputs = run_scenario(args.config)
    out_dir = Path(args.out_dir) if args.out_dir else Path.cwd()
    for name, data in outputs.items():
        target = out_dir / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
    return report, findings


# --- argument parsing ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="framecover",
        description="unit-sphere ball coverings, frame dilation, and "
                    "approximation constants on finite l_p-style spaces",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("opnorm", help="certified/estimated operator norm")
    p.add_argument("--matrix", required=True, help="csv file, one matrix row per line")
    p.add_argument("--dom", required=True, help="domain spec, e.g. lp:p=2:n=3")
    p.add_argument("--cod", required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--tail", type=int, default=None)
    p.set_defaults(handler=_cmd_opnorm)

    p = sub.add_parser("constants", help="basis/unconditional constants report")
    p.add_argument("--basis", required=True, help="csv, one basis vector per row")
    p.add_argument("--space", required=True)
    p.add_argument("--rho", type=float, action="append")
    p.set_defaults(handler=_cmd_constants)

    p = sub.add_parser("frame", help="build or check a dilated frame")
    fsub = p.add_subparsers(dest="frame_cmd", required=True)
    fb = fsub.add_parser("build")
    fb.add_argument("--space", required=True)
    fb.add_argument("--basis", required=True)
    fb.add_argument("--eps", type=float, required=True)
    fb.add_argument("--samples", type=int, default=100)
    fb.add_argument("--seed", type=int, default=0)
    fb.add_argument("--out", default=None, help="write frame JSON here")
    fc = fsub.add_parser("check")
    fc.add_argument("--frame", required=True, help="frame JSON file")
    fc.add_argument("--samples", type=int, default=100)
    fc.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_frame)

    p = sub.add_parser("dilate", help="dilation-space norm estimates")
    p.add_argument("--space", required=True)
    p.add_argument("--basis", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_dilate)

    p = sub.add_parser("cover", help="ball-covering construction/verification")
    csub = p.add_subparsers(dest="cover_cmd", required=True)
    cg = csub.add_parser("generate")
    cg.add_argument("--dom", required=True)
    cg.add_argument("--cod", required=True)
    cg.add_argument("--eta", type=float, required=True)
    cg.add_argument("--m-max", type=int, default=1)
    cg.add_argument("--cap", type=int, default=256)
    cg.add_argument("--seed", type=int, default=0)
    co = csub.add_parser("one")
    co.add_argument("--dom", required=True)
    co.add_argument("--cod", required=True)
    co.add_argument("--matrix", required=True)
    co.add_argument("--eps", type=float, required=True)
    co.add_argument("--sigma", type=float, required=True)
    co.add_argument("--alpha", default=None)
    co.add_argument("--eta", type=float, default=None)
    co.add_argument("--side", choices=("codomain", "domain"), default="codomain")
    cv = csub.add_parser("verify")
    cv.add_argument("--dom", required=True)
    cv.add_argument("--cod", required=True)
    cv.add_argument("--centers", required=True,
                    help="csv, one flattened center matrix per row")
    cv.add_argument("--radius", type=float, default=None)
    cv.add_argument("--radii", type=float, nargs="+", default=None)
    cv.add_argument("--delta", type=float, default=0.0)
    cv.add_argument("--alpha", default=None)
    cv.add_argument("--samples", type=int, default=256)
    cv.add_argument("--restarts", type=int, default=64)
    cv.add_argument("--iters", type=int, default=200)
    cv.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_cover)

    p = sub.add_parser("bip", help="ball-intersection feasibility")
    p.add_argument("--space", required=True)
    p.add_argument("--subspace", required=True, help="csv, basis vectors as rows")
    p.add_argument("--y", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--offset", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(handler=_cmd_bip)

    p = sub.add_parser("run", help="execute a TOML scenario")
    p.add_argument("config")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(handler=_cmd_run)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        report, findings = args.handler(args)
    except (ScenarioError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except AssertionError as e:
        print(f"assertion failed: {e}", file=sys.stderr)
        return 1
    sys.stdout.write(emit_report(report).decode())
    return 1 if findings else 0


if __name__ == "__main__":
    sys.exit(main())
