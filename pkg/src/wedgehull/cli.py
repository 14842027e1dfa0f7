"""Command-line front end: ingest problems, dispatch certifiers, emit reports.

Exit codes: 0 success / valid certificate, 2 malformed input, 3 hypothesis
rejected before certification, 4 certificate invalid, 5 classification ends
in NoGuarantee.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .engines import (ambient_wedge_sweep, build_slice, lewy_disc,
                      minwedge_check, minwedge_constants, one_sided_set,
                      shrink_wedge, spike_fit)
from .errors import (CertificateError, PreconditionError, ProblemFormatError,
                     WedgehullError)
from .geometry import WedgeSpec
from .normalform import classify_wedge, levi_data, normal_form
from .problem import (ProblemFile, default_config, load_config, load_problem,
                      merge_config, parse_direction, parse_exact, parse_slopes)
from .report import (build_report, emit_plot, render_figures, render_report,
                     trace_family)
from .screens import disc_trace, folding_disc, verify_screen_hull
from .series import rational_str

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_CERTIFICATE = 4
EXIT_NO_GUARANTEE = 5

CERTIFY_TARGETS = ("screens", "slice", "lewy", "sweep", "one-sided")


def _seed_value(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wedgehull",
        description="Normal forms, wedge classification, and analytic-disc "
                    "certificates for hypersurface/edge extension problems.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, need_input: bool) -> None:
        p.add_argument("--input", required=need_input, metavar="PATH",
                       help="problem file (JSON)")
        p.add_argument("--plot", metavar="DIR",
                       help="write CSV traces and figures into DIR")
        p.add_argument("--seed", type=_seed_value, default=None,
                       help="override the run seed")
        p.add_argument("--config", metavar="PATH", default=None,
                       help="config file merged over the problem's config")
        p.add_argument("--degree-cap", type=int, default=None, dest="degree_cap",
                       help="override the truncation degree")

    p_cls = sub.add_parser("classify", help="normal form, Levi data, wedge verdict")
    common(p_cls, need_input=True)

    p_cert = sub.add_parser("certify", help="run a disc-family certificate")
    p_cert.add_argument("--target", required=True, choices=CERTIFY_TARGETS)
    common(p_cert, need_input=False)

    p_plot = sub.add_parser("plot", help="re-emit CSV traces and figures from a report")
    p_plot.add_argument("--input", required=True, metavar="PATH",
                        help="report file produced by classify/certify")
    p_plot.add_argument("--plot", required=True, metavar="DIR",
                        help="output directory")
    return parser


# ---------------------------------------------------------------------------
# shared config plumbing


def _cfg_int(cfg: dict, key: str, where: str, *, low: int = 1) -> int:
    val = cfg.get(key)
    if not isinstance(val, int) or isinstance(val, bool) or val < low:
        raise ProblemFormatError(f"{key} must be an integer >= {low}, got {val!r}",
                                 where)
    return val


def _cfg_float(cfg: dict, key: str, where: str) -> float:
    val = cfg.get(key)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ProblemFormatError(f"{key} must be a number, got {val!r}", where)
    return float(val)


def _cfg_deltas(cfg: dict, where: str) -> tuple[float, ...]:
    vals = cfg.get("deltas")
    if not isinstance(vals, list) or not vals:
        raise ProblemFormatError("deltas must be a nonempty list", where)
    out = []
    for i, v in enumerate(vals):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v < 1:
            raise ProblemFormatError(f"disc size must lie in (0, 1), got {v!r}",
                                     f"{where}[{i}]")
        out.append(float(v))
    return tuple(sorted(out))


def _tau(problem: ProblemFile):
    raw = problem.config.get("tau")
    if raw is None:
        return None
    return parse_direction(raw, 2 * problem.n + 2, "config.tau")


def _slope_str(t) -> str:
    return ";".join(rational_str(Fraction(c)) for c in t)


# ---------------------------------------------------------------------------
# subcommand payloads


def run_classify(problem: ProblemFile) -> tuple[dict, int]:
    tau = _tau(problem)
    cfg = problem.config["classify"]
    cls = classify_wedge(problem.model, problem.wedge, tau=tau,
                         samples=_cfg_int(cfg, "samples", "config.classify"),
                         seed=problem.seed)
    nf = normal_form(problem.model, tau=tau)
    ld = levi_data(nf)
    diagnostics = dict(cls.diagnostics)
    # identically-zero restricted form: every transversal direction is null
    diagnostics["all_directions_null"] = all(
        c == 0 for row in nf.lam for c in row)
    payload = {
        "lambda": [list(row) for row in nf.lam],
        "omega": [list(row) for row in nf.omega],
        "levi": {"eigenvalues": list(ld.eigenvalues),
                 "signature": list(ld.signature)},
        "verdict": cls.verdict,
        "side": cls.side,
        "witness": cls.witness,
        "witness_ambient": cls.witness_ambient,
        "q_witness": cls.q_witness,
        "diagnostics": diagnostics,
        "margins": {"q_axis": diagnostics["q_axis"],
                    "q_min": diagnostics["q_min"],
                    "q_max": diagnostics["q_max"]},
        "traces": [],
    }
    code = EXIT_NO_GUARANTEE if cls.verdict == "NoGuarantee" else EXIT_OK
    return payload, code


def run_screens(config: dict, seed: int) -> tuple[dict, int]:
    cfg = config["screens"]
    where = "config.screens"
    cert = verify_screen_hull(
        t_count=_cfg_int(cfg, "t_count", where),
        boundary_samples=_cfg_int(cfg, "boundary_samples", where, low=8),
        target_count=_cfg_int(cfg, "target_count", where),
        audit_polynomials=_cfg_int(cfg, "audit_polynomials", where),
        audit_degree=_cfg_int(cfg, "audit_degree", where),
        seed=seed, tol=_cfg_float(cfg, "tol", where))
    rows: list = []
    samples = _cfg_int(cfg, "trace_samples", where, low=4)
    for t in cert.t_grid:
        rows.extend(disc_trace(folding_disc(t), samples))
    for k in range(101):
        e1 = k / 100.0
        rows.append((0.0, "curve_2eta1sq", e1, 2.0 * e1 * e1))
        rows.append((0.0, "curve_half_eta1", e1, e1 / 2.0))
    payload = {
        "certificate": cert.summary(),
        "failures": cert.failures,
        "margins": {"min_boundary_margin": cert.min_boundary_margin,
                    "cross_check_margin": cert.cross_check_margin,
                    "worst_audit_slack": cert.worst_audit_slack},
        "traces": [trace_family("screen_discs", ("t", "arc", "eta1", "eta2"), rows)],
    }
    return payload, EXIT_OK if cert.valid else EXIT_CERTIFICATE


def run_slice(problem: ProblemFile) -> tuple[dict, int]:
    cfg = problem.config["slice"]
    where = "config.slice"
    slopes = parse_slopes(cfg["slopes"], problem.n, f"{where}.slopes")
    box = parse_exact(cfg["box_radius"], f"{where}.box_radius")
    alpha = parse_exact(cfg["alpha"], f"{where}.alpha")
    kappa = parse_exact(cfg["kappa"], f"{where}.kappa")
    nf = normal_form(problem.model, tau=_tau(problem), wedge=problem.wedge,
                     align_axis=True)
    inner, _ = shrink_wedge(problem.wedge)
    inner_nf = WedgeSpec.from_sparse(nf.edge, {"y1": 1}, inner.aperture,
                                     inner.extent, "two")
    delta_ap = kappa * inner.aperture
    entries = []
    rows = []
    ok = True
    for t in slopes:
        sl = build_slice(nf, t, box_radius=box)
        consts = minwedge_constants(delta_ap, sl.big_a, sl.big_b, sl.a_tilde)
        mw = minwedge_check(sl, nf, inner_nf, consts)
        fit = spike_fit(sl, consts, epsilon=mw.epsilon_used, alpha=alpha)
        ok = ok and mw.passed and fit.passed
        entries.append({
            "t": [c for c in t],
            "q_t": sl.q_t,
            "bounds": {"big_a": sl.big_a, "big_b": sl.big_b,
                       "a_tilde": sl.a_tilde, "a_prime": sl.a_prime},
            "constants": {"delta": consts.delta, "gamma": consts.gamma,
                          "epsilon": consts.epsilon, "k_const": consts.k_const},
            "minwedge": {"epsilon_used": mw.epsilon_used,
                         "samples": mw.samples, "failures": len(mw.failures),
                         "min_side_margin": mw.min_side_margin,
                         "min_slope_margin": mw.min_slope_margin,
                         "min_height_margin": mw.min_height_margin,
                         "min_invariant_margin": mw.min_invariant_margin,
                         "comparability": list(mw.comparability)},
            "spike": {"reach": fit.reach, "length": fit.length,
                      "sharpness": fit.beta, "big_a_spike": fit.big_a_spike,
                      "remainder_margin": fit.remainder_margin,
                      "failures": len(fit.failures),
                      "growth": [[name, slope, target]
                                 for name, slope, target in fit.growth]},
        })
        rows.append((_slope_str(t), float(sl.q_t), float(mw.epsilon_used),
                     len(mw.failures) + len(fit.failures), mw.min_side_margin,
                     mw.min_invariant_margin, fit.remainder_margin))
    margin_floor = min(min(e["minwedge"]["min_side_margin"] for e in entries),
                       min(e["spike"]["remainder_margin"] for e in entries))
    payload = {
        "aperture_inner": inner.aperture,
        "delta_aperture": delta_ap,
        "slices": entries,
        "margins": {"worst_margin": margin_floor},
        "traces": [trace_family(
            "slice_checks",
            ("t", "q_t", "epsilon_used", "failures", "min_side_margin",
             "min_invariant_margin", "spike_remainder_margin"), rows)],
    }
    return payload, EXIT_OK if ok else EXIT_CERTIFICATE


def run_lewy(problem: ProblemFile) -> tuple[dict, int]:
    cfg = problem.config["lewy"]
    where = "config.lewy"
    n = problem.n
    raw_sigma = cfg.get("sigma")
    if raw_sigma is None:
        sigma = tuple(Fraction(1 if j == 0 else 0) for j in range(n))
    else:
        sigma = parse_direction(raw_sigma, n, f"{where}.sigma")
    deltas = _cfg_deltas(cfg, f"{where}.deltas")
    nf = normal_form(problem.model, tau=_tau(problem))
    discs = []
    for k, delta in enumerate(deltas):
        discs.append(lewy_disc(
            nf, sigma, delta,
            angles=_cfg_int(cfg, "angles", where, low=16),
            march_steps=_cfg_int(cfg, "march_steps", where, low=8),
            aperture=parse_exact(cfg["aperture"], f"{where}.aperture"),
            extent=parse_exact(cfg["extent"], f"{where}.extent"),
            ring_depth=_cfg_int(cfg, "ring_depth", where),
            ring_angles=_cfg_int(cfg, "ring_angles", where, low=4),
            audit_polynomials=_cfg_int(cfg, "audit_polynomials", where),
            audit_degree=_cfg_int(cfg, "audit_degree", where),
            audit_tol=_cfg_float(cfg, "audit_tol", where),
            seed=problem.seed))

    def center_vec(disc) -> np.ndarray:
        comp = np.asarray(disc.center)
        return np.concatenate([comp.real, comp.imag])

    # tangent of the center curve against the transversal axis
    diff = center_vec(discs[-1]) - center_vec(discs[0])
    axis = np.zeros(2 * (n + 1))
    axis[-1] = 1.0
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        tangency = 0.0
    else:
        cosv = abs(float(diff @ axis)) / norm
        tangency = math.acos(min(1.0, cosv))

    entries = []
    traces = []
    for k, disc in enumerate(discs):
        counts = {"plus": 0, "minus": 0, "edge": 0}
        for lab in disc.labels:
            counts[lab] += 1
        entries.append({
            "delta": disc.delta,
            "modified": disc.modified,
            "q_sigma": disc.q_sigma,
            "scale": disc.scale,
            "center": [[z.real, z.imag] for z in disc.center],
            "crossings": disc.crossings,
            "edge_hits": disc.edge_hits,
            "labels": counts,
            "radius": {"min": float(np.min(disc.radii)),
                       "max": float(np.max(disc.radii))},
            "interior_max_height": disc.interior_max_height,
            "audit_slack": disc.audit_slack,
        })
        thetas = np.linspace(0.0, 2.0 * math.pi, len(disc.radii), endpoint=False)
        zetas = disc.radii * np.exp(1j * thetas)
        rows = [(lab, float(z.real), float(z.imag), float(w.real), float(w.imag))
                for lab, z, w in zip(disc.labels, zetas, disc.boundary_complex[:, 1])]
        traces.append(trace_family(
            f"lewy_disc_{k + 1}",
            ("label", "re_zeta", "im_zeta", "re_w", "im_w"), rows))
    payload = {
        "sigma": list(sigma),
        "sigma_scaled_norm_sq": 2,
        "deltas": list(deltas),
        "tangency_angle": tangency,
        "discs": entries,
        "margins": {
            "interior_max_height": max(e["interior_max_height"] for e in entries),
            "audit_slack": max(e["audit_slack"] for e in entries),
            "tangency_angle": tangency,
        },
        "traces": traces,
    }
    return payload, EXIT_OK


def run_sweep(problem: ProblemFile) -> tuple[dict, int]:
    cfg = problem.config["sweep"]
    where = "config.sweep"
    sample = ambient_wedge_sweep(
        problem.model, problem.wedge,
        t_count=_cfg_int(cfg, "t_count", where, low=2),
        alpha=parse_exact(cfg["alpha"], f"{where}.alpha"),
        kappa=parse_exact(cfg["kappa"], f"{where}.kappa"),
        box_radius=parse_exact(cfg["box_radius"], f"{where}.box_radius"),
        union_samples=_cfg_int(cfg, "union_samples", where, low=100),
        seed=problem.seed,
        max_radius=parse_exact(cfg["max_radius"], f"{where}.max_radius"))
    rows = []
    cells = []
    for cell in sample.cells:
        rows.append((cell.side, _slope_str(cell.t), float(cell.q_t),
                     float(cell.minwedge.epsilon_used),
                     cell.minwedge.min_side_margin,
                     float(cell.spike.reach), cell.union_min_margin,
                     float(cell.delta_t)))
        cells.append({
            "side": cell.side,
            "t": [c for c in cell.t],
            "q_t": cell.q_t,
            "minwedge": {"failures": len(cell.minwedge.failures),
                         "epsilon_used": cell.minwedge.epsilon_used,
                         "min_side_margin": cell.minwedge.min_side_margin,
                         "min_invariant_margin": cell.minwedge.min_invariant_margin},
            "spike": {"failures": len(cell.spike.failures),
                      "reach": cell.spike.reach,
                      "remainder_margin": cell.spike.remainder_margin},
            "union_min_margin": cell.union_min_margin,
            "delta_t": cell.delta_t,
        })
    payload = {
        "verdict": sample.verdict,
        "radius": sample.radius,
        "gamma": sample.gamma,
        "alpha": sample.alpha,
        "alpha_hat": sample.alpha_hat,
        "kappa": sample.kappa,
        "delta_aperture": sample.delta_aperture,
        "delta": sample.delta,
        "delta_float": float(sample.delta),
        "axis_plus": list(sample.axis_plus),
        "axis_minus": list(sample.axis_minus),
        "slope_radius": sample.slope_radius,
        "bounds": sample.bounds,
        "neighborhood_note": sample.neighborhood_note,
        "cells": cells,
        "margins": {
            "delta": float(sample.delta),
            "worst_union_margin": min(c.union_min_margin for c in sample.cells),
            "worst_side_margin": min(c.minwedge.min_side_margin
                                     for c in sample.cells),
        },
        "traces": [trace_family(
            "sweep_cells",
            ("side", "t", "q_t", "epsilon_used", "min_side_margin",
             "spike_reach", "union_min_margin", "delta_t"), rows)],
    }
    return payload, EXIT_OK if sample.passed else EXIT_CERTIFICATE


def run_one_sided(problem: ProblemFile) -> tuple[dict, int]:
    cfg = problem.config["one_sided"]
    where = "config.one_sided"
    rep = one_sided_set(
        problem.model, problem.wedge,
        deltas=_cfg_deltas(cfg, f"{where}.deltas"),
        offset=parse_exact(cfg["offset"], f"{where}.offset"),
        resolution=_cfg_float(cfg, "resolution", where),
        angles=_cfg_int(cfg, "angles", where, low=16),
        march_steps=_cfg_int(cfg, "march_steps", where, low=8),
        seed=problem.seed)
    rows = [(r["base"], r["tau"], ";".join(r["sigma"]), r["plus"], r["minus"],
             r["edge"], r["tangency"]) for r in rep.records]
    payload = {
        "side": rep.side,
        "flipped": rep.flipped,
        "two_sided_evidence": rep.two_sided_evidence,
        "deltas": list(rep.deltas),
        "resolution": rep.resolution,
        "cloud_size": rep.cloud_size,
        "tangency_max": rep.tangency_max,
        "sigma_skipped": rep.sigma_skipped,
        "cones": list(rep.cones),
        "records": list(rep.records),
        "margins": {"tangency_max": rep.tangency_max,
                    "cone_defect": max((c["max_defect"] for c in rep.cones),
                                       default=0.0)},
        "traces": [trace_family(
            "one_sided_records",
            ("base", "tau", "sigma", "plus", "minus", "edge", "tangency"),
            rows)],
    }
    return payload, EXIT_OK if rep.two_sided_evidence else EXIT_CERTIFICATE


# ---------------------------------------------------------------------------
# dispatch


def _run_plot(args) -> int:
    import json

    path = Path(args.input)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFormatError(f"cannot read report: {exc}", str(path))
    try:
        report = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid JSON: {exc.msg}",
                                 f"{path.name}:line {exc.lineno}")
    if not isinstance(report, dict):
        raise ProblemFormatError("report must be a JSON object", path.name)
    emit_plot(report, args.plot)
    render_figures(report, args.plot)
    return EXIT_OK


def _dispatch(args) -> int:
    if args.command == "plot":
        return _run_plot(args)

    target = getattr(args, "target", None)
    problem = None
    if args.input is None:
        # only the screens family is self-contained
        if target != "screens":
            raise ProblemFormatError("--input is required for this target",
                                     "cli")
        config = default_config()
        if args.config is not None:
            config = merge_config(config, load_config(args.config), "config-file")
        if args.seed is not None:
            config["seed"] = args.seed
        digest = ""
        degree_cap = None
        n_seed = int(config["seed"])
    else:
        problem = load_problem(args.input, cap_override=args.degree_cap,
                               config_path=args.config, seed_override=args.seed)
        config = problem.config
        digest = problem.digest
        degree_cap = problem.degree_cap
        n_seed = problem.seed

    started = time.perf_counter()
    if args.command == "classify":
        payload, code = run_classify(problem)
    elif target == "screens":
        payload, code = run_screens(config, n_seed)
    elif target == "slice":
        payload, code = run_slice(problem)
    elif target == "lewy":
        payload, code = run_lewy(problem)
    elif target == "sweep":
        payload, code = run_sweep(problem)
    else:
        payload, code = run_one_sided(problem)
    timing_ms = (time.perf_counter() - started) * 1000.0

    report = build_report(command=args.command, target=target,
                          version=__version__, input_digest=digest,
                          seed=n_seed, degree_cap=degree_cap, config=config,
                          payload=payload, timing_ms=timing_ms)
    sys.stdout.write(render_report(report))
    if args.plot:
        emit_plot(report, args.plot)
        render_figures(report, args.plot)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ProblemFormatError as exc:
        print(f"wedgehull: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"wedgehull: hypothesis rejected: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except CertificateError as exc:
        print(f"wedgehull: certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except WedgehullError as exc:
        print(f"wedgehull: error: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE


if __name__ == "__main__":
    sys.exit(main())
