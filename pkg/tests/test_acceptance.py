"""Acceptance gate: one criterion per test, one PASS/FAIL line per criterion."""

from __future__ import annotations

import json
import random
import re
from fractions import Fraction
from pathlib import Path

import numpy as np

from wedgehull.cli import main as cli_main
from wedgehull.engines import (ambient_wedge_sweep, build_slice, lewy_disc,
                               minwedge_check, minwedge_constants,
                               shrink_wedge, spike_fit)
from wedgehull.geometry import WedgeSpec
from wedgehull.normalform import classify_wedge, levi_data, normal_form
from wedgehull.problem import load_problem
from wedgehull.screens import (scaling_constants, spike_constants,
                               spike_union_check, verify_screen_hull)
from wedgehull.series import (PolyMap, TruncatedPoly, compose_maps,
                              graph_solve, invert_map_truncated, substitute)

F = Fraction
PROBLEMS = Path(__file__).resolve().parent.parent / "problems"
SADDLE = PROBLEMS / "example-1.2.json"
ROTATION = PROBLEMS / "example-1.3.json"


def check(num: int, label: str, failures: list) -> None:
    status = "PASS" if not failures else f"FAIL ({'; '.join(failures)})"
    print(f"[criterion {num}] {label}: {status}")
    assert not failures, f"criterion {num}: {failures}"


def _wedge(problem, components, aperture=None, sides="two"):
    return WedgeSpec.from_sparse(problem.model.edge, components,
                                 aperture if aperture is not None
                                 else problem.wedge.aperture,
                                 problem.wedge.extent, sides)


def test_criterion_1_normal_form_goldens():
    failures = []
    saddle = load_problem(SADDLE)
    nf = normal_form(saddle.model)
    if nf.lam != ((F(1), F(0)), (F(0), F(-1))):
        failures.append(f"saddle lambda {nf.lam}")
    if any(c != 0 for row in nf.omega for c in row):
        failures.append(f"saddle omega {nf.omega}")

    rotation = load_problem(ROTATION)
    nf2 = normal_form(rotation.model)
    if any(c != 0 for row in nf2.lam for c in row):
        failures.append(f"rotation lambda {nf2.lam}")
    if nf2.omega != ((F(0), F(-1)), (F(1), F(0))):
        failures.append(f"rotation omega {nf2.omega}")
    eig = sorted(levi_data(nf2).eigenvalues)
    if abs(eig[0] + 1.0) > 1e-12 or abs(eig[1] - 1.0) > 1e-12:
        failures.append(f"rotation eigenvalues {eig}")
    eig1 = sorted(levi_data(nf).eigenvalues)
    if abs(eig1[0] + 1.0) > 1e-12 or abs(eig1[1] - 1.0) > 1e-12:
        failures.append(f"saddle eigenvalues {eig1}")
    check(1, "exact quadratic normal forms and unit spectra", failures)


def test_criterion_2_classification_goldens():
    failures = []
    saddle = load_problem(SADDLE)
    got = classify_wedge(saddle.model, saddle.wedge)
    if got.verdict != "TwoSidedExtension":
        failures.append(f"saddle null axis gave {got.verdict}")

    one = classify_wedge(saddle.model, _wedge(saddle, {"y1": 1}))
    if (one.verdict, one.side) != ("OneSidedExtension", "r<0"):
        failures.append(f"saddle positive axis gave {one.verdict}/{one.side}")

    rotation = load_problem(ROTATION)
    axes = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (-1, 2), (3, -2), (-2, -3)]
    for a, b in axes:
        got = classify_wedge(rotation.model,
                             _wedge(rotation, {"y1": a, "y2": b}))
        if got.verdict != "TwoSidedExtension":
            failures.append(f"rotation axis ({a},{b}) gave {got.verdict}")
    check(2, "wedge verdicts on the bundled examples", failures)


def test_criterion_3_series_roundtrips():
    failures = []
    rng = random.Random(2024)
    cap = 6

    def rand_poly(vars, n_terms):
        coeffs = {}
        for _ in range(n_terms):
            deg = rng.randint(0, cap)
            exp = [0] * len(vars)
            for _ in range(deg):
                exp[rng.randrange(len(vars))] += 1
            coeffs[tuple(exp)] = F(rng.randint(-9, 9), rng.randint(1, 9))
        return TruncatedPoly(vars, cap, coeffs)

    for i in range(100):
        nv = rng.randint(2, 3)
        vars = tuple(f"s{j}" for j in range(nv))
        comps = []
        for j in range(nv):
            tail = rand_poly(vars, 3)
            tail = tail - tail.parts_through(1)
            comps.append(TruncatedPoly.variable(vars[j], vars, cap) + tail)
        m = PolyMap(vars, vars, tuple(comps))
        g = invert_map_truncated(m)
        if compose_maps(g, m, cap) != PolyMap.identity(vars, cap) or \
                compose_maps(m, g, cap) != PolyMap.identity(vars, cap):
            failures.append(f"inversion round-trip {i} not identity")
            break

    vars = ("a", "b", "v")
    for i in range(100):
        tail = rand_poly(vars, 4)
        tail = tail - tail.parts_through(1)
        r = TruncatedPoly.from_terms([(F(-1), {"v": 1})], vars, cap) + tail
        h = graph_solve(r, "v", cap)
        values = {"a": TruncatedPoly.variable("a", ("a", "b"), cap),
                  "b": TruncatedPoly.variable("b", ("a", "b"), cap),
                  "v": h}
        if not substitute(r, values, cap).is_zero():
            failures.append(f"graph back-substitution {i} nonzero")
            break
    check(3, "exact series inversion and implicit-solve residuals", failures)


def test_criterion_4_screen_certificate():
    failures = []
    cert = verify_screen_hull(t_count=64, boundary_samples=1000,
                              target_count=50, audit_polynomials=20,
                              audit_degree=4, seed=0, tol=1e-6)
    if not cert.valid:
        failures.append(f"certificate invalid: {cert.failures[:3]}")
    if not cert.min_boundary_margin > 1e-9:
        failures.append(f"boundary margin {cert.min_boundary_margin}")
    if not cert.worst_audit_slack <= 1e-6:
        failures.append(f"audit slack {cert.worst_audit_slack}")
    if any(not audit.passed for audit in cert.audits):
        failures.append("some disc audit failed")
    check(4, "disc-family hull certificate on the default grid", failures)


def test_criterion_5_screen_and_spike_constants():
    failures = []
    scaling = scaling_constants(1, 1)
    if scaling.big_a != 8:
        failures.append(f"scaling big_a {scaling.big_a}")
    if scaling.delta != F(1, 32):
        failures.append(f"scaling delta {scaling.delta}")
    spike = spike_constants(1, 1, 1, 1)
    if not spike.all_pass():
        failures.append(f"spike self-audit {spike.audit}")

    for path, slope in ((SADDLE, (F(3, 512),)), (ROTATION, (F(1),))):
        problem = load_problem(path)
        nf = normal_form(problem.model, wedge=problem.wedge, align_axis=True)
        inner, kappa = shrink_wedge(problem.wedge)
        consts = minwedge_constants(kappa * inner.aperture, 0, 0,
                                    4 if path == SADDLE else 0)
        sl = build_slice(nf, slope)
        fit = spike_fit(sl, consts, epsilon=consts.epsilon
                        if path == SADDLE else F(1, 9))
        sc = spike_constants(fit.big_a_spike, fit.beta, fit.length, fit.reach)
        out = spike_union_check(sc.epsilon, sc.k_const, fit.q1, fit.q2, fit.m,
                                fit.big_a_spike, fit.beta, fit.length,
                                fit.reach, samples=100000, seed=0)
        if not out["all_contained"] or out["samples"] != 100000:
            failures.append(f"{path.name} union check {out['min_margin']}")
    check(5, "exact screen constants and the bulk union check", failures)


def test_criterion_6_slice_machinery():
    failures = []
    for path in (SADDLE, ROTATION):
        problem = load_problem(path)
        nf = normal_form(problem.model, wedge=problem.wedge, align_axis=True)
        inner, kappa = shrink_wedge(problem.wedge)
        inner_nf = WedgeSpec.from_sparse(nf.edge, {"y1": 1}, inner.aperture,
                                         inner.extent, "two")
        sl = build_slice(nf, (F(0),))
        consts = minwedge_constants(kappa * inner.aperture, sl.big_a,
                                    sl.big_b, sl.a_tilde)
        mw = minwedge_check(sl, nf, inner_nf, consts)
        if mw.failures:
            failures.append(f"{path.name} wedge membership {len(mw.failures)}")
        fit = spike_fit(sl, consts, epsilon=mw.epsilon_used)
        if fit.failures:
            failures.append(f"{path.name} spike fit {len(fit.failures)}")

    saddle = load_problem(SADDLE)
    sweep12 = ambient_wedge_sweep(saddle.model, saddle.wedge,
                                  union_samples=20000)
    if not (sweep12.radius > 0 and sweep12.delta > 0 and sweep12.passed):
        failures.append(f"saddle sweep radius {sweep12.radius} "
                        f"delta {sweep12.delta}")

    rotation = load_problem(ROTATION)
    sweep13 = ambient_wedge_sweep(rotation.model, rotation.wedge,
                                  union_samples=20000)
    slopes = {cell.t[0] for cell in sweep13.cells}
    if sweep13.radius != 1 or slopes != {F(-1), F(-1, 2), F(0), F(1, 2), F(1)}:
        failures.append(f"rotation sweep grid radius {sweep13.radius}")
    if not (sweep13.delta > 0 and sweep13.passed):
        failures.append(f"rotation sweep delta {sweep13.delta}")
    check(6, "slice membership, spike fits, and two-sided sweeps", failures)


def test_criterion_7_attached_discs():
    failures = []
    problem = load_problem(SADDLE)
    nf = normal_form(problem.model)
    centers = []
    for delta in (0.01, 0.03, 0.05):
        disc = lewy_disc(nf, (1, 0), delta)
        centers.append(np.concatenate([np.asarray(disc.center).real,
                                       np.asarray(disc.center).imag]))
        bad = set(disc.labels) - {"plus", "minus", "edge"}
        if bad:
            failures.append(f"delta {delta} stray labels {bad}")
        if disc.crossings != 2:
            failures.append(f"delta {delta} crossings {disc.crossings}")
        if disc.interior_max_height >= 0:
            failures.append(f"delta {delta} interior height "
                            f"{disc.interior_max_height}")
    diff = centers[-1] - centers[0]
    axis = np.zeros(6)
    axis[-1] = 1.0
    angle = float(np.arccos(min(1.0, abs(diff @ axis) /
                                np.linalg.norm(diff))))
    if angle > 1e-3:
        failures.append(f"center-curve tangency angle {angle}")
    check(7, "attached disc boundaries, crossings, and tangency", failures)


def test_criterion_8_determinism(capsys):
    failures = []
    runs = [
        ["classify", "--input", str(SADDLE), "--seed", "5"],
        ["certify", "--target", "sweep", "--input", str(SADDLE),
         "--seed", "5"],
        ["certify", "--target", "lewy", "--input", str(SADDLE), "--seed", "5"],
    ]
    for argv in runs:
        outs = []
        for _ in range(2):
            code = cli_main(argv)
            captured = capsys.readouterr()
            if code != 0:
                failures.append(f"{argv[0]} exited {code}")
            outs.append(re.sub(r'"timing_ms": [-0-9.eE+]+', '"timing_ms": 0',
                               captured.out))
        if outs[0] != outs[1]:
            failures.append(f"{' '.join(argv[:2])} bytes differ")
    with capsys.disabled():
        print()
        check(8, "byte-identical reports under a fixed seed", failures)
