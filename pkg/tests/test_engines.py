"""Disc engines: slices, wedge membership, spikes, sweeps, attached discs."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from wedgehull.engines import (
    AmbientWedgeSample,
    ambient_wedge_sweep,
    build_slice,
    coefficient_bound,
    edge_trace,
    form_value,
    hat_change,
    lewy_disc,
    minwedge_check,
    minwedge_constants,
    one_sided_set,
    restricted_form,
    shrink_wedge,
    spike_fit,
    _flip_model,
)
from wedgehull.errors import CertificateError, PreconditionError
from wedgehull.geometry import EdgeModel, WedgeSpec, ambient_vars
from wedgehull.normalform import HypersurfaceModel, normal_form
from wedgehull.screens import spike_constants, spike_union_check
from wedgehull.series import TruncatedPoly, compose_truncated

F = Fraction
CAP = 6


def poly(terms, vars, cap=CAP):
    return TruncatedPoly.from_terms(terms, vars, cap)


def graph_vars(n=2):
    return ambient_vars(n)[:-1]


def saddle_model():
    h = poly([(F(1), {"y1": 2}), (F(-1), {"y2": 2})], graph_vars())
    return HypersurfaceModel.from_graph(h, EdgeModel.flat(2, CAP))


def rotation_model():
    h = poly([(F(1), {"y1": 1, "x2": 1}), (F(-1), {"y2": 1, "x1": 1})],
             graph_vars())
    return HypersurfaceModel.from_graph(h, EdgeModel.flat(2, CAP))


def saddle_null_wedge(aperture=F(1, 10)):
    edge = EdgeModel.flat(2, CAP)
    return WedgeSpec.from_sparse(edge, {"y1": 1, "y2": 1}, aperture, F(1), "two")


def rotation_wedge():
    edge = EdgeModel.flat(2, CAP)
    return WedgeSpec.from_sparse(edge, {"y1": 1}, F(20), F(1), "two")


# ---------------------------------------------------------------------------
# exact form and bound helpers


def test_restricted_form_saddle():
    lam = ((F(1), F(0)), (F(0), F(-1)))
    assert restricted_form(lam, (F(1, 3),)) == F(8, 9)
    assert restricted_form(lam, (F(1),)) == 0


def test_restricted_form_aligned_saddle():
    lam = ((F(0), F(2)), (F(2), F(0)))
    assert restricted_form(lam, (F(1, 5),)) == F(4, 5)


def test_form_value_matches_restricted():
    lam = ((F(2), F(1)), (F(1), F(-3)))
    assert form_value(lam, (1, 2)) == restricted_form(lam, (2,))


def test_coefficient_bound_by_hand():
    p = poly([(F(3), {"xi1": 4}), (F(2), {"xi1": 2, "xi2": 2})],
             ("xi1", "xi2"))
    assert coefficient_bound(p, F(1, 2), 2) == F(5, 4)
    assert coefficient_bound(p, F(1, 2), 0) == F(3, 16) + F(2, 16)


def test_coefficient_bound_rejects_low_order():
    p = poly([(F(1), {"xi1": 1})], ("xi1", "xi2"))
    with pytest.raises(CertificateError):
        coefficient_bound(p, F(1), 2)


def test_coefficient_bound_dominates_samples():
    rng = random.Random(7)
    for _ in range(20):
        terms = []
        for e1 in range(5):
            for e2 in range(5):
                if e1 + e2 <= CAP and rng.random() < 0.4:
                    terms.append((F(rng.randint(-9, 9), rng.randint(1, 5)),
                                  {"xi1": e1, "xi2": e2}))
        if not terms:
            continue
        p = poly(terms, ("xi1", "xi2"))
        bound = float(coefficient_bound(p, F(1, 2), 0))
        for _ in range(30):
            ang = rng.uniform(0, 2 * math.pi)
            r = 0.5 * rng.random()
            val = abs(p.eval_float([r * math.cos(ang), r * math.sin(ang)]))
            assert val <= bound + 1e-12


# ---------------------------------------------------------------------------
# slices


def test_slice_form_values_and_zero_blocks():
    nf = normal_form(saddle_model())
    sl = build_slice(nf, (F(1, 3),))
    assert sl.q_t == F(8, 9)
    assert sl.big_a == 0 and sl.big_b == 0
    assert sl.block_free.is_zero() and sl.block_cubic.is_zero()


def test_slice_aligned_form_is_linear_in_slope():
    nf = normal_form(saddle_model(), wedge=saddle_null_wedge(), align_axis=True)
    for t in (F(0), F(1, 8), F(-1, 3)):
        sl = build_slice(nf, (t,))
        assert sl.q_t == 4 * t


def test_slice_rotation_height_vanishes():
    nf = normal_form(rotation_model())
    sl = build_slice(nf, (F(2, 5),))
    assert sl.q_t == 0
    assert sl.chi.is_zero()
    assert sl.big_a == 0 and sl.a_tilde == 0 and sl.a_prime == 0


def test_slice_surface_point_sits_on_graph():
    nf = normal_form(saddle_model())
    sl = build_slice(nf, (F(1, 4),))
    p = sl.surface_point(0.1, 0.05, -0.2)
    resid = abs(-p[5] + nf.h.eval_float(list(p[:5])))
    assert resid < 1e-14


def test_slice_rejects_big_slope_and_bad_box():
    nf = normal_form(saddle_model())
    with pytest.raises(PreconditionError):
        build_slice(nf, (F(3, 2),))
    with pytest.raises(PreconditionError):
        build_slice(nf, (F(0),), box_radius=F(2))


def test_slice_random_graphs_reassemble():
    # the exact regrading identity is asserted inside build_slice
    rng = random.Random(3)
    gv = graph_vars()
    for _ in range(20):
        terms = [(F(rng.randint(-2, 2)), {"y1": 2}),
                 (F(rng.randint(-2, 2)), {"y2": 2}),
                 (F(rng.randint(-2, 2)), {"x1": 1, "y2": 1})]
        for _ in range(4):
            exps = {}
            total = 0
            for v in ("x1", "x2", "y1", "y2", "u"):
                e = rng.randint(0, 2)
                total += e
                if e:
                    exps[v] = e
            if 3 <= total <= CAP and ("y1" in exps or "y2" in exps):
                terms.append((F(rng.randint(-3, 3), rng.randint(1, 4)), exps))
        h = poly(terms, gv)
        if h.is_zero():
            continue
        model = HypersurfaceModel.from_graph(h, EdgeModel.flat(2, CAP))
        nf = normal_form(model)
        t = (F(rng.randint(-4, 4), 5),)
        sl = build_slice(nf, t)
        assert sl.q_t == restricted_form(nf.lam, t)
        assert sl.big_a >= 0 and sl.a_tilde >= sl.big_a


def test_edge_trace_quartic_drift():
    gv = graph_vars()
    edge = EdgeModel(2, (poly([(F(1), {"x1": 4})], ("x1", "x2", "u")),
                         TruncatedPoly.zero(("x1", "x2", "u"), CAP)),
                     TruncatedPoly.zero(("x1", "x2", "u"), CAP))
    h = poly([(F(1), {"y1": 2}), (F(-1), {"y2": 2})], gv)
    model = HypersurfaceModel.from_graph(h, edge)
    nf = normal_form(model)
    sl = build_slice(nf, (F(0),))
    ys, v = edge_trace(sl, (0.1, 0.0))
    assert abs(ys[0] - 1e-4) < 1e-12
    assert abs(ys[1]) < 1e-15 and abs(v) < 1e-15
    assert sl.big_b > 0


# ---------------------------------------------------------------------------
# budget constants


def test_minwedge_constants_unit_oracle():
    c = minwedge_constants(1, 1, 1, 1)
    assert c.gamma == F(1, 4)
    assert c.epsilon == F(1, 16)
    assert c.k_const == 9
    assert c.all_pass


def test_minwedge_constants_zero_tilde_bound():
    c = minwedge_constants(F(1, 2), 0, 0, 0)
    assert c.epsilon == 1 and c.k_const == 1
    assert c.all_pass


def test_minwedge_constants_random_audit():
    rng = random.Random(11)
    for _ in range(30):
        delta = F(rng.randint(1, 40), rng.randint(1, 40))
        a = F(rng.randint(0, 30), rng.randint(1, 10))
        b = F(rng.randint(0, 30), rng.randint(1, 10))
        at = a + F(rng.randint(0, 20), rng.randint(1, 5))
        c = minwedge_constants(delta, a, b, at)
        assert c.all_pass
        assert c.sqrt_eps ** 2 == c.epsilon
        assert c.k_const >= 1


def test_minwedge_constants_monotone_in_delta():
    rng = random.Random(5)
    for _ in range(20):
        a = F(rng.randint(0, 10), rng.randint(1, 4))
        b = F(rng.randint(0, 10), rng.randint(1, 4))
        at = a + F(rng.randint(0, 10), rng.randint(1, 4))
        delta = F(rng.randint(1, 12), rng.randint(1, 12))
        wide = minwedge_constants(delta, a, b, at)
        narrow = minwedge_constants(delta / 2, a, b, at)
        assert narrow.gamma == wide.gamma / 2
        assert narrow.k_const >= wide.k_const
        assert narrow.k_const >= 16 * b / delta or b == 0


def test_minwedge_constants_rejections():
    with pytest.raises(PreconditionError):
        minwedge_constants(0, 1, 1, 1)
    with pytest.raises(PreconditionError):
        minwedge_constants(1, -1, 0, 0)


# ---------------------------------------------------------------------------
# wedge membership


def aligned_saddle_setup():
    wedge = saddle_null_wedge()
    nf = normal_form(saddle_model(), wedge=wedge, align_axis=True)
    inner, kappa = shrink_wedge(wedge)
    delta_ap = kappa * inner.aperture
    inner_nf = WedgeSpec.from_sparse(nf.edge, {"y1": 1}, wedge.aperture / 2,
                                     wedge.extent / 2, "two")
    return nf, inner_nf, delta_ap


def test_shrink_wedge_halves_exactly():
    w = saddle_null_wedge()
    inner, kappa = shrink_wedge(w)
    assert inner.aperture == w.aperture / 2
    assert inner.extent == w.extent / 2
    assert kappa == F(1, 2)


def test_minwedge_check_saddle_zero_failures():
    nf, inner_nf, delta_ap = aligned_saddle_setup()
    sl = build_slice(nf, (F(0),))
    c = minwedge_constants(delta_ap, sl.big_a, sl.big_b, sl.a_tilde)
    rep = minwedge_check(sl, nf, inner_nf, c)
    assert rep.passed
    assert rep.min_side_margin > 0
    assert rep.min_slope_margin > 0
    assert rep.min_height_margin > 0
    assert rep.min_invariant_margin >= 0
    assert rep.comparability[0] >= 0.99


def test_minwedge_check_rotation_full_slope():
    wedge = rotation_wedge()
    nf = normal_form(rotation_model(), wedge=wedge, align_axis=True)
    inner = WedgeSpec.from_sparse(nf.edge, {"y1": 1}, F(10), F(1, 2), "two")
    c = minwedge_constants(F(5), 0, 0, 0)
    sl = build_slice(nf, (F(1),))
    rep = minwedge_check(sl, nf, inner, c)
    assert rep.passed
    assert rep.epsilon_used == F(1, 9)
    # the slope sits strictly inside the certified rate
    assert rep.min_invariant_margin > 0


def test_minwedge_check_rejects_slope_beyond_gamma():
    nf, inner_nf, delta_ap = aligned_saddle_setup()
    sl = build_slice(nf, (F(1, 2),))
    c = minwedge_constants(delta_ap, sl.big_a, sl.big_b, sl.a_tilde)
    with pytest.raises(PreconditionError):
        minwedge_check(sl, nf, inner_nf, c)


# ---------------------------------------------------------------------------
# spikes


def test_spike_fit_saddle_exact_polynomials():
    nf, _, delta_ap = aligned_saddle_setup()
    t = (F(3, 512),)
    sl = build_slice(nf, t)
    c = minwedge_constants(delta_ap, sl.big_a, sl.big_b, sl.a_tilde)
    fit = spike_fit(sl, c)
    assert fit.passed
    assert fit.reach == F(1, 32)
    assert fit.big_a_spike == F(1, 256)
    q = sl.q_t
    cap4 = 4 * CAP
    xi = ("xi1", "xi2")
    norm4 = (TruncatedPoly.variable("xi1", xi, cap4) ** 2 +
             TruncatedPoly.variable("xi2", xi, cap4) ** 2) ** 2
    assert fit.q1 == norm4 * c.k_const
    assert fit.q2 == norm4 * norm4 * q
    assert fit.m == norm4 * (2 * q)
    assert fit.remainder_margin >= 0


def test_spike_fit_growth_exponents():
    nf, _, delta_ap = aligned_saddle_setup()
    sl = build_slice(nf, (F(3, 512),))
    c = minwedge_constants(delta_ap, sl.big_a, sl.big_b, sl.a_tilde)
    fit = spike_fit(sl, c)
    by_name = {name: slope for name, slope, _ in fit.growth}
    assert abs(by_name["floor"] - 4.0) < 0.05
    assert by_name["height"] >= 3.8 or by_name["height"] == math.inf
    assert by_name["tilt"] >= 1.8 or by_name["tilt"] == math.inf


def test_spike_fit_rejects_large_form_value():
    nf = normal_form(saddle_model())
    sl = build_slice(nf, (F(0),))  # q_t = 1
    c = minwedge_constants(F(1, 40), sl.big_a, sl.big_b, sl.a_tilde)
    with pytest.raises(PreconditionError, match="slope budget"):
        spike_fit(sl, c)


def test_spike_fit_chain_feeds_union_certificate():
    wedge = rotation_wedge()
    nf = normal_form(rotation_model(), wedge=wedge, align_axis=True)
    sl = build_slice(nf, (F(1),))
    c = minwedge_constants(F(5), 0, 0, 0)
    fit = spike_fit(sl, c, epsilon=F(1, 9))
    assert fit.reach == F(1, 4)
    assert fit.length == F(1, 18)
    assert fit.big_a_spike == F(1, 4)
    sc = spike_constants(fit.big_a_spike, fit.beta, fit.length, fit.reach)
    assert sc.epsilon == F(1, 72)
    assert sc.k_const == 16
    assert sc.delta == F(1, 2654208)
    out = spike_union_check(sc.epsilon, sc.k_const, fit.q1, fit.q2, fit.m,
                            fit.big_a_spike, fit.beta, fit.length, fit.reach,
                            samples=20000, seed=1)
    assert out["all_contained"]


# ---------------------------------------------------------------------------
# the sweep


def test_sweep_saddle_positive_radius():
    sample = ambient_wedge_sweep(saddle_model(), saddle_null_wedge(),
                                 union_samples=4000)
    assert sample.passed
    assert sample.radius == F(3, 512)
    assert sample.gamma == F(1, 160)
    assert sample.delta > 0
    assert len(sample.cells) == 10
    assert {c.side for c in sample.cells} == {"plus", "minus"}
    ys = np.array(sample.axis_plus[2:4])
    assert np.allclose(ys / np.linalg.norm(ys), [1, 1] / np.sqrt(2))
    assert np.allclose(sample.axis_minus[2:4], -np.array(sample.axis_plus[2:4]))
    for cell in sample.cells:
        assert cell.minwedge.passed and cell.spike.passed
        assert cell.union_min_margin > 0
        assert abs(cell.q_t) <= sample.alpha_hat


def test_sweep_rotation_full_grid():
    sample = ambient_wedge_sweep(rotation_model(), rotation_wedge(),
                                 union_samples=4000)
    assert sample.passed
    assert sample.radius == 1
    assert sample.delta == F(1, 2654208)
    slopes = {c.t[0] for c in sample.cells}
    assert slopes == {F(-1), F(-1, 2), F(0), F(1, 2), F(1)}


def test_sweep_requires_two_sided_verdict():
    edge = EdgeModel.flat(2, CAP)
    w = WedgeSpec.from_sparse(edge, {"y1": 1}, F(1, 10), F(1), "two")
    with pytest.raises(PreconditionError, match="two-sided"):
        ambient_wedge_sweep(saddle_model(), w, union_samples=500)


def test_sweep_deterministic():
    a = ambient_wedge_sweep(saddle_model(), saddle_null_wedge(),
                            union_samples=2000, seed=5)
    b = ambient_wedge_sweep(saddle_model(), saddle_null_wedge(),
                            union_samples=2000, seed=5)
    assert a.delta == b.delta
    assert [c.union_min_margin for c in a.cells] == \
        [c.union_min_margin for c in b.cells]
    assert [c.minwedge.min_side_margin for c in a.cells] == \
        [c.minwedge.min_side_margin for c in b.cells]


# ---------------------------------------------------------------------------
# the square-absorbing change


def test_hat_change_saddle_graph():
    nf = normal_form(saddle_model())
    hat = hat_change(nf)
    gv = graph_vars()
    want = poly([(F(1, 2), {"x1": 2}), (F(1, 2), {"y1": 2}),
                 (F(-1, 2), {"x2": 2}), (F(-1, 2), {"y2": 2})], gv)
    assert hat.h == want
    assert hat.edge_flat
    half_sq = poly([(F(1, 2), {"x1": 2}), (F(-1, 2), {"x2": 2})],
                   ("x1", "x2", "u"))
    assert hat.edge.g == half_sq


def test_hat_change_rotation_is_identity():
    nf = normal_form(rotation_model())
    hat = hat_change(nf)
    assert hat.h == nf.h
    assert hat.edge_flat
    assert all(fj.is_zero() for fj in hat.edge.f)
    assert hat.edge.g.is_zero()


def test_hat_change_round_trip_points():
    nf = normal_form(saddle_model())
    hat = hat_change(nf)
    rng = np.random.default_rng(2)
    pts = rng.uniform(-0.4, 0.4, size=(50, 6))
    back = hat.from_hat.eval_many(hat.to_hat.eval_many(pts))
    assert np.max(np.abs(back - pts)) < 1e-13


def test_hat_change_graph_height_transforms():
    # v-hat minus h-hat must vanish wherever v equals h
    nf = normal_form(saddle_model())
    hat = hat_change(nf)
    rng = np.random.default_rng(3)
    base = rng.uniform(-0.3, 0.3, size=(40, 5))
    v = nf.h.eval_many(base)
    pts = np.column_stack([base, v])
    moved = hat.to_hat.eval_many(pts)
    resid = hat.h.eval_many(moved[:, :5]) - moved[:, 5]
    assert np.max(np.abs(resid)) < 1e-13


# ---------------------------------------------------------------------------
# attached discs


def test_lewy_disc_flat_saddle_oracles():
    nf = normal_form(saddle_model())
    disc = lewy_disc(nf, (1, 0), 0.03)
    assert not disc.modified
    assert disc.q_sigma == 1
    assert abs(disc.scale - math.sqrt(2)) < 1e-15
    assert np.max(np.abs(disc.radii - 0.03)) < 1e-9
    assert disc.center[0] == 0 and disc.center[1] == 0
    assert abs(disc.center[2] - 0.0009j) < 1e-15
    assert disc.crossings == 2
    assert disc.edge_hits == 2
    assert set(disc.labels) == {"plus", "minus", "edge"}
    plus = sum(1 for lab in disc.labels if lab == "plus")
    minus = sum(1 for lab in disc.labels if lab == "minus")
    assert plus == minus
    assert disc.interior_max_height < 0
    assert disc.audit_slack <= 1e-6


def test_lewy_disc_rejects_negative_direction():
    nf = normal_form(saddle_model())
    with pytest.raises(PreconditionError, match="negate the defining"):
        lewy_disc(nf, (0, 1), 0.03)


def test_lewy_disc_rejects_bad_inputs():
    nf = normal_form(saddle_model())
    with pytest.raises(PreconditionError):
        lewy_disc(nf, (1, 0, 0), 0.03)
    with pytest.raises(PreconditionError):
        lewy_disc(nf, (1, 0), 1.5)


def test_lewy_disc_scaled_direction_matches_unit():
    nf = normal_form(saddle_model())
    a = lewy_disc(nf, (1, 0), 0.02)
    b = lewy_disc(nf, (F(7, 5), 0), 0.02)
    assert np.max(np.abs(a.radii - b.radii)) < 1e-12
    assert abs(a.center[2] - b.center[2]) < 1e-15


def test_lewy_disc_curved_edge_modified():
    gv = graph_vars()
    edge = EdgeModel(2, (TruncatedPoly.zero(("x1", "x2", "u"), CAP),
                         TruncatedPoly.zero(("x1", "x2", "u"), CAP)),
                     poly([(F(1), {"x1": 4})], ("x1", "x2", "u")))
    h = poly([(F(1), {"y1": 2}), (F(-1), {"y2": 2}), (F(1), {"x1": 4})], gv)
    model = HypersurfaceModel.from_graph(h, edge)
    nf = normal_form(model)
    disc = lewy_disc(nf, (1, 0), 0.02)
    assert disc.modified
    assert disc.crossings == 2
    assert disc.interior_max_height < 0
    assert disc.audit_slack <= 1e-6
    # anchors drag the center off the transversal axis by a quartic amount
    assert abs(disc.center[0]) < 1e-5


def test_lewy_disc_deterministic():
    nf = normal_form(saddle_model())
    a = lewy_disc(nf, (1, 0), 0.04, seed=9)
    b = lewy_disc(nf, (1, 0), 0.04, seed=9)
    assert np.array_equal(a.radii, b.radii)
    assert a.labels == b.labels
    assert a.audit_slack == b.audit_slack


# ---------------------------------------------------------------------------
# one-sided evidence


def one_sided_wedge(component):
    edge = EdgeModel.flat(2, CAP)
    return WedgeSpec.from_sparse(edge, {component: 1}, F(1, 10), F(1), "two")


def test_one_sided_set_positive_axis():
    rep = one_sided_set(saddle_model(), one_sided_wedge("y1"),
                        deltas=(0.01, 0.03), angles=120, march_steps=100)
    assert rep.side == "r<0"
    assert not rep.flipped
    assert rep.two_sided_evidence
    assert rep.tangency_max <= 1e-3
    assert rep.records
    for cone in rep.cones:
        assert cone["aperture"] > 0
        assert cone["max_defect"] <= rep.resolution


def test_one_sided_set_flipped_axis():
    rep = one_sided_set(saddle_model(), one_sided_wedge("y2"),
                        deltas=(0.01, 0.03), angles=120, march_steps=100)
    assert rep.flipped
    assert rep.two_sided_evidence
    assert rep.tangency_max <= 1e-3


def test_one_sided_set_rejects_two_sided_input():
    with pytest.raises(PreconditionError, match="one-sided"):
        one_sided_set(saddle_model(), saddle_null_wedge(),
                      deltas=(0.01,), angles=60, march_steps=60)


def test_flip_model_is_involution():
    model = saddle_model()
    once, _ = _flip_model(model)
    twice, _ = _flip_model(once)
    assert twice.r == model.r
    assert twice.edge.g == model.edge.g
