"""Analytic-disc engines over normalized hypersurface data.

Builds complex-line slices through the normalized graph, certifies that the
attached disc families stay inside a shrunken wedge, fits spike budgets that
feed the union certificate from the screens module, assembles the two-sided
sweep, performs the Hermitian-square coordinate change, constructs attached
boundary discs, and gathers the one-sided evidence set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .errors import CertificateError, PreconditionError
from .geometry import (
    EdgeModel,
    RoundCone,
    WedgeSpec,
    ambient_vars,
    cone_contains,
    edge_distance,
    param_vars,
    wedge_side,
)
from .normalform import (
    HypersurfaceModel,
    NormalFormData,
    classify_wedge,
    j_rotate,
    normal_form,
    transport_edge,
)
from .screens import (
    SpikeConstants,
    modulus_slack,
    random_polynomials,
    spike_constants,
    spike_union_check,
)
from .series import PolyMap, TruncatedPoly, compose_maps, compose_truncated, substitute

F = Fraction

SLICE_VARS = ("xi1", "eta1", "xi2")
XI_VARS = ("xi1", "xi2")


# ---------------------------------------------------------------------------
# exact bounds


def restricted_form(lam, t: Sequence) -> Fraction:
    """Value of the Hermitian-part form on the slope direction (1, t)."""
    vec = [F(1)] + [F(c) for c in t]
    n = len(lam)
    if len(vec) != n:
        raise PreconditionError(f"slope needs {n - 1} components, got {len(vec) - 1}")
    total = F(0)
    for i in range(n):
        for j in range(n):
            total += F(lam[i][j]) * vec[i] * vec[j]
    return total


def form_value(lam, sigma: Sequence) -> Fraction:
    """Quadratic form sigma . lam . sigma with exact rationals."""
    vec = [F(c) for c in sigma]
    total = F(0)
    for i, vi in enumerate(vec):
        for j, vj in enumerate(vec):
            total += F(lam[i][j]) * vi * vj
    return total


def coefficient_bound(p: TruncatedPoly, rho: Fraction, drop: int) -> Fraction:
    """Certified sup of |p| / |point|^drop on the closed ball of radius rho.

    Uses sum |coeff| * rho^(degree - drop), valid because each coordinate is
    bounded by the Euclidean norm.  Every monomial must have degree >= drop.
    """
    rho = F(rho)
    total = F(0)
    for exp, cval in p.coeffs.items():
        deg = sum(exp)
        if deg < drop:
            raise CertificateError(
                f"term of degree {deg} violates the guaranteed vanishing order {drop}")
        total += abs(cval) * rho ** (deg - drop)
    return total


def _row_bound(lam) -> Fraction:
    return max(sum(abs(F(c)) for c in row) for row in lam)


# ---------------------------------------------------------------------------
# slices


@dataclass(frozen=True)
class SliceModel:
    """Height data of the normalized graph along one complex line.

    The line has slope t against the first z-coordinate and carries complex
    parameters zeta1 = xi1 + i*eta1 (along the line) and zeta2 = xi2 + i*eta2
    (the transversal coordinate).  On the hypersurface eta2 equals chi.
    """

    n: int
    cap: int
    t: tuple[Fraction, ...]
    q_t: Fraction
    chi: TruncatedPoly
    block_free: TruncatedPoly    # eta1-free part, vanishes to order 4 in xi
    block_lin: TruncatedPoly     # linear-in-eta1 part, order 2
    block_quad: TruncatedPoly    # quadratic part beyond q_t, order 1
    block_cubic: TruncatedPoly   # remainder over eta1^3, three variables
    y_traces: tuple[TruncatedPoly, ...]
    v_trace: TruncatedPoly
    box_radius: Fraction
    big_a: Fraction
    big_b: Fraction
    a_tilde: Fraction
    a_prime: Fraction
    audit: dict

    def surface_point(self, xi1: float, eta1: float, xi2: float) -> np.ndarray:
        """Ambient real coordinates of the on-surface slice point."""
        n = self.n
        eta2 = self.chi.eval_float([xi1, eta1, xi2])
        out = np.zeros(2 * n + 2)
        out[0], out[n] = xi1, eta1
        for j, tj in enumerate(self.t):
            out[1 + j] = xi1 * float(tj)
            out[n + 1 + j] = eta1 * float(tj)
        out[2 * n] = xi2
        out[2 * n + 1] = eta2
        return out


def build_slice(nf: NormalFormData, t: Sequence, *,
                box_radius=F(1, 2), audit_radial: int = 4,
                audit_angular: int = 6) -> SliceModel:
    """Restrict the normalized graph to the complex line of slope t.

    Splits the height into graded blocks, certifies coefficient-norm bounds
    for each block on the parameter box, and cross-checks the bounds on a
    sample grid.  The reconstruction of the height from the blocks is checked
    exactly; a mismatch means the grading went wrong and raises.
    """
    n, cap = nf.n, nf.cap
    t = tuple(F(c) for c in t)
    if len(t) != n - 1:
        raise PreconditionError(f"slice slope needs {n - 1} components, got {len(t)}")
    if any(abs(c) > 1 for c in t):
        raise PreconditionError("slice slope outside the unit box")
    box_radius = F(box_radius)
    if not 0 < box_radius <= 1:
        raise PreconditionError("box radius must lie in (0, 1]")

    q_t = restricted_form(nf.lam, t)

    xi1 = TruncatedPoly.variable("xi1", SLICE_VARS, cap)
    eta1 = TruncatedPoly.variable("eta1", SLICE_VARS, cap)
    xi2 = TruncatedPoly.variable("xi2", SLICE_VARS, cap)
    values = {"u": xi2}
    for j in range(n):
        tj = F(1) if j == 0 else t[j - 1]
        values[f"x{j + 1}"] = xi1 * tj
        values[f"y{j + 1}"] = eta1 * tj
    chi = substitute(nf.h, values, cap)

    buckets: dict[int, dict] = {}
    for exp, cval in chi.coeffs.items():
        buckets.setdefault(exp[1], {})[(exp[0], exp[2])] = cval
    free = TruncatedPoly(XI_VARS, cap, buckets.get(0, {}))
    lin = TruncatedPoly(XI_VARS, cap, buckets.get(1, {}))
    quad_c = dict(buckets.get(2, {}))
    quad_c[(0, 0)] = quad_c.get((0, 0), F(0)) - q_t
    quad = TruncatedPoly(XI_VARS, cap, quad_c)
    cubic_c = {}
    for k, bucket in buckets.items():
        if k < 3:
            continue
        for (e1, e2), cval in bucket.items():
            cubic_c[(e1, k - 3, e2)] = cval
    cubic = TruncatedPoly(SLICE_VARS, cap, cubic_c)

    rebuilt = TruncatedPoly(SLICE_VARS, cap, {(0, 2, 0): q_t}) + \
        free.lift(SLICE_VARS) + lin.lift(SLICE_VARS) * eta1 + \
        quad.lift(SLICE_VARS) * eta1 ** 2 + cubic * eta1 ** 3
    if rebuilt != chi:
        raise CertificateError("graded blocks do not reassemble the slice height")
    for block, order, label in ((free, 4, "eta1-free"), (lin, 2, "eta1-linear"),
                                (quad, 1, "eta1-quadratic")):
        if not block.is_zero() and block.low_degree() < order:
            raise CertificateError(
                f"{label} block has degree {block.low_degree()} terms; "
                f"normalization should remove everything below {order}")

    xi_values = {"u": TruncatedPoly.variable("xi2", XI_VARS, cap)}
    for j in range(n):
        tj = F(1) if j == 0 else t[j - 1]
        xi_values[f"x{j + 1}"] = TruncatedPoly.variable("xi1", XI_VARS, cap) * tj
    y_traces = tuple(substitute(fj, xi_values, cap) for fj in nf.edge.f)
    v_trace = substitute(nf.edge.g, xi_values, cap)
    for trace in (*y_traces, v_trace):
        if not trace.is_zero() and trace.low_degree() < 4:
            raise CertificateError("edge drift below fourth order on the slice")

    rho = box_radius
    bound_free = coefficient_bound(free, rho, 4)
    bound_lin = coefficient_bound(lin, rho, 2)
    bound_quad = coefficient_bound(quad, rho, 1)
    d0 = cubic
    d1 = d0.partial("eta1")
    d2 = d1.partial("eta1")
    bound_cubic = max(coefficient_bound(p, rho, 0) for p in (d0, d1, d2))
    big_a = max(bound_free, bound_lin, bound_quad, bound_cubic)
    big_b = max((coefficient_bound(p, rho, 4) for p in (*y_traces, v_trace)),
                default=F(0))
    q_bound = n * _row_bound(nf.lam)
    a_tilde = big_a + (q_bound + big_a) * (1 + big_b) + big_a * (1 + big_b) ** 2
    a_prime = big_a * (rho ** 2 + 6 * rho + 6)

    audit = _slice_bound_audit(free, lin, quad, cubic, y_traces, v_trace,
                               big_a, big_b, float(rho),
                               audit_radial, audit_angular)
    return SliceModel(n, cap, t, q_t, chi, free, lin, quad, cubic,
                      y_traces, v_trace, box_radius, big_a, big_b,
                      a_tilde, a_prime, audit)


def _slice_bound_audit(free, lin, quad, cubic, y_traces, v_trace,
                       big_a, big_b, rho, radial, angular) -> dict:
    """Sampled cross-check that the certified bounds dominate the blocks."""
    a_f, b_f = float(big_a), float(big_b)
    worst = {"free": 0.0, "lin": 0.0, "quad": 0.0, "cubic": 0.0, "drift": 0.0}
    pts = []
    for i in range(1, radial + 1):
        r = rho * i / radial
        for k in range(angular):
            ang = 2.0 * math.pi * k / angular
            pts.append((r * math.cos(ang), r * math.sin(ang)))
    tol = 1e-12
    for x1, x2 in pts:
        norm = math.hypot(x1, x2)
        checks = [("free", abs(free.eval_float([x1, x2])), a_f * norm ** 4),
                  ("lin", abs(lin.eval_float([x1, x2])), a_f * norm ** 2),
                  ("quad", abs(quad.eval_float([x1, x2])), a_f * norm)]
        drift = max(abs(p.eval_float([x1, x2])) for p in (*y_traces, v_trace))
        checks.append(("drift", drift, b_f * norm ** 4))
        for lam_pt in (-rho, 0.0, rho):
            checks.append(("cubic", abs(cubic.eval_float([x1, lam_pt, x2])), a_f))
        for name, val, cap_val in checks:
            if val > cap_val + tol:
                raise CertificateError(
                    f"sampled {name} block beats its certified bound",
                    margin=val - cap_val)
            if cap_val > 0:
                worst[name] = max(worst[name], val / cap_val)
    return {"samples": len(pts), "worst_ratio": worst}


def edge_trace(slice_model: SliceModel, xi: Sequence[float]) -> tuple[np.ndarray, float]:
    """Edge drift (first-coordinate heights, transversal height) at a slice point."""
    pt = [float(xi[0]), float(xi[1])]
    ys = np.array([p.eval_float(pt) for p in slice_model.y_traces])
    return ys, slice_model.v_trace.eval_float(pt)


# ---------------------------------------------------------------------------
# wedge shrinking and the membership certificate


def shrink_wedge(wedge: WedgeSpec) -> tuple[WedgeSpec, Fraction]:
    """Exactly halve aperture and extent; the factor 1/2 is the comparability
    constant recorded for distance-to-edge arguments."""
    inner = WedgeSpec(wedge.edge, wedge.axis, wedge.aperture / 2,
                      wedge.extent / 2, wedge.sides)
    return inner, F(1, 2)


@dataclass(frozen=True)
class MinwedgeConstants:
    """Exact budget constants for the slice-in-wedge certificate."""

    delta: Fraction
    gamma: Fraction
    epsilon: Fraction
    k_const: Fraction
    sqrt_eps: Fraction
    audit: tuple[tuple[str, bool], ...]

    @property
    def all_pass(self) -> bool:
        return all(ok for _, ok in self.audit)


def minwedge_constants(delta, big_a, big_b, a_tilde) -> MinwedgeConstants:
    """Deterministic choice of slope radius, height window, and pinch factor.

    delta is the aperture budget of the target cone; the other arguments are
    the certified block and drift bounds.  Every inequality used downstream is
    re-audited exactly and returned with the constants.
    """
    delta, big_a = F(delta), F(big_a)
    big_b, a_tilde = F(big_b), F(a_tilde)
    if delta <= 0:
        raise PreconditionError("aperture budget must be positive")
    if min(big_a, big_b, a_tilde) < 0:
        raise PreconditionError("bounds must be nonnegative")
    gamma = delta / 4
    sqrt_eps = F(1) if a_tilde == 0 else min(F(1), delta / (4 * a_tilde))
    eps = sqrt_eps ** 2
    k_const = max(F(1), 8 * big_b / delta,
                  4 * (big_a + big_b + a_tilde * big_b * sqrt_eps) / delta)
    audit = (
        ("gamma <= delta/4", gamma <= delta / 4),
        ("tilde-A sqrt(eps) <= delta/4", a_tilde * sqrt_eps <= delta / 4),
        ("K >= 8 B / delta", k_const >= 8 * big_b / delta),
        ("K >= 4 (A + B + tilde-A B sqrt(eps)) / delta",
         k_const >= 4 * (big_a + big_b + a_tilde * big_b * sqrt_eps) / delta),
        ("eps <= 1", eps <= 1),
    )
    return MinwedgeConstants(delta, gamma, eps, k_const, sqrt_eps, audit)


@dataclass(frozen=True)
class MinwedgeReport:
    """Sample evidence that the slice family lands inside the shrunken wedge."""

    t: tuple[Fraction, ...]
    epsilon_used: Fraction
    samples: int
    failures: tuple[dict, ...]
    min_side_margin: float
    min_slope_margin: float
    min_height_margin: float
    min_invariant_margin: float
    comparability: tuple[float, float]

    @property
    def passed(self) -> bool:
        return not self.failures


def minwedge_check(slice_model: SliceModel, nf: NormalFormData,
                   wedge: WedgeSpec, constants: MinwedgeConstants, *,
                   radial: int = 5, angular: int = 8, heights: int = 6,
                   max_failures: int = 20) -> MinwedgeReport:
    """Verify wedge membership and the two cone inequalities on a sample grid.

    The grid fills the pinched height window over the parameter disc.  Each
    point must sit on the positive side of the wedge, satisfy both aperture
    inequalities with positive margin, and respect the certified slope
    invariant.  The effective height window shrinks so sample points stay
    within the wedge extent and the certified box.
    """
    n = slice_model.n
    t_float = [float(c) for c in slice_model.t]
    if sum(F(c) ** 2 for c in slice_model.t) > constants.gamma ** 2:
        raise PreconditionError(
            f"slope norm exceeds the admissible radius {constants.gamma}")
    one_b = 1 + slice_model.big_b
    eps_eff = min(constants.epsilon,
                  wedge.extent / (2 * one_b * (1 + constants.gamma)),
                  slice_model.box_radius / one_b)
    k_const = constants.k_const
    delta_f = float(constants.delta)
    invariant_rate = float(constants.gamma + 2 * slice_model.big_b / k_const)
    xi_cap = (float(eps_eff) / float(k_const)) ** 0.25

    failures: list[dict] = []
    min_side = math.inf
    min_slope = math.inf
    min_height = math.inf
    min_inv = math.inf
    ratio_lo, ratio_hi = math.inf, -math.inf
    count = 0
    for i in range(radial):
        rad = xi_cap * i / radial
        angle_steps = angular if i else 1
        for k in range(angle_steps):
            ang = 2.0 * math.pi * k / angular
            x1 = rad * math.cos(ang)
            x2 = rad * math.sin(ang)
            y_vals = [p.eval_float([x1, x2]) for p in slice_model.y_traces]
            floor = float(k_const) * (x1 * x1 + x2 * x2) ** 2
            room = float(eps_eff) - floor
            for j in range(1, heights + 1):
                gap = floor + room * j / heights
                eta1 = y_vals[0] + gap
                count += 1
                point = slice_model.surface_point(x1, eta1, x2)
                label, side_margin = wedge_side(wedge, nf.h, point)
                slope_lhs = math.sqrt(sum(
                    (eta1 * t_float[m] - y_vals[m + 1]) ** 2
                    for m in range(n - 1)))
                rhs = 0.5 * delta_f * gap
                slope_margin = rhs - slope_lhs
                height_lhs = abs(point[2 * n + 1] -
                                 slice_model.v_trace.eval_float([x1, x2]))
                height_margin = rhs - height_lhs
                inv_margin = invariant_rate * gap - slope_lhs
                dist = edge_distance(point, nf.edge)
                ratio = dist / gap
                ratio_lo, ratio_hi = min(ratio_lo, ratio), max(ratio_hi, ratio)
                min_side = min(min_side, side_margin)
                min_slope = min(min_slope, slope_margin)
                min_height = min(min_height, height_margin)
                min_inv = min(min_inv, inv_margin)
                bad = label != "plus" or slope_margin <= 0 or \
                    height_margin <= 0 or inv_margin < -1e-9
                if bad and len(failures) < max_failures:
                    failures.append({"xi": (x1, x2), "eta1": eta1,
                                     "label": label,
                                     "side_margin": side_margin,
                                     "slope_margin": slope_margin,
                                     "height_margin": height_margin,
                                     "invariant_margin": inv_margin})
    return MinwedgeReport(slice_model.t, eps_eff, count, tuple(failures),
                          min_side, min_slope, min_height, min_inv,
                          (ratio_lo, ratio_hi))


# ---------------------------------------------------------------------------
# spike fitting


@dataclass(frozen=True)
class SpikeFit:
    """Polynomials and budgets tying the slice to the union certificate."""

    t: tuple[Fraction, ...]
    alpha: Fraction
    alpha_hat: Fraction
    beta: Fraction
    length: Fraction
    reach: Fraction
    q1: TruncatedPoly
    q2: TruncatedPoly
    m: TruncatedPoly
    big_a_spike: Fraction
    remainder_margin: float
    growth: tuple[tuple[str, float, float], ...]
    failures: tuple[dict, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def spike_fit(slice_model: SliceModel, constants: MinwedgeConstants, *,
              epsilon=None, alpha=F(1, 4), radial: int = 5, angular: int = 8,
              heights: int = 5, growth_lo: float = 1e-3,
              growth_hi: float = 1e-1, growth_count: int = 9,
              max_failures: int = 20) -> SpikeFit:
    """Fit curved spikes under the slice and certify they stay in its window.

    The floor polynomial lifts the edge drift by the pinch term, the height
    and tilt polynomials come from the slice height at the floor, and the
    budget split leaves half the thickness allowance for the curvature
    remainder.  Growth exponents of the three polynomials are regressed on a
    log-log grid as a drift alarm.
    """
    alpha = F(alpha)
    if alpha <= 0:
        raise PreconditionError("thickness allowance must be positive")
    alpha_hat = alpha / 4
    if abs(slice_model.q_t) > alpha_hat:
        raise PreconditionError(
            f"restricted form value {slice_model.q_t} exceeds the slope budget "
            f"{alpha_hat}; shrink the slope grid")
    eps = F(constants.epsilon if epsilon is None else epsilon)
    if eps <= 0:
        raise PreconditionError("height window must be positive")
    beta = alpha / 4
    k_const = constants.k_const
    big_a = slice_model.big_a
    a_prime = slice_model.a_prime
    big_b = slice_model.big_b

    length = eps / 2
    if a_prime > 0:
        length = min(length, alpha / (16 * a_prime))

    reach = min(F(1), slice_model.box_radius)
    for _ in range(200):
        ok = k_const * reach ** 4 <= eps / 2
        if big_a > 0:
            ok = ok and big_a * reach <= alpha / 4
        if a_prime > 0:
            ok = ok and 2 * a_prime * (big_b + k_const) * reach ** 4 <= alpha / 8
        if ok:
            break
        reach /= 2
    else:
        raise PreconditionError("no admissible spike radius")

    cap4 = 4 * slice_model.cap
    x1 = TruncatedPoly.variable("xi1", XI_VARS, cap4)
    x2 = TruncatedPoly.variable("xi2", XI_VARS, cap4)
    norm4 = (x1 ** 2 + x2 ** 2) ** 2
    q1 = slice_model.y_traces[0].with_cap(cap4) + norm4 * k_const
    subs = {"xi1": x1, "eta1": q1, "xi2": x2}
    chi4 = slice_model.chi.with_cap(cap4)
    q2 = substitute(chi4, subs, cap4)
    m = substitute(chi4.partial("eta1"), subs, cap4)

    big_a_spike = max(coefficient_bound(q1, reach, 2),
                      coefficient_bound(q2, reach, 4),
                      coefficient_bound(m, reach, 2))

    chi = slice_model.chi
    chi_d2 = chi.partial("eta1").partial("eta1")
    q_f = abs(float(slice_model.q_t))
    a_f, ap_f = float(big_a), float(a_prime)
    alpha_f, beta_f = float(alpha), float(beta)
    y1 = slice_model.y_traces[0]
    failures: list[dict] = []
    remainder_margin = math.inf
    reach_f = float(reach)
    length_f = float(length)
    for i in range(radial):
        rad = reach_f * i / radial
        angle_steps = angular if i else 1
        for k in range(angle_steps):
            ang = 2.0 * math.pi * k / angular
            p1, p2 = rad * math.cos(ang), rad * math.sin(ang)
            q1_val = q1.eval_float([p1, p2])
            q2_val = q2.eval_float([p1, p2])
            m_val = m.eval_float([p1, p2])
            y1_val = y1.eval_float([p1, p2])
            for j in range(1, heights + 1):
                lam_pt = q1_val + length_f * j / heights
                chi_val = chi.eval_float([p1, lam_pt, p2])
                step = lam_pt - q1_val
                resid = abs(chi_val - q2_val - m_val * step)
                budget = alpha_f * (lam_pt - y1_val) ** 2
                margin = budget - resid - beta_f * step * step
                remainder_margin = min(remainder_margin, margin)
                curv = abs(chi_d2.eval_float([p1, lam_pt, p2]))
                curv_cap = 2.0 * q_f + 2.0 * a_f * rad + ap_f * abs(lam_pt)
                ok_curv = curv <= curv_cap + 1e-9
                if (margin < 0 or not ok_curv) and len(failures) < max_failures:
                    failures.append({"xi": (p1, p2), "eta1": lam_pt,
                                     "margin": margin, "curvature": curv,
                                     "curvature_cap": curv_cap})

    growth = []
    targets = (("floor", q1, 4.0), ("height", q2, 4.0), ("tilt", m, 2.0))
    radii = np.logspace(math.log10(growth_lo), math.log10(growth_hi),
                        growth_count)
    angles = np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)
    for name, poly, target in targets:
        if poly.is_zero():
            growth.append((name, math.inf, target))
            continue
        tops = []
        for r in radii:
            pts = np.stack([r * np.cos(angles), r * np.sin(angles)], axis=1)
            tops.append(float(np.max(np.abs(poly.eval_many(pts)))))
        tops_arr = np.array(tops)
        if np.any(tops_arr <= 0):
            growth.append((name, math.inf, target))
            continue
        slope = float(np.polyfit(np.log(radii), np.log(tops_arr), 1)[0])
        growth.append((name, slope, target))
        if slope < target - 0.2 and len(failures) < max_failures:
            failures.append({"growth": name, "slope": slope, "target": target})

    return SpikeFit(slice_model.t, alpha, alpha_hat, beta, length, reach,
                    q1, q2, m, big_a_spike, remainder_margin,
                    tuple(growth), tuple(failures))


# ---------------------------------------------------------------------------
# the two-sided sweep


@dataclass(frozen=True)
class SweepCell:
    """One (side, slope) cell of the sweep with its full certificate chain."""

    side: str
    t: tuple[Fraction, ...]
    q_t: Fraction
    minwedge: MinwedgeReport
    spike: SpikeFit
    union_constants: SpikeConstants
    union_min_margin: float
    delta_t: Fraction


@dataclass(frozen=True)
class AmbientWedgeSample:
    """Certified opening produced by sweeping slices through both wedge sides."""

    verdict: str
    radius: Fraction
    gamma: Fraction
    alpha: Fraction
    alpha_hat: Fraction
    kappa: Fraction
    delta_aperture: Fraction
    cells: tuple[SweepCell, ...]
    delta: Fraction
    axis_plus: tuple[float, ...]
    axis_minus: tuple[float, ...]
    slope_radius: float
    bounds: dict
    neighborhood_note: str

    @property
    def passed(self) -> bool:
        return all(c.minwedge.passed and c.spike.passed for c in self.cells) \
            and self.delta > 0


def _grid_directions(n: int, t_count: int) -> list[tuple[Fraction, ...]]:
    if t_count < 2:
        return [tuple(F(0) for _ in range(n - 1))]
    line = [F(2 * i, t_count - 1) - 1 for i in range(t_count)]
    dirs = [()]
    for _ in range(n - 1):
        dirs = [(*d, c) for d in dirs for c in line]
    return dirs


def ambient_wedge_sweep(model: HypersurfaceModel, wedge: WedgeSpec, *,
                        t_count: int = 5, alpha=F(1, 4), kappa=F(1, 2),
                        box_radius=F(1, 2), minwedge_samples=(5, 8, 6),
                        union_samples: int = 20000, seed: int = 0,
                        max_radius=F(1)) -> AmbientWedgeSample:
    """Run the full slice/spike certificate chain on both sides of the wedge.

    Requires a two-sided classification.  Each side is renormalized with its
    axis sent to the positive first imaginary direction, the admissible slope
    radius is found by exact bisection against the form budget, and every
    grid slope gets a wedge-membership report, a spike fit, and a union
    certificate whose scaled-target size is the cell's opening.  The sweep
    opening is the minimum cell opening.
    """
    cls = classify_wedge(model, wedge)
    if cls.verdict != "TwoSidedExtension":
        raise PreconditionError(
            f"two-sided sweep needs a two-sided verdict, got {cls.verdict}")
    alpha = F(alpha)
    kappa = F(kappa)
    alpha_hat = alpha / 4
    n = model.n
    ap2, ext2 = wedge.aperture / 2, wedge.extent / 2
    delta_ap = kappa * ap2
    gamma = delta_ap / 4
    base_dirs = _grid_directions(n, t_count)
    norm_guard = 1 if n == 2 else n - 1
    r_gamma = gamma * F(15, 16) / norm_guard

    cells: list[SweepCell] = []
    axes = {}
    bounds = {}
    radius_used = None
    cell_index = 0
    for side, flip in (("plus", False), ("minus", True)):
        axis_field = tuple(-c for c in wedge.axis) if flip else wedge.axis
        side_wedge = WedgeSpec(wedge.edge, axis_field, wedge.aperture,
                               wedge.extent, wedge.sides)
        nf = normal_form(model, wedge=side_wedge, align_axis=True)
        inner = WedgeSpec.from_sparse(nf.edge, {"y1": 1}, ap2, ext2, "two")

        def feasible(rad: Fraction) -> bool:
            return all(abs(restricted_form(nf.lam, tuple(rad * c for c in d)))
                       <= alpha_hat for d in base_dirs)

        hi = min(F(max_radius), r_gamma)
        if feasible(hi):
            radius = hi
        else:
            lo = F(0)
            if not feasible(lo):
                raise CertificateError(
                    "restricted form exceeds the slope budget at radius zero; "
                    "the aligned axis is not close enough to null")
            for _ in range(40):
                mid = (lo + hi) / 2
                if feasible(mid):
                    lo = mid
                else:
                    hi = mid
            radius = lo
        if radius < F(1, 10 ** 9):
            raise CertificateError(
                "restricted form grows too fast along the grid; "
                "no admissible slope radius")
        radius_used = radius if radius_used is None else min(radius_used, radius)

        slopes = [tuple(radius * c for c in d) for d in base_dirs]
        slices = [build_slice(nf, s, box_radius=box_radius) for s in slopes]
        big_a = max(s.big_a for s in slices)
        big_b = max(s.big_b for s in slices)
        a_tilde = max(s.a_tilde for s in slices)
        constants = minwedge_constants(delta_ap, big_a, big_b, a_tilde)
        bounds[side] = {"A": big_a, "B": big_b, "A_tilde": a_tilde,
                        "A_prime": max(s.a_prime for s in slices)}
        mat = nf.to_original.linear_matrix()
        axes[side] = tuple(float(row[n]) for row in mat)

        rad_n, ang_n, hgt_n = minwedge_samples
        for sl in slices:
            mw = minwedge_check(sl, nf, inner, constants,
                                radial=rad_n, angular=ang_n, heights=hgt_n)
            if not mw.passed:
                raise CertificateError(
                    f"wedge membership failed on side {side} at slope {sl.t}: "
                    f"{mw.failures[0]}")
            fit = spike_fit(sl, constants, epsilon=mw.epsilon_used, alpha=alpha)
            if not fit.passed:
                raise CertificateError(
                    f"spike fit failed on side {side} at slope {sl.t}: "
                    f"{fit.failures[0]}")
            sc = spike_constants(fit.big_a_spike, fit.beta, fit.length,
                                 fit.reach)
            union = spike_union_check(
                sc.epsilon, sc.k_const, fit.q1, fit.q2, fit.m,
                fit.big_a_spike, fit.beta, fit.length, fit.reach,
                samples=union_samples, seed=seed * 1000003 + cell_index)
            cells.append(SweepCell(side, sl.t, sl.q_t, mw, fit, sc,
                                   float(union["min_margin"]), sc.delta))
            cell_index += 1

    delta = min(c.delta_t for c in cells)
    note = ("boundary families remain in a fixed edge neighborhood; filling a "
            "full ambient neighborhood from these discs relies on the "
            "polynomial-hull inclusion, which is treated as an external "
            "hypothesis and is not re-verified here")
    return AmbientWedgeSample(cls.verdict, radius_used, gamma, alpha,
                              alpha_hat, kappa, delta_ap, tuple(cells), delta,
                              axes["plus"], axes["minus"], float(radius_used),
                              bounds, note)


# ---------------------------------------------------------------------------
# Hermitian-square coordinate change


@dataclass(frozen=True)
class HatChangeData:
    """Holomorphic change absorbing the symmetric square into the graph."""

    n: int
    cap: int
    to_hat: PolyMap
    from_hat: PolyMap
    h: TruncatedPoly
    edge: EdgeModel
    edge_params: PolyMap
    lam: tuple[tuple[Fraction, ...], ...]
    edge_flat: bool


def _lam_square(lam, names_a, names_b, vars, cap, half=True) -> TruncatedPoly:
    n = len(lam)
    total = TruncatedPoly.zero(vars, cap)
    for i in range(n):
        for j in range(n):
            c = F(lam[i][j])
            if c == 0:
                continue
            term = TruncatedPoly.variable(names_a[i], vars, cap) * \
                TruncatedPoly.variable(names_b[j], vars, cap) * c
            total = total + term
    return total * F(1, 2) if half else total


def hat_change(nf: NormalFormData) -> HatChangeData:
    """Rotate the quadratic graph into its positivity-revealing gauge.

    The new transversal coordinate absorbs the holomorphic square of the
    Hermitian part.  Both directions of the change are exact, verified to
    compose to the identity, and the transformed graph is checked to have the
    symmetric quadratic part demanded by the disc constructions.
    """
    n, cap = nf.n, nf.cap
    av = ambient_vars(n)
    x_names = [f"x{j + 1}" for j in range(n)]
    y_names = [f"y{j + 1}" for j in range(n)]
    x_lam_x = _lam_square(nf.lam, x_names, x_names, av, cap)
    y_lam_y = _lam_square(nf.lam, y_names, y_names, av, cap)
    x_lam_y = _lam_square(nf.lam, x_names, y_names, av, cap, half=False)

    ident = [TruncatedPoly.variable(v, av, cap) for v in av]
    to_hat = PolyMap(av, av, tuple(
        ident[k] if k < 2 * n else
        (ident[2 * n] - x_lam_y if k == 2 * n else
         ident[2 * n + 1] + x_lam_x - y_lam_y)
        for k in range(2 * n + 2)))
    from_hat = PolyMap(av, av, tuple(
        ident[k] if k < 2 * n else
        (ident[2 * n] + x_lam_y if k == 2 * n else
         ident[2 * n + 1] - x_lam_x + y_lam_y)
        for k in range(2 * n + 2)))
    both = compose_maps(to_hat, from_hat, cap)
    if both.components != PolyMap.identity(av, cap).components:
        raise CertificateError("square-absorbing change does not invert exactly")

    h_vars = av[:-1]
    shift = {v: TruncatedPoly.variable(v, h_vars, cap) for v in h_vars}
    shift["u"] = TruncatedPoly.variable("u", h_vars, cap) + \
        _lam_square(nf.lam, x_names, y_names, h_vars, cap, half=False)
    h_hat = substitute(nf.h, shift, cap) + \
        _lam_square(nf.lam, x_names, x_names, h_vars, cap) - \
        _lam_square(nf.lam, y_names, y_names, h_vars, cap)

    want = _lam_square(nf.lam, x_names, x_names, h_vars, cap) + \
        _lam_square(nf.lam, y_names, y_names, h_vars, cap) + \
        _omega_cross(nf.omega, h_vars, cap)
    if h_hat.graded_part(2) != want:
        raise CertificateError(
            "transformed graph misses the symmetric quadratic part")

    edge_hat, edge_params = transport_edge(nf.edge, to_hat)
    pv = param_vars(n)
    half_sq = _lam_square(nf.lam, [f"x{j + 1}" for j in range(n)],
                          [f"x{j + 1}" for j in range(n)], pv, cap)
    for fj in edge_hat.f:
        if not fj.is_zero() and fj.low_degree() < 4:
            raise CertificateError("transformed edge tangency drops below order 4")
    g_rem = edge_hat.g - half_sq
    if not g_rem.is_zero() and g_rem.low_degree() < 4:
        raise CertificateError(
            "transformed edge height misses the half-square profile")
    flat = all(fj.is_zero() for fj in edge_hat.f) and g_rem.is_zero()
    return HatChangeData(n, cap, to_hat, from_hat, h_hat, edge_hat,
                         edge_params, nf.lam, flat)


def _omega_cross(omega, vars, cap) -> TruncatedPoly:
    n = len(omega)
    total = TruncatedPoly.zero(vars, cap)
    for i in range(n):
        for j in range(n):
            c = F(omega[i][j])
            if c == 0:
                continue
            total = total + TruncatedPoly.variable(f"x{i + 1}", vars, cap) * \
                TruncatedPoly.variable(f"y{j + 1}", vars, cap) * c
    return total


# ---------------------------------------------------------------------------
# attached boundary discs


@dataclass(frozen=True, eq=False)
class LewyDisc:
    """One attached disc with labeled boundary and its analyticity audit."""

    sigma: tuple[Fraction, ...]
    scale: float
    delta: float
    modified: bool
    q_sigma: Fraction
    center: tuple[complex, ...]
    boundary: np.ndarray
    boundary_complex: np.ndarray
    labels: tuple[str, ...]
    crossings: int
    radii: np.ndarray
    interior_max_height: float
    interior_points: np.ndarray
    audit_slack: float

    @property
    def edge_hits(self) -> int:
        return sum(1 for lab in self.labels if lab == "edge")


def _disc_coords(a_vec: np.ndarray, b_vec: np.ndarray, n: int,
                 zetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map disc parameters to (real ambient points, (z1, w) pairs)."""
    comp = zetas[:, None] * a_vec[None, :] + b_vec[None, :]
    pts = np.empty((len(zetas), 2 * n + 2))
    pts[:, :n] = comp[:, :n].real
    pts[:, n:2 * n] = comp[:, :n].imag
    pts[:, 2 * n] = comp[:, n].real
    pts[:, 2 * n + 1] = comp[:, n].imag
    pairs = np.stack([comp[:, 0], comp[:, n]], axis=1)
    return pts, pairs


def _height_defect(h_hat: TruncatedPoly, pts: np.ndarray, n: int) -> np.ndarray:
    vals = h_hat.eval_many(pts[:, :2 * n + 1])
    return vals - pts[:, 2 * n + 1]


def lewy_disc(nf: NormalFormData, sigma: Sequence, delta: float, *,
              modified: bool | None = None, angles: int = 720,
              march_steps: int = 300, edge_tol: float = 1e-8,
              aperture=F(1, 2), extent=F(1), ring_depth: int = 6,
              ring_angles: int = 16, audit_polynomials: int = 8,
              audit_degree: int = 3, audit_tol: float = 1e-6,
              seed: int = 0) -> LewyDisc:
    """Attach a boundary disc along a form-positive direction.

    The direction must have positive restricted form value; the disc then
    bulges into the side where the transversal coordinate beats the graph.
    Boundary samples are labeled edge / plus / minus against an internally
    built wedge whose axis field is exactly tangent to the transformed graph.
    An unlabeled boundary sample or a non-star-shaped boundary raises.
    """
    hat = hat_change(nf)
    return _lewy_from_hat(nf, hat, sigma, delta, modified=modified,
                          angles=angles, march_steps=march_steps,
                          edge_tol=edge_tol, aperture=aperture, extent=extent,
                          ring_depth=ring_depth, ring_angles=ring_angles,
                          audit_polynomials=audit_polynomials,
                          audit_degree=audit_degree, audit_tol=audit_tol,
                          seed=seed)


def _label_wedge(hat: HatChangeData, sigma: tuple[Fraction, ...],
                 aperture, extent) -> WedgeSpec:
    """Wedge around the transformed edge whose axis is exactly graph-tangent."""
    n, cap = hat.n, hat.cap
    emb_full = hat.edge.param_map(cap)
    emb = PolyMap(emb_full.source_vars, ambient_vars(n)[:-1],
                  emb_full.components[:2 * n + 1])
    tilt = TruncatedPoly.zero(param_vars(n), cap)
    for j in range(n):
        if sigma[j] == 0:
            continue
        tilt = tilt + compose_truncated(hat.h.partial(f"y{j + 1}"), emb,
                                        cap) * sigma[j]
    comps: dict[str, object] = {f"y{j + 1}": sigma[j]
                                for j in range(n) if sigma[j] != 0}
    comps["v"] = tilt
    return WedgeSpec.from_sparse(hat.edge, comps, aperture, extent, "two")


def _lewy_from_hat(nf: NormalFormData, hat: HatChangeData, sigma: Sequence,
                   delta: float, *, modified, angles, march_steps, edge_tol,
                   aperture, extent, ring_depth, ring_angles,
                   audit_polynomials, audit_degree, audit_tol,
                   seed) -> LewyDisc:
    n = hat.n
    sigma = tuple(F(c) for c in sigma)
    if len(sigma) != n:
        raise PreconditionError(f"direction needs {n} components")
    q_s = form_value(nf.lam, sigma)
    if q_s <= 0:
        raise PreconditionError(
            f"restricted form value {q_s} is not positive: attached discs "
            "open into the opposite side; negate the defining function and "
            "retry")
    delta = float(delta)
    if not 0 < delta < 1:
        raise PreconditionError("disc size must lie in (0, 1)")
    if modified is None:
        modified = not hat.edge_flat

    scale = math.sqrt(2.0 / float(q_s))
    sig_f = np.array([float(c) for c in sigma]) * scale
    if modified:
        p_plus, p_minus = [], []
        for sign in (1.0, -1.0):
            prm = list(sign * delta * sig_f) + [0.0]
            zc = sign * delta * sig_f + \
                1j * np.array([fj.eval_float(prm) for fj in hat.edge.f])
            wc = 1j * hat.edge.g.eval_float(prm)
            (p_plus if sign > 0 else p_minus).append((zc, wc))
        zp, wp = p_plus[0]
        zm, wm = p_minus[0]
        a_vec = np.concatenate([(zp - zm) / (2 * delta), [(wp - wm) / (2 * delta)]])
        b_vec = np.concatenate([(zp + zm) / 2, [(wp + wm) / 2]])
    else:
        a_vec = np.concatenate([sig_f.astype(complex), [0j]])
        b_vec = np.concatenate([np.zeros(n, dtype=complex), [1j * delta ** 2]])

    for zeta_edge in (delta, -delta):
        pt, _ = _disc_coords(a_vec, b_vec, n, np.array([zeta_edge + 0j]))
        resid = abs(_height_defect(hat.h, pt, n)[0])
        if modified and resid > 1e-9:
            raise CertificateError(
                "anchor points fail to sit on the transformed graph",
                margin=resid)

    thetas = np.linspace(0.0, 2.0 * math.pi, angles, endpoint=False)
    units = np.exp(1j * thetas)
    s_grid = np.linspace(delta / march_steps, 3.0 * delta, march_steps)
    zeta_grid = units[:, None] * s_grid[None, :]
    pts, _ = _disc_coords(a_vec, b_vec, n, zeta_grid.ravel())
    vals = _height_defect(hat.h, pts, n).reshape(angles, march_steps)
    outside = vals >= 0
    if not np.all(np.any(outside, axis=1)):
        raise CertificateError("no boundary crossing within three disc sizes")
    first = np.argmax(outside, axis=1)
    if np.any(first == 0):
        raise CertificateError("disc exits immediately; size too large")
    cols = np.arange(march_steps)[None, :]
    reentry = (~outside) & (cols > first[:, None])
    if np.any(vals[reentry] < -1e-12):
        raise CertificateError("disc boundary is not star-shaped")
    lo = s_grid[first - 1]
    hi = s_grid[first]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        pts_mid, _ = _disc_coords(a_vec, b_vec, n, mid * units)
        v_mid = _height_defect(hat.h, pts_mid, n)
        inside = v_mid < 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    radii = 0.5 * (lo + hi)

    boundary_zeta = radii * units
    b_pts, b_pairs = _disc_coords(a_vec, b_vec, n, boundary_zeta)
    label_wedge = _label_wedge(hat, sigma, aperture, extent)
    labels = []
    for idx in range(angles):
        p = b_pts[idx]
        if edge_distance(p, hat.edge) <= edge_tol:
            labels.append("edge")
            continue
        lab, _ = wedge_side(label_wedge, hat.h, p, graph_tol=1e-7)
        if lab == "none":
            raise CertificateError(
                f"boundary sample at angle {float(thetas[idx]):.6f} escapes "
                "the wedge")
        labels.append(lab)
    seq = [lab for lab in labels if lab != "edge"]
    crossings = sum(1 for i in range(len(seq))
                    if seq[i] != seq[(i + 1) % len(seq)]) if seq else 0

    sub = np.arange(0, angles, max(1, angles // ring_angles))
    ring_zetas = [np.array([0j])]
    for k in range(1, ring_depth + 1):
        ring_zetas.append(radii[sub] * units[sub] * 0.5 ** k)
    int_zeta = np.concatenate(ring_zetas)
    i_pts, i_pairs = _disc_coords(a_vec, b_vec, n, int_zeta)
    heights = _height_defect(hat.h, i_pts, n)
    interior_max = float(np.max(heights))
    if interior_max >= 0:
        raise CertificateError("interior sample leaves the open side",
                               margin=interior_max)

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(41,)))
    polys = random_polynomials(audit_polynomials, audit_degree, rng)
    slack = modulus_slack(b_pairs, i_pairs, polys, audit_tol)

    center = tuple(complex(c) for c in b_vec)
    return LewyDisc(sigma, scale, delta, modified, q_s, center, b_pts,
                    b_pairs, tuple(labels), crossings, radii, interior_max,
                    i_pts, slack)


# ---------------------------------------------------------------------------
# one-sided evidence set


@dataclass(frozen=True)
class OneSidedReport:
    """Disc-family evidence for a one-sided verdict."""

    side: str
    flipped: bool
    deltas: tuple[float, ...]
    records: tuple[dict, ...]
    cones: tuple[dict, ...]
    resolution: float
    cloud_size: int
    tangency_max: float
    sigma_skipped: int

    @property
    def two_sided_evidence(self) -> bool:
        return all(r["plus"] > 0 and r["minus"] > 0 for r in self.records)


def _flip_model(model: HypersurfaceModel) -> tuple[HypersurfaceModel, PolyMap]:
    """Conjugate by negating the transversal complex coordinate."""
    n, cap = model.n, model.cap
    av = ambient_vars(n)
    diag = linalg.identity(2 * n + 2)
    diag[2 * n][2 * n] = F(-1)
    diag[2 * n + 1][2 * n + 1] = F(-1)
    flip = PolyMap.linear(diag, av, av, cap)
    r2 = compose_truncated(model.r, flip, cap)
    pv = param_vars(n)
    sub = {v: TruncatedPoly.variable(v, pv, cap) for v in pv}
    sub["u"] = -sub["u"]
    f2 = tuple(substitute(fj, sub, cap) for fj in model.edge.f)
    g2 = -substitute(model.edge.g, sub, cap)
    base = (*model.base_params[:n], -model.base_params[n])
    return HypersurfaceModel(n, r2, EdgeModel(n, f2, g2), base), flip


def _flip_wedge(wedge: WedgeSpec, edge2: EdgeModel) -> WedgeSpec:
    n, cap = wedge.edge.n, wedge.edge.cap
    pv = param_vars(n)
    sub = {v: TruncatedPoly.variable(v, pv, cap) for v in pv}
    sub["u"] = -sub["u"]
    comps = []
    for k, comp in enumerate(wedge.axis):
        moved = substitute(comp, sub, cap)
        comps.append(-moved if k >= 2 * n else moved)
    return WedgeSpec(edge2, tuple(comps), wedge.aperture, wedge.extent,
                     wedge.sides)


def _edge_tangent(model: HypersurfaceModel, j: int) -> list[Fraction]:
    """Ambient tangent column of the edge graph along parameter j."""
    n = model.n
    point = [F(c) for c in model.base_params]
    col = [F(0)] * (2 * n + 2)
    if j < n:
        col[j] = F(1)
    else:
        col[2 * n] = F(1)
    for i in range(n):
        col[n + i] = model.edge.f[i].partial(model.edge.params[j]).eval_exact(point)
    col[2 * n + 1] = model.edge.g.partial(model.edge.params[j]).eval_exact(point)
    return col


def one_sided_set(model: HypersurfaceModel, wedge: WedgeSpec, *,
                  deltas=(0.01, 0.03, 0.05), offset=F(1, 20),
                  resolution: float = 1e-3, angles: int = 240,
                  march_steps: int = 150, seed: int = 0) -> OneSidedReport:
    """Sweep attached discs over base points, transversals, and directions.

    Requires a one-sided classification.  When the witness carries a negative
    form value the model is conjugated so the discs open into the certified
    side.  For each base/transversal pair the disc interiors form a point
    cloud; a cone around the transversal is tested for resolution-bounded
    inclusion in the cloud, boundary labels must witness both sides, and the
    center curve must leave tangent to the transversal.
    """
    cls = classify_wedge(model, wedge)
    if cls.verdict != "OneSidedExtension":
        raise PreconditionError(
            f"one-sided evidence needs a one-sided verdict, got {cls.verdict}")
    flipped = cls.q_witness is not None and cls.q_witness < 0
    if flipped:
        work_model, flip_map = _flip_model(model)
        work_wedge = _flip_wedge(wedge, work_model.edge)
    else:
        work_model, flip_map = model, None
        work_wedge = wedge
    n = work_model.n

    wit = cls.witness_ambient
    rat = [F(x).limit_denominator(10 ** 6) for x in wit[n:2 * n]] \
        if wit is not None else []
    if not rat or all(c == 0 for c in rat):
        rat = [F(1)] + [F(0)] * (n - 1)
    align = WedgeSpec.from_sparse(
        work_model.edge, {f"y{j + 1}": rat[j] for j in range(n) if rat[j] != 0},
        work_wedge.aperture, work_wedge.extent, "two")

    offset = F(offset)
    base0 = work_model.base_params
    p_grid = [base0,
              tuple(c + (offset if k == 0 else 0) for k, c in enumerate(base0)),
              tuple(c - (offset if k == n else 0) for k, c in enumerate(base0))]
    tan_u = _edge_tangent(work_model, n)
    tan_x = _edge_tangent(work_model, 0)
    tau_tilt = j_rotate([u + F(1, 10) * x for u, x in zip(tan_u, tan_x)], n)
    tau_grid: list = [None, tau_tilt]
    spread = F(work_wedge.aperture) / 4
    sigma_grid = [tuple(F(1) if j == 0 else 0 for j in range(n))]
    for j in range(1, n):
        for sgn in (1, -1):
            sigma_grid.append(tuple(
                F(1) if k == 0 else (sgn * spread if k == j else F(0))
                for k in range(n)))

    records: list[dict] = []
    cones: list[dict] = []
    cloud_total = 0
    tangency_max = 0.0
    skipped = 0
    deltas = tuple(float(d) for d in deltas)
    d_min = min(deltas)
    for p_idx, base in enumerate(p_grid):
        model_p = HypersurfaceModel(n, work_model.r, work_model.edge,
                                    tuple(F(c) for c in base))
        p_amb = np.array(model_p.edge.embed_float([float(c) for c in base]))
        wedge_axis = work_wedge.axis_at([float(c) for c in base])
        for t_idx, tau in enumerate(tau_grid):
            nf = normal_form(model_p, tau=tau, wedge=align, align_axis=True)
            if nf.lam[0][0] <= 0:
                raise PreconditionError(
                    "aligned witness lost its positive form value")
            hat = hat_change(nf)
            mat = nf.to_original.linear_matrix()
            tau_dir = np.array([float(row[2 * n + 1]) for row in mat])
            cloud: list[np.ndarray] = []
            admissible = 0
            for sigma in sigma_grid:
                if form_value(nf.lam, sigma) <= 0:
                    skipped += 1
                    continue
                sig_dir = np.zeros(2 * n + 2)
                for j in range(n):
                    col = np.array([float(row[n + j]) for row in mat])
                    sig_dir += float(sigma[j]) * col
                probe = p_amb + sig_dir * (float(work_wedge.extent) / 8 /
                                           max(np.linalg.norm(sig_dir), 1e-12))
                cone = RoundCone.from_direction(
                    wedge_axis, float(work_wedge.aperture),
                    float(work_wedge.extent), vertex=p_amb)
                if not cone_contains(cone, probe).contains:
                    skipped += 1
                    continue
                admissible += 1
                plus = minus = edge_hits = 0
                tangency = 0.0
                for delta in deltas:
                    disc = _lewy_from_hat(
                        nf, hat, sigma, delta, modified=None, angles=angles,
                        march_steps=march_steps, edge_tol=1e-8,
                        aperture=F(1, 2), extent=F(1), ring_depth=6,
                        ring_angles=16, audit_polynomials=4, audit_degree=3,
                        audit_tol=1e-6, seed=seed)
                    plus += sum(1 for lab in disc.labels if lab == "plus")
                    minus += sum(1 for lab in disc.labels if lab == "minus")
                    edge_hits += disc.edge_hits
                    pts_nf = hat.from_hat.eval_many(disc.interior_points)
                    pts_orig = nf.to_original.eval_many(pts_nf)
                    if flip_map is not None:
                        pts_orig = flip_map.eval_many(pts_orig)
                    cloud.append(pts_orig)
                    if delta == d_min:
                        # angle in working coordinates; the flip is an isometry
                        c_hat = np.empty(2 * n + 2)
                        c_hat[:n] = [c.real for c in disc.center[:n]]
                        c_hat[n:2 * n] = [c.imag for c in disc.center[:n]]
                        c_hat[2 * n] = disc.center[n].real
                        c_hat[2 * n + 1] = disc.center[n].imag
                        c_nf = hat.from_hat.eval_many(c_hat[None, :])
                        c_work = nf.to_original.eval_many(c_nf)[0]
                        vec = np.asarray(c_work, dtype=float) - p_amb
                        cosv = float(np.dot(vec, tau_dir) /
                                     (np.linalg.norm(vec) *
                                      np.linalg.norm(tau_dir)))
                        tangency = math.acos(min(1.0, max(-1.0, abs(cosv))))
                records.append({"base": p_idx, "tau": t_idx,
                                "sigma": tuple(str(c) for c in sigma),
                                "plus": plus, "minus": minus,
                                "edge": edge_hits, "tangency": tangency})
                tangency_max = max(tangency_max, tangency)
            if admissible == 0:
                raise PreconditionError(
                    "no admissible disc directions inside the wedge cone")
            cloud_arr = np.concatenate(cloud)
            cloud_total += len(cloud_arr)
            if flip_map is None:
                tau_orig, p_orig = tau_dir, p_amb
            else:
                tau_orig = flip_map.eval_many(tau_dir[None, :])[0]
                p_orig = flip_map.eval_many(p_amb[None, :])[0]
            cones.append(_cone_inclusion(np.asarray(p_orig, dtype=float),
                                         np.asarray(tau_orig, dtype=float),
                                         cloud_arr, resolution, p_idx, t_idx,
                                         max(deltas)))
    return OneSidedReport(cls.side or "", flipped, deltas, tuple(records),
                          tuple(cones), resolution, cloud_total, tangency_max,
                          skipped)


def _cone_inclusion(vertex: np.ndarray, axis: np.ndarray, cloud: np.ndarray,
                    resolution: float, p_idx: int, t_idx: int,
                    d_max: float) -> dict:
    """Largest tested cone aperture whose grid stays resolution-close to the cloud."""
    axis = axis / np.linalg.norm(axis)
    extent = 0.8 * d_max ** 2
    dim = len(vertex)
    basis = np.linalg.qr(np.column_stack([axis, np.eye(dim)]))[0][:, 1:5]
    radii = extent * np.array([0.25, 0.5, 0.75, 1.0])
    chosen = 0.0
    defect_best = math.inf
    for ap in (0.5, 0.25, 0.125, 0.0625, 0.03125):
        pts = [vertex + s * axis for s in radii]
        for s in radii:
            for kdir in range(basis.shape[1]):
                for frac in (0.5, 1.0):
                    lateral = ap * frac * s
                    pts.append(vertex + s * axis + lateral * basis[:, kdir])
                    pts.append(vertex + s * axis - lateral * basis[:, kdir])
        test = np.array(pts)
        d2 = np.sum((test[:, None, :] - cloud[None, :, :]) ** 2, axis=2)
        defect = float(np.sqrt(np.min(d2, axis=1)).max())
        if defect <= resolution:
            chosen = ap
            defect_best = defect
            break
        defect_best = min(defect_best, defect)
    return {"base": p_idx, "tau": t_idx, "aperture": chosen,
            "extent": extent, "max_defect": defect_best}
