"""Disc family, scaling reduction, spike constants, hull certificate tests."""

from fractions import Fraction as F

import numpy as np
import pytest

from wedgehull.errors import CertificateError, PreconditionError
from wedgehull.geometry import ScreenSet, screen_contains_many
from wedgehull.screens import (
    FoldingDisc,
    HullCertificate,
    cover_target_point,
    disc_trace,
    folding_disc,
    max_modulus_audit,
    random_polynomials,
    scaling_constants,
    scaling_map_many,
    spike_constants,
    spike_union_check,
    verify_screen_hull,
)
from wedgehull.series import TruncatedPoly


def xi_poly(coeffs, cap=4):
    return TruncatedPoly(("xi1", "xi2"), cap, coeffs)


ZERO_XI = xi_poly({})
NORM_SQ = xi_poly({(2, 0): F(1), (0, 2): F(1)})


# ---------------------------------------------------------------------------
# disc family


def test_disc_parameter_validation():
    for t in (5.0, 6.0, 4.5, 7.0):
        with pytest.raises(PreconditionError):
            FoldingDisc(t)


def test_disc_point_oracle():
    # t = 5.2425 at z = 3.8025: sqrt(t - z) = 1.2, sqrt(-z) branch depth 1.95
    disc = folding_disc(5.2425)
    zeta1, zeta2 = disc.point(3.8025)
    assert abs(zeta1 - 0.2j) <= 1e-12
    assert abs(zeta2 - 0.05j) <= 1e-12


def test_disc_right_edge_folds_flat():
    disc = FoldingDisc(5.3)
    y = np.linspace(-disc.y_extent, disc.y_extent, 257)
    pts = disc.points((4.0 - y * y / 16.0) + 1j * y)
    assert np.max(np.abs(pts[:, 1].imag)) <= 1e-12
    # the flattened component runs along xi2 = y/4
    assert np.max(np.abs(pts[:, 1].real - y / 4.0)) <= 1e-12


def test_disc_left_edge_folds_to_height_one():
    disc = FoldingDisc(5.3)
    y = np.linspace(-disc.y_extent, disc.y_extent, 257)
    pts = disc.points((disc.t - 4.0 + y * y / 16.0) + 1j * y)
    assert np.max(np.abs(pts[:, 0].imag - 1.0)) <= 1e-12
    assert np.max(np.abs(pts[:, 0].real - y / 4.0)) <= 1e-12


@pytest.mark.parametrize("t", [5.1, 5.5, 5.9])
def test_disc_identities_on_grid(t):
    disc = folding_disc(t)  # raises if the grid residuals exceed 1e-12
    rng = np.random.default_rng(3)
    y = rng.uniform(-disc.y_extent, disc.y_extent, 400)
    lo = t - 4.0 + y * y / 16.0
    hi = 4.0 - y * y / 16.0
    zs = lo + rng.uniform(0.0, 1.0, 400) * (hi - lo) + 1j * y
    pts = disc.points(zs)
    assert np.max(disc.quadric_residual(zs, pts)) <= 1e-12
    assert np.max(disc.surface_residual(pts)) <= 1e-12


def test_disc_boundary_inside_preliminary_screen():
    screen = ScreenSet.preliminary()
    for t in np.linspace(5.05, 5.95, 10):
        disc = FoldingDisc(float(t))
        right, left = disc.boundary_params(400)
        pts = disc.points(np.concatenate([right, left]))
        mask, margins = screen_contains_many(screen, pts)
        assert np.all(mask)
        assert np.min(margins) > 0.0
        xi_sq = pts[:, 0].real ** 2 + pts[:, 1].real ** 2
        assert np.max(xi_sq) <= 3.0 + 1e-9
        # scalar inequality used to squeeze the arcs into the screen
        assert np.all(xi_sq / 8.0 <= np.sqrt(xi_sq + 1.0) - 1.0 + 1e-12)


def test_mirrored_disc_negates_second_component():
    plain = folding_disc(5.4)
    mirror = folding_disc(5.4, mirrored=True)
    zs = np.array([plain.t - 2.0 + 0.3j, 3.5 - 1.0j, 2.8 + 0.0j])
    assert np.allclose(mirror.points(zs)[:, 1], -plain.points(zs)[:, 1])
    assert np.allclose(mirror.points(zs)[:, 0], plain.points(zs)[:, 0])


def test_branch_violation_raises():
    disc = FoldingDisc(5.5)
    with pytest.raises(CertificateError):
        disc.points(np.array([10.0 + 0.0j]))


def test_disc_trace_rows():
    disc = FoldingDisc(5.25)
    rows = disc_trace(disc, samples=32)
    assert len(rows) == 64
    right = [r for r in rows if r[1] == "right"]
    left = [r for r in rows if r[1] == "left"]
    assert all(abs(r[3]) <= 1e-12 for r in right)
    assert all(abs(r[2] - 1.0) <= 1e-12 for r in left)
    assert all(r[0] == 5.25 for r in rows)


# ---------------------------------------------------------------------------
# scaling constants


def test_scaling_constants_unit_oracle():
    data = scaling_constants(1, 1)
    assert data.big_a == F(8)
    assert data.delta == F(1, 32)


def test_scaling_constants_quarter_oracle():
    data = scaling_constants(F(1, 4), 4)
    assert data.big_a == F(128)
    assert data.delta == F(1, 2048)


def test_scaling_constants_rejects_nonpositive():
    with pytest.raises(PreconditionError):
        scaling_constants(0, 1)


def _screen_samples(screen, count, rng, eta1_hi, xi_hi, eta2_scale):
    pts = np.empty((0, 2), dtype=complex)
    while pts.shape[0] < count:
        eta1 = rng.uniform(0.0, eta1_hi, 4 * count)
        xi = rng.uniform(-xi_hi, xi_hi, (4 * count, 2))
        eta2 = rng.uniform(-1.0, 1.0, 4 * count) * eta2_scale * eta1 ** 2
        cand = np.column_stack([xi[:, 0] + 1j * eta1, xi[:, 1] + 1j * eta2])
        mask, _ = screen_contains_many(screen, cand)
        pts = np.vstack([pts, cand[mask]])[:count]
    return pts


def test_scaling_pullback_lands_in_scaled_screen():
    # phi^{-1}(preliminary) sits inside the scaled screen: 1e5 samples
    data = scaling_constants(F(1, 4), 4)
    rng = np.random.default_rng(7)
    w = _screen_samples(ScreenSet.preliminary(), 100000, rng, 2.0, 4.0, 2.0)
    a = float(data.big_a)
    pulled = np.column_stack([w[:, 0] / a,
                              w[:, 1] * float(data.epsilon) / (2.0 * a * a)])
    mask, margins = screen_contains_many(
        ScreenSet.scaled(data.epsilon, data.k_const), pulled)
    assert np.all(mask)
    assert np.min(margins) > 0.0


def test_scaled_target_pushes_into_target():
    # T_delta maps into the unit target under phi: 1e5 samples
    data = scaling_constants(1, 1)
    rng = np.random.default_rng(8)
    delta = float(data.delta)
    eta1 = rng.uniform(0.0, delta, 100000)
    eta1 = eta1[eta1 > 0.0]
    eta2 = rng.uniform(-1.0, 1.0, eta1.size) * delta * eta1 * 0.999
    pts = np.column_stack([1j * eta1, 1j * eta2])
    mask, _ = screen_contains_many(ScreenSet.target_scaled(data.delta), pts)
    pts = pts[mask]
    assert pts.shape[0] > 50000
    pushed = scaling_map_many(data, pts)
    mask, margins = screen_contains_many(ScreenSet.target(), pushed)
    assert np.all(mask)
    assert np.min(margins) > 0.0


# ---------------------------------------------------------------------------
# spike constants


def test_spike_constants_unit_oracle():
    data = spike_constants(1, 1, 1, 1)
    assert data.epsilon == F(1, 4)
    assert data.k_const == F(4)
    assert data.delta == F(1, 2048)
    assert len(data.audit) == 7
    assert data.all_pass()


def test_spike_constants_second_oracle():
    data = spike_constants(2, F(1, 2), F(1, 2), F(1, 5))
    assert data.epsilon == F(1, 8)
    assert data.k_const == F(32)
    assert data.delta == F(1, 65536)
    assert data.all_pass()


def test_spike_constants_random_self_audit():
    rng = np.random.default_rng(11)
    for _ in range(40):
        a = F(int(rng.integers(1, 9)), int(rng.integers(1, 5)))
        beta = F(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        ell = F(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        reach = F(int(rng.integers(1, 6)), int(rng.integers(1, 11)))
        data = spike_constants(a, beta, ell, reach)
        assert data.all_pass()
        assert data.epsilon == min(F(1), beta / 4, ell / 4)
        k = data.k_const
        assert k.denominator == 1 and (k.numerator & (k.numerator - 1)) == 0


def test_spike_constants_rejects_nonpositive():
    with pytest.raises(PreconditionError):
        spike_constants(1, 0, 1, 1)


# ---------------------------------------------------------------------------
# max-modulus audit


def test_max_modulus_constant_has_zero_slack():
    disc = FoldingDisc(5.5)
    audit = max_modulus_audit(disc, [np.array([[1.0 + 0.0j]])])
    assert audit.worst_slack == 0.0
    assert audit.passed


def test_max_modulus_coordinate_polynomial():
    disc = FoldingDisc(5.5)
    coeffs = np.zeros((1, 2), dtype=complex)
    coeffs[0, 1] = 1.0  # p(z1, z2) = z2
    audit = max_modulus_audit(disc, [coeffs])
    assert audit.worst_slack < 0.0


def test_max_modulus_random_polynomials():
    rng = np.random.default_rng(13)
    for t in (5.2, 5.5, 5.8):
        disc = FoldingDisc(t)
        polys = random_polynomials(20, 4, rng)
        audit = max_modulus_audit(disc, polys, tol=1e-6, rng=rng)
        assert audit.passed
        assert audit.polynomials == 20


# ---------------------------------------------------------------------------
# spike union membership


def test_spike_union_zero_offsets():
    data = spike_constants(1, 1, 1, 1)
    result = spike_union_check(data.epsilon, data.k_const, ZERO_XI, ZERO_XI,
                               ZERO_XI, 1, 1, 1, 1, samples=100000, seed=0)
    assert result["all_contained"]
    assert result["samples"] == 100000
    assert result["min_margin"] > 0.0


def test_spike_union_worst_case_bounds():
    # |q1| = |xi|^2, |q2| = |xi|^4, |m| = |xi|^2 saturate the A = 1 bounds
    data = spike_constants(1, 1, 1, 1)
    q2 = NORM_SQ * NORM_SQ
    result = spike_union_check(data.epsilon, data.k_const, NORM_SQ, q2,
                               NORM_SQ, 1, 1, 1, 1, samples=20000, seed=1)
    assert result["all_contained"]
    assert result["min_margin"] > 0.0


def test_spike_union_bound_violation_names_culprit():
    data = spike_constants(1, 1, 1, 1)
    q1 = xi_poly({(2, 0): F(2)})  # |q1| = 2 xi1^2 beats A |xi|^2 on the axis
    with pytest.raises(PreconditionError, match="q1"):
        spike_union_check(data.epsilon, data.k_const, q1, ZERO_XI, ZERO_XI,
                          1, 1, 1, 1, samples=100, seed=0)


def test_spike_union_rejects_wrong_variables():
    data = spike_constants(1, 1, 1, 1)
    bad = TruncatedPoly(("x1",), 4, {})
    with pytest.raises(PreconditionError):
        spike_union_check(data.epsilon, data.k_const, bad, ZERO_XI, ZERO_XI,
                          1, 1, 1, 1)


# ---------------------------------------------------------------------------
# hull certificate


def test_cover_target_point_records_disc_parameter():
    rec = cover_target_point(0.2, 0.05)
    assert rec["in_screen"]  # 0.05 < 2 * 0.2^2
    assert rec["t"] is not None
    assert abs(rec["t"] - 5.2425) <= 1e-12
    assert rec["disc_ok"]
    assert rec["status"] == "in_screen"


def test_cover_target_point_screen_route():
    rec = cover_target_point(0.5, 0.2)
    assert rec["in_screen"]
    assert rec["status"] == "in_screen"


def test_cover_target_point_disc_route():
    # 0.03 >= 2 * 0.1^2 so the screen misses it; the disc picks it up
    rec = cover_target_point(0.1, 0.03)
    assert not rec["in_screen"]
    assert rec["status"] == "disc"
    assert abs(rec["t"] - 5.0909) <= 1e-12
    assert rec["margin"] > 0.0


def test_cover_target_point_mirrored_route():
    rec = cover_target_point(0.1, -0.03)
    assert not rec["in_screen"]
    assert rec["status"] == "disc"
    assert abs(rec["t"] - 5.0909) <= 1e-12


def test_verify_screen_hull_small_grid():
    cert = verify_screen_hull(t_count=6, boundary_samples=200, target_count=10,
                              audit_polynomials=2, audit_interior=50, seed=0)
    assert isinstance(cert, HullCertificate)
    assert cert.valid
    assert not cert.marginal
    assert cert.min_boundary_margin > 1e-9
    assert cert.max_xi_sq <= 3.0 + 1e-9
    assert cert.cross_check_margin >= 0.0
    assert cert.covered == len(cert.coverage) == 100
    assert cert.in_screen < cert.covered  # both routes exercised
    assert len(cert.audits) == 6
    assert all(a.passed for a in cert.audits)
    assert not cert.failures


def test_verify_screen_hull_deterministic():
    a = verify_screen_hull(t_count=4, boundary_samples=100, target_count=6,
                           audit_polynomials=2, audit_interior=40, seed=5)
    b = verify_screen_hull(t_count=4, boundary_samples=100, target_count=6,
                           audit_polynomials=2, audit_interior=40, seed=5)
    assert a.summary() == b.summary()
    assert a.coverage == b.coverage
