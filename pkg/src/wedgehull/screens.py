"""Quadric disc families, the scaling reduction, spike constants, hull certificates.

The disc family lives over a lens-shaped parameter region and folds its two
boundary arcs onto the faces {eta2 = 0} and {eta1 = 1}.  Certificates record
strict membership margins for every sampled statement, so a valid certificate
is a finite, replayable numeric witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CertificateError, PreconditionError
from .geometry import ScreenSet, screen_contains_many
from .series import TruncatedPoly

F = Fraction


# ---------------------------------------------------------------------------
# disc family


@dataclass(frozen=True)
class FoldingDisc:
    """Analytic disc on the quadric (z1+i)^2 + (z2-2i)^2 + t = 0, branch-resolved.

    The parameter domain is the lens t-4+y^2/16 <= x <= 4-y^2/16.  The first
    component keeps Im in (0, 1], the second in [0, 1).  The mirrored family
    negates the second component, sweeping the eta2 < 0 half.
    """

    t: float
    mirrored: bool = False

    def __post_init__(self):
        if not 5.0 < self.t < 6.0:
            raise PreconditionError(f"disc parameter must be in (5, 6), got {self.t!r}")

    @property
    def y_extent(self) -> float:
        return math.sqrt(8.0 * (8.0 - self.t))

    def param_margin(self, zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        x, y = zs.real, zs.imag
        return np.minimum(x - (self.t - 4.0 + y * y / 16.0),
                          (4.0 - y * y / 16.0) - x)

    def points(self, zs) -> np.ndarray:
        """Map parameters to the quadric, selecting the unique admissible branches."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        root1 = np.sqrt(zs - self.t)
        zeta1 = self._select(-1j + root1, -1j - root1, 0.0, 1.0, "first")
        root2 = np.sqrt(-zs)
        zeta2 = self._select(2j + root2, 2j - root2, 0.0, 1.0, "second")
        if self.mirrored:
            zeta2 = -zeta2
        return np.stack([zeta1, zeta2], axis=-1)

    def point(self, z: complex) -> tuple[complex, complex]:
        out = self.points(np.array([z]))[0]
        return complex(out[0]), complex(out[1])

    @staticmethod
    def _select(plus, minus, lo, hi, which, tol=1e-9):
        # exactly one square root lands in the admissible strip; tol absorbs
        # roundoff at the closed ends hit by the boundary arcs
        ok_plus = (plus.imag >= lo - tol) & (plus.imag <= hi + tol)
        ok_minus = (minus.imag >= lo - tol) & (minus.imag <= hi + tol)
        if not np.all(ok_plus | ok_minus):
            bad = int(np.argmax(~(ok_plus | ok_minus)))
            raise CertificateError(
                f"no admissible branch for the {which} component",
                sample=(complex(plus[bad]), complex(minus[bad])))
        return np.where(ok_plus, plus, minus)

    def boundary_params(self, samples: int) -> tuple[np.ndarray, np.ndarray]:
        """Parameter samples of the two boundary arcs (right edge, left edge)."""
        y = np.linspace(-self.y_extent, self.y_extent, samples)
        right = (4.0 - y * y / 16.0) + 1j * y
        left = (self.t - 4.0 + y * y / 16.0) + 1j * y
        return right, left

    def interior_params(self, count: int, inset: float, rng) -> np.ndarray:
        """Uniform interior samples at distance >= inset from the boundary."""
        depth = 8.0 - self.t - 2.0 * inset
        if depth <= 0:
            return np.empty(0, dtype=complex)
        y_max = math.sqrt(8.0 * depth)
        out = []
        while len(out) < count:
            y = rng.uniform(-y_max, y_max, size=4 * count)
            x = rng.uniform(self.t - 4.0, 4.0, size=4 * count)
            z = x + 1j * y
            keep = self.param_margin(z) >= inset
            out.extend(z[keep][:count - len(out)])
        return np.array(out, dtype=complex)

    def quadric_residual(self, zs, pts: np.ndarray) -> np.ndarray:
        zeta1, zeta2 = pts[:, 0], pts[:, 1]
        if self.mirrored:
            zeta2 = -zeta2
        return np.abs((zeta1 + 1j) ** 2 + (zeta2 - 2j) ** 2 + self.t)

    def surface_residual(self, pts: np.ndarray) -> np.ndarray:
        """Distance from (eta1+1)^2 + (eta2 -+ 2)^2 = |xi|^2 + t, mirrored-aware."""
        zeta1, zeta2 = pts[:, 0], pts[:, 1]
        sign = -1.0 if self.mirrored else 1.0
        lhs = (zeta1.imag + 1.0) ** 2 + (sign * zeta2.imag - 2.0) ** 2
        rhs = zeta1.real ** 2 + zeta2.real ** 2 + self.t
        return np.abs(lhs - rhs)


def folding_disc(t: float, mirrored: bool = False, *, grid: int = 64,
                 tol: float = 1e-12) -> FoldingDisc:
    """Construct a disc and verify its defining identities on a parameter grid."""
    disc = FoldingDisc(float(t), mirrored)
    ys = np.linspace(-disc.y_extent, disc.y_extent, grid)
    fracs = np.linspace(0.0, 1.0, grid)
    zs = []
    for y in ys:
        left = disc.t - 4.0 + y * y / 16.0
        right = 4.0 - y * y / 16.0
        zs.extend(left + f * (right - left) + 1j * y for f in fracs)
    zs = np.array(zs, dtype=complex)
    pts = disc.points(zs)
    bad_q = float(np.max(disc.quadric_residual(zs, pts)))
    bad_s = float(np.max(disc.surface_residual(pts)))
    if bad_q > tol or bad_s > tol:
        raise CertificateError(
            "disc identities fail on the verification grid",
            margin=max(bad_q, bad_s))
    return disc


def disc_trace(disc: FoldingDisc, samples: int = 256) -> list[tuple[float, str, float, float]]:
    """(t, arc, eta1, eta2) rows for the two boundary arcs, for plotting/CSV."""
    right, left = disc.boundary_params(samples)
    rows = []
    for arc, zs in (("right", right), ("left", left)):
        pts = disc.points(zs)
        for p in pts:
            rows.append((disc.t, arc, float(p[0].imag), float(p[1].imag)))
    return rows


# ---------------------------------------------------------------------------
# max-modulus audit


def eval_poly2(coeffs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Evaluate sum c[i,j] * z1^i * z2^j on rows of pts."""
    z1, z2 = pts[:, 0], pts[:, 1]
    deg1, deg2 = coeffs.shape
    pow1 = np.stack([z1 ** i for i in range(deg1)])
    pow2 = np.stack([z2 ** j for j in range(deg2)])
    return np.einsum("ij,in,jn->n", coeffs, pow1, pow2)


@dataclass(frozen=True)
class ModulusAudit:
    disc_t: float
    polynomials: int
    worst_slack: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst_slack <= self.tolerance


def modulus_slack(boundary: np.ndarray, interior: np.ndarray,
                  polynomials: Sequence[np.ndarray], tol: float) -> float:
    """Worst interior-vs-boundary modulus gap over a batch of test polynomials.

    Both point sets are (k, 2) complex arrays sampled from the same analytic
    disc, boundary points on its frontier.  For each polynomial the sampled
    interior maximum of |p| must not beat the sampled boundary maximum by more
    than the tolerance; a violation means the map is not analytic, which is a
    bug, so it raises rather than reporting.
    """
    worst = -math.inf
    for coeffs in polynomials:
        coeffs = np.asarray(coeffs, dtype=complex)
        bound = float(np.max(np.abs(eval_poly2(coeffs, boundary))))
        inner = float(np.max(np.abs(eval_poly2(coeffs, interior))))
        slack = inner - bound
        if slack > tol:
            raise CertificateError(
                "interior modulus beats the boundary: non-analytic disc map",
                margin=slack)
        worst = max(worst, slack)
    return worst


def max_modulus_audit(disc: FoldingDisc, polynomials: Sequence[np.ndarray], *,
                      boundary_samples: int = 1000, interior_samples: int = 200,
                      tol: float = 1e-6, rng=None) -> ModulusAudit:
    """Check |p| on interior samples never beats the sampled boundary maximum."""
    if rng is None:
        rng = np.random.default_rng(0)
    right, left = disc.boundary_params(boundary_samples)
    boundary = disc.points(np.concatenate([right, left]))
    arc_len = 2.0 * (4.0 + disc.y_extent)  # crude upper bound per arc
    inset = max(3.0 * arc_len / boundary_samples, 1e-3)
    interior_z = disc.interior_params(interior_samples, inset, rng)
    interior = disc.points(interior_z)
    worst = modulus_slack(boundary, interior, polynomials, tol)
    return ModulusAudit(disc.t, len(polynomials), worst, tol)


def random_polynomials(count: int, degree: int, rng) -> list[np.ndarray]:
    out = []
    for _ in range(count):
        c = rng.normal(size=(degree + 1, degree + 1)) + \
            1j * rng.normal(size=(degree + 1, degree + 1))
        out.append(c)
    return out


# ---------------------------------------------------------------------------
# scaling reduction


@dataclass(frozen=True)
class ScalingData:
    epsilon: Fraction
    k_const: Fraction
    big_a: Fraction
    delta: Fraction

    def apply(self, zeta1: complex, zeta2: complex) -> tuple[complex, complex]:
        a = float(self.big_a)
        return a * zeta1, (2.0 * a * a / float(self.epsilon)) * zeta2


def scaling_constants(epsilon, k_const) -> ScalingData:
    """Dilation sending the scaled screen into the preliminary one.

    big_a = max(2/eps, eps/2, 8K/eps); the map is (z1, z2) -> (A z1, 2A^2 z2 / eps);
    delta = min(1/A, eps/(4A)) shrinks the target so it pulls back into the
    preliminary target.
    """
    eps, k = F(epsilon), F(k_const)
    if eps <= 0 or k <= 0:
        raise PreconditionError("screen constants must be positive")
    big_a = max(2 / eps, eps / 2, 8 * k / eps)
    delta = min(1 / big_a, eps / (4 * big_a))
    return ScalingData(eps, k, big_a, delta)


def scaling_map_many(data: ScalingData, zetas: np.ndarray) -> np.ndarray:
    a = float(data.big_a)
    out = np.array(zetas, dtype=complex)
    out[:, 0] *= a
    out[:, 1] *= 2.0 * a * a / float(data.epsilon)
    return out


# ---------------------------------------------------------------------------
# spike constants


@dataclass(frozen=True)
class SpikeConstants:
    big_a: Fraction
    sharpness: Fraction
    length: Fraction
    reach: Fraction
    epsilon: Fraction
    k_const: Fraction
    delta: Fraction
    audit: tuple[tuple[str, bool], ...]

    def all_pass(self) -> bool:
        return all(ok for _, ok in self.audit)


def _spike_audit(a: Fraction, beta: Fraction, ell: Fraction, reach: Fraction,
                 eps: Fraction, k: Fraction) -> tuple[tuple[str, bool], ...]:
    return (
        ("eps <= 1", eps <= 1),
        ("eps < beta/2", eps < beta / 2),
        ("K >= 1/r^2", k >= 1 / reach ** 2),
        ("K >= A", k >= a),
        ("K > (2 beta + 1) A", k > (2 * beta + 1) * a),
        ("K^2/eps^2 >= 2(A + A^2)/beta", k * k * beta >= 2 * (a + a * a) * eps * eps),
        ("2 eps + A(1/K + 1/K^2) < ell", 2 * eps + a * (1 / k + 1 / k ** 2) < ell),
    )


def spike_constants(big_a, sharpness, length, reach) -> SpikeConstants:
    """Deterministic screen constants for a spike family.

    eps = min(1, beta/4, ell/4); K = the least power of two meeting every
    K-condition once eps is fixed.  The output re-audits all seven
    inequalities in exact arithmetic.
    """
    a, beta = F(big_a), F(sharpness)
    ell, reach = F(length), F(reach)
    if a <= 0 or beta <= 0 or ell <= 0 or reach <= 0:
        raise PreconditionError("spike constant inputs must be positive")
    eps = min(F(1), beta / 4, ell / 4)
    k = F(1)
    while True:
        ok = (k >= 1 / reach ** 2 and k >= a and k > (2 * beta + 1) * a
              and k * k * beta >= 2 * (a + a * a) * eps * eps
              and 2 * eps + a * (1 / k + 1 / k ** 2) < ell)
        if ok:
            break
        k *= 2
    scaling = scaling_constants(eps, k)
    audit = _spike_audit(a, beta, ell, reach, eps, k)
    out = SpikeConstants(a, beta, ell, reach, eps, k, scaling.delta, audit)
    if not out.all_pass():
        raise CertificateError("spike constant self-audit failed",
                               sample=[name for name, ok in audit if not ok])
    return out


# ---------------------------------------------------------------------------
# spike union membership


def spike_union_check(epsilon, k_const, q1: TruncatedPoly, q2: TruncatedPoly,
                      m: TruncatedPoly, big_a, sharpness, length, reach, *,
                      samples: int = 100000, seed: int = 0) -> dict:
    """Sampled containment of the scaled screen in the moving-spike union.

    The three bound hypotheses |q1| <= A|xi|^2, |q2| <= A|xi|^4, |m| <= A|xi|^2
    are checked first on the admissible xi-disc; a failure there is a
    precondition error naming the offending bound, not a containment failure.
    """
    eps, k = F(epsilon), F(k_const)
    a = float(F(big_a))
    beta, ell = float(F(sharpness)), float(F(length))
    xi_vars = ("xi1", "xi2")
    for name, p in (("q1", q1), ("q2", q2), ("m", m)):
        if p.vars != xi_vars:
            raise PreconditionError(f"{name} must be a polynomial in {xi_vars}")

    xi_bound = float(eps) / math.sqrt(float(k))
    grid = np.linspace(-xi_bound, xi_bound, 101)
    g1, g2 = np.meshgrid(grid, grid)
    box = np.column_stack([g1.ravel(), g2.ravel()])
    box = box[np.hypot(box[:, 0], box[:, 1]) <= xi_bound]
    norms_sq = box[:, 0] ** 2 + box[:, 1] ** 2
    for name, p, power in (("q1", q1, 1), ("q2", q2, 2), ("m", m, 1)):
        vals = np.abs(p.eval_many(box))
        allowed = a * norms_sq ** power
        bad = vals > allowed + 1e-12
        if np.any(bad):
            i = int(np.argmax(bad))
            raise PreconditionError(
                f"bound hypothesis fails for {name} at xi = {tuple(box[i])}: "
                f"|{name}| = {vals[i]:.6g} > {allowed[i]:.6g}")

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(21,)))
    eps_f, k_f = float(eps), float(k)
    pts = np.empty((0, 4))
    while pts.shape[0] < samples:
        draw = samples
        eta1 = rng.uniform(0.0, eps_f, size=draw)
        xi = rng.uniform(-xi_bound, xi_bound, size=(draw, 2))
        cap = eps_f * eta1 ** 2 - k_f * (xi[:, 0] ** 2 + xi[:, 1] ** 2) * eta1
        eta2 = rng.uniform(-1.0, 1.0, size=draw) * np.maximum(cap, 0.0)
        keep = cap > 0.0
        batch = np.column_stack([xi[keep], eta1[keep], eta2[keep]])
        pts = np.vstack([pts, batch])[:samples]

    q1v = q1.eval_many(pts[:, :2])
    q2v = q2.eval_many(pts[:, :2])
    mv = m.eval_many(pts[:, :2])
    d1 = pts[:, 2] - q1v
    d2 = pts[:, 3] - q2v
    margins = np.minimum(d1, np.minimum(
        ell - np.hypot(d1, d2),
        beta * d1 * d1 - np.abs(d2 - mv * d1)))
    worst = int(np.argmin(margins))
    result = {
        "samples": int(pts.shape[0]),
        "min_margin": float(margins[worst]),
        "worst_point": tuple(float(c) for c in pts[worst]),
        "all_contained": bool(np.all(margins > 0.0)),
    }
    if not result["all_contained"]:
        raise CertificateError("scaled screen sample escapes its spike",
                               sample=result["worst_point"],
                               margin=result["min_margin"])
    return result


# ---------------------------------------------------------------------------
# hull certificate


@dataclass
class HullCertificate:
    t_grid: tuple[float, ...]
    boundary_samples: int
    min_boundary_margin: float
    worst_boundary_t: float
    max_xi_sq: float
    cross_check_margin: float
    coverage: list
    covered: int
    in_screen: int
    audits: list
    worst_audit_slack: float
    valid: bool
    marginal: bool
    failures: list

    def summary(self) -> dict:
        return {
            "t_count": len(self.t_grid),
            "boundary_samples": self.boundary_samples,
            "min_boundary_margin": self.min_boundary_margin,
            "worst_boundary_t": self.worst_boundary_t,
            "max_xi_sq": self.max_xi_sq,
            "cross_check_margin": self.cross_check_margin,
            "targets": len(self.coverage),
            "covered": self.covered,
            "in_screen": self.in_screen,
            "worst_audit_slack": self.worst_audit_slack,
            "valid": self.valid,
            "marginal": self.marginal,
            "failures": len(self.failures),
        }


def cover_target_point(eta1: float, eta2: float) -> dict:
    """Coverage record for one target point: screen membership and disc route."""
    record = {"eta1": float(eta1), "eta2": float(eta2), "t": None,
              "in_screen": False, "disc_ok": False, "status": "uncovered",
              "margin": None}
    screen = ScreenSet.preliminary()
    got = screen_contains_many(screen, np.array([[1j * eta1, 1j * eta2]]))
    in_screen = bool(got[0][0])
    record["in_screen"] = in_screen
    sign = 1.0 if eta2 >= 0 else -1.0
    t = (eta1 + 1.0) ** 2 + (sign * eta2 - 2.0) ** 2
    if 5.0 < t < 6.0:
        record["t"] = t
        disc = FoldingDisc(t, mirrored=(sign < 0))
        z = complex(t - (eta1 + 1.0) ** 2)
        margin = float(disc.param_margin(np.array([z]))[0])
        pts = disc.points(np.array([z]))
        hit = (abs(pts[0, 0] - 1j * eta1) <= 1e-10 and
               abs(pts[0, 1] - 1j * eta2) <= 1e-10)
        record["disc_ok"] = bool(margin >= 0.0 and hit)
        record["margin"] = margin
    if in_screen:
        record["status"] = "in_screen"
    elif record["disc_ok"]:
        record["status"] = "disc"
    return record


def verify_screen_hull(*, t_count: int = 64, boundary_samples: int = 1000,
                       target_count: int = 50, audit_polynomials: int = 20,
                       audit_degree: int = 4, audit_interior: int = 200,
                       seed: int = 0, tol: float = 1e-6,
                       marginal_threshold: float = 1e-9) -> HullCertificate:
    """Certify that the disc family folds the target into the screen's hull.

    Records (a) strict boundary membership of every disc boundary in the
    preliminary screen, (b) coverage of a target grid by screen membership or
    a covering disc, (c) a max-modulus audit per disc.
    """
    t_grid = tuple(float(t) for t in np.linspace(5.0, 6.0, t_count + 2)[1:-1])
    screen = ScreenSet.preliminary()
    failures: list = []
    min_margin = math.inf
    worst_t = t_grid[0]
    max_xi_sq = 0.0
    cross_margin = math.inf
    audits = []
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(31,)))

    for t in t_grid:
        disc = folding_disc(t)
        right, left = disc.boundary_params(boundary_samples)
        pts = disc.points(np.concatenate([right, left]))
        n_half = len(right)
        if float(np.max(np.abs(pts[:n_half, 1].imag))) > 1e-12:
            failures.append({"t": t, "kind": "right arc leaves eta2=0"})
        if float(np.max(np.abs(pts[n_half:, 0].imag - 1.0))) > 1e-12:
            failures.append({"t": t, "kind": "left arc leaves eta1=1"})
        mask, margins = screen_contains_many(screen, pts)
        m = float(np.min(margins))
        if m < min_margin:
            min_margin, worst_t = m, float(t)
        if not np.all(mask):
            i = int(np.argmin(margins))
            failures.append({"t": t, "kind": "boundary outside screen",
                             "sample": [repr(pts[i, 0]), repr(pts[i, 1])],
                             "margin": m})
        xi_sq = pts[:, 0].real ** 2 + pts[:, 1].real ** 2
        max_xi_sq = max(max_xi_sq, float(np.max(xi_sq)))
        if float(np.max(xi_sq)) > 3.0 + 1e-9:
            failures.append({"t": t, "kind": "|xi|^2 exceeds 3 on the boundary"})
        # proof inequality |xi|^2/8 <= sqrt(|xi|^2+1) - 1 on the samples
        gap = np.sqrt(xi_sq + 1.0) - 1.0 - xi_sq / 8.0
        cross_margin = min(cross_margin, float(np.min(gap)))
        if float(np.min(gap)) < -1e-12:
            failures.append({"t": t, "kind": "cross-check inequality fails"})
        polys = random_polynomials(audit_polynomials, audit_degree, rng)
        audit = max_modulus_audit(disc, polys, boundary_samples=boundary_samples,
                                  interior_samples=audit_interior, tol=tol, rng=rng)
        audits.append(audit)

    coverage = []
    covered = in_screen_count = 0
    eta1s = np.linspace(0.0, 1.0, target_count + 2)[1:-1]
    fracs = np.linspace(-1.0, 1.0, target_count + 2)[1:-1]
    for eta1 in eta1s:
        for frac in fracs:
            rec = cover_target_point(float(eta1), float(frac * eta1 / 2.0))
            coverage.append(rec)
            if rec["status"] == "in_screen":
                in_screen_count += 1
                covered += 1
            elif rec["status"] == "disc":
                covered += 1
            else:
                failures.append({"kind": "uncovered target",
                                 "sample": [rec["eta1"], rec["eta2"]]})

    worst_slack = max(a.worst_slack for a in audits)
    valid = not failures and min_margin > 0.0 and covered == len(coverage)
    return HullCertificate(
        t_grid=t_grid, boundary_samples=boundary_samples,
        min_boundary_margin=min_margin, worst_boundary_t=worst_t,
        max_xi_sq=max_xi_sq, cross_check_margin=cross_margin,
        coverage=coverage, covered=covered, in_screen=in_screen_count,
        audits=audits, worst_audit_slack=worst_slack,
        valid=valid, marginal=valid and min_margin < marginal_threshold,
        failures=failures)
