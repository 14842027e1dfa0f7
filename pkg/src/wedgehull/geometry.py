"""Cones, spikes, screens, graphed edges, and wedge-side membership.

Ambient space is C^(n+1) seen as R^(2n+2) with real coordinates ordered
(x_1..x_n, y_1..y_n, u, v), where z_j = x_j + i y_j and w = u + i v.
Edges are graphs y = f(x,u), v = g(x,u) over the totally real slice.
All membership predicates return a signed margin along with the verdict:
downstream certificates need quantified slack, not bare booleans.
Boundary points count as outside (every defining inequality is strict).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import NonConvergenceError, PreconditionError
from .series import PolyMap, TruncatedPoly, parse_rational


def param_vars(n: int) -> tuple[str, ...]:
    """Edge parameter names: the totally real coordinates (x, u)."""
    return tuple(f"x{j}" for j in range(1, n + 1)) + ("u",)


def ambient_vars(n: int) -> tuple[str, ...]:
    """Real ambient coordinate names in canonical order."""
    xs = tuple(f"x{j}" for j in range(1, n + 1))
    ys = tuple(f"y{j}" for j in range(1, n + 1))
    return xs + ys + ("u", "v")


@dataclass(frozen=True)
class Containment:
    """Membership verdict with the smallest inequality slack."""

    contains: bool
    margin: float

    def __bool__(self) -> bool:
        return self.contains


# ---------------------------------------------------------------------------
# round cones


@dataclass(frozen=True)
class RoundCone:
    """Open round cone: aperture bound off the axis, extent bound on length."""

    axis: tuple[float, ...]
    aperture: float
    extent: float
    vertex: tuple[float, ...]

    def __post_init__(self):
        norm = math.sqrt(sum(a * a for a in self.axis))
        if abs(norm - 1.0) > 1e-12:
            raise PreconditionError(f"cone axis must be unit length, got |axis| = {norm!r}")
        if not self.aperture > 0:
            raise PreconditionError("cone aperture must be positive")
        if not self.extent > 0:
            raise PreconditionError("cone extent must be positive")
        if len(self.vertex) != len(self.axis):
            raise PreconditionError("cone vertex and axis dimensions differ")

    @classmethod
    def from_direction(cls, direction: Sequence[float], aperture: float, extent: float,
                       vertex: Sequence[float] | None = None) -> "RoundCone":
        d = np.asarray(direction, dtype=float)
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            raise PreconditionError("cone direction must be nonzero")
        if vertex is None:
            vertex = (0.0,) * len(d)
        return cls(tuple(d / norm), float(aperture), float(extent), tuple(float(c) for c in vertex))


def cone_contains(cone: RoundCone, point: Sequence[float]) -> Containment:
    """Strict membership: |p_perp| < aperture * <p, axis> and |p| < extent."""
    p = np.asarray(point, dtype=float) - np.asarray(cone.vertex, dtype=float)
    axis = np.asarray(cone.axis, dtype=float)
    along = float(p @ axis)
    perp = float(np.linalg.norm(p - along * axis))
    margin = min(cone.aperture * along - perp, cone.extent - float(np.linalg.norm(p)))
    return Containment(margin > 0.0, margin)


def cone_contains_many(cone: RoundCone, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized cone_contains over rows of points; returns (mask, margins)."""
    p = np.asarray(points, dtype=float) - np.asarray(cone.vertex, dtype=float)
    axis = np.asarray(cone.axis, dtype=float)
    along = p @ axis
    perp = np.linalg.norm(p - np.outer(along, axis), axis=1)
    margins = np.minimum(cone.aperture * along - perp,
                         cone.extent - np.linalg.norm(p, axis=1))
    return margins > 0.0, margins


# ---------------------------------------------------------------------------
# spikes in the (eta1, eta2) plane


@dataclass(frozen=True)
class Spike:
    """Sharpened parabolic sliver: |d2 - slope*d1| < sharpness*d1^2, bounded length."""

    sharpness: float
    length: float
    vertex: tuple[float, float] = (0.0, 0.0)
    slope: float = 0.0

    def __post_init__(self):
        if not self.sharpness > 0:
            raise PreconditionError("spike sharpness must be positive")
        if not self.length > 0:
            raise PreconditionError("spike length must be positive")


def spike_contains(spike: Spike, point: Sequence[float]) -> Containment:
    d1 = float(point[0]) - spike.vertex[0]
    d2 = float(point[1]) - spike.vertex[1]
    margin = min(d1,
                 spike.length - math.hypot(d1, d2),
                 spike.sharpness * d1 * d1 - abs(d2 - spike.slope * d1))
    return Containment(margin > 0.0, margin)


def spike_contains_many(spike: Spike, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(points, dtype=float)
    d1 = p[:, 0] - spike.vertex[0]
    d2 = p[:, 1] - spike.vertex[1]
    margins = np.minimum(d1, np.minimum(
        spike.length - np.hypot(d1, d2),
        spike.sharpness * d1 * d1 - np.abs(d2 - spike.slope * d1)))
    return margins > 0.0, margins


# ---------------------------------------------------------------------------
# screens in C^2


SCREEN_SHAPES = ("preliminary", "scaled", "target", "target_scaled")


@dataclass(frozen=True)
class ScreenSet:
    """One of four open model sets in C^2, keyed by shape.

    preliminary:    0 < eta1 < 2,     |eta2| < 2*eta1^2 - |xi|^2*eta1/4
    scaled:         0 < eta1 < eps,   |eta2| < eps*eta1^2 - K*|xi|^2*eta1
    target:         xi = 0, 0 < eta1 < 1,     |eta2| < eta1/2
    target_scaled:  xi = 0, 0 < eta1 < delta, |eta2| < delta*eta1
    """

    shape: str
    epsilon: Fraction | None = None
    k_const: Fraction | None = None
    delta: Fraction | None = None

    def __post_init__(self):
        if self.shape not in SCREEN_SHAPES:
            raise PreconditionError(f"unknown screen shape {self.shape!r}")
        if self.shape == "scaled":
            if self.epsilon is None or self.k_const is None:
                raise PreconditionError("scaled screen needs epsilon and k_const")
            if not (self.epsilon > 0 and self.k_const > 0):
                raise PreconditionError("screen constants must be positive")
        if self.shape == "target_scaled":
            if self.delta is None or not self.delta > 0:
                raise PreconditionError("scaled target needs positive delta")

    @classmethod
    def preliminary(cls) -> "ScreenSet":
        return cls("preliminary")

    @classmethod
    def scaled(cls, epsilon, k_const) -> "ScreenSet":
        return cls("scaled", epsilon=Fraction(epsilon), k_const=Fraction(k_const))

    @classmethod
    def target(cls) -> "ScreenSet":
        return cls("target")

    @classmethod
    def target_scaled(cls, delta) -> "ScreenSet":
        return cls("target_scaled", delta=Fraction(delta))


def _screen_parts(zeta) -> tuple[float, float, float, float]:
    z1, z2 = complex(zeta[0]), complex(zeta[1])
    return z1.real, z1.imag, z2.real, z2.imag


def screen_contains(screen: ScreenSet, zeta) -> Containment:
    """Membership of zeta = (xi1 + i eta1, xi2 + i eta2) with slack margin."""
    xi1, eta1, xi2, eta2 = _screen_parts(zeta)
    xi_sq = xi1 * xi1 + xi2 * xi2
    if screen.shape == "preliminary":
        margin = min(eta1, 2.0 - eta1,
                     2.0 * eta1 * eta1 - xi_sq * eta1 / 4.0 - abs(eta2))
    elif screen.shape == "scaled":
        eps = float(screen.epsilon)
        k = float(screen.k_const)
        margin = min(eta1, eps - eta1,
                     eps * eta1 * eta1 - k * xi_sq * eta1 - abs(eta2))
    else:
        top = 1.0 if screen.shape == "target" else float(screen.delta)
        slope = 0.5 if screen.shape == "target" else float(screen.delta)
        margin = min(eta1, top - eta1, slope * eta1 - abs(eta2))
        if xi_sq > 0.0:
            margin = min(margin, -math.sqrt(xi_sq))
    return Containment(margin > 0.0, margin)


def screen_contains_many(screen: ScreenSet, zetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized membership over an (m, 2) complex array."""
    z = np.asarray(zetas)
    xi1, eta1 = z[:, 0].real, z[:, 0].imag
    xi2, eta2 = z[:, 1].real, z[:, 1].imag
    xi_sq = xi1 * xi1 + xi2 * xi2
    if screen.shape == "preliminary":
        margins = np.minimum(eta1, np.minimum(
            2.0 - eta1, 2.0 * eta1 * eta1 - xi_sq * eta1 / 4.0 - np.abs(eta2)))
    elif screen.shape == "scaled":
        eps, k = float(screen.epsilon), float(screen.k_const)
        margins = np.minimum(eta1, np.minimum(
            eps - eta1, eps * eta1 * eta1 - k * xi_sq * eta1 - np.abs(eta2)))
    else:
        top = 1.0 if screen.shape == "target" else float(screen.delta)
        slope = 0.5 if screen.shape == "target" else float(screen.delta)
        margins = np.minimum(eta1, np.minimum(top - eta1, slope * eta1 - np.abs(eta2)))
        off = xi_sq > 0.0
        margins = np.where(off, np.minimum(margins, -np.sqrt(xi_sq)), margins)
    return margins > 0.0, margins


# ---------------------------------------------------------------------------
# graphed edges


@dataclass(frozen=True)
class EdgeModel:
    """Totally real (n+1)-manifold graphed over the (x, u) slice."""

    n: int
    f: tuple[TruncatedPoly, ...]
    g: TruncatedPoly

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError("edge dimension must be at least 1")
        if len(self.f) != self.n:
            raise PreconditionError(
                f"edge needs {self.n} graph components for y, got {len(self.f)}")
        pv = param_vars(self.n)
        for comp in (*self.f, self.g):
            if comp.vars != pv:
                raise PreconditionError(
                    f"edge graph variables must be {pv}, got {comp.vars}")
            if comp.coefficient({}) != 0:
                raise PreconditionError("edge graph must vanish at the origin")

    @property
    def cap(self) -> int:
        return self.g.cap

    @property
    def params(self) -> tuple[str, ...]:
        return param_vars(self.n)

    def is_tangent_flat(self) -> bool:
        """True when first derivatives also vanish at the origin (normalized edge)."""
        return all(comp.low_degree() >= 2 or comp.is_zero()
                   for comp in (*self.f, self.g))

    @cached_property
    def _jac_polys(self) -> tuple[tuple[TruncatedPoly, ...], ...]:
        rows = [tuple(fj.partial(v) for v in self.params) for fj in self.f]
        rows.append(tuple(self.g.partial(v) for v in self.params))
        return tuple(rows)

    def embed_float(self, t: Sequence[float]) -> np.ndarray:
        t = [float(c) for c in t]
        ys = [fj.eval_float(t) for fj in self.f]
        return np.array(t[:self.n] + ys + [t[self.n], self.g.eval_float(t)])

    def embed_exact(self, t: Sequence[Fraction]) -> list[Fraction]:
        t = [Fraction(c) for c in t]
        ys = [fj.eval_exact(t) for fj in self.f]
        return t[:self.n] + ys + [t[self.n], self.g.eval_exact(t)]

    def embed_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = np.empty((ts.shape[0], 2 * self.n + 2))
        out[:, :self.n] = ts[:, :self.n]
        for j, fj in enumerate(self.f):
            out[:, self.n + j] = fj.eval_many(ts)
        out[:, 2 * self.n] = ts[:, self.n]
        out[:, 2 * self.n + 1] = self.g.eval_many(ts)
        return out

    def jacobian_float(self, t: Sequence[float]) -> np.ndarray:
        """d(embed)/d(params): (2n+2) x (n+1)."""
        t = [float(c) for c in t]
        n = self.n
        jac = np.zeros((2 * n + 2, n + 1))
        for j in range(n):
            jac[j, j] = 1.0
        jac[2 * n, n] = 1.0
        for i, row in enumerate(self._jac_polys):
            out_row = self.n + i if i < n else 2 * n + 1
            for j, dp in enumerate(row):
                jac[out_row, j] = dp.eval_float(t)
        return jac

    def param_map(self, cap: int | None = None) -> PolyMap:
        """Embedding as a polynomial map params -> ambient."""
        cap = self.cap if cap is None else cap
        pv = self.params
        comps = [TruncatedPoly.variable(v, pv, cap) for v in pv[:self.n]]
        comps += [fj.with_cap(cap) for fj in self.f]
        comps.append(TruncatedPoly.variable("u", pv, cap))
        comps.append(self.g.with_cap(cap))
        return PolyMap(pv, ambient_vars(self.n), tuple(comps))

    @classmethod
    def flat(cls, n: int, cap: int) -> "EdgeModel":
        zero = TruncatedPoly.zero(param_vars(n), cap)
        return cls(n, (zero,) * n, zero)


# ---------------------------------------------------------------------------
# wedges


WEDGE_SIDES = ("plus", "minus", "two")


@dataclass(frozen=True)
class WedgeSpec:
    """Edge plus a cone-direction field, aperture, extent, and claimed sides."""

    edge: EdgeModel
    axis: tuple[TruncatedPoly, ...]
    aperture: Fraction
    extent: Fraction
    sides: str

    def __post_init__(self):
        want = 2 * self.edge.n + 2
        if len(self.axis) != want:
            raise PreconditionError(
                f"axis field needs {want} ambient components, got {len(self.axis)}")
        pv = self.edge.params
        for comp in self.axis:
            if comp.vars != pv:
                raise PreconditionError("axis field components must depend on edge parameters")
        if all(comp.coefficient({}) == 0 for comp in self.axis):
            raise PreconditionError("axis field vanishes at the base point")
        if not (self.aperture > 0 and self.extent > 0):
            raise PreconditionError("wedge aperture and extent must be positive")
        if self.sides not in WEDGE_SIDES:
            raise PreconditionError(f"wedge sides must be one of {WEDGE_SIDES}")

    @classmethod
    def from_sparse(cls, edge: EdgeModel, components: Mapping[str, object],
                    aperture, extent, sides: str = "two") -> "WedgeSpec":
        """Build the axis field from a sparse {ambient coord: value} mapping.

        Values may be TruncatedPoly in the edge parameters or rational constants.
        """
        pv = edge.params
        av = ambient_vars(edge.n)
        comps = {}
        for name, val in components.items():
            if name not in av:
                raise PreconditionError(f"unknown ambient coordinate {name!r} in axis field")
            if isinstance(val, TruncatedPoly):
                if val.vars != pv:
                    raise PreconditionError(
                        f"axis component {name!r} must depend on {pv}")
                comps[name] = val.with_cap(edge.cap)
            else:
                comps[name] = TruncatedPoly.constant(pv, edge.cap, parse_rational(val))
        axis = tuple(comps.get(name, TruncatedPoly.zero(pv, edge.cap)) for name in av)
        return cls(edge, axis, Fraction(aperture), Fraction(extent), sides)

    def axis_at(self, t: Sequence[float]) -> np.ndarray:
        t = [float(c) for c in t]
        return np.array([comp.eval_float(t) for comp in self.axis])

    def axis_exact_at(self, t: Sequence[Fraction]) -> list[Fraction]:
        t = [Fraction(c) for c in t]
        return [comp.eval_exact(t) for comp in self.axis]


def axis_tangency_residual(wedge: WedgeSpec, h: TruncatedPoly) -> TruncatedPoly:
    """Derivative of the defining function -v + h along the axis field, on the edge.

    The result is a polynomial in the edge parameters; an attached wedge must
    make it vanish identically through the cap.
    """
    n = wedge.edge.n
    av = ambient_vars(n)
    if h.vars != av[:-1]:
        raise PreconditionError(f"hypersurface graph must depend on {av[:-1]}")
    cap = min(h.cap, wedge.edge.cap)
    pv = wedge.edge.params
    from .series import substitute
    on_edge = {f"x{j}": TruncatedPoly.variable(f"x{j}", pv, cap) for j in range(1, n + 1)}
    on_edge["u"] = TruncatedPoly.variable("u", pv, cap)
    for j in range(1, n + 1):
        on_edge[f"y{j}"] = wedge.edge.f[j - 1].with_cap(cap)
    residual = -wedge.axis[2 * n + 1].with_cap(cap)
    for idx, name in enumerate(av[:-1]):
        part = h.partial(name)
        if part.is_zero():
            continue
        residual = residual + substitute(part, on_edge, cap) * wedge.axis[idx].with_cap(cap)
    return residual


# ---------------------------------------------------------------------------
# nearest-point projection onto an edge


def _gauss_newton(p: np.ndarray, edge: EdgeModel, t0: np.ndarray,
                  tol: float, max_iter: int, trace: list) -> tuple[np.ndarray, bool]:
    t = np.array(t0, dtype=float)
    lam = 0.0
    res = edge.embed_float(t) - p
    cost = float(res @ res)
    eye = np.eye(edge.n + 1)
    for _ in range(max_iter):
        jac = edge.jacobian_float(t)
        grad = jac.T @ res
        trace.append((tuple(t), math.sqrt(cost)))
        if np.linalg.norm(grad) < tol:
            return t, True
        normal = jac.T @ jac
        accepted = False
        for _ in range(12):
            try:
                step = np.linalg.solve(normal + lam * eye, -grad)
            except np.linalg.LinAlgError:
                lam = max(lam * 10.0, 1e-8)
                continue
            t_new = t + step
            res_new = edge.embed_float(t_new) - p
            cost_new = float(res_new @ res_new)
            if cost_new <= cost + 1e-18:
                if float(np.linalg.norm(step)) < tol:
                    return t_new, True
                t, res, cost = t_new, res_new, cost_new
                lam /= 10.0
                accepted = True
                break
            lam = max(lam * 10.0, 1e-8)
        if not accepted:
            return t, np.linalg.norm(jac.T @ res) < math.sqrt(tol)
    return t, bool(np.linalg.norm(edge.jacobian_float(t).T @ res) < math.sqrt(tol))


def nearest_edge_point(p: Sequence[float], edge: EdgeModel, *,
                       chart_box: float = 0.75, tol: float = 1e-12,
                       max_iter: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Parameters and ambient position of the nearest edge point.

    Damped Gauss-Newton from the (x, u) block of p, with a grid-search restart;
    non-convergence raises with the iterate trace attached.
    """
    p = np.asarray(p, dtype=float)
    n = edge.n
    if p.shape != (2 * n + 2,):
        raise PreconditionError(f"point must have {2 * n + 2} real coordinates")
    if float(np.max(np.abs(p))) > chart_box:
        raise PreconditionError(
            f"point leaves the coordinate chart box (|coord| <= {chart_box})")
    t0 = np.concatenate([p[:n], p[2 * n:2 * n + 1]])
    trace: list = []
    t, ok = _gauss_newton(p, edge, t0, tol, max_iter, trace)
    if not ok:
        per_axis = 9 if n + 1 <= 3 else 5
        grid_1d = np.linspace(-chart_box, chart_box, per_axis)
        candidates = np.array(list(itertools.product(*[grid_1d] * (n + 1))))
        dists = np.linalg.norm(edge.embed_many(candidates) - p, axis=1)
        t, ok = _gauss_newton(p, edge, candidates[int(np.argmin(dists))],
                              tol, max_iter, trace)
        if not ok:
            raise NonConvergenceError("edge projection did not converge", trace=trace)
    return t, edge.embed_float(t)


def edge_distance(p: Sequence[float], edge: EdgeModel, *,
                  chart_box: float = 0.75, tol: float = 1e-12,
                  max_iter: int = 60) -> float:
    """Distance from p to the graphed edge (local projection)."""
    _, q = nearest_edge_point(p, edge, chart_box=chart_box, tol=tol, max_iter=max_iter)
    return float(np.linalg.norm(np.asarray(p, dtype=float) - q))


def wedge_side(wedge: WedgeSpec, h: TruncatedPoly, p: Sequence[float], *,
               graph_tol: float = 1e-10, chart_box: float = 0.75) -> tuple[str, float]:
    """Which open cone over the nearest edge point contains p: plus, minus, or none.

    p must satisfy the hypersurface graph v = h(x, y, u) within graph_tol.
    Returns the side label and the margin of the verdict (the containing cone's
    slack, or the best losing margin when outside both).
    """
    p = np.asarray(p, dtype=float)
    n = wedge.edge.n
    if p.shape != (2 * n + 2,):
        raise PreconditionError(f"point must have {2 * n + 2} real coordinates")
    resid = abs(-p[2 * n + 1] + h.eval_float(list(p[:2 * n + 1])))
    if resid > graph_tol:
        raise PreconditionError(
            f"point misses the hypersurface graph by {resid:g} (tolerance {graph_tol:g})")
    t, q = nearest_edge_point(p, wedge.edge, chart_box=chart_box)
    sigma = wedge.axis_at(t)
    plus = cone_contains(RoundCone.from_direction(
        sigma, float(wedge.aperture), float(wedge.extent), vertex=q), p)
    minus = cone_contains(RoundCone.from_direction(
        -sigma, float(wedge.aperture), float(wedge.extent), vertex=q), p)
    if plus.contains and (not minus.contains or plus.margin >= minus.margin):
        return "plus", plus.margin
    if minus.contains:
        return "minus", minus.margin
    return "none", max(plus.margin, minus.margin)
