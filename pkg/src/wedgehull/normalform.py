"""Normalization pipeline for hypersurface/edge pairs and extension classification.

The pipeline runs four exact stages, each a polynomial change of coordinates
mapping new coordinates to old ones:

  1. translate the base point to the origin;
  2. a complex-linear frame change making T0(edge) = {y = v = 0} and
     T0(hypersurface) = {v = 0} hold on the nose;
  3. a holomorphic polynomial shear flattening the edge to fourth order;
  4. a holomorphic quadratic shear removing the symmetric xy-coupling and the
     uy-coupling from the graph, leaving quadratic part y^t*lam*y + x^t*omega*y.

All arithmetic is exact rational.  The float layer only enters when spectra
or search witnesses are requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (
    MaximalRealityError,
    PreconditionError,
    WedgehullError,
)
from .geometry import EdgeModel, WedgeSpec, ambient_vars, param_vars
from .series import (
    CPoly,
    PolyMap,
    TruncatedPoly,
    compose_maps,
    compose_truncated,
    graph_solve,
    holomorphic_eval,
    invert_map_truncated,
    substitute,
)

F = Fraction


# ---------------------------------------------------------------------------
# ambient complex structure on real coordinates (x, y, u, v)


def j_rotate(vec: Sequence[F], n: int) -> list[F]:
    """Multiplication by i, acting on real ambient coordinates."""
    x, y = list(vec[:n]), list(vec[n:2 * n])
    u, v = vec[2 * n], vec[2 * n + 1]
    return [-c for c in y] + x + [-v, u]


def j_unrotate(vec: Sequence[F], n: int) -> list[F]:
    """Multiplication by -i on real ambient coordinates."""
    x, y = list(vec[:n]), list(vec[n:2 * n])
    u, v = vec[2 * n], vec[2 * n + 1]
    return y + [-c for c in x] + [v, -u]


def realify_complex_matrix(a_re, a_im, n: int):
    """Real (2n+2)-square matrix of the complex-linear map with matrix a_re + i*a_im."""
    m = n + 1
    dim = 2 * n + 2
    re_idx = [k if k < n else 2 * n for k in range(m)]
    im_idx = [n + k if k < n else 2 * n + 1 for k in range(m)]
    out = [[F(0)] * dim for _ in range(dim)]
    for i in range(m):
        for j in range(m):
            out[re_idx[i]][re_idx[j]] = a_re[i][j]
            out[re_idx[i]][im_idx[j]] = -a_im[i][j]
            out[im_idx[i]][re_idx[j]] = a_im[i][j]
            out[im_idx[i]][im_idx[j]] = a_re[i][j]
    return out


# ---------------------------------------------------------------------------
# hypersurface data


@dataclass(frozen=True)
class HypersurfaceModel:
    """Defining polynomial in ambient coordinates with an attached edge.

    The defining data may come in graph form v = h(x, y, u) or as a general
    defining polynomial r(x, y, u, v).  The edge must sit inside the zero set
    identically through the degree cap.
    """

    n: int
    r: TruncatedPoly
    edge: EdgeModel
    base_params: tuple[Fraction, ...]

    def __post_init__(self):
        if self.n < 2:
            raise PreconditionError(
                "need complex dimension at least 3 (two z-variables and w); "
                "the extension hypotheses are vacuous in lower dimension")
        if self.edge.n != self.n:
            raise PreconditionError("edge dimension does not match hypersurface")
        av = ambient_vars(self.n)
        if self.r.vars != av:
            raise PreconditionError(f"defining polynomial must depend on {av}")
        if len(self.base_params) != self.n + 1:
            raise PreconditionError("base point must be given in edge parameters (x, u)")
        grad = self.gradient_at(self.base_params)
        if all(c == 0 for c in grad):
            raise PreconditionError("defining polynomial has zero gradient at the base point")
        residual = self.edge_inclusion_residual()
        if not residual.is_zero():
            raise PreconditionError(
                "edge is not contained in the hypersurface: "
                f"residual has {len(residual.coeffs)} nonzero terms, "
                f"lowest degree {residual.low_degree()}")

    @classmethod
    def from_graph(cls, h: TruncatedPoly, edge: EdgeModel,
                   base_params: Sequence | None = None) -> "HypersurfaceModel":
        n = edge.n
        av = ambient_vars(n)
        if h.vars != av[:-1]:
            raise PreconditionError(f"graph polynomial must depend on {av[:-1]}")
        r = h.lift(av) - TruncatedPoly.variable("v", av, h.cap)
        return cls(n, r, edge, cls._base(base_params, n))

    @classmethod
    def from_defining(cls, r: TruncatedPoly, edge: EdgeModel,
                      base_params: Sequence | None = None) -> "HypersurfaceModel":
        return cls(edge.n, r, edge, cls._base(base_params, edge.n))

    @staticmethod
    def _base(base_params, n) -> tuple[Fraction, ...]:
        if base_params is None:
            return (F(0),) * (n + 1)
        return tuple(F(c) for c in base_params)

    @property
    def cap(self) -> int:
        return self.r.cap

    def gradient_at(self, params: Sequence[Fraction]) -> list[Fraction]:
        point = self.edge.embed_exact(list(params))
        return [self.r.partial(v).eval_exact(point) for v in self.r.vars]

    def edge_inclusion_residual(self) -> TruncatedPoly:
        emb = self.edge.param_map(self.cap)
        return compose_truncated(self.r, emb, self.cap)


# ---------------------------------------------------------------------------
# frame construction


@dataclass(frozen=True)
class FrameData:
    """Exact basis data realizing the linear normalizations.

    v_basis spans the -i rotation of the admissible normal slot inside the
    edge tangent; e_last completes it to a basis of the edge tangent; tau is
    the transversal that lands on the positive v-axis.
    """

    v_basis: tuple[tuple[Fraction, ...], ...]
    e_last: tuple[Fraction, ...]
    tau: tuple[Fraction, ...]
    matrix_re: tuple[tuple[Fraction, ...], ...]
    matrix_im: tuple[tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return len(self.v_basis)

    @property
    def scales(self) -> tuple[float, ...]:
        norms = [math.sqrt(float(sum(c * c for c in e))) for e in self.v_basis]
        norms.append(math.sqrt(float(sum(c * c for c in self.e_last))))
        return tuple(norms)

    def normal_basis(self) -> list[list[Fraction]]:
        """Ambient basis of the normal slot: the i-rotations of v_basis."""
        return [j_rotate(e, self.n) for e in self.v_basis]


def build_frame(tangent_basis: Sequence[Sequence[Fraction]],
                gradient: Sequence[Fraction], n: int,
                tau: Sequence[Fraction] | None = None,
                axis: Sequence[Fraction] | None = None) -> FrameData:
    """Construct the exact complex-linear frame from tangent-level data.

    tangent_basis: n+1 vectors spanning the edge tangent at the base point.
    gradient: differential of the defining polynomial there.
    tau: optional transversal, required to be an i-rotation of an edge tangent
    vector and not annihilated by the gradient.
    axis: optional wedge direction; when present the first frame vector is
    chosen so the axis lands on the positive y1-ray.
    """
    basis = [[F(c) for c in t] for t in tangent_basis]
    if len(basis) != n + 1:
        raise PreconditionError(f"edge tangent basis must have {n + 1} vectors")
    grad = [F(c) for c in gradient]
    j_basis = [j_rotate(t, n) for t in basis]

    doubled = [list(col) for col in (*basis, *j_basis)]
    if linalg.det(linalg.transpose(doubled)) == 0:
        raise MaximalRealityError(
            "edge is not maximally real at the base point: "
            "tangent and i-rotated tangent do not span the ambient space")

    # coefficients c with gradient . (sum c_j * i t_j) = 0 give the normal slot
    pairing = [[sum(g * w for g, w in zip(grad, jt)) for jt in j_basis]]
    coeff_basis = linalg.nullspace(pairing)
    if len(coeff_basis) != n:
        raise PreconditionError(
            "normal slot is degenerate: gradient vanishes on the rotated edge tangent")
    # -i rotation brings the slot back inside the edge tangent, same coefficients
    v_candidates = [
        [sum(c * t[k] for c, t in zip(coeffs, basis)) for k in range(2 * n + 2)]
        for coeffs in coeff_basis]

    ordered = v_candidates
    if axis is not None:
        axis = [F(c) for c in axis]
        normal_basis = [j_rotate(v, n) for v in v_candidates]
        if linalg.solve_in_span(normal_basis, axis) is None:
            raise PreconditionError(
                "wedge axis at the base point is not in the admissible normal slot")
        first = j_unrotate(axis, n)
        ordered = [first] + v_candidates

    picked: list[list[Fraction]] = []
    for cand in ordered:
        trial = linalg.gram_schmidt(picked + [cand])
        if len(trial) > len(picked):
            picked = trial
        if len(picked) == n:
            break
    if len(picked) != n:
        raise PreconditionError("could not complete an orthogonal basis of the normal slot")
    v_basis = picked

    if tau is not None:
        tau = [F(c) for c in tau]
        if linalg.solve_in_span(j_basis, tau) is None:
            raise PreconditionError(
                "transversal must be an i-rotation of an edge tangent vector")
        pairing_val = sum(g * c for g, c in zip(grad, tau))
        if pairing_val == 0:
            raise PreconditionError("transversal is tangent to the hypersurface")
        e_last = j_unrotate(tau, n)
    else:
        e_last = None
        for t in basis:
            jt = j_rotate(t, n)
            if sum(g * c for g, c in zip(grad, jt)) == 0:
                continue
            proj = linalg.project_onto_span(v_basis, t)
            resid = [c - p for c, p in zip(t, proj)]
            if any(c != 0 for c in resid):
                e_last = linalg.primitive(resid)
                break
        if e_last is None:
            raise PreconditionError("could not complete the frame transversally")
        tau = j_rotate(e_last, n)

    cols = v_basis + [e_last]
    m = n + 1
    a_re = [[cols[j][i] if i < n else cols[j][2 * n] for j in range(m)] for i in range(m)]
    a_im = [[cols[j][n + i] if i < n else cols[j][2 * n + 1] for j in range(m)] for i in range(m)]
    return FrameData(tuple(tuple(v) for v in v_basis), tuple(e_last), tuple(tau),
                     tuple(tuple(row) for row in a_re), tuple(tuple(row) for row in a_im))


def align_linear_frame(model: HypersurfaceModel,
                       tau: Sequence[Fraction] | None = None,
                       axis: Sequence[Fraction] | None = None) -> tuple[PolyMap, FrameData]:
    """Complex-linear change (new -> old) aligning edge and hypersurface tangents.

    Assumes the base point already sits at the origin (run the translation
    stage first).  Returns the realified linear map and the frame data.
    """
    n = model.n
    base = model.base_params
    jac = [[model.edge.f[i].partial(v) if i < n else model.edge.g.partial(v)
            for v in model.edge.params] for i in range(n + 1)]
    point = [F(c) for c in base]
    tangents = []
    for j, var in enumerate(model.edge.params):
        col = [F(0)] * (2 * n + 2)
        if j < n:
            col[j] = F(1)
        else:
            col[2 * n] = F(1)
        for i in range(n + 1):
            slot = n + i if i < n else 2 * n + 1
            col[slot] = jac[i][j].eval_exact(point)
        tangents.append(col)
    frame = build_frame(tangents, model.gradient_at(base), n, tau=tau, axis=axis)
    real = realify_complex_matrix(frame.matrix_re, frame.matrix_im, n)
    av = ambient_vars(n)
    return PolyMap.linear(real, av, av, model.cap), frame


# ---------------------------------------------------------------------------
# edge transport


def transport_edge(edge: EdgeModel, inverse_map: PolyMap) -> tuple[EdgeModel, PolyMap]:
    """Re-graph an edge after a coordinate change given by its inverse map.

    inverse_map sends old ambient coordinates to new ones.  Returns the new
    edge and the parameter change (new params -> old params).
    """
    n = edge.n
    cap = inverse_map.cap
    emb = edge.param_map(cap)
    moved = compose_maps(inverse_map, emb, cap)
    pv = param_vars(n)
    block = PolyMap(pv, pv, tuple(
        c.rename(pv) for c in (*moved.components[:n], moved.components[2 * n])))
    back = invert_map_truncated(block, cap)
    ys = tuple(compose_truncated(moved.components[n + j].rename(pv), back, cap)
               for j in range(n))
    g = compose_truncated(moved.components[2 * n + 1].rename(pv), back, cap)
    return EdgeModel(n, ys, g), back


# ---------------------------------------------------------------------------
# quadratic data


def extract_quadratic_data(h: TruncatedPoly, n: int | None = None):
    """Split the quadratic part of a normalized graph into (lam, omega, gamma, mu).

    lam is the yy block, omega/gamma the skew and symmetric halves of the
    xy coupling, mu twice the uy coefficients.  Surviving xx, xu, or uu terms
    mean the edge was not inside the hypersurface; they raise.
    """
    if n is None:
        n = (len(h.vars) - 1) // 2
    av = ambient_vars(n)
    if h.vars != av[:-1]:
        raise PreconditionError(f"graph polynomial must depend on {av[:-1]}")
    if h.coefficient({}) != 0 or any(
            h.coefficient({v: 1}) != 0 for v in h.vars):
        raise PreconditionError("graph polynomial must have no constant or linear part")

    def coeff(a: str, b: str) -> Fraction:
        mono = {a: 2} if a == b else {a: 1, b: 1}
        return h.coefficient(mono)

    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if coeff(f"x{i}", f"x{j}") != 0:
                raise PreconditionError(
                    f"quadratic x{i} x{j} term survives; edge not inside hypersurface")
        if coeff(f"x{i}", "u") != 0:
            raise PreconditionError(
                f"quadratic x{i} u term survives; edge not inside hypersurface")
    if coeff("u", "u") != 0:
        raise PreconditionError("quadratic u^2 term survives; edge not inside hypersurface")

    lam = [[F(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            c = coeff(f"y{i + 1}", f"y{j + 1}")
            lam[i][j] = c if i == j else c / 2
    coupling = [[coeff(f"x{i + 1}", f"y{j + 1}") for j in range(n)] for i in range(n)]
    omega = [[(coupling[i][j] - coupling[j][i]) / 2 for j in range(n)] for i in range(n)]
    gamma = [[(coupling[i][j] + coupling[j][i]) / 2 for j in range(n)] for i in range(n)]
    mu = [2 * coeff("u", f"y{k + 1}") for k in range(n)]
    return lam, omega, gamma, mu


# ---------------------------------------------------------------------------
# the pipeline


@dataclass(frozen=True)
class NormalFormData:
    """Output of the four-stage normalization."""

    n: int
    cap: int
    to_original: PolyMap
    from_original: PolyMap
    param_to_original: PolyMap
    h: TruncatedPoly
    r: TruncatedPoly
    edge: EdgeModel
    lam: tuple[tuple[Fraction, ...], ...]
    omega: tuple[tuple[Fraction, ...], ...]
    gamma: tuple[tuple[Fraction, ...], ...]
    mu: tuple[Fraction, ...]
    frame: FrameData
    v_coeff_sign: int
    stage_maps: tuple[PolyMap, ...]

    @property
    def frame_scales(self) -> tuple[float, ...]:
        return self.frame.scales


def _holomorphic_shear(parts: list[TruncatedPoly], n: int, cap: int,
                       quadratic_w) -> PolyMap:
    """Realified map new -> old for z = z' + i*F(z', w'), w = w' + i*G(z', w').

    parts lists F_1..F_n, G as real polynomials in the edge parameters, read
    holomorphically.  quadratic_w instead supplies the stage-4 shear
    w = w' + (z'^t gamma z' + w' z'^t mu)/2 when not None.
    """
    av = ambient_vars(n)
    values = {}
    for k in range(1, n + 1):
        values[f"x{k}"] = CPoly.make(TruncatedPoly.variable(f"x{k}", av, cap),
                                     TruncatedPoly.variable(f"y{k}", av, cap))
    values["u"] = CPoly.make(TruncatedPoly.variable("u", av, cap),
                             TruncatedPoly.variable("v", av, cap))
    comps: list[TruncatedPoly] = [None] * (2 * n + 2)
    if quadratic_w is None:
        for j in range(n):
            fc = holomorphic_eval(parts[j], values, cap)
            comps[j] = TruncatedPoly.variable(f"x{j + 1}", av, cap) - fc.im
            comps[n + j] = TruncatedPoly.variable(f"y{j + 1}", av, cap) + fc.re
        gc = holomorphic_eval(parts[n], values, cap)
        comps[2 * n] = TruncatedPoly.variable("u", av, cap) - gc.im
        comps[2 * n + 1] = TruncatedPoly.variable("v", av, cap) + gc.re
    else:
        gamma, mu = quadratic_w
        for j in range(n):
            comps[j] = TruncatedPoly.variable(f"x{j + 1}", av, cap)
            comps[n + j] = TruncatedPoly.variable(f"y{j + 1}", av, cap)
        zero = CPoly.from_real(TruncatedPoly.zero(av, cap))
        shear = zero
        for i in range(n):
            for j in range(n):
                if gamma[i][j] != 0:
                    shear = shear + values[f"x{i + 1}"] * values[f"x{j + 1}"] * (
                        CPoly.from_real(TruncatedPoly.constant(av, cap, gamma[i][j])))
        for k in range(n):
            if mu[k] != 0:
                shear = shear + values["u"] * values[f"x{k + 1}"] * (
                    CPoly.from_real(TruncatedPoly.constant(av, cap, mu[k])))
        comps[2 * n] = TruncatedPoly.variable("u", av, cap) + shear.re * F(1, 2)
        comps[2 * n + 1] = TruncatedPoly.variable("v", av, cap) + shear.im * F(1, 2)
    return PolyMap(av, av, tuple(comps))


def normal_form(model: HypersurfaceModel,
                tau: Sequence[Fraction] | None = None,
                wedge: WedgeSpec | None = None,
                align_axis: bool = True) -> NormalFormData:
    """Run the full four-stage normalization."""
    n, cap = model.n, model.cap
    av = ambient_vars(n)
    pv = param_vars(n)

    # stage 1: translate the base point to the origin
    base = list(model.base_params)
    p_amb = model.edge.embed_exact(base)
    m1 = PolyMap.linear(linalg.identity(2 * n + 2), av, av, cap, constants=p_amb)
    r1 = compose_truncated(model.r, m1, cap)
    shifted = {}
    for j, var in enumerate(pv):
        shifted[var] = TruncatedPoly.variable(var, pv, cap) + \
            TruncatedPoly.constant(pv, cap, base[j])
    f1 = tuple(substitute(fj, shifted, cap) -
               TruncatedPoly.constant(pv, cap, fj.eval_exact(base))
               for fj in model.edge.f)
    g1 = substitute(model.edge.g, shifted, cap) - \
        TruncatedPoly.constant(pv, cap, model.edge.g.eval_exact(base))
    edge1 = EdgeModel(n, f1, g1)
    param_chain = PolyMap(pv, pv, tuple(
        TruncatedPoly.variable(var, pv, cap) + TruncatedPoly.constant(pv, cap, base[j])
        for j, var in enumerate(pv)))
    model1 = HypersurfaceModel(n, r1, edge1, (F(0),) * (n + 1))

    # stage 2: complex-linear frame
    axis = None
    if wedge is not None and align_axis:
        axis = wedge.axis_exact_at(base)
    m2, frame = align_linear_frame(model1, tau=tau, axis=axis)
    m2_inv = invert_map_truncated(m2, cap)
    r2 = compose_truncated(r1, m2, cap)
    edge2, pchange2 = transport_edge(edge1, m2_inv)
    param_chain = compose_maps(param_chain, pchange2, cap)
    if not edge2.is_tangent_flat():
        raise WedgehullError("frame change failed to flatten the edge tangent")

    # stage 3: holomorphic shear flattening the edge to fourth order
    parts = [fj.parts_through(3) for fj in edge2.f] + [edge2.g.parts_through(3)]
    if all(p.is_zero() for p in parts):
        m3 = m3_inv = PolyMap.identity(av, cap)
        r3, edge3 = r2, edge2
    else:
        m3 = _holomorphic_shear(parts, n, cap, None)
        m3_inv = invert_map_truncated(m3, cap)
        r3 = compose_truncated(r2, m3, cap)
        edge3, pchange3 = transport_edge(edge2, m3_inv)
        param_chain = compose_maps(param_chain, pchange3, cap)
    for comp in (*edge3.f, edge3.g):
        if not (comp.is_zero() or comp.low_degree() >= 4):
            raise WedgehullError("holomorphic shear failed to flatten the edge to order three")

    # stage 4: kill the symmetric xy coupling and the uy coupling
    h3 = graph_solve(r3, "v", cap)
    lam, omega, gamma, mu = extract_quadratic_data(h3, n)
    if all(c == 0 for row in gamma for c in row) and all(c == 0 for c in mu):
        m4 = m4_inv = PolyMap.identity(av, cap)
        r4, edge4 = r3, edge3
    else:
        m4 = _holomorphic_shear([], n, cap, (gamma, mu))
        m4_inv = invert_map_truncated(m4, cap)
        r4 = compose_truncated(r3, m4, cap)
        edge4, pchange4 = transport_edge(edge3, m4_inv)
        param_chain = compose_maps(param_chain, pchange4, cap)
    for comp in (*edge4.f, edge4.g):
        if not (comp.is_zero() or comp.low_degree() >= 4):
            raise WedgehullError("final shear disturbed the edge osculation")

    h4 = graph_solve(r4, "v", cap)
    lam4, omega4, gamma4, mu4 = extract_quadratic_data(h4, n)
    if lam4 != lam or omega4 != omega:
        raise WedgehullError("final shear changed the invariant quadratic data")
    if any(c != 0 for row in gamma4 for c in row) or any(c != 0 for c in mu4):
        raise WedgehullError("final shear failed to remove the coupling terms")

    v_coeff = r4.coefficient({"v": 1})
    if v_coeff == 0:
        raise WedgehullError("transported defining polynomial lost its v-slope")

    to_original = compose_maps(m2, compose_maps(m3, m4, cap), cap)
    to_original = compose_maps(m1, to_original, cap)
    core = compose_maps(m4_inv, compose_maps(m3_inv, m2_inv, cap), cap)
    from_original = compose_maps(core, invert_map_truncated(m1, cap), cap)
    round_trip = compose_maps(from_original, to_original, cap)
    if round_trip != PolyMap.identity(av, cap):
        raise WedgehullError("coordinate chain does not invert through the cap")

    return NormalFormData(
        n=n, cap=cap,
        to_original=to_original, from_original=from_original,
        param_to_original=param_chain,
        h=h4, r=r4, edge=edge4,
        lam=tuple(tuple(row) for row in lam),
        omega=tuple(tuple(row) for row in omega),
        gamma=tuple(tuple(row) for row in gamma),
        mu=tuple(mu),
        frame=frame,
        v_coeff_sign=1 if v_coeff > 0 else -1,
        stage_maps=(m1, m2, m3, m4))


# ---------------------------------------------------------------------------
# Levi data


@dataclass(frozen=True)
class LeviData:
    """Hermitian form lam + i*omega with spectra in the unit-frame gauge."""

    lam: tuple[tuple[Fraction, ...], ...]
    omega: tuple[tuple[Fraction, ...], ...]
    eigenvalues: tuple[float, ...]
    signature: tuple[int, int, int]

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def indefinite(self) -> bool:
        return self.signature[0] >= 1 and self.signature[1] >= 1


def levi_data(nf: NormalFormData) -> LeviData:
    lam, omega = nf.lam, nf.omega
    n = nf.n
    for i in range(n):
        for j in range(n):
            if lam[i][j] != lam[j][i] or omega[i][j] != -omega[j][i]:
                raise WedgehullError("quadratic data lost its symmetry")
    signature = linalg.hermitian_inertia([list(r) for r in lam], [list(r) for r in omega])
    scales = nf.frame_scales
    d = np.diag([1.0 / s for s in scales[:n]])
    herm = np.array([[complex(lam[i][j], omega[i][j]) for j in range(n)] for i in range(n)])
    herm = scales[n] * (d @ herm @ d)
    eigenvalues = tuple(float(t) for t in np.linalg.eigvalsh(herm))
    if sum(signature) != n:
        raise WedgehullError("signature does not add up to the dimension")
    return LeviData(lam, omega, eigenvalues, signature)


def levi_classify_direction(lam, sigma) -> tuple[str, Fraction]:
    """Sign of sigma^t lam sigma, exact; floats are converted losslessly."""
    sig = [F(c) for c in sigma]
    if all(c == 0 for c in sig):
        raise PreconditionError("direction must be nonzero")
    q = F(0)
    for i, si in enumerate(sig):
        if si == 0:
            continue
        for j, sj in enumerate(sig):
            if sj == 0:
                continue
            q += si * F(lam[i][j]) * sj
    if q == 0:
        return "null", q
    return ("positive", q) if q > 0 else ("negative", q)


# ---------------------------------------------------------------------------
# null-direction search


@dataclass(frozen=True)
class NullSearchRecord:
    found: bool
    witness: tuple[float, ...] | None
    q_witness: float | None
    q_min: float
    q_max: float
    arg_min: tuple[float, ...]
    arg_max: tuple[float, ...]
    exhaustive: bool
    samples: int


def _q_float(lam, sigma: np.ndarray) -> float:
    mat = np.array([[float(c) for c in row] for row in lam])
    return float(sigma @ mat @ sigma)


def find_null_in_cone(lam, axis: Sequence[float], aperture: float, *,
                      samples: int = 4096, seed: int = 0) -> NullSearchRecord:
    """Search the open direction cone for a null direction of the form.

    Exact check on the axis first.  For n = 2 the restriction of the form to
    the direction circle is a sinusoid analyzed in closed form, so presence
    and absence are both definitive.  For n > 2 the cap is sampled and
    absence is only as strong as the sampling (recorded as non-exhaustive).
    """
    n = len(axis)
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    lam_f = np.array([[float(c) for c in row] for row in lam])

    q_axis_exact = F(0)
    a_exact = [F(c) for c in a]
    for i in range(n):
        for j in range(n):
            q_axis_exact += a_exact[i] * F(lam[i][j]) * a_exact[j]
    if q_axis_exact == 0:
        return NullSearchRecord(True, tuple(a), 0.0, 0.0, 0.0,
                                tuple(a), tuple(a), True, 1)

    theta_max = math.atan(float(aperture))

    if n == 2:
        b = np.array([-a[1], a[0]])
        qa = float(a @ lam_f @ a)
        qb = float(b @ lam_f @ b)
        qab = float(a @ lam_f @ b)
        c0, c1, c2 = (qa + qb) / 2.0, (qa - qb) / 2.0, qab
        amp = math.hypot(c1, c2)

        def direction(theta: float) -> np.ndarray:
            return math.cos(theta) * a + math.sin(theta) * b

        def q_of(theta: float) -> float:
            return c0 + c1 * math.cos(2 * theta) + c2 * math.sin(2 * theta)

        crit = [-theta_max, theta_max]
        if amp > 0:
            phase = math.atan2(c2, c1)
            for k in range(-3, 4):
                for extremum in (phase / 2 + k * math.pi,
                                 phase / 2 + math.pi / 2 + k * math.pi):
                    if -theta_max <= extremum <= theta_max:
                        crit.append(extremum)
        values = [(q_of(t), t) for t in crit]
        q_min, t_min = min(values)
        q_max, t_max = max(values)
        if q_min > 1e-12 or q_max < -1e-12:
            return NullSearchRecord(False, None, None, q_min, q_max,
                                    tuple(direction(t_min)), tuple(direction(t_max)),
                                    True, len(crit))
        # a sign change or touch exists; locate a root strictly inside
        roots = []
        if amp > 0 and abs(c0) <= amp:
            phase = math.atan2(c2, c1)
            off = math.acos(max(-1.0, min(1.0, -c0 / amp)))
            for k in range(-3, 4):
                for two_theta in (phase + off + 2 * k * math.pi,
                                  phase - off + 2 * k * math.pi):
                    t = two_theta / 2.0
                    if abs(t) < theta_max - 1e-15:
                        roots.append(t)
        if not roots:
            if abs(q_min) <= 1e-12:
                # form is numerically flat on the cone; argmin is a witness
                return NullSearchRecord(True, tuple(direction(t_min)), q_min,
                                        q_min, q_max, tuple(direction(t_min)),
                                        tuple(direction(t_max)), True, len(crit))
            # zero set only touches the closed boundary: open cone is clean
            return NullSearchRecord(False, None, None, q_min, q_max,
                                    tuple(direction(t_min)), tuple(direction(t_max)),
                                    True, len(crit))
        root = min(roots, key=abs)
        w = direction(root)
        return NullSearchRecord(True, tuple(w), q_of(root), q_min, q_max,
                                tuple(direction(t_min)), tuple(direction(t_max)),
                                True, len(crit))

    # n > 2: structured sampling of the spherical cap
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(11,)))
    perp = np.eye(n) - np.outer(a, a)
    dirs = [a]
    raw = rng.normal(size=(samples - 1, n)) @ perp
    norms = np.linalg.norm(raw, axis=1)
    keep = norms > 1e-12
    raw = raw[keep] / norms[keep, None]
    fracs = rng.uniform(0.0, 1.0, size=raw.shape[0])
    for d, frac in zip(raw, fracs):
        t = theta_max * math.sqrt(frac) * (1.0 - 1e-9)
        dirs.append(math.cos(t) * a + math.sin(t) * d)
    dirs = np.array(dirs)
    qs = np.einsum("ij,jk,ik->i", dirs, lam_f, dirs)
    i_min, i_max = int(np.argmin(qs)), int(np.argmax(qs))
    q_min, q_max = float(qs[i_min]), float(qs[i_max])
    if q_min > 1e-12 or q_max < -1e-12:
        return NullSearchRecord(False, None, None, q_min, q_max,
                                tuple(dirs[i_min]), tuple(dirs[i_max]),
                                False, len(dirs))
    lo, hi = dirs[i_min], dirs[i_max]
    q_lo, q_hi = q_min, q_max
    if q_lo > 0 or q_hi < 0:  # one of them straddles zero within tolerance
        w = dirs[i_min] if abs(q_lo) <= abs(q_hi) else dirs[i_max]
        qw = _q_float(lam, w)
        return NullSearchRecord(True, tuple(w), qw, q_min, q_max,
                                tuple(dirs[i_min]), tuple(dirs[i_max]),
                                False, len(dirs))
    for _ in range(200):
        mid = lo + hi
        mid = mid / np.linalg.norm(mid)
        qm = float(mid @ lam_f @ mid)
        if abs(qm) <= 1e-14:
            lo = mid
            q_lo = qm
            break
        if (qm < 0) == (q_lo < 0):
            lo, q_lo = mid, qm
        else:
            hi, q_hi = mid, qm
    w = lo if abs(q_lo) <= abs(q_hi) else hi
    return NullSearchRecord(abs(_q_float(lam, w)) <= 1e-12, tuple(w),
                            _q_float(lam, w), q_min, q_max,
                            tuple(dirs[i_min]), tuple(dirs[i_max]),
                            False, len(dirs))


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Classification:
    verdict: str
    side: str | None
    witness: tuple[float, ...] | None
    witness_ambient: tuple[float, ...] | None
    q_witness: float | None
    diagnostics: dict


def classify_wedge(model: HypersurfaceModel, wedge: WedgeSpec,
                   tau: Sequence[Fraction] | None = None, *,
                   samples: int = 4096, seed: int = 0) -> Classification:
    """Decide which extension hypothesis the wedge satisfies.

    Two-sided extension needs an indefinite form, a null direction inside the
    wedge's direction cone, and a genuinely two-sided wedge.  Otherwise a
    strict sign of the restricted form on some wedge direction gives one-sided
    extension into the side recorded by the transported defining function.
    """
    nf = normal_form(model, tau=tau, wedge=wedge)
    ld = levi_data(nf)
    n = nf.n

    normal_basis = nf.frame.normal_basis()
    b_mat = np.array([[float(c) for c in vec] for vec in normal_basis]).T
    q_mat, r_mat = np.linalg.qr(b_mat)
    signs = np.sign(np.diag(r_mat))
    signs[signs == 0] = 1.0
    q_mat = q_mat * signs
    r_mat = (r_mat.T * signs).T
    r_inv = np.linalg.inv(r_mat)
    lam_f = np.array([[float(c) for c in row] for row in nf.lam])
    lam_ortho = r_inv.T @ lam_f @ r_inv

    sigma0 = np.array([float(c) for c in wedge.axis_exact_at(list(model.base_params))])
    coords = q_mat.T @ sigma0
    resid = float(np.linalg.norm(sigma0 - q_mat @ coords))
    if resid > 1e-9 * max(1.0, float(np.linalg.norm(sigma0))):
        raise PreconditionError(
            f"wedge axis leaves the normal slot by {resid:g} at the base point")
    axis_coords = coords / np.linalg.norm(coords)

    # exact rational form in the orthonormal gauge when the frame is rational
    lam_exact = [[F(x) for x in row] for row in lam_ortho.tolist()]
    rec = find_null_in_cone(lam_exact, axis_coords, float(wedge.aperture),
                            samples=samples, seed=seed)

    side_for_positive = "r<0" if nf.v_coeff_sign < 0 else "r>0"
    side_for_negative = "r>0" if nf.v_coeff_sign < 0 else "r<0"

    def orient(coords_n):
        # the restricted form is even, so the search runs in the +axis cone;
        # a minus-side wedge's directions live in the mirrored cone
        if coords_n is None:
            return None
        arr = np.asarray(coords_n, dtype=float)
        return tuple(float(c) for c in (-arr if wedge.sides == "minus" else arr))

    def to_ambient(coords_n) -> tuple[float, ...] | None:
        if coords_n is None:
            return None
        vec = q_mat @ np.asarray(coords_n, dtype=float)
        return tuple(float(c) for c in vec)

    diagnostics = {
        "signature": ld.signature,
        "eigenvalues": ld.eigenvalues,
        "q_axis": _q_float(lam_exact, axis_coords),
        "q_min": rec.q_min,
        "q_max": rec.q_max,
        "null_search_exhaustive": rec.exhaustive,
        "null_search_samples": rec.samples,
        "v_coeff_sign": nf.v_coeff_sign,
        "sides": wedge.sides,
    }

    if ld.indefinite and wedge.sides == "two" and rec.found:
        return Classification("TwoSidedExtension", None, orient(rec.witness),
                              to_ambient(orient(rec.witness)), rec.q_witness, diagnostics)
    if rec.q_max > 1e-12:
        return Classification("OneSidedExtension", side_for_positive, orient(rec.arg_max),
                              to_ambient(orient(rec.arg_max)), rec.q_max, diagnostics)
    if rec.q_min < -1e-12:
        return Classification("OneSidedExtension", side_for_negative, orient(rec.arg_min),
                              to_ambient(orient(rec.arg_min)), rec.q_min, diagnostics)
    return Classification("NoGuarantee", None, None, None, None, diagnostics)
