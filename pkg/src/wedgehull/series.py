"""Truncated multivariate polynomial arithmetic over exact rationals.

A TruncatedPoly is a sparse map from exponent tuples to Fraction, attached
to an ordered variable list and a degree cap: every operation discards
monomials of total degree above the cap, so the objects model Taylor
polynomials "mod degree cap+1".  Canonical form drops zero coefficients and
orders monomials by total degree, then lexicographically; two polynomials
compare equal iff their canonical forms agree.

Polynomial maps (PolyMap) bundle one component per target coordinate and
support composition, exact truncated inversion, and implicit graph solves.
All of this is exact: no floats enter until a caller asks for a float
evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from . import linalg
from .errors import DegenerateGraphError, SingularMapError, VariableMismatchError

Exponent = Tuple[int, ...]
Coeffs = Dict[Exponent, Fraction]


def parse_rational(text) -> Fraction:
    """Parse "p/q", integer, or decimal strings exactly ("0.5" -> 1/2)."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise ValueError(f"refusing float literal {text!r}; pass a string for exactness")
    return Fraction(str(text).strip())


def rational_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def monomial_key(exp: Exponent) -> tuple:
    return (sum(exp), exp)


class TruncatedPoly:
    __slots__ = ("vars", "cap", "coeffs")

    def __init__(self, vars: Sequence[str], cap: int, coeffs: Mapping[Exponent, Fraction] | None = None):
        if cap < 0:
            raise ValueError("degree cap must be nonnegative")
        self.vars: Tuple[str, ...] = tuple(vars)
        self.cap = int(cap)
        clean: Coeffs = {}
        if coeffs:
            nv = len(self.vars)
            for exp, c in coeffs.items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != nv:
                    raise VariableMismatchError(
                        f"exponent {exp} has {len(exp)} entries for {nv} variables {self.vars}")
                if any(e < 0 for e in exp):
                    raise ValueError(f"negative exponent in {exp}")
                if sum(exp) > self.cap:
                    continue
                c = Fraction(c)
                if c:
                    clean[exp] = clean.get(exp, Fraction(0)) + c
                    if not clean[exp]:
                        del clean[exp]
        self.coeffs: Coeffs = clean

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, vars: Sequence[str], cap: int) -> "TruncatedPoly":
        return cls(vars, cap)

    @classmethod
    def constant(cls, vars: Sequence[str], cap: int, value) -> "TruncatedPoly":
        vars = tuple(vars)
        return cls(vars, cap, {tuple([0] * len(vars)): Fraction(value)})

    @classmethod
    def variable(cls, name: str, vars: Sequence[str], cap: int) -> "TruncatedPoly":
        vars = tuple(vars)
        if name not in vars:
            raise VariableMismatchError(f"variable {name!r} not among {vars}")
        exp = tuple(1 if v == name else 0 for v in vars)
        return cls(vars, cap, {exp: Fraction(1)})

    @classmethod
    def from_terms(cls, terms: Iterable[tuple], vars: Sequence[str], cap: int) -> "TruncatedPoly":
        """Build from (coefficient, {var: exponent}) pairs."""
        vars = tuple(vars)
        coeffs: Coeffs = {}
        for c, mono in terms:
            exp = [0] * len(vars)
            for name, e in mono.items():
                if name not in vars:
                    raise VariableMismatchError(f"variable {name!r} not among {vars}")
                exp[vars.index(name)] = int(e)
            exp_t = tuple(exp)
            coeffs[exp_t] = coeffs.get(exp_t, Fraction(0)) + Fraction(c)
        return cls(vars, cap, coeffs)

    # ---- canonical structure ------------------------------------------

    def items(self):
        """Monomials in canonical (total degree, lexicographic) order."""
        return sorted(self.coeffs.items(), key=lambda kv: monomial_key(kv[0]))

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def low_degree(self) -> int:
        """Smallest total degree present (0 for the zero polynomial)."""
        return min((sum(e) for e in self.coeffs), default=0)

    def coefficient(self, mono: Mapping[str, int]) -> Fraction:
        exp = [0] * len(self.vars)
        for name, e in mono.items():
            exp[self.vars.index(name)] = int(e)
        return self.coeffs.get(tuple(exp), Fraction(0))

    def graded_part(self, degree: int) -> "TruncatedPoly":
        return TruncatedPoly(self.vars, self.cap,
                             {e: c for e, c in self.coeffs.items() if sum(e) == degree})

    def parts_through(self, degree: int) -> "TruncatedPoly":
        return TruncatedPoly(self.vars, self.cap,
                             {e: c for e, c in self.coeffs.items() if sum(e) <= degree})

    def with_cap(self, cap: int) -> "TruncatedPoly":
        return TruncatedPoly(self.vars, cap, self.coeffs)

    def rename(self, vars: Sequence[str]) -> "TruncatedPoly":
        if len(vars) != len(self.vars):
            raise VariableMismatchError("rename must preserve arity")
        return TruncatedPoly(vars, self.cap, self.coeffs)

    def lift(self, vars: Sequence[str]) -> "TruncatedPoly":
        """Embed into a larger variable tuple, matching variables by name."""
        vars = tuple(vars)
        try:
            slots = [vars.index(v) for v in self.vars]
        except ValueError as missing:
            raise VariableMismatchError(
                f"lift target lacks a variable of {self.vars}") from missing
        coeffs = {}
        for exp, c in self.coeffs.items():
            out = [0] * len(vars)
            for slot, e in zip(slots, exp):
                out[slot] = e
            coeffs[tuple(out)] = c
        return TruncatedPoly(vars, self.cap, coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedPoly):
            return NotImplemented
        return self.vars == other.vars and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.vars, tuple(self.items())))

    def __repr__(self):
        if self.is_zero():
            return "0"
        parts = []
        for exp, c in self.items():
            mono = "*".join(f"{v}^{e}" if e > 1 else v
                            for v, e in zip(self.vars, exp) if e)
            term = rational_str(c) if not mono else (
                mono if c == 1 else f"-{mono}" if c == -1 else f"{rational_str(c)}*{mono}")
            parts.append(term)
        return " + ".join(parts).replace("+ -", "- ")

    # ---- arithmetic ----------------------------------------------------

    def _check(self, other: "TruncatedPoly"):
        if self.vars != other.vars:
            raise VariableMismatchError(f"variable lists differ: {self.vars} vs {other.vars}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncatedPoly.constant(self.vars, self.cap, other)
        self._check(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, Fraction(0)) + c
        return TruncatedPoly(self.vars, min(self.cap, other.cap), out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedPoly(self.vars, self.cap, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncatedPoly.constant(self.vars, self.cap, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return TruncatedPoly(self.vars, self.cap,
                                 {e: c * q for e, c in self.coeffs.items()})
        self._check(other)
        cap = min(self.cap, other.cap)
        out: Coeffs = {}
        for e1, c1 in self.coeffs.items():
            d1 = sum(e1)
            for e2, c2 in other.coeffs.items():
                if d1 + sum(e2) > cap:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return TruncatedPoly(self.vars, cap, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = TruncatedPoly.constant(self.vars, self.cap, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def partial(self, name: str) -> "TruncatedPoly":
        idx = self.vars.index(name)
        out: Coeffs = {}
        for e, c in self.coeffs.items():
            if e[idx] == 0:
                continue
            ne = list(e)
            ne[idx] -= 1
            out[tuple(ne)] = c * e[idx]
        return TruncatedPoly(self.vars, self.cap, out)

    # ---- evaluation ----------------------------------------------------

    def eval_exact(self, point: Sequence) -> Fraction:
        if len(point) != len(self.vars):
            raise VariableMismatchError("point arity mismatch")
        vals = [Fraction(p) for p in point]
        total = Fraction(0)
        for e, c in self.coeffs.items():
            term = c
            for v, k in zip(vals, e):
                if k:
                    term *= v ** k
            total += term
        return total

    def eval_float(self, point: Sequence[float]) -> float:
        """Horner-style evaluation: recursively factor out the first variable."""
        items = self.items()
        if not items:
            return 0.0
        pt = [float(p) for p in point]
        return _horner(items, pt, 0, len(self.vars))

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation; points has shape (m, nvars)."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[None, :]
        out = np.zeros(points.shape[0])
        cache: dict[tuple[int, int], np.ndarray] = {}
        for e, c in self.coeffs.items():
            term = np.full(points.shape[0], float(c))
            for j, k in enumerate(e):
                if k:
                    key = (j, k)
                    if key not in cache:
                        cache[key] = points[:, j] ** k
                    term = term * cache[key]
            out += term
        return out


def _horner(items, point, var_idx, nvars):
    if var_idx == nvars - 1:
        # univariate tail: classic Horner over the last exponent
        items = sorted(items, key=lambda kv: -kv[0][var_idx])
        acc = 0.0
        prev_e = items[0][0][var_idx]
        acc = float(items[0][1])
        for e, c in items[1:]:
            acc = acc * point[var_idx] ** (prev_e - e[var_idx]) + float(c)
            prev_e = e[var_idx]
        return acc * point[var_idx] ** prev_e
    groups: dict[int, list] = {}
    for e, c in items:
        groups.setdefault(e[var_idx], []).append((e, c))
    exps = sorted(groups, reverse=True)
    acc = 0.0
    prev = exps[0]
    acc = _horner(groups[prev], point, var_idx + 1, nvars)
    for e in exps[1:]:
        acc = acc * point[var_idx] ** (prev - e) + _horner(groups[e], point, var_idx + 1, nvars)
        prev = e
    return acc * point[var_idx] ** prev


def eval_poly(p: TruncatedPoly, point: Sequence, exact: bool | None = None):
    """Evaluate p at a point; exact rationals when the inputs are exact."""
    if exact is None:
        exact = all(isinstance(x, (int, Fraction)) for x in point)
    return p.eval_exact(point) if exact else p.eval_float(point)


# ---- composition -------------------------------------------------------


def substitute(p: TruncatedPoly, values: Mapping[str, TruncatedPoly], cap: int | None = None) -> TruncatedPoly:
    """Substitute a polynomial for every variable of p.

    All replacement polynomials must share one variable list; the result is
    truncated at `cap` (default: the smallest cap in sight).
    """
    missing = [v for v in p.vars if v not in values]
    if missing:
        raise VariableMismatchError(f"no substitution supplied for variable {missing[0]!r}")
    reps = [values[v] for v in p.vars]
    base_vars = reps[0].vars
    for r in reps[1:]:
        if r.vars != base_vars:
            raise VariableMismatchError("substitution values disagree on variables")
    if cap is None:
        cap = min([p.cap] + [r.cap for r in reps])
    result = TruncatedPoly.zero(base_vars, cap)
    power_cache: dict[tuple[int, int], TruncatedPoly] = {}

    def power(i: int, k: int) -> TruncatedPoly:
        key = (i, k)
        if key not in power_cache:
            if k == 0:
                power_cache[key] = TruncatedPoly.constant(base_vars, cap, 1)
            else:
                power_cache[key] = power(i, k - 1) * reps[i].with_cap(cap)
        return power_cache[key]

    for e, c in p.coeffs.items():
        term = TruncatedPoly.constant(base_vars, cap, c)
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
        result = result + term
    return result


@dataclass(frozen=True)
class PolyMap:
    """Polynomial map: components give each target coordinate in source variables."""

    source_vars: Tuple[str, ...]
    target_vars: Tuple[str, ...]
    components: Tuple[TruncatedPoly, ...]

    def __post_init__(self):
        if len(self.components) != len(self.target_vars):
            raise VariableMismatchError("one component per target variable required")
        for comp in self.components:
            if comp.vars != tuple(self.source_vars):
                raise VariableMismatchError(
                    f"component variables {comp.vars} differ from source {self.source_vars}")

    @property
    def cap(self) -> int:
        return min(c.cap for c in self.components)

    @classmethod
    def identity(cls, vars: Sequence[str], cap: int) -> "PolyMap":
        vars = tuple(vars)
        return cls(vars, vars, tuple(TruncatedPoly.variable(v, vars, cap) for v in vars))

    @classmethod
    def linear(cls, matrix, source_vars, target_vars, cap: int,
               constants: Sequence | None = None) -> "PolyMap":
        """Map with components constants[i] + sum_j matrix[i][j] * source_j."""
        source_vars = tuple(source_vars)
        target_vars = tuple(target_vars)
        comps = []
        for i in range(len(target_vars)):
            coeffs: Coeffs = {}
            for j, v in enumerate(source_vars):
                q = Fraction(matrix[i][j])
                if q:
                    exp = tuple(1 if t == j else 0 for t in range(len(source_vars)))
                    coeffs[exp] = q
            if constants is not None and Fraction(constants[i]):
                coeffs[tuple([0] * len(source_vars))] = Fraction(constants[i])
            comps.append(TruncatedPoly(source_vars, cap, coeffs))
        return cls(source_vars, target_vars, tuple(comps))

    def linear_matrix(self) -> linalg.Mat:
        """Cached-by-construction linear part, rows indexed by target coordinate."""
        rows = []
        for comp in self.components:
            row = []
            for j in range(len(self.source_vars)):
                exp = tuple(1 if t == j else 0 for t in range(len(self.source_vars)))
                row.append(comp.coeffs.get(exp, Fraction(0)))
            rows.append(row)
        return rows

    def constant_vector(self) -> linalg.Vec:
        zero_exp = tuple([0] * len(self.source_vars))
        return [comp.coeffs.get(zero_exp, Fraction(0)) for comp in self.components]

    def component_map(self) -> Dict[str, TruncatedPoly]:
        return dict(zip(self.target_vars, self.components))

    def eval_exact(self, point: Sequence) -> list:
        return [c.eval_exact(point) for c in self.components]

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        return np.stack([c.eval_many(points) for c in self.components], axis=1)


def compose_truncated(p: TruncatedPoly, m: PolyMap, cap: int | None = None) -> TruncatedPoly:
    """p composed with m: substitute m's components for p's variables."""
    if p.vars != tuple(m.target_vars):
        raise VariableMismatchError(
            f"polynomial variables {p.vars} do not match map target {m.target_vars}")
    return substitute(p, m.component_map(), cap)


def compose_maps(outer: PolyMap, inner: PolyMap, cap: int | None = None) -> PolyMap:
    """(outer after inner): feed inner's output coordinates into outer."""
    if tuple(outer.source_vars) != tuple(inner.target_vars):
        raise VariableMismatchError(
            f"outer source {outer.source_vars} does not match inner target {inner.target_vars}")
    comps = tuple(compose_truncated(c, inner, cap) for c in outer.components)
    return PolyMap(inner.source_vars, outer.target_vars, comps)


def invert_map_truncated(m: PolyMap, cap: int | None = None) -> PolyMap:
    """Truncated inverse of an affine-plus-higher-order map with invertible linear part.

    Fixed-point iteration g <- L^(-1)(id - const - H(g)) gains one correct
    order per pass, so cap-1 passes suffice.  The result is verified:
    composing with m gives the identity through the cap.
    """
    if len(m.source_vars) != len(m.target_vars):
        raise SingularMapError("only square maps are invertible")
    if cap is None:
        cap = m.cap
    lin = m.linear_matrix()
    d = linalg.det(lin)
    if d == 0:
        raise SingularMapError("linear part is singular", determinant=d)
    lin_inv = linalg.inverse(lin)
    const = m.constant_vector()
    n = len(m.source_vars)

    if any(c != 0 for c in const):
        # expand around the image of the origin: invert the constant-free part,
        # then precompose with the shift y -> y - const (affine, no truncation loss)
        m0 = PolyMap(m.source_vars, m.target_vars, tuple(
            comp - TruncatedPoly.constant(m.source_vars, cap, c)
            for comp, c in zip(m.components, const)))
        g0 = invert_map_truncated(m0, cap)
        shift = PolyMap.linear(linalg.identity(n), m.target_vars, m.target_vars, cap,
                               constants=[-c for c in const])
        g = compose_maps(g0, shift, cap)
    else:
        # H = m - linear part, low degree >= 2
        higher = []
        for comp in m.components:
            h = dict(comp.coeffs)
            for j in range(n):
                exp = tuple(1 if t == j else 0 for t in range(n))
                h.pop(exp, None)
            higher.append(TruncatedPoly(m.source_vars, cap, h))

        g = PolyMap.linear(lin_inv, m.target_vars, m.source_vars, cap)
        ident = PolyMap.identity(m.target_vars, cap)
        # each pass fixes one more degree; cap-1 passes suffice
        for _ in range(max(cap - 1, 1)):
            hg = [compose_truncated(h, g, cap) for h in higher]
            new_comps = []
            for i in range(n):
                acc = TruncatedPoly.zero(m.target_vars, cap)
                for j in range(n):
                    delta = ident.components[j] - hg[j]
                    if lin_inv[i][j]:
                        acc = acc + lin_inv[i][j] * delta
                new_comps.append(acc)
            new_g = PolyMap(m.target_vars, m.source_vars, tuple(new_comps))
            if new_g == g:
                break
            g = new_g

    # one-sided check: g(m(x)) = x through the cap.  The other side holds too
    # when const = 0, but a translation re-centers the expansion point.
    check = compose_maps(g, m, cap)
    ident_src = PolyMap.identity(m.source_vars, cap)
    for got, want in zip(check.components, ident_src.components):
        if got != want:
            raise SingularMapError("truncated inversion failed verification")
    return g


def reciprocal_truncated(q: TruncatedPoly, cap: int | None = None) -> TruncatedPoly:
    """Multiplicative inverse of a series with nonzero constant term."""
    if cap is None:
        cap = q.cap
    zero_exp = tuple([0] * len(q.vars))
    q0 = q.coeffs.get(zero_exp, Fraction(0))
    if q0 == 0:
        raise DegenerateGraphError("no reciprocal: constant term vanishes")
    q = q.with_cap(cap)
    inv = TruncatedPoly.constant(q.vars, cap, Fraction(1, 1) / q0)
    # Newton doubling: correct order doubles every pass
    passes = max(1, (cap).bit_length() + 1)
    for _ in range(passes):
        inv = inv * (2 - q * inv)
    return inv


def graph_solve(r: TruncatedPoly, solve_var: str, cap: int | None = None) -> TruncatedPoly:
    """Solve r(rest, solve_var = h(rest)) = 0 for h with h(0) = 0.

    Requires r(0) = 0 and a nonzero linear coefficient on solve_var.
    Newton iteration on truncated series doubles the correct order each
    step; the residual is checked exactly at the end.
    """
    if cap is None:
        cap = r.cap
    if solve_var not in r.vars:
        raise VariableMismatchError(f"solve variable {solve_var!r} not among {r.vars}")
    zero_exp = tuple([0] * len(r.vars))
    if r.coeffs.get(zero_exp, Fraction(0)) != 0:
        raise DegenerateGraphError("graph solve requires zero constant term")
    idx = r.vars.index(solve_var)
    lin_exp = tuple(1 if t == idx else 0 for t in range(len(r.vars)))
    c = r.coeffs.get(lin_exp, Fraction(0))
    if c == 0:
        raise DegenerateGraphError(
            f"defining function has no linear term in {solve_var!r}")
    rest_vars = tuple(v for v in r.vars if v != solve_var)
    dr = r.partial(solve_var)

    def plug(h: TruncatedPoly, p: TruncatedPoly) -> TruncatedPoly:
        values = {v: TruncatedPoly.variable(v, rest_vars, cap) for v in rest_vars}
        values[solve_var] = h
        return substitute(p, values, cap)

    h = TruncatedPoly.zero(rest_vars, cap)
    steps = max(1, cap.bit_length() + 1)
    for _ in range(steps):
        res = plug(h, r)
        if res.is_zero():
            break
        deriv = plug(h, dr)
        h = h - res * reciprocal_truncated(deriv, cap)
    if not plug(h, r).is_zero():
        raise DegenerateGraphError("implicit solve did not converge to an exact graph")
    return h


# ---- complexified pairs -------------------------------------------------


@dataclass(frozen=True)
class CPoly:
    """Complex-coefficient polynomial stored as a (real, imaginary) pair.

    Used to expand holomorphic polynomial expressions into the underlying
    real coordinates; both halves share variables and cap.
    """

    re: TruncatedPoly
    im: TruncatedPoly

    @classmethod
    def from_real(cls, p: TruncatedPoly) -> "CPoly":
        return cls(p, TruncatedPoly.zero(p.vars, p.cap))

    @classmethod
    def make(cls, re: TruncatedPoly, im: TruncatedPoly) -> "CPoly":
        if re.vars != im.vars:
            raise VariableMismatchError("real/imaginary parts disagree on variables")
        return cls(re, im)

    def __add__(self, other: "CPoly") -> "CPoly":
        return CPoly(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "CPoly") -> "CPoly":
        return CPoly(self.re - other.re, self.im - other.im)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CPoly(self.re * other, self.im * other)
        return CPoly(self.re * other.re - self.im * other.im,
                     self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def times_i(self) -> "CPoly":
        return CPoly(-self.im, self.re)

    def __pow__(self, k: int) -> "CPoly":
        result = CPoly.from_real(TruncatedPoly.constant(self.re.vars, self.re.cap, 1))
        for _ in range(k):
            result = result * self
        return result


def holomorphic_eval(p: TruncatedPoly, values: Mapping[str, CPoly], cap: int) -> CPoly:
    """Evaluate a real-coefficient polynomial at complex polynomial arguments.

    This is how a real polynomial in (x, u) is read as the holomorphic
    polynomial it defines on (z, w): substitute CPoly representations of the
    complex coordinates.
    """
    base_vars = next(iter(values.values())).re.vars
    zero = TruncatedPoly.zero(base_vars, cap)
    acc = CPoly(zero, zero)
    cache: dict[tuple[str, int], CPoly] = {}

    def power(name: str, k: int) -> CPoly:
        key = (name, k)
        if key not in cache:
            if k == 0:
                cache[key] = CPoly.from_real(TruncatedPoly.constant(base_vars, cap, 1))
            else:
                cache[key] = power(name, k - 1) * values[name]
        return cache[key]

    for e, c in p.coeffs.items():
        term = CPoly.from_real(TruncatedPoly.constant(base_vars, cap, c))
        for name, k in zip(p.vars, e):
            if k:
                if name not in values:
                    raise VariableMismatchError(f"no complex value supplied for {name!r}")
                term = term * power(name, k)
        acc = acc + term
    return acc
