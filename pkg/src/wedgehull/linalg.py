"""Exact linear algebra over the rationals.

Matrices are lists of lists of Fraction; vectors are lists of Fraction.
Everything here is small (dimensions are 2n+2 for n around 2..6), so plain
Gaussian elimination with exact pivots is the right tool.  Used by the
frame-alignment pass, which must stay exactly rational end to end.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

from .errors import SingularMapError

Vec = List[Fraction]
Mat = List[List[Fraction]]


def mat(rows) -> Mat:
    return [[Fraction(x) for x in row] for row in rows]


def identity(m: int) -> Mat:
    return [[Fraction(1) if i == j else Fraction(0) for j in range(m)] for i in range(m)]


def zeros(m: int, k: int) -> Mat:
    return [[Fraction(0)] * k for _ in range(m)]


def mat_mul(a: Mat, b: Mat) -> Mat:
    k = len(b)
    out = zeros(len(a), len(b[0]))
    for i, row in enumerate(a):
        for j in range(len(b[0])):
            out[i][j] = sum((row[t] * b[t][j] for t in range(k)), Fraction(0))
    return out


def mat_vec(a: Mat, v: Sequence[Fraction]) -> Vec:
    return [sum((row[j] * v[j] for j in range(len(v))), Fraction(0)) for row in a]


def transpose(a: Mat) -> Mat:
    return [list(col) for col in zip(*a)]


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def det(a: Mat) -> Fraction:
    """Determinant by fraction-preserving Gaussian elimination."""
    m = len(a)
    work = [row[:] for row in a]
    result = Fraction(1)
    for col in range(m):
        pivot_row = next((r for r in range(col, m) if work[r][col] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != col:
            work[col], work[pivot_row] = work[pivot_row], work[col]
            result = -result
        pivot = work[col][col]
        result *= pivot
        for r in range(col + 1, m):
            factor = work[r][col] / pivot
            if factor:
                for c in range(col, m):
                    work[r][c] -= factor * work[col][c]
    return result


def solve(a: Mat, rhs: Sequence[Fraction]) -> Vec:
    """Solve a x = rhs for square invertible a."""
    m = len(a)
    work = [list(row) + [rhs[i]] for i, row in enumerate(a)]
    for col in range(m):
        pivot_row = next((r for r in range(col, m) if work[r][col] != 0), None)
        if pivot_row is None:
            raise SingularMapError("singular linear system", determinant=Fraction(0))
        work[col], work[pivot_row] = work[pivot_row], work[col]
        pivot = work[col][col]
        work[col] = [x / pivot for x in work[col]]
        for r in range(m):
            if r != col and work[r][col]:
                factor = work[r][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
    return [work[i][m] for i in range(m)]


def inverse(a: Mat) -> Mat:
    m = len(a)
    work = [list(row) + ident_row for row, ident_row in zip(a, identity(m))]
    for col in range(m):
        pivot_row = next((r for r in range(col, m) if work[r][col] != 0), None)
        if pivot_row is None:
            raise SingularMapError("matrix not invertible", determinant=Fraction(0))
        work[col], work[pivot_row] = work[pivot_row], work[col]
        pivot = work[col][col]
        work[col] = [x / pivot for x in work[col]]
        for r in range(m):
            if r != col and work[r][col]:
                factor = work[r][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
    return [row[m:] for row in work]


def nullspace(a: Mat) -> List[Vec]:
    """Basis of the kernel of a (rows are equations)."""
    if not a:
        return []
    m, k = len(a), len(a[0])
    work = [row[:] for row in a]
    pivots = []
    row = 0
    for col in range(k):
        pivot_row = next((r for r in range(row, m) if work[r][col] != 0), None)
        if pivot_row is None:
            continue
        work[row], work[pivot_row] = work[pivot_row], work[row]
        pivot = work[row][col]
        work[row] = [x / pivot for x in work[row]]
        for r in range(m):
            if r != row and work[r][col]:
                factor = work[r][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[row])]
        pivots.append(col)
        row += 1
        if row == m:
            break
    free = [c for c in range(k) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * k
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -work[r][fc]
        basis.append(v)
    return basis


def solve_in_span(basis: List[Vec], target: Sequence[Fraction]) -> List[Fraction] | None:
    """Coefficients c with sum(c_i * basis_i) = target, or None if outside the span."""
    if not basis:
        return None if any(x != 0 for x in target) else []
    k = len(basis[0])
    m = len(basis)
    work = [[basis[j][i] for j in range(m)] + [Fraction(target[i])] for i in range(k)]
    pivots = []
    row = 0
    for col in range(m):
        pivot_row = next((r for r in range(row, k) if work[r][col] != 0), None)
        if pivot_row is None:
            continue
        work[row], work[pivot_row] = work[pivot_row], work[row]
        pivot = work[row][col]
        work[row] = [x / pivot for x in work[row]]
        for r in range(k):
            if r != row and work[r][col]:
                factor = work[r][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[row])]
        pivots.append(col)
        row += 1
    # inconsistency check: a zero row with nonzero rhs means target is outside
    for r in range(row, k):
        if any(work[r][c] != 0 for c in range(m)):
            continue
        if work[r][m] != 0:
            return None
    coeffs = [Fraction(0)] * m
    for r, pc in enumerate(pivots):
        coeffs[pc] = work[r][m]
    # verify (cheap, guards reduced-but-inconsistent corner cases)
    for i in range(k):
        if sum((coeffs[j] * basis[j][i] for j in range(m)), Fraction(0)) != target[i]:
            return None
    return coeffs


def gram_schmidt(vectors: List[Vec]) -> List[Vec]:
    """Orthogonalize without normalizing (stays rational); drops zero vectors.

    Each output vector is rescaled to a primitive integer vector pointing the
    same way as the orthogonalized input, which keeps passes deterministic.
    """
    out: List[Vec] = []
    for v in vectors:
        w = list(v)
        for e in out:
            ee = dot(e, e)
            coeff = dot(w, e) / ee
            if coeff:
                w = [wi - coeff * ei for wi, ei in zip(w, e)]
        if any(x != 0 for x in w):
            out.append(primitive(w))
    return out


def primitive(v: Sequence[Fraction], keep_sign: bool = True) -> Vec:
    """Scale to coprime integers.  With keep_sign the direction is preserved."""
    from math import gcd, lcm

    denom = lcm(*[x.denominator for x in v]) if v else 1
    ints = [int(x * denom) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return [Fraction(0)] * len(v)
    ints = [x // g for x in ints]
    if not keep_sign:
        first = next((x for x in ints if x != 0), 1)
        if first < 0:
            ints = [-x for x in ints]
    return [Fraction(x) for x in ints]


def project_onto_span(basis: List[Vec], v: Sequence[Fraction]) -> Vec:
    """Orthogonal projection of v onto span(basis), exactly."""
    if not basis:
        return [Fraction(0)] * len(v)
    ortho = gram_schmidt(basis)
    out = [Fraction(0)] * len(v)
    for e in ortho:
        coeff = dot(list(v), e) / dot(e, e)
        out = [o + coeff * ei for o, ei in zip(out, e)]
    return out


def char_poly(a: Mat) -> List[Fraction]:
    """Coefficients [c_0, ..., c_m] of det(lambda I - a), exact.

    Faddeev-LeVerrier recurrence; needs only ring operations plus division
    by integers, so it stays in the rationals.
    """
    m = len(a)
    coeffs = [Fraction(0)] * (m + 1)
    coeffs[m] = Fraction(1)
    work = identity(m)
    for k in range(1, m + 1):
        work = mat_mul(a, work)
        trace = sum((work[i][i] for i in range(m)), Fraction(0))
        c = -trace / k
        coeffs[m - k] = c
        for i in range(m):
            work[i][i] += c
    return coeffs


def real_symmetric_inertia(a: Mat) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_zero) of a symmetric rational matrix, exact.

    All eigenvalues of a symmetric matrix are real, so Descartes' rule of
    signs on the characteristic polynomial counts positive roots exactly.
    """
    coeffs = char_poly(a)
    n_zero = 0
    while n_zero < len(coeffs) - 1 and coeffs[n_zero] == 0:
        n_zero += 1
    reduced = coeffs[n_zero:]
    signs = [1 if c > 0 else -1 for c in reduced if c != 0]
    n_plus = sum(1 for s1, s2 in zip(signs, signs[1:]) if s1 != s2)
    n_minus = len(coeffs) - 1 - n_zero - n_plus
    return n_plus, n_minus, n_zero


def hermitian_inertia(lam: Mat, omega: Mat) -> tuple[int, int, int]:
    """Inertia of the Hermitian matrix lam + i*omega (lam symmetric, omega skew).

    Uses the real symmetric doubling [[lam, -omega], [omega, lam]], whose
    inertia is exactly twice that of the Hermitian form.
    """
    m = len(lam)
    big = zeros(2 * m, 2 * m)
    for i in range(m):
        for j in range(m):
            big[i][j] = lam[i][j]
            big[m + i][m + j] = lam[i][j]
            big[i][m + j] = -omega[i][j]
            big[m + i][j] = omega[i][j]
    p, q, z = real_symmetric_inertia(big)
    if p % 2 or q % 2 or z % 2:
        raise AssertionError("doubled inertia must be even")
    return p // 2, q // 2, z // 2
