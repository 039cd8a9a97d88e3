"""Arithmetic-complexity separation bounds for eigenbases over Q(sqrt(D)).

An element a + b*sqrt(D) is stored as the pair (a, b) together with the
common squarefree D >= 0 of the basis (D in {0, 1} or b = 0 throughout
means the data is plain rational).  The nontrivial Galois conjugate flips
the sign of b.  Exactness: comparisons reduce to rational sign tests via
(a + b sqrt(D) >= 0  iff  a >= 0 and a^2 >= D b^2, or ... ), implemented
below without ever taking a square root.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import InputError
from .matrices import Matrix


@dataclass(frozen=True)
class QuadElement:
    """a + b*sqrt(D); D is carried by the enclosing basis."""
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def conj(self) -> "QuadElement":
        return QuadElement(self.a, -self.b)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0


def q_add(x: QuadElement, y: QuadElement) -> QuadElement:
    return QuadElement(x.a + y.a, x.b + y.b)


def q_sub(x: QuadElement, y: QuadElement) -> QuadElement:
    return QuadElement(x.a - y.a, x.b - y.b)


def q_mul(x: QuadElement, y: QuadElement, d: int) -> QuadElement:
    return QuadElement(x.a * y.a + d * x.b * y.b, x.a * y.b + x.b * y.a)


def q_scale(x: QuadElement, c: Fraction) -> QuadElement:
    return QuadElement(x.a * c, x.b * c)


def q_inv(x: QuadElement, d: int) -> QuadElement:
    norm = x.a * x.a - d * x.b * x.b
    if norm == 0:
        raise InputError("division by zero in Q(sqrt(D))")
    return QuadElement(x.a / norm, -x.b / norm)


def q_sign(x: QuadElement, d: int) -> int:
    """Sign of a + b*sqrt(D), decided by rational comparisons only."""
    if x.b == 0:
        return (x.a > 0) - (x.a < 0)
    if x.a == 0:
        return 1 if x.b > 0 else -1
    if x.a > 0 and x.b > 0:
        return 1
    if x.a < 0 and x.b < 0:
        return -1
    # opposite signs: compare a^2 against D b^2
    lhs, rhs = x.a * x.a, d * x.b * x.b
    if x.a > 0:  # b < 0
        return 1 if lhs > rhs else (-1 if lhs < rhs else 0)
    return -1 if lhs > rhs else (1 if lhs < rhs else 0)


@dataclass(frozen=True)
class QuadVector:
    entries: Tuple[QuadElement, ...]

    def degree(self) -> int:
        return 2 if any(e.b != 0 for e in self.entries) else 1


def quad_vector(entries: Sequence, d: int) -> QuadVector:
    """Build from (a, b) pairs or plain rationals."""
    out = []
    for e in entries:
        if isinstance(e, QuadElement):
            out.append(e)
        elif isinstance(e, tuple):
            out.append(QuadElement(Fraction(e[0]), Fraction(e[1])))
        else:
            out.append(QuadElement(Fraction(e), Fraction(0)))
    return QuadVector(tuple(out))


def _det_quad(cols: List[List[QuadElement]], d: int) -> QuadElement:
    """Exact determinant over Q(sqrt(D)) by Gaussian elimination."""
    n = len(cols)
    m = [[cols[j][i] for j in range(n)] for i in range(n)]  # rows
    det = QuadElement(Fraction(1), Fraction(0))
    sign = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if piv is None:
            return QuadElement(Fraction(0), Fraction(0))
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        pv = m[col][col]
        det = q_mul(det, pv, d)
        inv = q_inv(pv, d)
        for r in range(col + 1, n):
            if not m[r][col].is_zero():
                f = q_mul(m[r][col], inv, d)
                m[r] = [q_sub(x, q_mul(f, y, d)) for x, y in zip(m[r], m[col])]
    return det if sign == 1 else q_scale(det, Fraction(-1))


@dataclass(frozen=True)
class SeparationResult:
    member: bool                       # True: B u1 lies in H exactly
    bound: Optional[Fraction]          # else: certified lower bound for d([Bu1],[H])


def norm_sq_conjugates(u: QuadVector, d: int) -> Tuple[QuadElement, QuadElement]:
    """|u|^2 and |sigma(u)|^2 as elements a + b sqrt(D) (b = 0 if rational)."""
    s = QuadElement(Fraction(0), Fraction(0))
    for e in u.entries:
        s = q_add(s, q_mul(e, e, d))
    return s, s.conj()


def house_norm_upper(u: QuadVector, d: int, bits: int = 64) -> Fraction:
    """Rational upper bound for max over Galois conjugates of |sigma(u)|
    (the arithmetic height |u|_m used by the separation bound)."""
    from .intervals import sqrt_fraction
    s, sc = norm_sq_conjugates(u, d)
    out = Fraction(0)
    for val in (s, sc):
        # val = a + b sqrt(D) >= 0; upper bound: a + b*ub(sqrt(D))
        if val.b == 0:
            up = val.a
        else:
            sq = sqrt_fraction(Fraction(d), bits)
            up = val.a + val.b * (sq.hi if val.b > 0 else sq.lo)
        out = max(out, sqrt_fraction(max(up, Fraction(0)), bits).hi)
    return out


def separation_lower_bound(b_mat: Matrix, basis: Sequence[QuadVector], d_field: int,
                           m_height: Fraction,
                           norm_tol: Fraction = Fraction(1, 1 << 20)
                           ) -> SeparationResult:
    """Arithmetic gap bound: for an integer matrix B and a hyperplane H
    spanned by the last d-1 basis vectors (entries algebraic integers of
    degree n <= 2 with height at most m_height), either B u1 lies in H or

        d([B u1], [H])  >=  1 / (|B|**(n**d) * m_height**(2*d*n**d)).

    Exact membership is decided in Q(sqrt(D)); the returned bound uses a
    validated upper enclosure of |B|.
    """
    dim = b_mat.dim
    if len(basis) != dim:
        raise InputError("need d basis vectors")
    if any(len(u.entries) != dim for u in basis):
        raise InputError("basis vector length mismatch")
    if not b_mat.is_integral():
        raise InputError("separation bound needs an integer matrix")
    if d_field < 0:
        raise InputError("field discriminant must be >= 0")
    degree = max(u.degree() for u in basis)
    if degree == 2 and (d_field in (0, 1)):
        raise InputError("quadratic entries need a nontrivial sqrt(D)")
    for u in basis:
        for e in u.entries:
            if e.a.denominator != 1 or e.b.denominator != 1:
                raise InputError("basis entries must be algebraic integers "
                                 "(integer a + b sqrt(D) supported)")
    for u in basis:
        if house_norm_upper(u, d_field) > m_height:
            raise InputError("m_height is smaller than a basis vector height")

    # membership: det[B u1, u2, ..., u_d] = 0 exactly
    bu1 = [QuadElement(Fraction(0), Fraction(0)) for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            bu1[i] = q_add(bu1[i], q_scale(basis[0].entries[j],
                                           b_mat.rows[i][j]))
    cols = [bu1] + [list(u.entries) for u in basis[1:]]
    det = _det_quad(cols, d_field)
    if det.is_zero():
        return SeparationResult(member=True, bound=None)

    from .rootbounds import operator_norm_bounds
    norm_hi, _ = operator_norm_bounds(b_mat, norm_tol)
    n = degree
    exp1 = n ** dim
    exp2 = 2 * dim * n ** dim
    bound = 1 / (norm_hi.hi ** exp1 * m_height ** exp2)
    return SeparationResult(member=False, bound=bound)
