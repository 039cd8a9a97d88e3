"""Exact rational square matrices and their algebraic invariants.

Entries are ``Fraction`` values in canonical reduced form, so equality and
hashing are exact -- this is what makes ball deduplication and the relation
oracle trustworthy.  Construction checks invertibility (all group elements
handled by this library are invertible).

Everything is immutable and pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

from . import polys
from .errors import InputError

Row = Tuple[Fraction, ...]


@dataclass(frozen=True)
class Matrix:
    rows: Tuple[Row, ...]

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise InputError("matrix must be square and non-empty")
        if _det(rows) == 0:
            raise InputError("matrix is singular")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def identity(d: int) -> "Matrix":
        return Matrix(tuple(
            tuple(Fraction(1 if i == j else 0) for j in range(d)) for i in range(d)
        ))

    @staticmethod
    def diagonal(entries: Sequence) -> "Matrix":
        d = len(entries)
        return Matrix(tuple(
            tuple(Fraction(entries[i]) if i == j else Fraction(0) for j in range(d))
            for i in range(d)
        ))

    # -- basic structure ---------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    def is_identity(self) -> bool:
        return all(self.rows[i][j] == (1 if i == j else 0)
                   for i in range(self.dim) for j in range(self.dim))

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for r in self.rows for x in r)

    def transpose(self) -> "Matrix":
        d = self.dim
        return Matrix(tuple(tuple(self.rows[j][i] for j in range(d)) for i in range(d)))

    def max_abs_entry(self) -> Fraction:
        return max(abs(x) for r in self.rows for x in r)

    def __repr__(self):
        return "Matrix(" + "; ".join(
            " ".join(str(x) for x in r) for r in self.rows) + ")"

    # -- arithmetic --------------------------------------------------------

    def __mul__(self, other: "Matrix") -> "Matrix":
        if self.dim != other.dim:
            raise InputError("dimension mismatch in matrix product")
        d = self.dim
        cols = list(zip(*other.rows))
        return Matrix(tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in cols)
            for row in self.rows
        ))

    def __pow__(self, n: int) -> "Matrix":
        if n < 0:
            return self.inverse() ** (-n)
        acc = Matrix.identity(self.dim)
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def apply(self, vec: Sequence[Fraction]) -> List[Fraction]:
        return [sum(a * Fraction(x) for a, x in zip(row, vec)) for row in self.rows]

    def det(self) -> Fraction:
        return _det(self.rows)

    def inverse(self) -> "Matrix":
        d = self.dim
        aug = [list(r) + [Fraction(1 if i == j else 0) for j in range(d)]
               for i, r in enumerate(self.rows)]
        for col in range(d):
            piv = next((r for r in range(col, d) if aug[r][col] != 0), None)
            if piv is None:
                raise InputError("matrix is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            pv = aug[col][col]
            aug[col] = [x / pv for x in aug[col]]
            for r in range(d):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
        return Matrix(tuple(tuple(row[d:]) for row in aug))

    def conjugate_by(self, h: "Matrix") -> "Matrix":
        """h * self * h^-1."""
        return h * self * h.inverse()

    def gram(self) -> "Matrix":
        """The exact Gram matrix self^T * self (symmetric positive definite)."""
        return self.transpose() * self


def _det(rows) -> Fraction:
    """Fraction-pivoted Gaussian elimination determinant."""
    d = len(rows)
    m = [list(r) for r in rows]
    det = Fraction(1)
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        pv = m[col][col]
        det *= pv
        for r in range(col + 1, d):
            if m[r][col] != 0:
                f = m[r][col] / pv
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det


# ---------------------------------------------------------------------------
# Characteristic and minimal polynomials
# ---------------------------------------------------------------------------

def char_poly(m: Matrix) -> List[Fraction]:
    """Monic characteristic polynomial det(xI - m), increasing-degree coefficients.

    Faddeev-LeVerrier recursion; exact over the rationals and invariant under
    conjugation by construction.
    """
    d = m.dim
    coeffs = [Fraction(0)] * (d + 1)
    coeffs[d] = Fraction(1)
    # Newton's identity: k*c_{d-k} = -(p_k + sum_{j=1}^{k-1} c_{d-j} p_{k-j})
    # with p_i = trace(m^i).
    traces = [Fraction(d)]
    mk = Matrix.identity(d)
    for k in range(1, d + 1):
        mk = mk * m
        traces.append(sum(mk.rows[i][i] for i in range(d)))
        s = traces[k]
        for j in range(1, k):
            s += coeffs[d - j] * traces[k - j]
        coeffs[d - k] = -s / k
    return coeffs


def minimal_poly(m: Matrix) -> List[Fraction]:
    """Monic minimal polynomial via the first linear dependence among
    I, m, m**2, ... viewed as vectors of length d**2."""
    d = m.dim
    powers = [Matrix.identity(d)]
    rows: List[List[Fraction]] = []

    def flat(mat: Matrix) -> List[Fraction]:
        return [x for r in mat.rows for x in r]

    # incremental Gaussian elimination; basis rows with their combinations
    basis: List[Tuple[List[Fraction], List[Fraction]]] = []
    k = 0
    while True:
        vec = flat(powers[-1])
        comb = [Fraction(1 if i == k else 0) for i in range(d + 1)]
        # reduce vec against current basis
        for bvec, bcomb in basis:
            piv = next(i for i, x in enumerate(bvec) if x != 0)
            if vec[piv] != 0:
                f = vec[piv] / bvec[piv]
                vec = [x - f * y for x, y in zip(vec, bvec)]
                comb = [x - f * y for x, y in zip(comb, bcomb)]
        if all(x == 0 for x in vec):
            coeffs = comb[:k + 1]
            lead = coeffs[-1]
            return [c / lead for c in coeffs]
        basis.append((vec, comb))
        powers.append(powers[-1] * m)
        k += 1


def is_semisimple(m: Matrix) -> bool:
    """Diagonalizable over the algebraic closure: squarefree minimal polynomial."""
    mp = minimal_poly(m)
    return polys.degree(polys.gcd_poly(mp, polys.derivative(mp))) == 0


def _euler_phi(n: int) -> int:
    out, p, nn = n, 2, n
    while p * p <= nn:
        if nn % p == 0:
            while nn % p == 0:
                nn //= p
            out -= out // p
        p += 1
    if nn > 1:
        out -= out // nn
    return out


def torsion_order_candidates(d: int) -> List[int]:
    """All possible orders of a torsion element of GL_d(Q).

    The order is an lcm of cyclotomic indices n_i whose degrees phi(n_i)
    sum to at most d; we enumerate these lcms exactly.
    """
    pool = [n for n in range(1, 6 * d * d + 1) if _euler_phi(n) <= d]
    reachable = {1: 0}  # lcm -> minimal total degree used
    for n in pool:
        phi = _euler_phi(n)
        updates = {}
        for l, cost in reachable.items():
            g = l * n // _gcd(l, n)
            new_cost = cost + phi
            if new_cost <= d and (g not in reachable or reachable[g] > new_cost):
                if g not in updates or updates[g] > new_cost:
                    updates[g] = new_cost
        for g, c in updates.items():
            if g not in reachable or reachable[g] > c:
                reachable[g] = c
    return sorted(reachable)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


_ORDER_CANDIDATES: dict = {}


@dataclass(frozen=True)
class ElementClass:
    torsion: bool
    order: Optional[int]  # exact order when torsion, else None
    semisimple: bool

    @property
    def infinite_order(self) -> bool:
        return not self.torsion


def classify_element(m: Matrix) -> ElementClass:
    """Torsion/infinite-order and semisimplicity, decided exactly.

    m is torsion iff m**n is the identity for one of the finitely many
    admissible orders in dimension d (equivalently: its characteristic
    polynomial is a product of cyclotomics and its minimal polynomial is
    squarefree); the returned order is exact.
    """
    d = m.dim
    ss = is_semisimple(m)
    cands = _ORDER_CANDIDATES.get(d)
    if cands is None:
        cands = torsion_order_candidates(d)
        _ORDER_CANDIDATES[d] = cands
    # cheap necessary condition first: all |trace(m^k)| <= d would hold for
    # torsion; we simply try the candidate orders directly.
    for n in cands:
        if (m ** n).is_identity():
            order = next(k for k in sorted(_divisors(n)) if (m ** k).is_identity())
            return ElementClass(torsion=True, order=order, semisimple=ss)
    return ElementClass(torsion=False, order=None, semisimple=ss)


def _divisors(n: int) -> List[int]:
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return out


# ---------------------------------------------------------------------------
# Exterior powers
# ---------------------------------------------------------------------------

def wedge_basis(d: int, i: int) -> List[Tuple[int, ...]]:
    """Index tuples of the wedge basis, in lexicographic order."""
    return list(combinations(range(d), i))


def wedge_power(m: Matrix, i: int) -> Matrix:
    """The induced matrix on the i-th exterior power.

    Entry (I, J) is the i x i minor of m with rows I and columns J, with the
    basis ordered lexicographically; functorial in m.
    """
    d = m.dim
    if not 1 <= i <= d:
        raise InputError(f"wedge index {i} out of range 1..{d}")
    basis = wedge_basis(d, i)
    out = []
    for rows_idx in basis:
        out_row = []
        for cols_idx in basis:
            sub = tuple(tuple(m.rows[r][c] for c in cols_idx) for r in rows_idx)
            out_row.append(_minor_det(sub))
        out.append(tuple(out_row))
    return Matrix(tuple(out))


def _minor_det(rows: Tuple[Tuple[Fraction, ...], ...]) -> Fraction:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    return _det(rows)


def products_of(mats: Iterable[Matrix]) -> Matrix:
    acc = None
    for m in mats:
        acc = m if acc is None else acc * m
    if acc is None:
        raise InputError("empty product")
    return acc
