"""Validated enclosures for eigenvalue moduli and singular values.

The trusted path is exact throughout: characteristic polynomials are exact
rationals, real roots are isolated by Sturm sequences, and complex roots by
exact rational rectangle subdivision (sympy's Collins-Krandick isolator).
No floating point enters any returned bound.

Two independent routes pin the top eigenvalue modulus Lambda:

* the multiset route (isolate every root, take enclosures of |root|**2), and
* the resultant route: the largest real root of
  R(z) = Res_x(p(x), x**d * p(z/x)) is exactly Lambda**2, because every
  real root of R is a product of two eigenvalues (hence has absolute value
  at most Lambda**2) while Lambda**2 itself always occurs.

The returned Lambda interval is the intersection of both enclosures.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

import sympy
from sympy import QQ as _QQ
from sympy.polys.rootisolation import dup_isolate_complex_roots_sqf

from . import polys
from .errors import UndecidedError
from .intervals import RationalInterval, sqrt_fraction, sqrt_interval
from .matrices import Matrix, char_poly


@dataclass(frozen=True)
class SpectralData:
    """Joint spectral facts for one matrix at one tolerance."""
    char_poly: Tuple[Fraction, ...]
    lambda_max: RationalInterval       # top eigenvalue modulus
    lambda_second: RationalInterval    # second-highest eigenvalue modulus
    op_norm: RationalInterval          # largest singular value a_1
    sv_ratio: RationalInterval         # a_2 / a_1, in [0, 1]

    def __post_init__(self):
        if self.lambda_max.lo < 0:
            raise UndecidedError("negative lambda_max enclosure")
        if self.lambda_max.lo > self.op_norm.hi:
            raise UndecidedError("spectral radius exceeded operator norm")


# ---------------------------------------------------------------------------
# Squared-modulus enclosures for all roots of a rational polynomial
# ---------------------------------------------------------------------------

def _to_dup(p: List[Fraction]):
    """Increasing-degree Fraction list -> sympy dup (decreasing, QQ)."""
    return [_QQ(c.numerator, c.denominator) for c in reversed(p)]


def _from_qq(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def modulus_sq_intervals(p: List[Fraction], eps: Fraction) -> List[Tuple[RationalInterval, int]]:
    """Enclosures of |root|**2 for every root of p, with multiplicities.

    Real roots go through the Sturm isolator, complex pairs through exact
    rectangle isolation applied to each squarefree factor (roots of distinct
    factors of the squarefree decomposition are automatically distinct).
    """
    out: List[Tuple[RationalInterval, int]] = []
    for factor, mult in polys.squarefree_decomposition(p):
        for lo, hi in polys.isolate_real_roots(factor):
            lo, hi = polys.refine_root(factor, lo, hi, eps)
            sq = _square_of_interval(lo, hi)
            out.append((sq, mult))
        deg_real = len(polys.isolate_real_roots(factor))
        if polys.degree(factor) > deg_real:
            for (u1, v1), (u2, v2) in dup_isolate_complex_roots_sqf(
                    _to_dup(factor), _QQ, eps=_QQ(eps.numerator, eps.denominator)):
                sq = _square_of_rect(_from_qq(u1), _from_qq(v1),
                                     _from_qq(u2), _from_qq(v2))
                out.append((sq, mult))
    return out


def _square_of_interval(lo: Fraction, hi: Fraction) -> RationalInterval:
    if lo >= 0:
        return RationalInterval(lo * lo, hi * hi)
    if hi <= 0:
        return RationalInterval(hi * hi, lo * lo)
    return RationalInterval(Fraction(0), max(lo * lo, hi * hi))


def _square_of_rect(u1, v1, u2, v2) -> RationalInterval:
    """Range of x**2 + y**2 over the rectangle [u1,u2] x [v1,v2]."""
    usq = _square_of_interval(u1, u2)
    vsq = _square_of_interval(v1, v2)
    return RationalInterval(usq.lo + vsq.lo, usq.hi + vsq.hi)


def _kth_largest(entries: List[Tuple[RationalInterval, int]], k: int) -> RationalInterval:
    """Sound enclosure of the k-th largest value of a multiset of reals, each
    known only through an interval (order statistics are monotone in every
    coordinate, so sorting the los and his separately is valid)."""
    los: List[Fraction] = []
    his: List[Fraction] = []
    for iv, mult in entries:
        los.extend([iv.lo] * mult)
        his.extend([iv.hi] * mult)
    los.sort(reverse=True)
    his.sort(reverse=True)
    if k > len(los):
        raise UndecidedError(f"order statistic {k} of {len(los)} values")
    return RationalInterval(los[k - 1], his[k - 1])


# ---------------------------------------------------------------------------
# The squared-modulus resultant (independent route to Lambda)
# ---------------------------------------------------------------------------

def squared_modulus_resultant(p: List[Fraction]) -> List[Fraction]:
    """R(z) = Res_x(p(x), x**d * p(z/x)); its largest real root is Lambda**2."""
    x, z = sympy.symbols("x z")
    d = polys.degree(p)
    px = sum(sympy.Rational(c.numerator, c.denominator) * x ** i
             for i, c in enumerate(p))
    qx = sympy.expand(x ** d * px.subs(x, z / x))
    res = sympy.resultant(sympy.Poly(px, x), sympy.Poly(qx, x), x)
    rp = sympy.Poly(res, z)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(rp.all_coeffs())]
    return polys.normalize(coeffs)


def lambda_sq_from_resultant(p: List[Fraction], eps: Fraction) -> RationalInterval:
    r = squared_modulus_resultant(p)
    sf = polys.squarefree_part(r)
    roots = polys.isolate_real_roots(sf)
    if not roots:
        raise UndecidedError("squared-modulus resultant has no real roots")
    lo, hi = roots[-1]
    lo, hi = polys.refine_root(sf, lo, hi, eps)
    return RationalInterval(max(lo, Fraction(0)), hi)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

_SQRT_BITS = 128


def eigen_modulus_bounds(m: Matrix, tol: Fraction) -> Tuple[RationalInterval, RationalInterval]:
    """Enclosures of the top and second-highest eigenvalue moduli of m,
    each of width <= tol."""
    if tol <= 0:
        raise UndecidedError("tolerance must be positive")
    p = char_poly(m)
    eps = _working_eps(tol)
    for _ in range(40):
        entries = modulus_sq_intervals(p, eps)
        lam_sq = _kth_largest(entries, 1)
        lam_sq = lam_sq.intersect(lambda_sq_from_resultant(p, eps))
        lam = sqrt_interval(lam_sq, _SQRT_BITS)
        second = sqrt_interval(_kth_largest(entries, 2), _SQRT_BITS) \
            if m.dim >= 2 else lam
        if lam.width() <= tol and second.width() <= tol:
            return lam, second
        eps /= 16
    raise UndecidedError(
        f"eigenvalue modulus enclosures did not reach width {tol}")


def gram_eigen_intervals(m: Matrix, eps: Fraction) -> List[Tuple[Fraction, Fraction, int]]:
    """Eigenvalues of m^T m (all real > 0) as refined intervals with
    multiplicity, sorted increasing."""
    return polys.real_roots_with_multiplicity(char_poly(m.gram()), eps)


def operator_norm_bounds(m: Matrix, tol: Fraction) -> Tuple[RationalInterval, RationalInterval]:
    """Enclosures of the largest singular value a_1 and of a_2/a_1."""
    if tol <= 0:
        raise UndecidedError("tolerance must be positive")
    eps = _working_eps(tol)
    for _ in range(40):
        mus = gram_eigen_intervals(m, eps)
        entries = [(RationalInterval(max(lo, Fraction(0)), hi), mult)
                   for lo, hi, mult in mus]
        mu1 = _kth_largest(entries, 1)
        a1 = sqrt_interval(mu1, _SQRT_BITS)
        if m.dim == 1:
            return a1, RationalInterval.point(1)
        mu2 = _kth_largest(entries, 2)
        if mu1.lo <= 0:
            eps /= 16
            continue
        ratio_sq = RationalInterval(
            min(mu2.lo / mu1.hi, Fraction(1)) if mu1.hi > 0 else Fraction(0),
            min(mu2.hi / mu1.lo, Fraction(1)),
        )
        ratio = sqrt_interval(ratio_sq, _SQRT_BITS)
        if a1.width() <= tol and ratio.width() <= tol:
            return a1, ratio
        eps /= 16
    raise UndecidedError(f"singular value enclosures did not reach width {tol}")


def singular_value_intervals(m: Matrix, tol: Fraction) -> List[RationalInterval]:
    """All singular values a_1 >= ... >= a_d as enclosures of width <= tol."""
    eps = _working_eps(tol)
    d = m.dim
    for _ in range(40):
        entries = [(RationalInterval(max(lo, Fraction(0)), hi), mult)
                   for lo, hi, mult in gram_eigen_intervals(m, eps)]
        svs = [sqrt_interval(_kth_largest(entries, k), _SQRT_BITS)
               for k in range(1, d + 1)]
        if all(s.width() <= tol for s in svs):
            return svs
        eps /= 16
    raise UndecidedError(f"singular value list did not reach width {tol}")


def spectral_data(m: Matrix, tol: Fraction) -> SpectralData:
    lam, second = eigen_modulus_bounds(m, tol)
    a1, ratio = operator_norm_bounds(m, tol)
    return SpectralData(
        char_poly=tuple(char_poly(m)),
        lambda_max=lam,
        lambda_second=second,
        op_norm=a1,
        sv_ratio=ratio,
    )


def _working_eps(tol: Fraction) -> Fraction:
    # squared quantities need roughly double precision before the sqrt
    return tol * tol / 16 if tol < 1 else tol / 16


class SpectralCache:
    """Memo for spectral data, keyed by (matrix, tolerance)."""

    def __init__(self):
        self._data: Dict[Tuple[Matrix, Fraction], SpectralData] = {}

    def get(self, m: Matrix, tol: Fraction) -> SpectralData:
        key = (m, tol)
        sd = self._data.get(key)
        if sd is None:
            sd = spectral_data(m, tol)
            self._data[key] = sd
        return sd
