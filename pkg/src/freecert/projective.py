"""Projective space over the rationals with the chordal metric.

Points and hyperplanes are primitive integer vectors up to sign, normalized
so the first nonzero coordinate is positive; distances are exact rationals
because we work with squared chordal quantities throughout:

    d([x],[y])**2   = |x ^ y|**2 / (|x|**2 |y|**2)
                    = 1 - <x,y>**2 / (|x|**2 |y|**2)      (Lagrange)
    d([x], H)**2    = <x,n>**2 / (|x|**2 |n|**2)          (n = normal of H)

The frame finder (svd_frames) produces rational approximations of the top
singular directions together with a *certified* chordal error radius: an
exact residual bound of Davis-Kahan type,

    sin angle(u, top eigenvector of G) <= |G u - theta u| / (gap * |u|),

where the gap is validated by Sturm counts on the exact Gram characteristic
polynomial.  Certification predicates then charge explicit frame-error
margins so that every certified statement holds for the true (algebraic)
frames, not just the rational approximations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

from . import polys
from .errors import InputError, NotCertifiedError, UndecidedError
from .intervals import RationalInterval, sqrt_fraction, sqrt_interval
from .matrices import Matrix, char_poly
from .rootbounds import gram_eigen_intervals

Vec = Tuple[int, ...]


def _canonical_vec(coords: Sequence) -> Vec:
    fracs = [Fraction(c) for c in coords]
    if all(c == 0 for c in fracs):
        raise InputError("projective vector must be nonzero")
    denom = 1
    for c in fracs:
        denom = denom * c.denominator // gcd(denom, c.denominator)
    ints = [int(c * denom) for c in fracs]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    ints = [c // g for c in ints]
    first = next(c for c in ints if c != 0)
    if first < 0:
        ints = [-c for c in ints]
    return tuple(ints)


@dataclass(frozen=True)
class ProjPoint:
    coords: Vec

    def __post_init__(self):
        object.__setattr__(self, "coords", _canonical_vec(self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def norm_sq(self) -> Fraction:
        return Fraction(sum(c * c for c in self.coords))


@dataclass(frozen=True)
class ProjHyperplane:
    """A hyperplane stored by its normal covector, canonicalized like a point."""
    normal: Vec

    def __post_init__(self):
        object.__setattr__(self, "normal", _canonical_vec(self.normal))

    @property
    def dim(self) -> int:
        return len(self.normal)

    def norm_sq(self) -> Fraction:
        return Fraction(sum(c * c for c in self.normal))


def apply_matrix(m: Matrix, p: ProjPoint) -> ProjPoint:
    return ProjPoint(tuple(m.apply(p.coords)))


def proj_distance_sq(p: ProjPoint, q: ProjPoint) -> Fraction:
    if p.dim != q.dim:
        raise InputError("dimension mismatch")
    dot = sum(a * b for a, b in zip(p.coords, q.coords))
    return 1 - Fraction(dot * dot, sum(a * a for a in p.coords) * sum(b * b for b in q.coords))


def point_hyperplane_distance_sq(p: ProjPoint, h: ProjHyperplane) -> Fraction:
    if p.dim != h.dim:
        raise InputError("dimension mismatch")
    dot = sum(a * b for a, b in zip(p.coords, h.normal))
    return Fraction(dot * dot, sum(a * a for a in p.coords) * sum(b * b for b in h.normal))


# ---------------------------------------------------------------------------
# Certified singular frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameSide:
    """One approximate top eigenvector of a Gram matrix with its certificate.

    The stored facts alone let an independent checker re-derive the error
    radius: `gamma` must satisfy "exactly one distinct eigenvalue of the Gram
    matrix exceeds theta - gamma" (a Sturm count), and then
    |G u - theta u|**2 <= delta**2 * gamma**2 * |u|**2 certifies that the
    chordal distance from [u] to the true top eigendirection is at most delta.
    """
    vector: Vec
    theta: Fraction
    gamma: Fraction
    delta: Fraction  # certified chordal error radius (0 when exact)

    def residual_check(self, gram: Matrix) -> bool:
        u = list(self.vector)
        gu = gram.apply(u)
        res = [a - self.theta * b for a, b in zip(gu, u)]
        res_sq = sum(x * x for x in res)
        norm_sq = Fraction(sum(x * x for x in u))
        return res_sq <= self.delta ** 2 * self.gamma ** 2 * norm_sq

    def gap_check(self, gram: Matrix) -> bool:
        ctx = polys.SturmContext(char_poly(gram))
        cut = self.theta - self.gamma
        if ctx.is_root(cut):
            return False
        return ctx.count_roots(cut, None) == 1


@dataclass(frozen=True)
class RatioSplit:
    """Sturm-checkable certificate for an upper bound on (a_2/a_1)**2.

    Semantics: the Gram matrix m^T m has exactly one (simple) eigenvalue
    above s, and its top eigenvalue is at least l; hence mu_2 <= s,
    mu_1 >= l and (a_2/a_1)**2 = mu_2/mu_1 <= s/l.

    When ``top_exact`` the value l *is* the top eigenvalue (an exact
    rational root), which permits equality in downstream comparisons.
    """
    s: Fraction
    l: Fraction
    top_exact: bool

    @property
    def ratio_sq_hi(self) -> Fraction:
        return self.s / self.l

    def check(self, gram: Matrix) -> Optional[str]:
        p = char_poly(gram)
        if not 0 < self.s <= self.l:
            return "ratio split not ordered"
        if self.top_exact:
            if polys.evaluate(p, self.l) != 0:
                return "claimed exact top eigenvalue is not a root"
            q, mult = polys.deflate_root(p, self.l)
            if mult != 1:
                return "top eigenvalue not simple"
            if polys.evaluate(q, self.s) == 0:
                q, _ = polys.deflate_root(q, self.s)
            if polys.degree(q) >= 1 and \
                    polys.SturmContext(q).count_roots(self.s, None) != 0:
                return "an eigenvalue other than the top exceeds s"
            if self.s > self.l:
                return "ratio split not ordered"
            return None
        ctx = polys.SturmContext(p)
        if ctx.is_root(self.s) or ctx.is_root(self.l):
            return "ratio split endpoints hit eigenvalues"
        if ctx.count_roots(self.s, None) != 1:
            return "ratio split: not exactly one eigenvalue above s"
        if ctx.count_roots(self.l, None) < 1:
            return "ratio split: no eigenvalue above l"
        rep = polys.gcd_poly(p, polys.derivative(p))
        if polys.degree(rep) >= 1 and \
                polys.SturmContext(rep).count_roots(self.s, None) != 0:
            return "ratio split: top eigenvalue not simple"
        return None


@dataclass(frozen=True)
class ContractionWitness:
    epsilon: Fraction
    r: Fraction  # 0 when only contraction (no separation claim)
    v: ProjPoint
    h: ProjHyperplane
    frame_error: Fraction
    sv_ratio: RationalInterval
    left: FrameSide   # certifies v (top eigenvector of m m^T)
    right: FrameSide  # certifies the normal of h (top eigenvector of m^T m)
    ratio_split: RatioSplit

    @property
    def ratio_sq_hi(self) -> Fraction:
        return self.ratio_split.ratio_sq_hi

    def validate_against(self, m: Matrix) -> Optional[str]:
        """Re-check every stored inequality; returns the failed clause or None.

        Uses only rational arithmetic and Sturm counts -- no isolation or
        iteration is re-run, which is what makes this the trusted path.
        All threshold comparisons happen on squared (rational) quantities.
        """
        gram_right = m.gram()
        gram_left = m.transpose().gram()  # (m^T)^T m^T = m m^T
        if tuple(self.left.vector) != self.v.coords:
            return "witness left vector mismatch"
        if tuple(self.right.vector) != self.h.normal:
            return "witness right vector mismatch"
        if not (self.left.delta <= self.frame_error
                and self.right.delta <= self.frame_error):
            return "frame_error smaller than side errors"
        for side, gram, tag in ((self.left, gram_left, "left"),
                                (self.right, gram_right, "right")):
            if side.delta == 0:
                ev = gram.apply(list(side.vector))
                if any(a != side.theta * b for a, b in zip(ev, side.vector)):
                    return f"{tag} frame claimed exact but is not an eigenvector"
            else:
                if side.gamma <= 0:
                    return f"{tag} frame gap not positive"
                if not side.gap_check(gram):
                    return f"{tag} frame gap count failed"
                if not side.residual_check(gram):
                    return f"{tag} frame residual bound failed"
        err = self.ratio_split.check(gram_right)
        if err:
            return err
        if self.sv_ratio.hi ** 2 * self.ratio_split.l < self.ratio_split.s:
            return "sv_ratio.hi underreports the certified ratio bound"
        margin = self.epsilon - 2 * self.frame_error
        if margin <= 0:
            return "frame error swallows epsilon margin"
        if self.ratio_sq_hi > margin ** 4:
            return "contraction criterion (a2/a1)^2 <= (eps - 2 delta)^4 failed"
        if self.r > 0:
            sep = point_hyperplane_distance_sq(self.v, self.h)
            need = (self.r + 2 * self.frame_error) ** 2
            if sep < need:
                return "proximality separation d(v,H) >= r + 2 delta failed"
        return None


def _solve_linear(a: List[List[Fraction]], b: List[Fraction]) -> Optional[List[Fraction]]:
    """Exact Gaussian solve; None when the matrix is singular."""
    d = len(a)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(d):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][d] for i in range(d)]


def _kernel_vector(a: List[List[Fraction]]) -> Optional[List[Fraction]]:
    """A nonzero kernel vector of a (exact), or None if a is invertible."""
    d = len(a)
    m = [row[:] for row in a]
    pivots = []
    row = 0
    for col in range(d):
        piv = next((r for r in range(row, d) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        pv = m[row][col]
        m[row] = [x / pv for x in m[row]]
        for r in range(d):
            if r != row and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
        if row == d:
            return None
    free = next(c for c in range(d) if c not in pivots)
    vec = [Fraction(0)] * d
    vec[free] = Fraction(1)
    for rr, col in enumerate(pivots):
        vec[col] = -m[rr][free]
    return vec


def _top_eigen_side(gram: Matrix, intervals, delta_target: Fraction) -> FrameSide:
    """Approximate top eigenvector of a symmetric PSD matrix with certificate.

    `intervals` are refined eigenvalue intervals (lo, hi, mult) sorted
    increasing, with the top eigenvalue separated from the rest.
    """
    d = gram.dim
    lo1, hi1, _ = intervals[-1]
    below = intervals[:-1]
    if lo1 == hi1:
        # exact rational top eigenvalue: exact kernel of gram - mu I
        mu = lo1
        shifted = [[gram.rows[i][j] - (mu if i == j else 0) for j in range(d)]
                   for i in range(d)]
        vec = _kernel_vector(shifted)
        if vec is None:
            raise UndecidedError("claimed eigenvalue is not an eigenvalue")
        return FrameSide(vector=_canonical_vec(vec), theta=mu,
                         gamma=Fraction(0), delta=Fraction(0))

    theta0 = (lo1 + hi1) / 2
    ctx = polys.SturmContext(char_poly(gram))
    if ctx.is_root(theta0):
        theta0 = lo1  # isolating endpoints are never roots
    shifted = [[gram.rows[i][j] - (theta0 if i == j else 0) for j in range(d)]
               for i in range(d)]
    hi_below = max(hi for _, hi, _ in below) if below else Fraction(0)

    def certify(vec) -> Optional[FrameSide]:
        try:
            u = _canonical_vec(vec)
        except InputError:
            return None
        uu = [Fraction(c) for c in u]
        gu = gram.apply(uu)
        norm_sq = Fraction(sum(c * c for c in u))
        theta = sum(a * b for a, b in zip(gu, uu)) / norm_sq  # Rayleigh
        res = [a - theta * b for a, b in zip(gu, uu)]
        res_sq = sum(c * c for c in res)
        gamma = theta - hi_below
        if gamma <= 0 or ctx.is_root(theta - gamma) or \
                ctx.count_roots(theta - gamma, None) != 1:
            return None
        delta = sqrt_fraction(res_sq / (gamma * gamma * norm_sq), 96).hi
        return FrameSide(vector=u, theta=theta, gamma=gamma, delta=delta)

    starts = [[Fraction(1)] * d] + [
        [Fraction(1 if i == k else 0) for i in range(d)] for k in range(d)
    ]
    den_cap = int(16 / delta_target) + 2
    best: Optional[FrameSide] = None
    for start in starts:
        x = start
        for _ in range(3):
            y = _solve_linear(shifted, x)
            if y is None:
                raise UndecidedError("shift hit an exact eigenvalue")
            mx = max(abs(c) for c in y)
            x = [c / mx for c in y]
            # compact representative: keeps certificates small without
            # touching soundness (the residual certificate is re-derived)
            compact = certify([c.limit_denominator(den_cap) for c in x])
            if compact is not None and compact.delta <= delta_target:
                return compact
        cand = certify(x)
        if cand is not None and (best is None or cand.delta < best.delta):
            best = cand
        if best is not None and best.delta <= delta_target:
            return best
    if best is None:
        raise UndecidedError("no usable frame candidate; top eigenvalue cluster")
    return best


def svd_frames(m: Matrix, precision: Fraction) -> Tuple[ProjPoint, ProjHyperplane, Fraction]:
    """Attracting point, repelling hyperplane and a certified chordal error.

    The attracting point approximates the top left-singular direction of m;
    the hyperplane is the span of the non-top right-singular directions
    (stored by its normal, the top right-singular direction).  The returned
    frame_error bounds the chordal distance from each returned object to its
    true algebraic counterpart.
    """
    v_side, h_side, err = _svd_frame_sides(m, precision)
    return (ProjPoint(v_side.vector), ProjHyperplane(h_side.vector), err)


def _svd_frame_sides(m: Matrix, precision: Fraction) -> Tuple[FrameSide, FrameSide, Fraction]:
    if m.dim < 2:
        raise InputError("frames need dimension >= 2")
    if precision <= 0:
        raise InputError("precision must be positive")
    gram_right = m.gram()
    gram_left = m.transpose().gram()
    eps = precision * precision / 16
    for _ in range(60):
        intervals = polys.real_roots_with_multiplicity(char_poly(gram_right), eps)
        if intervals[-1][2] > 1:
            raise UndecidedError("no singular gap: top Gram eigenvalue is multiple")
        lo1 = intervals[-1][0]
        hi2 = intervals[-2][1] if len(intervals) >= 2 else None
        if hi2 is not None and hi2 >= lo1:
            eps /= 16
            continue
        try:
            right = _top_eigen_side(gram_right, intervals, precision)
            left = _top_eigen_side(gram_left, intervals, precision)
        except UndecidedError:
            eps /= 16
            continue
        err = max(left.delta, right.delta)
        if err <= precision:
            return left, right, err
        eps /= 16
    raise UndecidedError(
        f"singular frames did not reach precision {precision}")


# ---------------------------------------------------------------------------
# Contraction / proximality certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VeryProximalWitness:
    forward: ContractionWitness
    backward: ContractionWitness


DEFAULT_SV_TOL = Fraction(1, 1 << 24)


def contraction_certify(m: Matrix, epsilon: Fraction, r: Fraction, mode: str,
                        sv_tol: Fraction = DEFAULT_SV_TOL):
    """Certify that m is epsilon-contracting / (r, epsilon)-proximal /
    (r, epsilon)-very proximal, with explicit frame-error margins.

    Returns a ContractionWitness (or a VeryProximalWitness for mode
    "very_proximal").  Raises NotCertifiedError when the sufficient
    criterion fails -- which is *not* a proof of non-contraction -- and
    UndecidedError when precision runs out.
    """
    epsilon, r = Fraction(epsilon), Fraction(r)
    if mode not in ("contracting", "proximal", "very_proximal"):
        raise InputError(f"unknown mode {mode!r}")
    if epsilon <= 0:
        raise NotCertifiedError("epsilon must be positive")
    if mode in ("proximal", "very_proximal") and r <= 2 * epsilon:
        raise NotCertifiedError("proximality requires r > 2*epsilon",
                                f"r={r}, epsilon={epsilon}")
    if mode == "very_proximal":
        fwd = contraction_certify(m, epsilon, r, "proximal", sv_tol)
        bwd = contraction_certify(m.inverse(), epsilon, r, "proximal", sv_tol)
        return VeryProximalWitness(forward=fwd, backward=bwd)

    ratio, split = _ratio_with_split(m, sv_tol)
    if ratio.lo >= 1:
        raise NotCertifiedError("no singular gap", "a2/a1 = 1")
    # frame precision: small against epsilon so margins do not swallow it
    delta_target = min(epsilon / 16, Fraction(1, 1 << 24))
    left, right, err = _svd_frame_sides(m, delta_target)
    margin = epsilon - 2 * err
    if margin <= 0:
        raise UndecidedError("frame error exceeds epsilon margin")
    if split.ratio_sq_hi > margin ** 4:
        raise NotCertifiedError(
            "contraction criterion failed",
            f"(a2/a1)^2 <= {split.ratio_sq_hi} not <= "
            f"(epsilon - 2*frame_error)^4 = {margin ** 4}")
    v = ProjPoint(left.vector)
    h = ProjHyperplane(right.vector)
    r_stored = Fraction(0)
    if mode == "proximal":
        sep = point_hyperplane_distance_sq(v, h)
        if sep < (r + 2 * err) ** 2:
            raise NotCertifiedError(
                "proximality separation failed",
                f"d(v,H)^2 = {sep} not >= (r + 2*frame_error)^2")
        r_stored = r
    return ContractionWitness(
        epsilon=epsilon, r=r_stored, v=v, h=h, frame_error=err,
        sv_ratio=ratio, left=left, right=right, ratio_split=split,
    )


def _ratio_with_split(m: Matrix, tol: Fraction) -> Tuple[RationalInterval, RatioSplit]:
    """Enclosure of a_2/a_1 plus its Sturm-checkable RatioSplit."""
    if m.dim < 2:
        raise InputError("sv ratio needs dimension >= 2")
    eps = tol * tol / 16
    for _ in range(60):
        mus = gram_eigen_intervals(m, eps)
        lo1, hi1, mult1 = mus[-1]
        if mult1 > 1:
            raise NotCertifiedError("no singular gap", "top Gram eigenvalue multiple")
        lo2, hi2, _ = mus[-2]
        if hi2 >= lo1:
            eps /= 16
            continue
        if lo1 == hi1:
            # exact rational top eigenvalue: equality-tight facts
            split = RatioSplit(s=hi2, l=lo1, top_exact=True)
        else:
            slack = min((lo1 - hi2) / 2, eps)  # stays inside the root-free gap
            split = RatioSplit(s=hi2 + slack, l=lo1, top_exact=False)
        rs = split.ratio_sq_hi
        exact = _exact_sqrt(rs)
        ratio_hi = exact if exact is not None else min(sqrt_fraction(rs, 96).hi,
                                                       Fraction(1))
        ratio_lo = sqrt_fraction(max(lo2, Fraction(0)) / hi1, 96).lo
        ratio = RationalInterval(min(ratio_lo, ratio_hi), ratio_hi)
        if ratio.width() <= tol:
            return ratio, split
        eps /= 16
    raise UndecidedError(f"singular ratio did not reach width {tol}")


def _exact_sqrt(x: Fraction) -> Optional[Fraction]:
    from math import isqrt
    p, q = x.numerator, x.denominator
    sp, sq = isqrt(p), isqrt(q)
    if sp * sp == p and sq * sq == q:
        return Fraction(sp, sq)
    return None


def lipschitz_bounds(m: Matrix, r: Optional[Fraction] = None,
                     tol: Fraction = Fraction(1, 1 << 40)) -> RationalInterval:
    """Enclosure of a Lipschitz bound for the projective action of m.

    Global: a1*a2/a_d**2, from |gx ^ gy| <= a1 a2 |x ^ y| and |gx| >= a_d |x|.
    With r in (0,1]: (a2/a1)/r**2, valid outside the r-neighborhood of the
    repelling hyperplane.
    """
    mus = gram_eigen_intervals(m, tol * tol / 16)
    entries = [RationalInterval(max(lo, Fraction(0)), hi) for lo, hi, mult in mus
               for _ in range(mult)]
    entries.sort(key=lambda iv: iv.lo)
    mu_min, mu_top = entries[0], entries[-1]
    mu_second = entries[-2] if len(entries) >= 2 else entries[-1]
    if r is not None:
        r = Fraction(r)
        if not 0 < r <= 1:
            raise InputError("r must lie in (0, 1]")
        ratio_sq = mu_second / mu_top
        return sqrt_interval(
            RationalInterval(max(ratio_sq.lo, Fraction(0)), ratio_sq.hi), 96
        ) / (r * r)
    if mu_min.lo <= 0:
        raise UndecidedError("smallest singular value not separated from zero")
    prod = mu_top * mu_second
    return sqrt_interval(prod, 96) / mu_min
