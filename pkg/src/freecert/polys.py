"""Exact univariate polynomial arithmetic and Sturm-sequence root isolation.

Polynomials are lists of coefficients in *increasing* degree order
(``p[i]`` is the coefficient of ``x**i``), with ``Fraction`` or ``int``
entries and no trailing zeros after :func:`normalize`.

The Sturm machinery works on primitive integer polynomials internally so
that remainder sequences stay small; all returned data (counts, isolating
intervals) is exact.  Isolating interval endpoints are never roots.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple

from .errors import InputError, UndecidedError

Poly = List[Fraction]


def normalize(p: Sequence) -> Poly:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def degree(p: Sequence) -> int:
    """Degree of a normalized polynomial; -1 for the zero polynomial."""
    return len(p) - 1


def evaluate(p: Sequence, x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def add(p: Sequence, q: Sequence) -> Poly:
    n = max(len(p), len(q))
    return normalize([
        (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)
    ])


def sub(p: Sequence, q: Sequence) -> Poly:
    n = max(len(p), len(q))
    return normalize([
        (p[i] if i < len(p) else 0) - (q[i] if i < len(q) else 0) for i in range(n)
    ])


def mul(p: Sequence, q: Sequence) -> Poly:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return normalize(out)


def scale(p: Sequence, c) -> Poly:
    return normalize([Fraction(c) * a for a in p])


def derivative(p: Sequence) -> Poly:
    return normalize([i * p[i] for i in range(1, len(p))])


def divmod_poly(p: Sequence, q: Sequence) -> Tuple[Poly, Poly]:
    p, q = normalize(p), normalize(q)
    if not q:
        raise InputError("polynomial division by zero")
    quot = [Fraction(0)] * max(0, len(p) - len(q) + 1)
    rem = list(p)
    dq, lq = degree(q), q[-1]
    while degree(rem) >= dq and rem:
        k = degree(rem) - dq
        c = rem[-1] / lq
        quot[k] = c
        for i in range(len(q)):
            rem[i + k] -= c * q[i]
        rem = normalize(rem)
    return normalize(quot), rem


def gcd_poly(p: Sequence, q: Sequence) -> Poly:
    """Monic gcd over the rationals."""
    a, b = normalize(p), normalize(q)
    while b:
        a, b = b, divmod_poly(a, b)[1]
    if not a:
        return []
    return scale(a, 1 / a[-1])


def deflate_root(p: Sequence, r: Fraction) -> Tuple[Poly, int]:
    """Divide out the exact rational root r completely: returns (q, mult)
    with p = (x - r)**mult * q and q(r) != 0."""
    p = normalize(p)
    if evaluate(p, r) != 0:
        return list(p), 0
    mult = 0
    while evaluate(p, r) == 0 and degree(p) >= 1:
        # synthetic (Horner) division by (x - r); remainder is zero
        q = [Fraction(0)] * degree(p)
        q[-1] = p[-1]
        for i in range(degree(p) - 2, -1, -1):
            q[i] = p[i + 1] + q[i + 1] * r
        p = normalize(q)
        mult += 1
    return list(p), mult


def squarefree_part(p: Sequence) -> Poly:
    p = normalize(p)
    if degree(p) <= 0:
        return p
    return divmod_poly(p, gcd_poly(p, derivative(p)))[0]


def squarefree_decomposition(p: Sequence) -> List[Tuple[Poly, int]]:
    """Yun's algorithm: returns [(g_i, i)] with p = lc * prod g_i**i and the
    g_i squarefree, pairwise coprime, monic, non-constant."""
    p = normalize(p)
    if degree(p) < 1:
        return []
    p = scale(p, 1 / p[-1])
    dp = derivative(p)
    a = gcd_poly(p, dp)
    b = divmod_poly(p, a)[0]
    c = divmod_poly(dp, a)[0]
    d = sub(c, derivative(b))
    out: List[Tuple[Poly, int]] = []
    i = 1
    while degree(b) >= 1:
        g = gcd_poly(b, d)
        if degree(g) >= 1:
            out.append((g, i))
        b2 = divmod_poly(b, g)[0]
        c2 = divmod_poly(d, g)[0]
        b, c = b2, c2
        d = sub(c, derivative(b))
        i += 1
    return out


# ---------------------------------------------------------------------------
# Primitive integer form and Sturm sequences
# ---------------------------------------------------------------------------

def to_primitive_int(p: Sequence) -> List[int]:
    """Scale by a positive rational to primitive integer coefficients."""
    p = normalize(p)
    if not p:
        return []
    denom_lcm = 1
    for c in p:
        d = Fraction(c).denominator
        denom_lcm = denom_lcm * d // gcd(denom_lcm, d)
    ints = [int(Fraction(c) * denom_lcm) for c in p]
    content = 0
    for c in ints:
        content = gcd(content, abs(c))
    return [c // content for c in ints]


def _int_prem_neg(a: List[int], b: List[int]) -> List[int]:
    """Primitive part of the *negated* pseudo-remainder of a by b.

    Multiplying a by a positive power of b's (squared) leading coefficient
    keeps signs of evaluations, which is all Sturm chains need.
    """
    da, db = len(a) - 1, len(b) - 1
    lb = b[-1]
    r = list(a)
    for _ in range(da - db + 1):
        dr = len(r) - 1
        if dr < db:
            break
        # multiply by lb^2 (positive) then eliminate the top term
        r = [c * lb * lb for c in r]
        top = r[-1] // lb  # exact: r[-1] is divisible by lb after scaling
        k = dr - db
        for i in range(db + 1):
            r[i + k] -= top * b[i]
        while r and r[-1] == 0:
            r.pop()
    r = [-c for c in r]
    content = 0
    for c in r:
        content = gcd(content, abs(c))
    if content > 1:
        r = [c // content for c in r]
    return r


def sturm_chain(p: Sequence) -> List[List[int]]:
    """Sturm chain of the squarefree part of p, as primitive integer polys."""
    sf = squarefree_part(p)
    if degree(sf) < 1:
        return [to_primitive_int(sf)] if sf else []
    chain = [to_primitive_int(sf)]
    chain.append(to_primitive_int(derivative(sf)))
    while len(chain[-1]) > 1:
        chain.append(_int_prem_neg(chain[-2], chain[-1]))
    if not chain[-1]:
        chain.pop()
    return chain


def _eval_int(p: List[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sign_variations_at(chain: List[List[int]], x: Fraction) -> int:
    signs = []
    for q in chain:
        v = _eval_int(q, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sign_variations_at_inf(chain: List[List[int]], positive: bool) -> int:
    signs = []
    for q in chain:
        lead = q[-1]
        s = 1 if lead > 0 else -1
        if not positive and (len(q) - 1) % 2 == 1:
            s = -s
        signs.append(s)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


class SturmContext:
    """Cached Sturm chain for one polynomial, answering distinct-root counts."""

    def __init__(self, p: Sequence):
        self.poly = normalize(p)
        self.chain = sturm_chain(self.poly)

    def is_root(self, x: Fraction) -> bool:
        return evaluate(self.poly, x) == 0

    def count_roots(self, lo=None, hi=None) -> int:
        """Number of distinct real roots in (lo, hi); None means +-infinity.
        Finite endpoints must not be roots."""
        if not self.chain or len(self.chain[0]) <= 1:
            return 0
        if lo is not None and self.is_root(Fraction(lo)):
            raise InputError(f"Sturm endpoint {lo} is a root")
        if hi is not None and self.is_root(Fraction(hi)):
            raise InputError(f"Sturm endpoint {hi} is a root")
        va = (_sign_variations_at_inf(self.chain, False) if lo is None
              else _sign_variations_at(self.chain, Fraction(lo)))
        vb = (_sign_variations_at_inf(self.chain, True) if hi is None
              else _sign_variations_at(self.chain, Fraction(hi)))
        return va - vb


def root_bound(p: Sequence) -> Fraction:
    """Cauchy bound: all real roots lie in (-B, B)."""
    p = normalize(p)
    if degree(p) < 1:
        return Fraction(1)
    lead = abs(p[-1])
    return 1 + max(abs(c) for c in p[:-1]) / lead


def isolate_real_roots(p: Sequence) -> List[Tuple[Fraction, Fraction]]:
    """Disjoint open intervals, one per distinct real root, endpoints non-roots.

    An exact rational root may be returned as a degenerate pair (r, r).
    """
    ctx = SturmContext(p)
    if not ctx.chain or len(ctx.chain[0]) <= 1:
        return []
    total = ctx.count_roots()
    if total == 0:
        return []
    bound = root_bound(ctx.poly)
    out: List[Tuple[Fraction, Fraction]] = []

    def recurse(lo: Fraction, hi: Fraction, n: int):
        if n == 0:
            return
        if n == 1:
            out.append((lo, hi))
            return
        mid = (lo + hi) / 2
        if ctx.is_root(mid):
            out.append((mid, mid))
            # shave an interval around the exact root that contains no other root
            eps = (hi - lo) / 4
            while True:
                a, b = mid - eps, mid + eps
                if not ctx.is_root(a) and not ctx.is_root(b) and \
                        ctx.count_roots(a, b) == 1:
                    break
                eps /= 2
            recurse(lo, a, ctx.count_roots(lo, a))
            recurse(b, hi, ctx.count_roots(b, hi))
            return
        nl = ctx.count_roots(lo, mid)
        recurse(lo, mid, nl)
        recurse(mid, hi, n - nl)

    recurse(-bound, bound, total)
    out.sort(key=lambda ab: ab[0])
    return out


def simplest_between(x: Fraction, y: Fraction) -> Fraction:
    """The rational with smallest denominator strictly inside (x, y).

    Stern-Brocot descent; an exact rational root of a polynomial is found
    by applying this to any tight enough isolating interval around it.
    """
    if not x < y:
        raise InputError("simplest_between needs x < y")
    # produced as a continued fraction [a0; a1, a2, ...]
    terms: List[Fraction] = []
    lo, hi = Fraction(x), Fraction(y)
    while True:
        n = lo.numerator // lo.denominator + 1  # floor(lo) + 1
        if n < hi:
            terms.append(Fraction(n))
            break
        f = n - 1
        terms.append(Fraction(f))
        if lo == f:
            # lo is an integer: interval (f, hi) with hi <= f+1
            terms.append(Fraction((hi - f).denominator // (hi - f).numerator + 1))
            break
        lo, hi = 1 / (hi - f), 1 / (lo - f)
    val = terms[-1]
    for t in reversed(terms[:-1]):
        val = t + 1 / val
    return val


def refine_root(p: Sequence, lo: Fraction, hi: Fraction, tol: Fraction,
                max_steps: int = 100000) -> Tuple[Fraction, Fraction]:
    """Bisect an isolating interval until its width is <= tol.

    Exact rational roots are detected (simplest-rational probe) and returned
    as degenerate intervals, so rational spectra come out exact.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if lo == hi:
        return lo, hi
    ctx = SturmContext(p)
    if ctx.count_roots(lo, hi) != 1:
        raise InputError("refine_root needs an isolating interval")
    steps = 0
    while hi - lo > tol:
        steps += 1
        if steps > max_steps:
            raise UndecidedError(f"root refinement stalled on ({lo}, {hi})")
        probe = simplest_between(lo, hi)
        if ctx.is_root(probe):
            return probe, probe
        mid = (lo + hi) / 2
        if ctx.is_root(mid):
            return mid, mid
        if ctx.count_roots(lo, mid) == 1:
            hi = mid
        else:
            lo = mid
    return lo, hi


def real_roots_with_multiplicity(p: Sequence, tol: Fraction) -> List[Tuple[Fraction, Fraction, int]]:
    """All real roots of p as (lo, hi, multiplicity), widths <= tol, sorted."""
    out = []
    for factor, mult in squarefree_decomposition(p):
        for lo, hi in isolate_real_roots(factor):
            lo, hi = refine_root(factor, lo, hi, tol)
            out.append((lo, hi, mult))
    out.sort(key=lambda t: t[0])
    return out
