"""Constructive search for ping players inside bounded powers of a
generating set: escape searches, conjugation reduction, quasi-
diagonalization, wedge-power selection, separation bounds, and the two
drivers producing semigroup / free-group certificates with empirical
independence diameters.

Everything the search *decides* is re-verified by the certificate
machinery; the heuristics here (floating-point descent, rounding, scan
orders) are untrusted and only influence which candidate gets certified
first.  Scans are deterministic: candidates are tried in documented order
and the first certified one wins, so identical inputs and budgets yield
identical traces and certificates.

Trace format (stable; one line per pipeline step):

    step=<name> key=value key=value ...

where words are dot-joined signed generator indices ("+1.+3.-2", "e" for
the empty word), rationals are "p/q", and intervals are "[p/q,p/q]".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from . import polys
from .errors import (BudgetExceededError, InputError, NotCertifiedError,
                     SearchNotFoundError, UndecidedError)
from .gens import GeneratorSet, Transform, Word
from .growth import BallData, ball_enumerate
from .intervals import RationalInterval, nth_root_fraction, sqrt_fraction
from .matrices import Matrix, char_poly, classify_element, wedge_power
from .pingpong import (FreeGroupCertificate, SemigroupCertificate,
                       lipschitz_with_facts, verify_ping, verify_pingpong)
from .projective import (ContractionWitness, ProjHyperplane, ProjPoint,
                         apply_matrix, contraction_certify,
                         point_hyperplane_distance_sq, proj_distance_sq,
                         svd_frames)
from .rootbounds import SpectralCache, eigen_modulus_bounds, operator_norm_bounds


# ---------------------------------------------------------------------------
# Budgets, outcomes, trace helpers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchBudget:
    max_power: int = 6          # ball radius cap for escape / candidate scans
    max_exponent: int = 14      # cap for powers A^n and conjugation depth m0
    node_cap: int = 200_000     # ball enumeration node cap
    precision_bits: int = 40    # working tolerance = 2**-precision_bits
    epsilon_denominator_cap: int = 96  # epsilon grid 1/3 .. 1/cap

    def __post_init__(self):
        if min(self.max_power, self.max_exponent, self.node_cap,
               self.precision_bits, self.epsilon_denominator_cap) <= 0:
            raise InputError("budget parameters must be positive")

    @property
    def tol(self) -> Fraction:
        return Fraction(1, 1 << self.precision_bits)


Certificate = Union[SemigroupCertificate, FreeGroupCertificate]


@dataclass(frozen=True)
class SearchOutcome:
    certificate: Certificate
    found_in_power: int
    trace: Tuple[str, ...]


def _fmt_word(letters: Sequence[int]) -> str:
    if not letters:
        return "e"
    return ".".join(f"{k:+d}" for k in letters)


def _fmt_frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _fmt_iv(iv: RationalInterval) -> str:
    return f"[{_fmt_frac(iv.lo)},{_fmt_frac(iv.hi)}]"


# ---------------------------------------------------------------------------
# Escape searches (Zariski-escape style predicates on growing balls)
# ---------------------------------------------------------------------------

class Predicate:
    """Named predicate over ball elements; test() returns None on failure or
    a dict of extra data on success (kept in the trace)."""

    name = "abstract"

    def test(self, word: Word) -> Optional[dict]:  # pragma: no cover
        raise NotImplementedError


class NonIdentity(Predicate):
    name = "nonidentity"

    def test(self, word: Word):
        return {} if not word.matrix.is_identity() else None


class SemisimpleInfiniteOrder(Predicate):
    name = "semisimple_infinite_order"

    def test(self, word: Word):
        cls = classify_element(word.matrix)
        if cls.semisimple and cls.infinite_order:
            return {"trace": sum(word.matrix.rows[i][i]
                                 for i in range(word.matrix.dim))}
        return None


class MovesPoint(Predicate):
    name = "moves_point"

    def __init__(self, v: ProjPoint):
        self.v = v

    def test(self, word: Word):
        image = apply_matrix(word.matrix, self.v)
        if image != self.v:
            return {"moved_sq": proj_distance_sq(image, self.v)}
        return None


class MovesPointOffHyperplane(Predicate):
    """Some power B^j (j <= j_max) sends v further than sqrt(threshold_sq)
    from H -- the Cayley-Hamilton escape step: if B has distinct action on
    v at all, one of its first dim-many powers must move v off H."""

    name = "moves_point_off_hyperplane"

    def __init__(self, v: ProjPoint, h: ProjHyperplane, j_max: int,
                 threshold_sq: Fraction = Fraction(0)):
        self.v = v
        self.h = h
        self.j_max = j_max
        self.threshold_sq = Fraction(threshold_sq)

    def test(self, word: Word):
        best = None
        acc = Matrix.identity(word.matrix.dim)
        for j in range(1, self.j_max + 1):
            acc = acc * word.matrix
            image = apply_matrix(acc, self.v)
            if image == self.v:
                continue
            d_sq = point_hyperplane_distance_sq(image, self.h)
            if best is None or d_sq > best[1]:
                best = (j, d_sq)
        if best is not None and best[1] > self.threshold_sq:
            return {"j": best[0], "dist_sq": best[1]}
        return None


def escape_search(gens: GeneratorSet, predicate: Predicate, k_max: int,
                  node_cap: Optional[int] = None,
                  ball: Optional[BallData] = None
                  ) -> Tuple[Word, int, dict]:
    """Shortest word (ties: lexicographically least) in a ball of radius
    k_max satisfying the predicate; raises SearchNotFoundError when the
    ball is exhausted."""
    if k_max < 1:
        raise InputError("k_max must be >= 1")
    if ball is None:
        ball = ball_enumerate(gens, k_max, node_cap)
    for k in range(min(k_max, len(ball.spheres) - 1) + 1):
        for mat in ball.spheres[k]:
            word = Word(gens, ball.first_word[mat], mat)
            data = predicate.test(word)
            if data is not None:
                return word, k, data
    raise SearchNotFoundError(
        f"no element satisfying {predicate.name} in the radius-{k_max} ball "
        f"(honest budget-bounded answer, not a nonexistence proof)")


# ---------------------------------------------------------------------------
# Conjugation reduction (heuristic descent, exact acceptance)
# ---------------------------------------------------------------------------

def _set_norm_interval(mats: Sequence[Matrix], tol: Fraction) -> RationalInterval:
    """Enclosure of max operator norm over the set."""
    lo = Fraction(0)
    hi = Fraction(0)
    for m in mats:
        a1, _ = operator_norm_bounds(m, tol)
        lo = max(lo, a1.lo)
        hi = max(hi, a1.hi)
    return RationalInterval(lo, hi)


def _descent_candidates(mats: Sequence[Matrix]) -> List[Matrix]:
    """Float Nelder-Mead over triangular conjugators plus an eigenbasis
    guess; returns rationalized candidate conjugators (untrusted)."""
    import numpy as np

    d = mats[0].dim
    arrays = []
    for m in mats:
        a = np.array([[float(x) for x in row] for row in m.rows])
        scale = max(abs(a).max(), 1.0)
        arrays.append(a / scale)

    n_diag = d
    n_low = d * (d - 1) // 2

    def build(params):
        L = np.zeros((d, d))
        for i in range(d):
            L[i, i] = np.exp(min(max(params[i], -30.0), 30.0))
        k = n_diag
        for i in range(1, d):
            for j in range(i):
                L[i, j] = params[k]
                k += 1
        return L

    def objective(params):
        L = build(params)
        try:
            Linv = np.linalg.inv(L)
        except np.linalg.LinAlgError:
            return 1e100
        worst = 0.0
        for a in arrays:
            worst = max(worst, np.linalg.norm(L @ a @ Linv, 2))
        return worst

    from scipy.optimize import minimize
    x0 = np.zeros(n_diag + n_low)
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxiter": 400 * (n_diag + n_low),
                            "xatol": 1e-12, "fatol": 1e-14})
    L = build(res.x)

    candidates: List[Matrix] = []

    def rationalize(arr, cap) -> Optional[Matrix]:
        rows = tuple(
            tuple(Fraction(float(x)).limit_denominator(cap) for x in row)
            for row in arr
        )
        try:
            return Matrix(rows)
        except InputError:
            return None

    for cap in (8, 64, 512, 4096, 1 << 20):
        cand = rationalize(L, cap)
        if cand is not None:
            candidates.append(cand)

    # eigenbasis of the largest-norm element, when real-diagonalizable
    idx = max(range(len(arrays)),
              key=lambda i: (np.linalg.norm(arrays[i], 2), -i))
    vals, vecs = np.linalg.eig(arrays[idx])
    if np.allclose(vals.imag, 0.0, atol=1e-12):
        order = np.argsort(-np.abs(vals.real), kind="stable")
        basis = vecs.real[:, order]
        for col in range(d):
            c = basis[:, col]
            pivot = c[np.argmax(np.abs(c))]
            if pivot != 0:
                basis[:, col] = c / pivot
        try:
            inv = np.linalg.inv(basis)
            for cap in (512, 1 << 16):
                cand = rationalize(inv, cap)
                if cand is not None:
                    candidates.append(cand)
        except np.linalg.LinAlgError:
            pass
    return candidates


def conjugation_reduce(gens: GeneratorSet,
                       tol: Fraction = Fraction(1, 1 << 30)
                       ) -> Tuple[Matrix, GeneratorSet, RationalInterval]:
    """Heuristically minimize the max operator norm over conjugates of the
    set; the conjugator is found by floating-point descent but accepted by
    exact interval comparison, so the reduced set is never worse than the
    input (identity conjugator fallback).  Characteristic polynomials are
    preserved exactly by construction."""
    base = _set_norm_interval(gens.matrices, tol)
    best_h = Matrix.identity(gens.dim)
    best = base
    for cand in _descent_candidates(gens.matrices):
        cand_inv = cand.inverse()
        mats = [cand * m * cand_inv for m in gens.matrices]
        norm = _set_norm_interval(mats, tol)
        if norm.hi < best.hi:
            best, best_h = norm, cand
    reduced = GeneratorSet(
        matrices=tuple(best_h * m * best_h.inverse() for m in gens.matrices),
        symmetric=gens.symmetric,
        contains_identity=gens.contains_identity,
    )
    return best_h, reduced, best


# ---------------------------------------------------------------------------
# Integral conjugation reduction (LLL rounding)
# ---------------------------------------------------------------------------

def _lll_columns(gram: Matrix, delta: Fraction = Fraction(3, 4)) -> List[List[int]]:
    """LLL-reduced basis of Z^d under the inner product <x,y> = x^T G y,
    returned as integer column vectors (a unimodular transform of I)."""
    d = gram.dim

    def inner(x, y) -> Fraction:
        gy = gram.apply([Fraction(c) for c in y])
        return sum(Fraction(a) * b for a, b in zip(x, gy))

    basis = [[1 if i == j else 0 for i in range(d)] for j in range(d)]

    def gram_schmidt():
        mu = [[Fraction(0)] * d for _ in range(d)]
        norms = [Fraction(0)] * d
        star: List[List[Fraction]] = []
        for i in range(d):
            vi = [Fraction(c) for c in basis[i]]
            for j in range(i):
                mu[i][j] = inner(basis[i], star[j]) / norms[j] if norms[j] else Fraction(0)
                vi = [a - mu[i][j] * b for a, b in zip(vi, star[j])]
            star.append(vi)
            gvi = gram.apply(vi)
            norms[i] = sum(a * b for a, b in zip(vi, gvi))
        return mu, norms

    mu, norms = gram_schmidt()
    k = 1
    guard = 0
    while k < d:
        guard += 1
        if guard > 10_000:
            break  # heuristic step: bail out, exact acceptance happens later
        for j in range(k - 1, -1, -1):
            q = mu[k][j]
            r = int(q) if q.denominator == 1 else round(float(q))
            if abs(q - r) > Fraction(1, 2):
                r += 1 if q > r else -1
            if r:
                basis[k] = [a - r * b for a, b in zip(basis[k], basis[j])]
        mu, norms = gram_schmidt()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            basis[k], basis[k - 1] = basis[k - 1], basis[k]
            mu, norms = gram_schmidt()
            k = max(k - 1, 1)
    return basis


def integral_conjugation_reduce(gens: GeneratorSet
                                ) -> Tuple[Matrix, GeneratorSet]:
    """Round the real conjugator of conjugation_reduce to a nearby integral
    unimodular matrix (LLL on its column lattice); exact acceptance with
    identity fallback."""
    for m in gens.matrices:
        if not m.is_integral():
            raise InputError("integral reduction needs integer matrices")
        if m.det() != 1:
            raise InputError("integral reduction needs determinant 1")
    tol = Fraction(1, 1 << 30)
    h, _, _ = conjugation_reduce(gens, tol)
    base = _set_norm_interval(gens.matrices, tol)
    best_gamma = Matrix.identity(gens.dim)
    best = base

    candidates: List[Matrix] = []
    # LLL basis of the column lattice under h^T h
    cols = _lll_columns(h.transpose() * h)
    rows = tuple(tuple(Fraction(cols[j][i]) for j in range(gens.dim))
                 for i in range(gens.dim))
    try:
        w = Matrix(rows)
        candidates.append(w.inverse())
    except InputError:
        pass
    # plain entrywise rounding of h
    rounded = tuple(
        tuple(Fraction(round(x)) for x in row) for row in h.rows
    )
    try:
        r = Matrix(rounded)
        if abs(r.det()) == 1:
            candidates.append(r)
    except InputError:
        pass

    for gamma in candidates:
        if not gamma.is_integral() or abs(gamma.det()) != 1:
            continue
        gi = gamma.inverse()
        norm = _set_norm_interval([gamma * m * gi for m in gens.matrices], tol)
        if norm.hi < best.hi:
            best, best_gamma = norm, gamma
    reduced = GeneratorSet(
        matrices=tuple(best_gamma * m * best_gamma.inverse()
                       for m in gens.matrices),
        symmetric=gens.symmetric,
        contains_identity=gens.contains_identity,
    )
    return best_gamma, reduced


# ---------------------------------------------------------------------------
# Quasi-diagonalization (Lemma-style block triangularization)
# ---------------------------------------------------------------------------

def quasi_diagonalize(a: Matrix, precision: Fraction
                      ) -> Tuple[Matrix, Matrix, bool]:
    """Rational change of basis making a nearly upper block-triangular:
    A' = h a h^-1 with A'[0][0] close to the top eigenvalue and the rest of
    the first column an exact rational defect bounded by `precision`.

    Requires a provable spectral gap Lambda >= 2*lambda.  norm_check
    reports whether |h|^d / |det h| <= (3^d |a|^(d*d))^d could be verified
    (the determinant normalization makes the test scale-invariant).
    """
    if precision <= 0:
        raise InputError("precision must be positive")
    d = a.dim
    tol = min(precision, Fraction(1, 1 << 20))
    lam, second = eigen_modulus_bounds(a, tol)
    if lam.lo < 2 * second.hi:
        raise InputError(
            f"spectral gap precondition failed: Lambda in {lam}, "
            f"second in {second}")
    p = char_poly(a)
    roots = polys.real_roots_with_multiplicity(p, tol)
    top = [iv for iv in roots if max(abs(iv[0]), abs(iv[1])) > second.hi]
    if len(top) != 1:
        raise UndecidedError("top eigenvalue not isolated among real roots")
    lo, hi, _ = top[0]

    work = precision
    for _ in range(40):
        u = _eigvec_for_root(a, p, lo, hi, work)
        w = _eigvec_for_root(a.transpose(), p, lo, hi, work)
        # exact rational basis of the complement w-perp
        pivot = max(range(d), key=lambda i: abs(w[i]))
        complement = []
        for j in range(d):
            if j == pivot:
                continue
            vec = [Fraction(0)] * d
            vec[j] = Fraction(1)
            vec[pivot] = -Fraction(w[j], w[pivot])
            complement.append(vec)
        cols = [list(map(Fraction, u))] + complement
        h_inv_rows = tuple(tuple(cols[j][i] for j in range(d)) for i in range(d))
        try:
            h_inv = Matrix(h_inv_rows)
        except InputError:
            work /= 16
            continue
        h = h_inv.inverse()
        a_prime = h * a * h_inv
        defect = max((abs(a_prime.rows[i][0]) for i in range(1, d)),
                     default=Fraction(0))
        scale = max(abs(a_prime.rows[0][0]), Fraction(1))
        if defect <= precision * scale:
            norm_ok = _norm_check(h, a, d)
            return h, a_prime, norm_ok
        work /= 16
    raise UndecidedError(f"quasi-diagonalization defect did not reach {precision}")


def _eigvec_for_root(a: Matrix, p, lo: Fraction, hi: Fraction,
                     work: Fraction) -> Tuple[int, ...]:
    """Approximate eigenvector for the isolated real root in (lo, hi) via
    shifted inverse iteration (exact kernel when the root is rational)."""
    from .projective import _canonical_vec, _kernel_vector, _solve_linear
    d = a.dim
    if lo == hi:
        shifted = [[a.rows[i][j] - (lo if i == j else 0) for j in range(d)]
                   for i in range(d)]
        vec = _kernel_vector(shifted)
        if vec is not None:
            return _canonical_vec(vec)
    lo2, hi2 = polys.refine_root(p, lo, hi, min(work, (hi - lo) if hi > lo else work))
    theta = (lo2 + hi2) / 2 if lo2 < hi2 else lo2
    if polys.evaluate(p, theta) == 0:
        shifted = [[a.rows[i][j] - (theta if i == j else 0) for j in range(d)]
                   for i in range(d)]
        vec = _kernel_vector(shifted)
        if vec is not None:
            return _canonical_vec(vec)
        theta = lo2
    shifted = [[a.rows[i][j] - (theta if i == j else 0) for j in range(d)]
               for i in range(d)]
    x = [Fraction(1)] * d
    den_cap = int(8 / work) + 2
    for _ in range(4):
        y = _solve_linear(shifted, x)
        if y is None:
            break
        mx = max(abs(c) for c in y)
        x = [(c / mx).limit_denominator(den_cap) for c in y]
        if all(c == 0 for c in x):
            x = [c / mx for c in y]
    return _canonical_vec(x)


def _norm_check(h: Matrix, a: Matrix, d: int) -> bool:
    tol = Fraction(1, 1 << 20)
    h_norm, _ = operator_norm_bounds(h, tol)
    a_norm, _ = operator_norm_bounds(a, tol)
    det_h = abs(h.det())
    # |h/det(h)^(1/d)|  <=  3^d |a|^(d^2), both sides to the d-th power
    lhs = h_norm.hi ** d / det_h
    rhs = Fraction(3) ** (d * d) * a_norm.lo ** (d ** 3)
    return lhs <= rhs


# ---------------------------------------------------------------------------
# Wedge power selection
# ---------------------------------------------------------------------------

def _wedge_ratio(w: Matrix, tol: Fraction) -> RationalInterval:
    """Enclosure of Lambda/lambda for one wedge matrix, refining until the
    second modulus separates from zero."""
    t = tol
    for _ in range(40):
        lam, second = eigen_modulus_bounds(w, t)
        if second.lo > 0:
            return RationalInterval(lam.lo / second.hi, lam.hi / second.lo)
        t /= 16
    raise UndecidedError("second eigenvalue modulus would not separate from 0")


def select_wedge_power(a: Matrix, tol: Fraction = Fraction(1, 1 << 20)) -> int:
    """Smallest exterior power index i in 1..d-1 maximizing the provable
    spectral ratio Lambda/lambda of the induced matrix, asserting that the
    achieved ratio is at least Lambda(a)**(1/d^2)."""
    i, _, _ = _select_wedge(a, tol)
    return i


def _select_wedge(a: Matrix, tol: Fraction) -> Tuple[int, Matrix, RationalInterval]:
    lam_a, _ = eigen_modulus_bounds(a, tol)
    if lam_a.lo <= 1:
        raise InputError("wedge selection needs Lambda(a) > 1")
    d = a.dim
    wedges = {i: (wedge_power(a, i) if i > 1 else a) for i in range(1, d)}
    rounds = 12
    t = tol
    winner = None
    for attempt in range(rounds):
        ratios = {i: _wedge_ratio(w, t) for i, w in wedges.items()}
        for i in sorted(ratios):
            if all(j == i or ratios[i].lo >= ratios[j].hi for j in ratios):
                winner = i  # provably maximal
                break
        if winner is not None:
            break
        if attempt == rounds - 1:
            # refinement floor: exact or undecidable ties resolve to the
            # smallest index among candidates reaching the best lower bound
            m = max(iv.lo for iv in ratios.values())
            winner = min(i for i in ratios if ratios[i].hi >= m)
            break
        t /= 16
    ratio = ratios[winner]
    if ratio.lo <= 0 or ratio.lo ** (d * d) < lam_a.hi:
        raise UndecidedError(
            f"wedge ratio {ratio} not provably >= Lambda(a)^(1/{d * d})")
    return winner, wedges[winner], ratio


# ---------------------------------------------------------------------------
# Pipeline drivers
# ---------------------------------------------------------------------------

def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


_DELTA_CUSHION = Fraction(1, 1 << 24)  # matches the verifier's frame target


class _PipelineState:
    """Shared steps (1)-(4): escape, alpha selection, conjugation reduction,
    wedge selection.  Holds the transform and the transformed generators."""

    def __init__(self, gens: GeneratorSet, budget: SearchBudget):
        self.gens = gens
        self.budget = budget
        self.trace: List[str] = []
        self.tol = budget.tol
        self.spectral = SpectralCache()
        if not gens.contains_identity:
            raise InputError("search pipelines need the identity in the set")

    def log(self, line: str):
        self.trace.append(line)

    def prepare(self) -> None:
        budget = self.budget
        gens = self.gens
        self.ball = ball_enumerate(gens, budget.max_power, budget.node_cap)
        # (1) escape to a semisimple infinite-order element
        word, k, data = escape_search(gens, SemisimpleInfiniteOrder(),
                                      budget.max_power, ball=self.ball)
        self.log(f"step=escape_search predicate=semisimple_infinite_order "
                 f"word={_fmt_word(word.letters)} k={k}")
        # (2) alpha maximizing Lambda over the d^2-ball
        radius = min(gens.dim ** 2, budget.max_power)
        alpha_word, lam = self._max_lambda_word(radius)
        if lam.lo <= 1:
            raise SearchNotFoundError(
                "no element with spectral radius above 1 in the explored "
                "ball; cannot build a proximal player at this budget",
                self.trace)
        self.log(f"step=alpha_selection word={_fmt_word(alpha_word.letters)} "
                 f"radius={radius} lambda={_fmt_iv(lam)}")
        self.alpha_word = alpha_word
        # (3) heuristic conjugation reduction with exact acceptance
        h, reduced, norm = conjugation_reduce(gens, self.tol)
        self.log(f"step=conjugation_reduce identity={h.is_identity()} "
                 f"norm={_fmt_iv(norm)}")
        # (4) wedge power selection on the conjugated alpha
        pre = None if h.is_identity() else h
        alpha_conj = (h * alpha_word.matrix * h.inverse()) if pre is not None \
            else alpha_word.matrix
        wedge_index = 1
        if gens.dim > 2:
            try:
                wedge_index, _, ratio = _select_wedge(alpha_conj, self.tol)
                self.log(f"step=select_wedge_power i={wedge_index} "
                         f"ratio={_fmt_iv(ratio)}")
            except (UndecidedError, InputError) as exc:
                self.log(f"step=select_wedge_power i=1 fallback=1 note={exc}")
                wedge_index = 1
        else:
            self.log("step=select_wedge_power i=1")
        self.transform = Transform(pre=pre, wedge_index=wedge_index, post=None)
        self.tgens = self.transform.apply_to_set(gens)
        self.a0 = self.transform.apply(alpha_word.matrix)

    def _max_lambda_word(self, radius: int) -> Tuple[Word, RationalInterval]:
        """Largest spectral radius over the ball, ties to shortest then
        lexicographically least word; conjugation-invariant, so computed on
        the original set."""
        gens = self.gens
        entries: List[Tuple[Tuple[int, ...], Matrix]] = []
        for k in range(min(radius, len(self.ball.spheres) - 1) + 1):
            for mat in self.ball.spheres[k]:
                entries.append((self.ball.first_word[mat], mat))
        # cheap pruning pass: Lambda <= Frobenius, Lambda >= |trace|/d
        d = gens.dim
        best_tr_sq = max(
            Fraction(sum(m.rows[i][i] for i in range(d)) ** 2, d * d)
            for _, m in entries)
        cands = []
        for word, m in entries:
            frob_sq = sum(x * x for row in m.rows for x in row)
            if frob_sq >= best_tr_sq:
                cands.append((word, m))
        best: Optional[Tuple[Tuple[int, ...], Matrix, RationalInterval]] = None
        for word, m in cands:
            lam, _ = eigen_modulus_bounds(m, self.tol)
            if best is None:
                best = (word, m, lam)
                continue
            cur = best[2]
            t = self.tol
            while lam.overlaps(cur) and t > self.tol / 16 ** 8:
                t /= 16
                lam, _ = eigen_modulus_bounds(m, t)
                cur, _ = eigen_modulus_bounds(best[1], t)
            if lam.lo > cur.hi:
                best = (word, m, lam)
            elif lam.overlaps(cur):
                # unseparated at the precision floor: word order decides
                if (len(word), word) < (len(best[0]), best[0]):
                    best = (word, m, lam.hull(cur))
        return Word(gens, best[0], best[1]), best[2]

    def scan_words(self, max_len: int, include_identity: bool):
        """Ball words in (length, lex) order, as words over the transformed
        generators."""
        for k in range(min(max_len, len(self.ball.spheres) - 1) + 1):
            for mat in self.ball.spheres[k]:
                letters = self.ball.first_word[mat]
                if not include_identity and not letters:
                    continue
                yield Word(self.tgens, letters)


def find_semigroup_pair(gens: GeneratorSet, budget: SearchBudget = SearchBudget()
                        ) -> SearchOutcome:
    """Search for ping players: a proximal power of the best hyperbolic
    candidate plus a short word moving its attracting point off its
    repelling hyperplane, certified by the ping criterion.

    Returns a SearchOutcome whose certificate names the pair (a, b*a);
    raises SearchNotFoundError with the full trace when the budget is
    exhausted (never a claim that no free sub-semigroup exists).
    """
    state = _PipelineState(gens, budget)
    state.prepare()
    trace = state.trace
    a0 = state.a0
    alpha_letters = state.alpha_word.letters
    scan_len = min(2, budget.max_power)
    j_max = a0.dim

    a_n = Matrix.identity(a0.dim)
    for n in range(1, budget.max_exponent + 1):
        a_n = a_n * a0
        a_letters = alpha_letters * n
        try:
            from .projective import _ratio_with_split, _svd_frame_sides
            ratio, split = _ratio_with_split(a_n, budget.tol)
            left, right, delta = _svd_frame_sides(
                a_n, min(budget.tol, _DELTA_CUSHION))
        except (NotCertifiedError, UndecidedError):
            continue
        v = ProjPoint(left.vector)
        h = ProjHyperplane(right.vector)
        vh_sq = point_hyperplane_distance_sq(v, h)
        r_cap = sqrt_fraction(vh_sq, 96).lo - 2 * _DELTA_CUSHION
        trace.append(f"step=power_scan n={n} ratio_sq={_fmt_frac(split.ratio_sq_hi)} "
                     f"dvh_sq={_fmt_frac(vh_sq)}")
        if r_cap <= 0:
            continue
        for b_word in state.scan_words(scan_len, include_identity=False):
            b_j = Word(state.tgens, ())
            for j in range(1, j_max + 1):
                b_j = b_j * b_word
                bv = apply_matrix(b_j.matrix, v)
                if bv == v:
                    continue
                try:
                    lip, _ = lipschitz_with_facts(b_j.matrix)
                except UndecidedError:
                    continue
                big_l = lip.hi
                margin = (big_l + 1) * _DELTA_CUSHION
                move_sq = proj_distance_sq(bv, v)
                if move_sq <= margin ** 2:
                    continue
                sep_sq = point_hyperplane_distance_sq(bv, h)
                k_min = max(3, _ceil_frac(big_l))
                for k in range(k_min, budget.epsilon_denominator_cap + 1):
                    eps = Fraction(1, k)
                    cube = eps ** 3
                    if cube <= 2 * _DELTA_CUSHION or \
                            split.ratio_sq_hi > (cube - 2 * _DELTA_CUSHION) ** 4:
                        break  # smaller eps only weakens the contraction side
                    if sep_sq < (eps + margin) ** 2:
                        continue
                    r = r_cap
                    if r <= 4 * eps ** 2:
                        continue
                    try:
                        cert = verify_ping(
                            Word(state.tgens, a_letters),
                            Word(state.tgens, b_j.letters),
                            eps, r, gens=gens, transform=state.transform)
                    except (NotCertifiedError, UndecidedError):
                        continue
                    err = cert.validate()
                    if err:
                        raise UndecidedError(
                            f"freshly produced certificate failed "
                            f"validation: {err}")
                    trace.append(
                        f"step=escape_search predicate=moves_point_off_hyperplane "
                        f"word={_fmt_word(b_word.letters)} j={j} "
                        f"dist_sq={_fmt_frac(sep_sq)}")
                    trace.append(
                        f"step=verify_ping a={_fmt_word(a_letters)} "
                        f"b={_fmt_word(b_j.letters)} eps={_fmt_frac(eps)} "
                        f"r={_fmt_frac(r)}")
                    found = max(len(a_letters), len(b_j.letters) + len(a_letters))
                    trace.append(f"step=outcome kind=semigroup found_in_power={found}")
                    return SearchOutcome(certificate=cert,
                                         found_in_power=found,
                                         trace=tuple(trace))
    raise SearchNotFoundError(
        "semigroup search budget exhausted without a certificate", trace)


def find_free_pair(gens: GeneratorSet, budget: SearchBudget = SearchBudget()
                   ) -> SearchOutcome:
    """Search for free-group ping-pong players.

    Pipeline: proximal candidate A (shared steps), very-contracting
    conjugates A^m0 * B * A^-m0, separation by short left-multipliers,
    a second player by short conjugation, then the ping-pong criterion.
    """
    state = _PipelineState(gens, budget)
    state.prepare()
    trace = state.trace
    a0 = state.a0
    alpha_letters = state.alpha_word.letters
    scan_len = min(2, budget.max_power)
    eps_grid = []
    k = 4
    while k <= budget.epsilon_denominator_cap:
        eps_grid.append(Fraction(1, k))
        k *= 2

    attempts = 0
    attempt_cap = max(2000, budget.node_cap // 50)

    a_m = Matrix.identity(a0.dim)
    for m0 in range(1, budget.max_exponent + 1):
        a_m = a_m * a0
        a_m_inv = a_m.inverse()
        am_letters = alpha_letters * m0
        am_inv_letters = tuple(-x for x in reversed(am_letters))
        for b_word in state.scan_words(scan_len, include_identity=False):
            g_mat = a_m * b_word.matrix * a_m_inv
            if g_mat.is_identity():
                continue
            g_letters = am_letters + b_word.letters + am_inv_letters
            trace_prefix = (f"step=very_contracting_candidate m0={m0} "
                           f"b={_fmt_word(b_word.letters)}")
            for t_word in state.scan_words(scan_len, include_identity=True):
                g1_mat = t_word.matrix * g_mat
                if g1_mat.is_identity():
                    continue
                g1_letters = t_word.letters + g_letters
                first = None
                for eps in eps_grid:
                    attempts += 1
                    if attempts > attempt_cap:
                        raise SearchNotFoundError(
                            "free-pair search attempt cap exhausted", trace)
                    try:
                        w1, r1 = _very_proximal_at(g1_mat, eps)
                    except (NotCertifiedError, UndecidedError):
                        continue
                    first = (eps, r1, w1)
                    break
                if first is None:
                    continue
                eps, r1, w1 = first
                trace.append(f"{trace_prefix} t={_fmt_word(t_word.letters)} "
                             f"eps={_fmt_frac(eps)} r={_fmt_frac(r1)}")
                for u_word in state.scan_words(scan_len, include_identity=False):
                    g2_mat = u_word.matrix * g1_mat * u_word.matrix.inverse()
                    if g2_mat == g1_mat:
                        continue
                    attempts += 1
                    if attempts > attempt_cap:
                        raise SearchNotFoundError(
                            "free-pair search attempt cap exhausted", trace)
                    g2_letters = u_word.letters + g1_letters + tuple(
                        -x for x in reversed(u_word.letters))
                    try:
                        w2, r2 = _very_proximal_at(g2_mat, eps)
                    except (NotCertifiedError, UndecidedError):
                        continue
                    r_pair = min(r1, r2, _min_cross_separation(w1, w2))
                    if r_pair <= 2 * eps:
                        continue
                    try:
                        cert = verify_pingpong(
                            Word(state.tgens, g1_letters),
                            Word(state.tgens, g2_letters),
                            eps, r_pair, gens=gens, transform=state.transform)
                    except (NotCertifiedError, UndecidedError):
                        continue
                    err = cert.validate()
                    if err:
                        raise UndecidedError(
                            f"freshly produced certificate failed "
                            f"validation: {err}")
                    trace.append(
                        f"step=conjugate_player u={_fmt_word(u_word.letters)}")
                    trace.append(
                        f"step=verify_pingpong a={_fmt_word(g1_letters)} "
                        f"b={_fmt_word(g2_letters)} eps={_fmt_frac(eps)} "
                        f"r={_fmt_frac(r_pair)}")
                    found = max(len(g1_letters), len(g2_letters))
                    trace.append(
                        f"step=outcome kind=free found_in_power={found}")
                    return SearchOutcome(certificate=cert,
                                         found_in_power=found,
                                         trace=tuple(trace))
    raise SearchNotFoundError(
        "free-pair search budget exhausted without a certificate", trace)


def _very_proximal_at(m: Matrix, eps: Fraction):
    """Certify (r, eps)-very-proximality at the largest certifiable r;
    returns (witness, r)."""
    from .projective import _svd_frame_sides
    r_candidates = []
    for mat in (m, m.inverse()):
        left, right, delta = _svd_frame_sides(mat, min(_DELTA_CUSHION, eps / 16))
        vh = point_hyperplane_distance_sq(ProjPoint(left.vector),
                                          ProjHyperplane(right.vector))
        r_candidates.append(sqrt_fraction(vh, 96).lo - 2 * _DELTA_CUSHION)
    r = min(r_candidates)
    if r <= 2 * eps:
        raise NotCertifiedError("no certifiable separation above 2*epsilon")
    witness = contraction_certify(m, eps, r, "very_proximal")
    return witness, r


def _min_cross_separation(w1, w2) -> Fraction:
    """Largest r supported by the eight point/hyperplane cross separations
    (before the verifier subtracts its own frame-error margins)."""
    best = None
    pairs = []
    for wp in (w1.forward, w1.backward):
        for wh in (w2.forward, w2.backward):
            pairs.append((wp, wh))
    for wp in (w2.forward, w2.backward):
        for wh in (w1.forward, w1.backward):
            pairs.append((wp, wh))
    for wp, wh in pairs:
        d_sq = point_hyperplane_distance_sq(wp.v, wh.h)
        r = sqrt_fraction(d_sq, 96).lo - wp.frame_error - wh.frame_error
        best = r if best is None else min(best, r)
    return best
