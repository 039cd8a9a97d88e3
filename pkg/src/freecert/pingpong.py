"""Machine-checkable verification of the ping (free semigroup) and
ping-pong (free group) criteria, plus a brute-force relation oracle.

The verifiers consume exact words and rational parameters and either return
a certificate object -- every inequality of which can be re-checked from
the stored rationals by :meth:`validate` using nothing but exact arithmetic
and Sturm counts -- or raise ``NotCertifiedError`` naming the failed clause.

Frame-error accounting (delta = certified chordal radius of the stored
frames, L = certified global Lipschitz bound of b):

* moving a point by delta changes point-hyperplane distances by at most
  delta, moving a hyperplane's normal by delta changes them by at most
  delta (the chordal Hausdorff distance of the hyperplanes equals the
  normals' distance);
* b maps a delta-ball around v into an L*delta-ball around b(v).

So each certified inequality charges the margin it needs to hold for the
true algebraic frames, not only the stored rational approximations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import polys
from .errors import BudgetExceededError, InputError, NotCertifiedError
from .gens import GeneratorSet, Transform, Word
from .intervals import RationalInterval, sqrt_fraction
from .matrices import Matrix, char_poly
from .projective import (ContractionWitness, ProjHyperplane, ProjPoint,
                         VeryProximalWitness, apply_matrix,
                         contraction_certify, point_hyperplane_distance_sq,
                         proj_distance_sq)


@dataclass(frozen=True)
class LipFacts:
    """Sturm-checkable certificate for a global Lipschitz bound.

    Facts about the Gram spectrum of b: every eigenvalue is <= t1, at most
    one exceeds t2, and none is below ld.  Then the projective action of b
    is sqrt(t1*t2)/ld-Lipschitz, and ``bound_hi`` is checked against that.
    """
    t1: Fraction
    t2: Fraction
    ld: Fraction
    bound_hi: Fraction

    def check(self, gram: Matrix) -> Optional[str]:
        if not (0 < self.ld and self.t2 <= self.t1 and self.bound_hi > 0):
            return "Lipschitz facts out of order"
        ctx = polys.SturmContext(char_poly(gram))
        for x in (self.t1, self.t2, self.ld):
            if ctx.is_root(x):
                return "Lipschitz fact endpoint hits an eigenvalue"
        if ctx.count_roots(self.t1, None) != 0:
            return "an eigenvalue exceeds t1"
        if ctx.count_roots(self.t2, None) > 1:
            return "two eigenvalues exceed t2"
        if ctx.count_roots(None, self.ld) != 0:
            return "an eigenvalue lies below ld"
        if self.bound_hi ** 2 * self.ld ** 2 < self.t1 * self.t2:
            return "Lipschitz bound does not dominate sqrt(t1*t2)/ld"
        return None


def lipschitz_with_facts(m: Matrix, tol: Fraction = Fraction(1, 1 << 20)
                         ) -> Tuple[RationalInterval, LipFacts]:
    """Global Lipschitz bound a1*a2/a_d**2 as an interval plus its facts."""
    from .rootbounds import gram_eigen_intervals
    eps = tol * tol / 16
    gram = m.gram()
    for _ in range(60):
        mus = gram_eigen_intervals(m, eps)
        expanded: List[Tuple[Fraction, Fraction]] = []
        for lo, hi, mult in mus:
            expanded.extend([(lo, hi)] * mult)
        (lo_d, hi_d), (lo_2, hi_2), (lo_1, hi_1) = \
            expanded[0], expanded[-2], expanded[-1]
        ctx = polys.SturmContext(char_poly(gram))
        t1 = _bump_up(hi_1, eps, ctx)
        t2 = _bump_up(hi_2, eps, ctx)
        ld = _bump_down(lo_d, eps, ctx)
        if ld <= 0:
            eps /= 16
            continue
        facts_bound_sq = t1 * t2 / ld ** 2
        hi = sqrt_fraction(facts_bound_sq, 96).hi
        lo_bound_sq = max(lo_1, Fraction(0)) * max(lo_2, Fraction(0)) / hi_d ** 2
        lo_bound = sqrt_fraction(lo_bound_sq, 96).lo
        iv = RationalInterval(min(lo_bound, hi), hi)
        facts = LipFacts(t1=t1, t2=t2, ld=ld, bound_hi=hi)
        if iv.width() <= tol * max(1, iv.lo):
            err = facts.check(gram)
            if err is None:
                return iv, facts
        eps /= 16
    from .errors import UndecidedError
    raise UndecidedError(f"Lipschitz bound did not stabilize at tolerance {tol}")


def _bump_up(x: Fraction, eps: Fraction, ctx: polys.SturmContext) -> Fraction:
    y = x + eps
    while ctx.is_root(y):
        y += eps / 7
    return y


def _bump_down(x: Fraction, eps: Fraction, ctx: polys.SturmContext) -> Fraction:
    y = x - eps
    while ctx.is_root(y):
        y -= eps / 7
    return y


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SemigroupCertificate:
    """Witness that a and b*a generate a free semigroup.

    Clauses (with delta = witness frame error, L = Lipschitz bound of b):
      epsilon <= 1/3,  r > 4*epsilon**2,
      a is (r, epsilon**3)-proximal with frames (v, H),
      d(b v, v)  >  (L+1)*delta          (so b truly moves the fixed point),
      d(b v, H) >= epsilon + (L+1)*delta,
      L <= 1/epsilon.
    """
    gens: GeneratorSet
    transform: Transform
    a: Word
    b: Word
    b_prime: Word
    epsilon: Fraction
    r: Fraction
    witness_a: ContractionWitness
    bv_h_dist_sq: Fraction
    bv_move_dist_sq: Fraction
    lipschitz_b: RationalInterval
    lip_facts: LipFacts

    @property
    def found_in_power(self) -> int:
        return max(len(self.a), len(self.b_prime))

    def validate(self) -> Optional[str]:
        eps, r = self.epsilon, self.r
        if not eps <= Fraction(1, 3):
            return "ping hypothesis epsilon <= 1/3 violated"
        if not r > 4 * eps ** 2:
            return "ping hypothesis r > 4*epsilon^2 violated"
        if self.b_prime.letters != self.b.letters + self.a.letters:
            return "b_prime is not the word b*a"
        tgens = self.transform.apply_to_set(self.gens)
        a_mat = Word(tgens, self.a.letters).matrix
        b_mat = Word(tgens, self.b.letters).matrix
        w = self.witness_a
        if w.epsilon != eps ** 3:
            return "witness epsilon is not epsilon**3"
        if w.r != r:
            return "witness r mismatch"
        err = w.validate_against(a_mat)
        if err:
            return f"witness for a: {err}"
        err = self.lip_facts.check(b_mat.gram())
        if err:
            return f"Lipschitz facts for b: {err}"
        if self.lipschitz_b.hi < self.lip_facts.bound_hi:
            return "stored Lipschitz interval underreports its facts"
        if self.lipschitz_b.hi * eps > 1:
            return "Lip(b) <= 1/epsilon failed"
        bv = apply_matrix(b_mat, w.v)
        margin = (self.lip_facts.bound_hi + 1) * w.frame_error
        move_sq = proj_distance_sq(bv, w.v)
        if move_sq != self.bv_move_dist_sq:
            return "stored d(bv, v) disagrees with recomputation"
        if not move_sq > margin ** 2:
            return "b does not provably move the attracting point"
        sep_sq = point_hyperplane_distance_sq(bv, w.h)
        if sep_sq != self.bv_h_dist_sq:
            return "stored d(bv, H) disagrees with recomputation"
        if sep_sq < (eps + margin) ** 2:
            return "d(bv, H) >= epsilon failed"
        return None


_SEP_KEYS = (
    ("a+", "b+"), ("a+", "b-"), ("a-", "b+"), ("a-", "b-"),
    ("b+", "a+"), ("b+", "a-"), ("b-", "a+"), ("b-", "a-"),
)


@dataclass(frozen=True)
class FreeGroupCertificate:
    """Witness that a and b generate a free group of rank 2.

    Both words carry (r, epsilon)-very-proximal witnesses, and all eight
    attracting-point / repelling-hyperplane cross separations hold with
    frame-error margins:  d(v_x, H_y) >= r for x in {a+,a-}, y in {b+,b-}
    and vice versa.
    """
    gens: GeneratorSet
    transform: Transform
    a: Word
    b: Word
    epsilon: Fraction
    r: Fraction
    witness_a: VeryProximalWitness
    witness_b: VeryProximalWitness
    cross_separations: Tuple[Tuple[str, str, Fraction], ...]

    @property
    def found_in_power(self) -> int:
        return max(len(self.a), len(self.b))

    def _witness_of(self, tag: str):
        side = {"a+": self.witness_a.forward, "a-": self.witness_a.backward,
                "b+": self.witness_b.forward, "b-": self.witness_b.backward}
        return side[tag]

    def validate(self) -> Optional[str]:
        eps, r = self.epsilon, self.r
        if not r > 2 * eps:
            return "pingpong hypothesis r > 2*epsilon violated"
        tgens = self.transform.apply_to_set(self.gens)
        a_mat = Word(tgens, self.a.letters).matrix
        b_mat = Word(tgens, self.b.letters).matrix
        mats = {"a+": a_mat, "a-": a_mat.inverse(),
                "b+": b_mat, "b-": b_mat.inverse()}
        for tag in ("a+", "a-", "b+", "b-"):
            w = self._witness_of(tag)
            if w.epsilon != eps or w.r != r:
                return f"witness {tag} parameter mismatch"
            err = w.validate_against(mats[tag])
            if err:
                return f"witness {tag}: {err}"
        stored = {(p, h): d for p, h, d in self.cross_separations}
        if set(stored) != set(_SEP_KEYS):
            return "cross separation table incomplete"
        for p_tag, h_tag in _SEP_KEYS:
            wp, wh = self._witness_of(p_tag), self._witness_of(h_tag)
            d_sq = point_hyperplane_distance_sq(wp.v, wh.h)
            if d_sq != stored[(p_tag, h_tag)]:
                return f"stored separation {p_tag}/{h_tag} disagrees"
            need = (r + wp.frame_error + wh.frame_error) ** 2
            if d_sq < need:
                return f"cross separation {p_tag} vs {h_tag} below r"
        # derived sanity: attracting points of a and b at least r - 2 eps apart
        for pa, pb in (("a+", "b+"), ("a+", "b-"), ("a-", "b+"), ("a-", "b-")):
            wa, wb = self._witness_of(pa), self._witness_of(pb)
            lower = r - 2 * eps - wa.frame_error - wb.frame_error
            if lower > 0 and proj_distance_sq(wa.v, wb.v) < lower ** 2:
                return f"derived separation of attracting points {pa},{pb} failed"
        return None


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------

def verify_ping(a: Word, b: Word, epsilon: Fraction, r: Fraction,
                gens: Optional[GeneratorSet] = None,
                transform: Optional[Transform] = None) -> SemigroupCertificate:
    """Certify that a and b*a generate a free semigroup (the ping criterion).

    a and b are words in the *transformed* representation when a transform
    is given; `gens`/`transform` default to the words' own generators and
    the trivial transform.
    """
    epsilon, r = Fraction(epsilon), Fraction(r)
    if gens is None:
        gens = a.gens
        transform = Transform.trivial()
    if transform is None:
        transform = Transform.trivial()
    if not epsilon > 0:
        raise NotCertifiedError("epsilon must be positive")
    if not epsilon <= Fraction(1, 3):
        raise NotCertifiedError("ping hypothesis epsilon <= 1/3 violated",
                                f"epsilon = {epsilon}")
    if not r > 4 * epsilon ** 2:
        raise NotCertifiedError("ping hypothesis r > 4*epsilon^2 violated",
                                f"r = {r}")
    witness = contraction_certify(a.matrix, epsilon ** 3, r, "proximal")
    lip, lip_facts = lipschitz_with_facts(b.matrix)
    if lip.hi * epsilon > 1:
        raise NotCertifiedError("Lip(b) <= 1/epsilon failed",
                                f"Lip(b) <= {lip.hi}")
    bv = apply_matrix(b.matrix, witness.v)
    margin = (lip_facts.bound_hi + 1) * witness.frame_error
    move_sq = proj_distance_sq(bv, witness.v)
    if not move_sq > margin ** 2:
        raise NotCertifiedError("b does not provably move the attracting point",
                                f"d(bv,v)^2 = {move_sq}")
    sep_sq = point_hyperplane_distance_sq(bv, witness.h)
    if sep_sq < (epsilon + margin) ** 2:
        raise NotCertifiedError("d(bv, H) >= epsilon failed",
                                f"d(bv,H)^2 = {sep_sq}")
    cert = SemigroupCertificate(
        gens=gens, transform=transform, a=a, b=b, b_prime=b * a,
        epsilon=epsilon, r=r, witness_a=witness,
        bv_h_dist_sq=sep_sq, bv_move_dist_sq=move_sq,
        lipschitz_b=lip, lip_facts=lip_facts,
    )
    return cert


def verify_pingpong(a: Word, b: Word, epsilon: Fraction, r: Fraction,
                    gens: Optional[GeneratorSet] = None,
                    transform: Optional[Transform] = None) -> FreeGroupCertificate:
    """Certify that a and b generate a free group (the ping-pong criterion)."""
    epsilon, r = Fraction(epsilon), Fraction(r)
    if gens is None:
        gens = a.gens
        transform = Transform.trivial()
    if transform is None:
        transform = Transform.trivial()
    if not r > 2 * epsilon:
        raise NotCertifiedError("pingpong hypothesis r > 2*epsilon violated",
                                f"r = {r}, epsilon = {epsilon}")
    wa = contraction_certify(a.matrix, epsilon, r, "very_proximal")
    wb = contraction_certify(b.matrix, epsilon, r, "very_proximal")
    witnesses = {"a+": wa.forward, "a-": wa.backward,
                 "b+": wb.forward, "b-": wb.backward}
    seps = []
    for p_tag, h_tag in _SEP_KEYS:
        wp, wh = witnesses[p_tag], witnesses[h_tag]
        d_sq = point_hyperplane_distance_sq(wp.v, wh.h)
        if d_sq < (r + wp.frame_error + wh.frame_error) ** 2:
            raise NotCertifiedError(
                f"cross separation failed: attracting point of {p_tag} vs "
                f"repelling hyperplane of {h_tag}", f"d^2 = {d_sq}")
        seps.append((p_tag, h_tag, d_sq))
    cert = FreeGroupCertificate(
        gens=gens, transform=transform, a=a, b=b, epsilon=epsilon, r=r,
        witness_a=wa, witness_b=wb, cross_separations=tuple(seps),
    )
    err = cert.validate()
    if err:
        raise NotCertifiedError(f"internal consistency check failed: {err}")
    return cert


# ---------------------------------------------------------------------------
# Brute-force relation oracle
# ---------------------------------------------------------------------------

def relation_oracle(a: Matrix, b: Matrix, max_len: int, semigroup: bool,
                    node_cap: int = 500_000
                    ) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Exhaustive search for a relation between a and b up to word length
    max_len; None means no relation exists at that range.

    Semigroup mode multiplies all positive words in {a, b}; group mode all
    reduced words in {a, a^-1, b, b^-1}.  Letters are encoded 0..3 as
    a, a^-1, b, b^-1, and the lexicographically least colliding pair (in
    (length, letters) order) is returned.
    """
    if max_len < 1:
        raise InputError("max_len must be >= 1")
    if a.dim != b.dim:
        raise InputError("dimension mismatch")
    if semigroup:
        letters = {0: a, 2: b}
    else:
        letters = {0: a, 1: a.inverse(), 2: b, 3: b.inverse()}

    def blocked(last: Optional[int], nxt: int) -> bool:
        if semigroup or last is None:
            return False
        return (last ^ 1) == nxt  # adjacent inverse letters

    seen: Dict[Matrix, Tuple[int, ...]] = {}
    frontier: List[Tuple[Tuple[int, ...], Matrix]] = []
    if not semigroup:
        seen[Matrix.identity(a.dim)] = ()
    frontier.append(((), Matrix.identity(a.dim)))
    nodes = 0
    for _ in range(max_len):
        next_frontier: List[Tuple[Tuple[int, ...], Matrix]] = []
        for word, mat in frontier:
            last = word[-1] if word else None
            for letter in sorted(letters):
                if blocked(last, letter):
                    continue
                nodes += 1
                if nodes > node_cap:
                    raise BudgetExceededError(
                        f"relation oracle exceeded {node_cap} nodes",
                        partial={"complete_length": len(word)})
                new_word = word + (letter,)
                new_mat = mat * letters[letter]
                if new_mat in seen:
                    return (seen[new_mat], new_word)
                seen[new_mat] = new_word
                next_frontier.append((new_word, new_mat))
        frontier = next_frontier
    return None
