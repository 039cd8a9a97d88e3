"""Exact Cayley-ball enumeration, growth and Cheeger data, and the derived
lower-bound chain for Kazhdan constants, Cheeger constants and entropy.

Ball counts are exact integers (canonical matrix hashing, no floating
point anywhere).  Logarithms are validated rational intervals.  The bound
chain turns a certified independence-diameter witness m into:

    kappa   >=  kappa_F2 / (sqrt(2) * m)
    h       >=  kappa_F2**2 / (8 * m**2)
    entropy >=  log(2) / m            (semigroup witness)
    growth  :   #Sigma^n >= #Sigma * (1+eps)^n  with  eps = 2**(1/m) - 1

The Kazhdan constant of the rank-2 free group enters as explicit
configuration: the default is sqrt(2 - sqrt(3)), the classical bound
obtained from the spectral radius sqrt(3)/2 of the simple random walk on
the 4-regular tree via  max_s |s f - f|**2 >= 2(1 - rho)|f|**2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BudgetExceededError, InputError
from .gens import GeneratorSet, Word
from .intervals import (RationalInterval, log2_interval, log_fraction,
                        nth_root_fraction, sqrt_fraction, sqrt_interval)
from .matrices import Matrix


# ---------------------------------------------------------------------------
# Ball enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BallData:
    """Cumulative balls Sigma^0 ... Sigma^N with exact sizes.

    ``elements[n]`` is the set of elements of the radius-n ball;
    ``first_word`` maps each element to its first (shortest, then
    lexicographically least) word over signed generator indices.
    """
    sizes: Tuple[int, ...]
    spheres: Tuple[Tuple[Matrix, ...], ...]
    first_word: Dict[Matrix, Tuple[int, ...]]

    def ball(self, n: int) -> set:
        out = set()
        for sphere in self.spheres[:n + 1]:
            out.update(sphere)
        return out


def ball_enumerate(gens: GeneratorSet, radius: int,
                   node_cap: Optional[int] = None) -> BallData:
    """Breadth-first closure of {e} under right multiplication by the
    generators, radius by radius, with exact dedup.

    Words are reported over letters +1..+len(gens) in generator order, so
    the first word reaching an element is the shortest, lexicographically
    least one.  Raises BudgetExceededError carrying the completed radii
    when the node cap is hit.
    """
    if radius < 0:
        raise InputError("radius must be >= 0")
    identity = Matrix.identity(gens.dim)
    first_word: Dict[Matrix, Tuple[int, ...]] = {identity: ()}
    sizes = [1]
    spheres: List[Tuple[Matrix, ...]] = [(identity,)]
    frontier: List[Tuple[Matrix, Tuple[int, ...]]] = [(identity, ())]
    nodes = 1
    for n in range(1, radius + 1):
        new_sphere: List[Matrix] = []
        next_frontier: List[Tuple[Matrix, Tuple[int, ...]]] = []
        for mat, word in frontier:
            for idx, g in enumerate(gens.matrices):
                nodes += 1
                if node_cap is not None and nodes > node_cap:
                    raise BudgetExceededError(
                        f"ball enumeration exceeded {node_cap} nodes at "
                        f"radius {n}; complete through radius {n - 1}",
                        partial=BallData(tuple(sizes), tuple(spheres),
                                         first_word))
                nm = mat * g
                if nm not in first_word:
                    nw = word + (idx + 1,)
                    first_word[nm] = nw
                    new_sphere.append(nm)
                    next_frontier.append((nm, nw))
        sizes.append(sizes[-1] + len(new_sphere))
        spheres.append(tuple(new_sphere))
        frontier = next_frontier
    return BallData(tuple(sizes), tuple(spheres), first_word)


# ---------------------------------------------------------------------------
# Growth report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthReport:
    ball_sizes: Tuple[int, ...]
    entropy_estimates: Tuple[Optional[RationalInterval], ...]  # log(#S^n)/n
    entropy_rate_estimates: Tuple[Optional[RationalInterval], ...]  # log ratio
    cheeger_ratios: Tuple[Optional[Fraction], ...]  # upper-bound data only
    derived_bounds: Optional["BoundChain"] = None

    def __post_init__(self):
        sizes = self.ball_sizes
        if any(sizes[i] > sizes[i + 1] for i in range(len(sizes) - 1)):
            raise InputError("ball sizes must be nondecreasing")
        for n in range(len(sizes)):
            for m in range(len(sizes)):
                if n + m < len(sizes) and sizes[n + m] > sizes[n] * sizes[m]:
                    raise InputError("ball sizes violate submultiplicativity")


def growth_report(gens: GeneratorSet, radius: int,
                  node_cap: Optional[int] = None,
                  log_bits: int = 64,
                  derived_bounds: Optional["BoundChain"] = None) -> GrowthReport:
    """Ball sizes, entropy estimates and per-ball Cheeger ratios.

    The Cheeger ratio of the ball A = Sigma^n is #(A minus the intersection
    of the sA) / #A, an exact rational; these are upper-bound data points
    for the Cheeger constant, never the constant itself.

    Two entropy series are reported: the definitional log(#Sigma^n)/n and
    the consecutive-ratio estimate log(#Sigma^n / #Sigma^(n-1)), which
    converges much faster on exponentially growing groups.
    """
    data = ball_enumerate(gens, radius, node_cap)
    sizes = data.sizes
    entropy: List[Optional[RationalInterval]] = [None]
    rates: List[Optional[RationalInterval]] = [None]
    for n in range(1, len(sizes)):
        entropy.append(log_fraction(Fraction(sizes[n]), log_bits) / n)
        rates.append(log_fraction(Fraction(sizes[n], sizes[n - 1]), log_bits))
    inverses = [g.inverse() for g in gens.matrices]
    cheeger: List[Optional[Fraction]] = []
    ball: set = set()
    for n in range(len(sizes)):
        ball.update(data.spheres[n])
        boundary = 0
        for x in ball:
            # x in the inner part iff s^-1 x stays in A for every generator s
            if any(si * x not in ball for si in inverses):
                boundary += 1
        cheeger.append(Fraction(boundary, len(ball)))
    return GrowthReport(
        ball_sizes=sizes,
        entropy_estimates=tuple(entropy),
        entropy_rate_estimates=tuple(rates),
        cheeger_ratios=tuple(cheeger),
        derived_bounds=derived_bounds,
    )


# ---------------------------------------------------------------------------
# Kazhdan constant of F_2 and the derived bound chain
# ---------------------------------------------------------------------------

def kappa_f2_default(bits: int = 64) -> RationalInterval:
    """Validated enclosure of sqrt(2 - sqrt(3)), the configured lower bound
    for the Kazhdan constant of the free group F_2 with standard symmetric
    generators."""
    s3 = sqrt_fraction(Fraction(3), bits)
    inner = RationalInterval(2 - s3.hi, 2 - s3.lo)
    return sqrt_interval(inner, bits)


def tree_ball_rayleigh_polys(max_radius: int) -> List[List[Fraction]]:
    """Characteristic polynomials of the radial averaging operator on
    F_2-balls of radius 0..max_radius.

    Radialized simple random walk on the 4-regular tree, symmetrized by
    sphere weights: a tridiagonal Jacobi matrix with zero diagonal and
    off-diagonal couplings 1/2 (root) then sqrt(3)/4; only the squared
    couplings enter the three-term recurrence, so the polynomials are
    exact rationals.  Their largest roots are the best Rayleigh quotients
    of the ball-truncated walk operator and increase to sqrt(3)/2.
    """
    if max_radius < 0:
        raise InputError("radius must be >= 0")
    b_sq = [Fraction(1, 4)] + [Fraction(3, 16)] * max_radius
    prev = [Fraction(1)]          # p_0 = 1
    cur = [Fraction(0), Fraction(1)]  # p_1 = x
    out = [cur]
    for k in range(1, max_radius + 1):
        nxt = [Fraction(0)] + cur          # x * p_k
        scaled = [b_sq[k - 1] * c for c in prev]
        for i, c in enumerate(scaled):
            nxt[i] -= c
        prev, cur = cur, nxt
        out.append(cur)
    return out


@dataclass(frozen=True)
class BoundChain:
    """Certificate-driven lower bounds for kappa, h, entropy and growth."""
    d_free: Optional[int]
    d_pi: Optional[int]
    kappa_f2: RationalInterval
    kappa_lower: Optional[RationalInterval]
    h_lower: Optional[RationalInterval]
    entropy_lower: Optional[RationalInterval]
    growth_epsilon: Optional[RationalInterval]


def bound_chain(found_in_power: int, kind: str,
                kappa_f2: Optional[RationalInterval] = None,
                bits: int = 96) -> BoundChain:
    """Populate the bound chain from a certified independence diameter.

    kind "free" uses the Kazhdan/Cheeger chain with d_free = found_in_power
    (a free pair in Sigma^m also generates a free semigroup, so the entropy
    bounds hold too); kind "semigroup" only yields the entropy and growth
    bounds with d_pi = found_in_power.
    """
    if kind not in ("free", "semigroup"):
        raise InputError(f"unknown certificate kind {kind!r}")
    if found_in_power < 1:
        raise InputError("found_in_power must be >= 1")
    if kappa_f2 is None:
        kappa_f2 = kappa_f2_default(bits)
    if kappa_f2.lo <= 0:
        raise InputError("kappa_F2 must be a positive interval")
    m = found_in_power
    entropy_lower = log2_interval(bits) / m
    growth_eps = nth_root_fraction(Fraction(2), m, bits) - 1
    if kind == "semigroup":
        return BoundChain(d_free=None, d_pi=m, kappa_f2=kappa_f2,
                          kappa_lower=None, h_lower=None,
                          entropy_lower=entropy_lower,
                          growth_epsilon=growth_eps)
    sqrt2 = sqrt_fraction(Fraction(2), bits)
    kappa_lower = kappa_f2 / (sqrt2 * m)
    h_lower = kappa_f2 ** 2 / (8 * m * m)
    return BoundChain(d_free=m, d_pi=m, kappa_f2=kappa_f2,
                      kappa_lower=kappa_lower, h_lower=h_lower,
                      entropy_lower=entropy_lower, growth_epsilon=growth_eps)
