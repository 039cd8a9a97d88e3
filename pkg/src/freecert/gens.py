"""Generating sets, words, and the representation transforms applied to them.

A ``Word`` is a sequence of signed 1-based letters over a ``GeneratorSet``
(+k means generator k-1, -k its inverse) together with its exact matrix
value.  A ``Transform`` packages the representation change used by the
search pipeline (conjugation, exterior power, second conjugation); it is a
group homomorphism on matrices, so a word can be evaluated in the
transformed representation letter by letter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .errors import InputError
from .matrices import Matrix, wedge_power


@dataclass(frozen=True)
class GeneratorSet:
    """A finite set of exact rational matrices with verified flags."""
    matrices: Tuple[Matrix, ...]
    symmetric: bool
    contains_identity: bool

    def __post_init__(self):
        mats = tuple(self.matrices)
        if not mats:
            raise InputError("generating set is empty")
        d = mats[0].dim
        if any(m.dim != d for m in mats):
            raise InputError("generators have mixed dimensions")
        object.__setattr__(self, "matrices", mats)
        has_id = any(m.is_identity() for m in mats)
        if self.contains_identity and not has_id:
            raise InputError("contains_identity flag set but no identity present")
        if not self.contains_identity and has_id:
            raise InputError("identity present but contains_identity flag unset")
        if self.symmetric:
            pool = set(mats)
            for m in mats:
                if m.inverse() not in pool:
                    raise InputError("symmetric flag set but set is not "
                                     "closed under inverses")

    @staticmethod
    def from_matrices(mats: Sequence[Matrix]) -> "GeneratorSet":
        """Build with flags computed from the data."""
        mats = tuple(mats)
        pool = set(mats)
        return GeneratorSet(
            matrices=mats,
            symmetric=all(m.inverse() in pool for m in mats),
            contains_identity=any(m.is_identity() for m in mats),
        )

    @property
    def dim(self) -> int:
        return self.matrices[0].dim

    def __len__(self) -> int:
        return len(self.matrices)

    def inverse_matrix(self, index: int) -> Matrix:
        return self.matrices[index].inverse()


@dataclass(frozen=True)
class Word:
    """A word over a generating set with its cached exact matrix value."""
    gens: GeneratorSet
    letters: Tuple[int, ...]
    matrix: Matrix = field(compare=False)

    def __init__(self, gens: GeneratorSet, letters: Sequence[int],
                 matrix: Optional[Matrix] = None):
        letters = tuple(int(k) for k in letters)
        for k in letters:
            if k == 0 or abs(k) > len(gens):
                raise InputError(f"letter {k} out of range")
        if matrix is None:
            matrix = _evaluate(gens, letters)
        object.__setattr__(self, "gens", gens)
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "matrix", matrix)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        if self.gens is not other.gens and self.gens != other.gens:
            raise InputError("words over different generating sets")
        return Word(self.gens, self.letters + other.letters,
                    self.matrix * other.matrix)

    def inverse(self) -> "Word":
        return Word(self.gens, tuple(-k for k in reversed(self.letters)),
                    self.matrix.inverse())

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        out = Word.identity(self.gens)
        for _ in range(n):
            out = out * self
        return out

    @staticmethod
    def identity(gens: GeneratorSet) -> "Word":
        return Word(gens, (), Matrix.identity(gens.dim))

    def sort_key(self):
        return (len(self.letters), self.letters)


def _evaluate(gens: GeneratorSet, letters: Tuple[int, ...]) -> Matrix:
    acc = Matrix.identity(gens.dim)
    for k in letters:
        m = gens.matrices[abs(k) - 1]
        acc = acc * (m if k > 0 else m.inverse())
    return acc


@dataclass(frozen=True)
class Transform:
    """post * wedge_i(pre * M * pre^-1) * post^-1, applied elementwise.

    Composition of group homomorphisms, so relations and freeness transfer
    back from the transformed representation to the original words.
    """
    pre: Optional[Matrix]
    wedge_index: int
    post: Optional[Matrix]

    @staticmethod
    def trivial() -> "Transform":
        return Transform(pre=None, wedge_index=1, post=None)

    def output_dim(self, d: int) -> int:
        from math import comb
        return comb(d, self.wedge_index)

    def apply(self, m: Matrix) -> Matrix:
        if self.pre is not None:
            m = self.pre * m * self.pre.inverse()
        if self.wedge_index != 1:
            m = wedge_power(m, self.wedge_index)
        if self.post is not None:
            m = self.post * m * self.post.inverse()
        return m

    def apply_to_set(self, gens: GeneratorSet) -> GeneratorSet:
        mats = tuple(self.apply(m) for m in gens.matrices)
        return GeneratorSet(
            matrices=mats,
            symmetric=gens.symmetric,
            contains_identity=gens.contains_identity,
        )
