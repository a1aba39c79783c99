"""
Free monoid combinatorics and the truncated Fock space.

Words are tuples of letters 1..d, read left to right; the empty tuple is the
unit. The truncated Fock space F²_d ⊗ C^m is indexed by (word, slot) pairs with
words in graded-lexicographic order, so basis position of (α, i) is
``fock.position(α) * m + i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import StrEnum, auto
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from .errors import ConfigurationError

Word = tuple[int, ...]
MultiIndex = tuple[int, ...]

EMPTY: Word = ()
MAX_ALPHABET = 9
MULTINOMIAL_GUARD = 20


class Side(StrEnum):
    LEFT = auto()
    RIGHT = auto()


class CancellationKind(StrEnum):
    RIGHT_REMAINDER = auto()
    LEFT_REMAINDER = auto()
    ZERO = auto()


@dataclass(frozen=True)
class Cancellation:
    """Outcome of cancelling (L^α)* L^β.

    RIGHT_REMAINDER(γ) when β = αγ, LEFT_REMAINDER(γ) when α = βγ.
    """

    kind: CancellationKind
    remainder: Word = EMPTY


# ============================================================================
# Words and multi-indices
# ============================================================================


def _check_alphabet(d: int) -> None:
    if d < 1 or d > MAX_ALPHABET:
        raise ConfigurationError(f"Alphabet size must be in 1..{MAX_ALPHABET}, got {d}")


def enumerate_words(d: int, N: int) -> list[Word]:
    """All words of length ≤ N, graded by length then lexicographic (1 < 2 < … < d)."""
    _check_alphabet(d)
    if N < 0:
        raise ConfigurationError(f"Truncation degree must be non-negative, got {N}")
    words: list[Word] = []
    for k in range(N + 1):
        words.extend(itertools.product(range(1, d + 1), repeat=k))
    return words


def word_str(w: Word) -> str:
    return "".join(str(letter) for letter in w)


def parse_word(s: str, d: int | None = None) -> Word:
    """Parse a digit-string word; "" is the empty word."""
    if not all(ch in "123456789" for ch in s):
        raise ConfigurationError(f"Invalid word {s!r}: letters must be digits 1-9")
    w = tuple(int(ch) for ch in s)
    if d is not None and any(letter > d for letter in w):
        raise ConfigurationError(f"Word {s!r} uses a letter outside 1..{d}")
    return w


def transpose(w: Word) -> Word:
    return w[::-1]


def abelianize(w: Word, d: int) -> MultiIndex:
    """Letter-counting map: counts[k-1] is the number of occurrences of letter k."""
    counts = [0] * d
    for letter in w:
        counts[letter - 1] += 1
    return tuple(counts)


def cancel(alpha: Word, beta: Word) -> Cancellation:
    """Prefix cancellation of (L^α)* L^β."""
    la, lb = len(alpha), len(beta)
    if beta[:la] == alpha:
        return Cancellation(CancellationKind.RIGHT_REMAINDER, beta[la:])
    if alpha[:lb] == beta:
        return Cancellation(CancellationKind.LEFT_REMAINDER, alpha[lb:])
    return Cancellation(CancellationKind.ZERO)


def multinomial(n: MultiIndex) -> int:
    """|n|! / n!, the number of words with letter counts n."""
    if any(k < 0 for k in n):
        raise ConfigurationError(f"Multi-index must be non-negative, got {n}")
    total = sum(n)
    if total > MULTINOMIAL_GUARD:
        raise ConfigurationError(
            f"|n| = {total} exceeds the exact-arithmetic guard {MULTINOMIAL_GUARD}"
        )
    result = math.factorial(total)
    for k in n:
        result //= math.factorial(k)
    return result


def enumerate_multi_indices(d: int, N: int) -> list[MultiIndex]:
    """Multi-indices with |n| ≤ N, graded by |n|, in order of first appearance as words."""
    _check_alphabet(d)
    result: list[MultiIndex] = []
    for k in range(N + 1):
        degree: list[MultiIndex] = []
        for parts in itertools.combinations_with_replacement(range(d), k):
            counts = [0] * d
            for p in parts:
                counts[p] += 1
            degree.append(tuple(counts))
        result.extend(sorted(set(degree), reverse=True))
    return result


# ============================================================================
# Truncated Fock space
# ============================================================================


@dataclass(frozen=True)
class TruncatedFock:
    """F²_d ⊗ C^m compressed to words of length ≤ N."""

    d: int
    m: int
    N: int
    _index: dict[Word, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _check_alphabet(self.d)
        if self.m < 1:
            raise ConfigurationError(f"Coefficient dimension must be ≥ 1, got {self.m}")
        words = enumerate_words(self.d, self.N)
        object.__setattr__(self, "_index", {w: k for k, w in enumerate(words)})

    @cached_property
    def words(self) -> list[Word]:
        return list(self._index)

    @property
    def num_words(self) -> int:
        return len(self._index)

    @property
    def dim(self) -> int:
        return self.num_words * self.m

    def position(self, w: Word) -> int:
        return self._index[w]

    def basis_index(self, w: Word, i: int) -> int:
        return self._index[w] * self.m + i

    def block(self, w: Word) -> slice:
        start = self._index[w] * self.m
        return slice(start, start + self.m)

    def degree_indices(self, max_degree: int) -> np.ndarray:
        """Basis positions of all (α, i) with |α| ≤ max_degree."""
        if max_degree < 0:
            return np.zeros(0, dtype=int)
        count = sum(1 for w in self.words if len(w) <= max_degree)
        return np.arange(count * self.m)

    def word_degrees(self) -> np.ndarray:
        """Degree |α| for every basis position."""
        return np.repeat([len(w) for w in self.words], self.m)


# ============================================================================
# Operators on the truncated Fock space
# ============================================================================


def creation_matrix(fock: TruncatedFock, side: Side, j: int) -> csr_matrix:
    """L_j (e_α ↦ e_{jα}) or R_j (e_α ↦ e_{αj}); top-degree vectors map to 0."""
    if not 1 <= j <= fock.d:
        raise ConfigurationError(f"Letter {j} outside 1..{fock.d}")
    rows: list[int] = []
    cols: list[int] = []
    for w in fock.words:
        if len(w) >= fock.N:
            continue
        target = (j, *w) if side == Side.LEFT else (*w, j)
        for i in range(fock.m):
            rows.append(fock.basis_index(target, i))
            cols.append(fock.basis_index(w, i))
    data = np.ones(len(rows), dtype=complex)
    return coo_matrix((data, (rows, cols)), shape=(fock.dim, fock.dim)).tocsr()


@dataclass(frozen=True)
class SymmetricBasis:
    """Unnormalized symmetric vectors e_n ⊗ e_i and the projection onto their span."""

    multi_indices: list[MultiIndex]
    vectors: np.ndarray
    projection: np.ndarray

    def column(self, n: MultiIndex, i: int, m: int) -> int:
        return self.multi_indices.index(n) * m + i


def symmetrizer(fock: TruncatedFock) -> SymmetricBasis:
    indices = enumerate_multi_indices(fock.d, fock.N)
    lookup = {n: k for k, n in enumerate(indices)}
    vectors = np.zeros((fock.dim, len(indices) * fock.m), dtype=complex)
    for w in fock.words:
        k = lookup[abelianize(w, fock.d)]
        for i in range(fock.m):
            vectors[fock.basis_index(w, i), k * fock.m + i] = 1.0
    norms = np.repeat([multinomial(n) for n in indices], fock.m).astype(float)
    projection = (vectors / norms) @ vectors.conj().T
    return SymmetricBasis(multi_indices=indices, vectors=vectors, projection=projection)


def transposition_unitary(fock: TruncatedFock) -> csr_matrix:
    """Permutation U_T with U_T e_α = e_{α^T}."""
    rows: list[int] = []
    cols: list[int] = []
    for w in fock.words:
        for i in range(fock.m):
            rows.append(fock.basis_index(transpose(w), i))
            cols.append(fock.basis_index(w, i))
    data = np.ones(len(rows), dtype=complex)
    return coo_matrix((data, (rows, cols)), shape=(fock.dim, fock.dim)).tocsr()
