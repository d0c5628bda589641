"""Combinatorics of partitions of [1, n] into N ordered index sets.

A partition I = (I_1, ..., I_N) is stored as its word (mu_1, ..., mu_n)
with mu_i = l iff i is in I_l.  Rows and columns are 1-indexed throughout
the public surface.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class LambdaShape:
    """Colour multiplicities lambda = (lambda_1, ..., lambda_N)."""

    lam: tuple[int, ...]

    def __post_init__(self):
        lam = tuple(int(x) for x in self.lam)
        if any(x < 0 for x in lam) or not lam:
            raise ValueError(f"invalid shape {self.lam!r}")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def parse(cls, text: str) -> "LambdaShape":
        return cls(tuple(int(t) for t in text.split(",")))

    @property
    def N(self) -> int:
        return len(self.lam)

    @property
    def n(self) -> int:
        return sum(self.lam)

    def cumulative(self, l: int) -> int:
        """lambda^(l) = lambda_1 + ... + lambda_l, with lambda^(0) = 0."""
        return sum(self.lam[:l])

    @property
    def M(self) -> int:
        """Number of integration variables, sum_{l<N} lambda^(l)."""
        return sum(self.cumulative(l) for l in range(1, self.N))

    @property
    def size(self) -> int:
        out = math.factorial(self.n)
        for x in self.lam:
            out //= math.factorial(x)
        return out

    def __add__(self, other: "LambdaShape") -> "LambdaShape":
        if self.N != other.N:
            raise ValueError("shapes with different N cannot be added")
        return LambdaShape(tuple(a + b for a, b in zip(self.lam, other.lam)))

    def __str__(self) -> str:
        return ",".join(map(str, self.lam))


@dataclass(frozen=True)
class Partition:
    """A partition of [1, n] into N index sets, held as its word."""

    word: tuple[int, ...]
    N: int

    def __post_init__(self):
        w = tuple(int(x) for x in self.word)
        if self.N < 1:
            raise ValueError("N must be positive")
        bad = [x for x in w if not 1 <= x <= self.N]
        if bad:
            raise ValueError(f"word entries must lie in 1..{self.N}, got {bad}")
        object.__setattr__(self, "word", w)

    @property
    def n(self) -> int:
        return len(self.word)

    @cached_property
    def index_sets(self) -> tuple[tuple[int, ...], ...]:
        """(I_1, ..., I_N), each sorted ascending."""
        return tuple(tuple(i + 1 for i, m in enumerate(self.word) if m == l)
                     for l in range(1, self.N + 1))

    @cached_property
    def shape(self) -> LambdaShape:
        return LambdaShape(tuple(len(s) for s in self.index_sets))

    @property
    def lam(self) -> tuple[int, ...]:
        return self.shape.lam

    def cumulative(self, l: int) -> int:
        return self.shape.cumulative(l)

    def upper_set(self, l: int) -> tuple[int, ...]:
        """I^(l) = I_1 u ... u I_l, sorted; I^(0) is empty."""
        return tuple(sorted(i for k in range(l) for i in self.index_sets[k]))

    def row(self, l: int, a: int) -> int:
        """i^(l)_a, the a-th smallest element of I^(l)."""
        return self.upper_set(l)[a - 1]

    @cached_property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        """rows[l-1] = (i^(l)_1, ..., i^(l)_{lambda^(l)}) for l = 1..N."""
        return tuple(self.upper_set(l) for l in range(1, self.N + 1))

    def __str__(self) -> str:
        if self.N < 10:
            return "".join(map(str, self.word))
        return ",".join(map(str, self.word))


def from_word(word, N: int | None = None) -> Partition:
    """Build a partition from a word; a string like "2132" is accepted."""
    if isinstance(word, str):
        word = [int(c) for c in (word.split(",") if "," in word else word)]
    word = tuple(int(x) for x in word)
    if N is None:
        N = max(word) if word else 1
    return Partition(word, N)


def dyn_shift_direct(P: Partition, s: int, l: int) -> int:
    """C_{mu_s, l+1}(s) = sum_{j>s} (delta_{mu_j, mu_s} - delta_{mu_j, l+1})."""
    if not 1 <= s <= P.n:
        raise ValueError(f"row index s={s} out of range")
    ms = P.word[s - 1]
    if not ms <= l <= P.N - 1:
        raise ValueError(f"need mu_s <= l <= N-1, got mu_s={ms}, l={l}")
    tail = P.word[s:]
    return sum(1 for m in tail if m == ms) - sum(1 for m in tail if m == l + 1)


def dyn_shift_combinatorial(P: Partition, s: int, l: int) -> int:
    """The same integer computed from the positions of s inside I_{mu_s} and I_{l+1}."""
    if not 1 <= s <= P.n:
        raise ValueError(f"row index s={s} out of range")
    ms = P.word[s - 1]
    if not ms <= l <= P.N - 1:
        raise ValueError(f"need mu_s <= l <= N-1, got mu_s={ms}, l={l}")
    own = P.index_sets[ms - 1]
    nxt = P.index_sets[l]
    lam_s, lam_n = len(own), len(nxt)
    s_tilde = own.index(s) + 1
    if lam_n and s < nxt[-1]:
        # m = position of the first element of I_{l+1} exceeding s
        m = next(k for k, i in enumerate(nxt, start=1) if i > s)
        return lam_s - lam_n - s_tilde + m - 1
    return lam_s - s_tilde


def leq(I: Partition, J: Partition) -> bool:
    """I <= J iff i^(l)_a <= j^(l)_a for every l and a."""
    if I.N != J.N or I.lam != J.lam:
        raise ValueError("partial order only compares partitions of the same shape")
    return all(a <= b for rI, rJ in zip(I.rows, J.rows) for a, b in zip(rI, rJ))


def enumerate_shape(shape: LambdaShape) -> list[Partition]:
    """All partitions of the shape, reverse-lexicographic in the word.

    Reverse lex order is a linear extension of the reversed partial order,
    so matrices indexed in this order are lower triangular.
    """
    base = [l for l in range(1, shape.N + 1) for _ in range(shape.lam[l - 1])]
    words = sorted(set(itertools.permutations(base)), reverse=True)
    return [Partition(w, shape.N) for w in words]


def specialize_zI(I: Partition, u: Sequence[complex]) -> list[np.ndarray]:
    """Rows v^(1), ..., v^(N) with v^(l)_a = u_{i^(l)_a}; the last row is u itself."""
    u = np.asarray(u, dtype=complex)
    if len(u) != I.n:
        raise ValueError(f"need {I.n} values of u, got {len(u)}")
    rows = [u[np.asarray(I.rows[l], dtype=int) - 1] for l in range(I.N - 1)]
    rows.append(u.copy())
    return rows


def apply_sigma(sigma: Sequence[int], I: Partition, u: Sequence[complex]):
    """(sigma^{-1}(I), sigma(u)) with sigma given in one-line notation (1-indexed).

    sigma^{-1}(I) has word (mu_{sigma(1)}, ..., mu_{sigma(n)}) and
    sigma(u) = (u_{sigma(1)}, ..., u_{sigma(n)}).
    """
    sigma = tuple(int(x) for x in sigma)
    if sorted(sigma) != list(range(1, I.n + 1)):
        raise ValueError(f"{sigma} is not a permutation of 1..{I.n}")
    u = np.asarray(u, dtype=complex)
    word = tuple(I.word[k - 1] for k in sigma)
    return Partition(word, I.N), u[np.asarray(sigma) - 1]


def concat(I: Partition, J: Partition) -> Partition:
    """I + J: the word of I followed by the word of J (J's rows shifted by m)."""
    if I.N != J.N:
        raise ValueError("cannot concatenate partitions with different N")
    return Partition(I.word + J.word, I.N)


def weight_vector(word: Sequence[int], N: int) -> np.ndarray:
    """sum_j epsbar_{mu_j} in the epsilon basis: counts minus n/N."""
    counts = np.bincount(np.asarray(word, dtype=int) - 1, minlength=N).astype(float)
    return counts - len(word) / N


def all_words(N: int, n: int):
    for w in itertools.product(range(1, N + 1), repeat=n):
        yield Partition(w, N)


def compose(s1: Sequence[int], s2: Sequence[int]) -> tuple[int, ...]:
    """(s1 o s2)(k) = s1(s2(k)) in one-line notation."""
    return tuple(s1[k - 1] for k in s2)


def inverse(s: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(s)
    for i, v in enumerate(s, start=1):
        out[v - 1] = i
    return tuple(out)


def longest(n: int) -> tuple[int, ...]:
    return tuple(range(n, 0, -1))


def reduced_word(s: Sequence[int]) -> list[int]:
    """Adjacent transpositions i (meaning s_i) with s = s_{i_1} s_{i_2} ... s_{i_k}.

    Found by bubble-sorting s from the right: right-multiplying by s_i swaps
    positions i and i+1 in one-line notation.
    """
    cur = list(s)
    out = []
    changed = True
    while changed:
        changed = False
        for i in range(len(cur) - 1):
            if cur[i] > cur[i + 1]:
                cur[i], cur[i + 1] = cur[i + 1], cur[i]
                out.append(i + 1)
                changed = True
    return out[::-1]
