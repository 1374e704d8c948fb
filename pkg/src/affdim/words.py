"""Words over {0, ..., N-1} and their cyclic (necklace) classes.

Letters are 0-based.  A word (i_1, ..., i_n) stands for the product
A_{i_n} ... A_{i_1}: the first letter acts first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

Word = tuple[int, ...]


@dataclass(frozen=True)
class NecklaceClass:
    """Lexicographically least rotation of a word class, with the class size.

    The class size equals the minimal period p of the representative, which
    is the (n/p)-fold repetition of a Lyndon word of length p.
    """

    representative: Word
    class_size: int


def prenecklace_tree(n_letters: int, n_max: int) -> Iterator[tuple[Word, int]]:
    """Every prenecklace of length 1..n_max with its Lyndon period, in DFS preorder.

    This is the Fredricksen-Kessler-Maiorana recursion.  Preorder is also
    lexicographic order, and a word's parent (its prefix one letter shorter)
    is always the most recent shorter word emitted.  A prenecklace w is a
    necklace exactly when its period divides len(w).
    """
    if n_letters < 1 or n_max < 1:
        raise ValueError("need at least one letter and positive length")
    a = [0] * (n_max + 1)

    def rec(t: int, p: int) -> Iterator[tuple[Word, int]]:
        for j in range(a[t - p], n_letters):
            a[t] = j
            q = p if j == a[t - p] else t
            yield tuple(a[1 : t + 1]), q
            if t < n_max:
                yield from rec(t + 1, q)

    yield from rec(1, 1)


def word_tree(n_letters: int, n_max: int) -> Iterator[Word]:
    """All words of length 1..n_max in DFS preorder (lexicographic)."""

    def rec(prefix: Word) -> Iterator[Word]:
        for j in range(n_letters):
            w = prefix + (j,)
            yield w
            if len(w) < n_max:
                yield from rec(w)

    yield from rec(())


def enumerate_necklaces(n_letters: int, n: int) -> list[NecklaceClass]:
    """One class per rotation class of words of length n; sizes sum to N**n."""
    return [
        NecklaceClass(w, p)
        for w, p in prenecklace_tree(n_letters, n)
        if len(w) == n and n % p == 0
    ]


def all_words(n_letters: int, n: int) -> Iterator[Word]:
    return itertools.product(range(n_letters), repeat=n)
