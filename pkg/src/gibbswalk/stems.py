"""Lexicographic indexing of depth-n cylinder stems for vectorized sums.

Index layout: the first letter contributes letter * (2k-1)^(n-1); each later
letter contributes its branch index (position among the 2k-1 legal successors
of the previous letter) times a power of (2k-1).  Consequently the stems
extending a fixed prefix occupy a contiguous index range, so restriction to a
cylinder is a slice.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .words import Alphabet, Word, inverse_letter


class StemTable:
    def __init__(self, ab: Alphabet, depth: int):
        if depth < 1:
            raise ValueError("stem depth must be >= 1")
        self.ab = ab
        self.depth = depth
        k2 = ab.n_letters
        self.branching = k2 - 1
        self.size = k2 * self.branching ** (depth - 1)
        # child_letters[s, j] = j-th legal successor of s (ascending)
        self.child_letters = np.array(
            [[t for t in range(k2) if t != inverse_letter(s)] for s in range(k2)],
            dtype=np.int64,
        )
        self.branch_index = np.full((k2, k2), -1, dtype=np.int64)
        for s in range(k2):
            for j, t in enumerate(self.child_letters[s]):
                self.branch_index[s, t] = j

    # -- scalar stem <-> index ----------------------------------------------

    def index_of(self, stem: Word) -> int:
        if len(stem) != self.depth:
            raise ValueError(f"expected stem of depth {self.depth}")
        idx = stem[0]
        for a, b in zip(stem, stem[1:]):
            j = self.branch_index[a, b]
            if j < 0:
                raise ValueError("stem is not reduced")
            idx = idx * self.branching + j
        return int(idx)

    def stem_of(self, idx: int) -> Word:
        digits = []
        for _ in range(self.depth - 1):
            idx, j = divmod(idx, self.branching)
            digits.append(j)
        out = [idx]
        for j in reversed(digits):
            out.append(int(self.child_letters[out[-1], j]))
        return tuple(out)

    def stems(self):
        for i in range(self.size):
            yield self.stem_of(i)

    def prefix_range(self, w: Word) -> tuple[int, int]:
        """Contiguous [lo, hi) of stems extending the reduced word w."""
        if not 1 <= len(w) <= self.depth:
            raise ValueError("prefix length out of range")
        lo = w[0]
        for a, b in zip(w, w[1:]):
            j = self.branch_index[a, b]
            if j < 0:
                raise ValueError("prefix is not reduced")
            lo = lo * self.branching + j
        span = self.branching ** (self.depth - len(w))
        return lo * span, (lo + 1) * span

    # -- vectorized views ----------------------------------------------------

    @property
    def letters(self) -> np.ndarray:
        """(size, depth) array of stem letters (cached)."""
        return _letters_array(self.ab.rank, self.depth)

    def refine_map(self) -> "StemTable":
        return StemTable(self.ab, self.depth + 1)

    def branch_depths(self, w: Word) -> np.ndarray:
        """Per-stem confluence length with the word w (clipped at depth)."""
        c = np.zeros(self.size, dtype=np.int64)
        for i in range(1, min(len(w), self.depth) + 1):
            lo, hi = self.prefix_range(w[:i])
            c[lo:hi] = i
        return c


@lru_cache(maxsize=None)
def _letters_array(rank: int, depth: int) -> np.ndarray:
    ab = Alphabet(rank)
    tab = StemTable(ab, depth)
    out = np.empty((tab.size, depth), dtype=np.int8)
    first = np.repeat(np.arange(ab.n_letters), tab.branching ** (depth - 1))
    out[:, 0] = first
    idx = np.arange(tab.size)
    rem = idx % tab.branching ** (depth - 1)
    for col in range(1, depth):
        span = tab.branching ** (depth - 1 - col)
        j = rem // span
        rem = rem % span
        out[:, col] = tab.child_letters[out[:, col - 1], j]
    out.setflags(write=False)
    return out
