"""Boundary functions represented exactly as cylinder-constant arrays.

Every sup, inf, integral and Holder constant below is a finite exact
computation over depth-n stems; there is no sampling error anywhere in the
certification pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stems import StemTable
from .words import Alphabet, BoundaryWord, Word


@dataclass(frozen=True)
class CylinderFunction:
    """Function on the boundary, constant on depth-`depth` cylinders."""

    ab: Alphabet
    depth: int
    values: np.ndarray

    def __post_init__(self):
        tab = StemTable(self.ab, self.depth)
        if self.values.shape != (tab.size,):
            raise ValueError(f"expected {tab.size} values for depth {self.depth}")
        v = np.array(self.values, dtype=float, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, ab: Alphabet, value: float, depth: int = 1) -> "CylinderFunction":
        tab = StemTable(ab, depth)
        return cls(ab, depth, np.full(tab.size, float(value)))

    @classmethod
    def from_table(cls, ab: Alphabet, depth: int, table: dict, default: float = 0.0) -> "CylinderFunction":
        tab = StemTable(ab, depth)
        vals = np.full(tab.size, float(default))
        for stem, v in table.items():
            lo, hi = tab.prefix_range(tuple(stem))
            vals[lo:hi] = float(v)
        return cls(ab, depth, vals)

    @property
    def table(self) -> StemTable:
        return StemTable(self.ab, self.depth)

    # -- refinement and arithmetic -------------------------------------------

    def refine(self, depth: int) -> "CylinderFunction":
        if depth < self.depth:
            raise ValueError("cannot coarsen a cylinder function")
        if depth == self.depth:
            return self
        factor = (self.ab.n_letters - 1) ** (depth - self.depth)
        return CylinderFunction(self.ab, depth, np.repeat(self.values, factor))

    def _align(self, other: "CylinderFunction"):
        d = max(self.depth, other.depth)
        return self.refine(d), other.refine(d)

    def _binop(self, other, op):
        if isinstance(other, CylinderFunction):
            a, b = self._align(other)
            return CylinderFunction(self.ab, a.depth, op(a.values, b.values))
        return CylinderFunction(self.ab, self.depth, op(self.values, float(other)))

    def __add__(self, other):
        return self._binop(other, np.add)

    def __sub__(self, other):
        return self._binop(other, np.subtract)

    def __mul__(self, other):
        return self._binop(other, np.multiply)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        return self._binop(other, np.divide)

    # -- evaluation, bounds, integrals ----------------------------------------

    def __call__(self, xi: BoundaryWord) -> float:
        return float(self.values[self.table.index_of(xi.prefix(self.depth))])

    @property
    def sup(self) -> float:
        return float(self.values.max())

    @property
    def inf(self) -> float:
        return float(self.values.min())

    def integral(self, mass: np.ndarray) -> float:
        """Integral against a measure given by its depth-aligned mass array."""
        if mass.shape != self.values.shape:
            raise ValueError("mass array depth mismatch")
        return float(self.values @ mass)

    def l1(self, mass: np.ndarray) -> float:
        return float(np.abs(self.values) @ mass)

    # -- ratio and Holder diagnostics ------------------------------------------

    def ratio_within(self, scale: float) -> float:
        """sup f(y)/f(x) over pairs with pi(x, y) <= scale (closed balls)."""
        j = scale_depth(scale)
        if j == 0:
            return self.sup / self.inf
        if j >= self.depth:
            return 1.0
        blocks = self.values.reshape(-1, (self.ab.n_letters - 1) ** (self.depth - j))
        return float((blocks.max(axis=1) / blocks.min(axis=1)).max())

    def holder_at(self, r: float, a: float) -> np.ndarray:
        """D_r^a f(x) per depth stem: sup_{pi(x,y)<=r} |f(x)-f(y)| / pi(x,y)^a."""
        j0 = scale_depth(r)
        v = self.values
        out = np.zeros_like(v)
        for j in range(j0, self.depth):
            hi, lo = _sibling_extremes(self.ab, self.depth, v, j)
            gap = np.maximum(hi - v, v - lo)
            np.maximum(out, gap * math.exp(a * j), out)
        return out


def scale_depth(scale: float) -> int:
    """Smallest integer j with e^{-j} <= scale ... i.e. pairs within the scale
    share at least j letters.  scale >= 1 imposes nothing (j = 0)."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    if scale >= 1:
        return 0
    return max(0, math.ceil(-math.log(scale) - 1e-12))


def _sibling_extremes(ab: Alphabet, depth: int, v: np.ndarray, j: int):
    """Per-stem max/min over stems agreeing with it to exactly j letters.

    For j >= 1 these are the other children of the depth-j ancestor; for j = 0
    the other first-letter subtrees.
    """
    b = ab.n_letters - 1
    if j == 0:
        groups = v.reshape(ab.n_letters, -1)
        gmax = groups.max(axis=1)
        gmin = groups.min(axis=1)
        hi = _excluded_max(gmax[None, :], axis=1)[0]
        lo = _excluded_min(gmin[None, :], axis=1)[0]
        reps = groups.shape[1]
        return np.repeat(hi, reps), np.repeat(lo, reps)
    span = b ** (depth - j - 1)
    blocks = v.reshape(-1, b, span)
    bmax = blocks.max(axis=2)
    bmin = blocks.min(axis=2)
    hi = _excluded_max(bmax, axis=1)
    lo = _excluded_min(bmin, axis=1)
    return np.repeat(hi.ravel(), span), np.repeat(lo.ravel(), span)


def _excluded_max(arr: np.ndarray, axis: int) -> np.ndarray:
    """max over the axis excluding each entry's own slot (top-2 trick)."""
    order = np.sort(arr, axis=axis)
    top = order.take([-1], axis=axis)
    second = order.take([-2], axis=axis) if arr.shape[axis] > 1 else np.full_like(top, -np.inf)
    return np.where(arr == top, second, top)


def _excluded_min(arr: np.ndarray, axis: int) -> np.ndarray:
    order = np.sort(arr, axis=axis)
    bot = order.take([0], axis=axis)
    second = order.take([1], axis=axis) if arr.shape[axis] > 1 else np.full_like(bot, np.inf)
    return np.where(arr == bot, second, bot)


def translate_function(f: CylinderFunction, g: Word) -> CylinderFunction:
    """(g_* f)(xi) = f(g^{-1} xi), exactly, at depth |g| + depth(f)."""
    ab = f.ab
    ginv = ab.inv(tuple(g))
    depth = len(g) + f.depth
    tab = StemTable(ab, depth)
    src = f.table
    vals = np.empty(tab.size)
    for i, stem in enumerate(tab.stems()):
        u = ab.mul(ginv, stem)
        vals[i] = f.values[src.index_of(u[: f.depth])]
    return CylinderFunction(ab, depth, vals)
