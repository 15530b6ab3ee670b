"""Depth-m potentials on the geodesic space and their weighted geometry.

A potential is a table over reduced m-letter windows of forward letters; its
value on a geodesic is the table entry of the next m letters.  The weighted
length of a segment is the sum (unit edges, so integral = sum) of window
values along it.  Windows that run off the end of a finite segment are scored
by the suffix rule; every cocycle quantity below is independent of that
convention because the dangling windows cancel in differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .words import Alphabet, BoundaryWord, Word, inverse_letter

SUFFIX_RULES = ("average", "extend")


@dataclass(frozen=True)
class Potential:
    ab: Alphabet
    depth: int
    table: dict
    suffix_rule: str = "average"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("potential depth must be >= 1")
        if self.suffix_rule not in SUFFIX_RULES:
            raise ValueError(f"unknown suffix rule {self.suffix_rule!r}")
        want = set(self.ab.reduced_words(self.depth))
        got = {tuple(w) for w in self.table}
        if got != want:
            raise ValueError("table must cover exactly the reduced windows of the given depth")
        tbl = {tuple(w): float(v) for w, v in self.table.items()}
        object.__setattr__(self, "table", tbl)
        object.__setattr__(self, "_short", _short_window_values(self.ab, self.depth, tbl))

    @classmethod
    def constant(cls, ab: Alphabet, value: float, depth: int = 1) -> "Potential":
        return cls(ab, depth, {w: value for w in ab.reduced_words(depth)})

    @classmethod
    def zero(cls, ab: Alphabet, depth: int = 1) -> "Potential":
        return cls.constant(ab, 0.0, depth)

    def shifted(self, c: float) -> "Potential":
        return Potential(self.ab, self.depth, {w: v + c for w, v in self.table.items()},
                         self.suffix_rule)

    def window(self, w: Word) -> float:
        """Value of a (possibly short) window."""
        if len(w) >= self.depth:
            return self.table[tuple(w[: self.depth])]
        return self._short[tuple(w)]

    @property
    def sup_abs(self) -> float:
        return max(abs(v) for v in self.table.values())

    @property
    def oscillation(self) -> float:
        vs = list(self.table.values())
        return max(vs) - min(vs)

    def is_symmetric(self) -> bool:
        return all(math.isclose(v, self.table[_rev_inv(w)], rel_tol=0, abs_tol=1e-15)
                   for w, v in self.table.items())


def _rev_inv(w: Word) -> Word:
    return tuple(inverse_letter(s) for s in reversed(w))


def _short_window_values(ab: Alphabet, m: int, table: dict) -> dict:
    """Suffix-rule values for windows of length 1..m-1 ("average" rule)."""
    if m == 1:
        return {}
    vals: dict = dict(table)
    for length in range(m - 1, 0, -1):
        for w in ab.reduced_words(length):
            kids = [w + (t,) for t in ab.letters if t != inverse_letter(w[-1])]
            vals[w] = sum(vals[k] for k in kids) / len(kids)
    return {w: v for w, v in vals.items() if len(w) < m}


def flip_potential(P: Potential) -> Potential:
    """The flip: window values read along the reversed geodesic."""
    return Potential(P.ab, P.depth, {w: P.table[_rev_inv(w)] for w in P.table}, P.suffix_rule)


def sym_potential(P: Potential) -> Potential:
    return Potential(P.ab, P.depth,
                     {w: 0.5 * (v + P.table[_rev_inv(w)]) for w, v in P.table.items()},
                     P.suffix_rule)


def flip_and_sym(P: Potential) -> tuple[Potential, Potential]:
    return flip_potential(P), sym_potential(P)


# --------------------------------------------------------------------------
# Weighted lengths.


def _segment_windows(P: Potential, word: Word, extension: Word | None = None) -> Iterable[float]:
    """Window values along the edges of a finite geodesic word."""
    n = len(word)
    m = P.depth
    for i in range(n):
        win = word[i : i + m]
        if len(win) < m:
            if P.suffix_rule == "extend" or extension is not None:
                ext = extension
                if ext is None:
                    last = win[-1] if win else word[-1]
                    ext = (last,) * (m - len(win))
                win = (win + ext)[:m]
                yield P.table[tuple(win)]
                continue
        yield P.window(win)


def d_phi(P: Potential, p: Word, q: Word) -> float:
    """Weighted length of the geodesic segment from p to q.

    Exact for depth 1; for deeper tables the last m-1 edges carry the suffix
    rule, so values across extension conventions differ by at most
    (m-1) * oscillation.
    """
    word = P.ab.mul(P.ab.inv(tuple(p)), tuple(q))
    return float(sum(_segment_windows(P, word)))


def d_phi_ray(P: Potential, ray: BoundaryWord, a: float, b: float) -> float:
    """Weighted length along a ray between real parameters 0 <= a <= b.

    The integrand is constant on unit edges; fractional endpoints contribute
    proportionally.  Windows use the ray's genuine continuation, never the
    suffix rule.
    """
    if a > b:
        raise ValueError("need a <= b")
    if a < 0:
        raise ValueError("ray parameters must be nonnegative")
    m = P.depth
    total = 0.0
    i = math.floor(a)
    while i < b:
        lo = max(a, i)
        hi = min(b, i + 1)
        if hi > lo:
            win = tuple(ray.letter(i + j) for j in range(m))
            total += (hi - lo) * P.table[win]
        i += 1
    return total


def rho_phi(P: Potential, xi: BoundaryWord, p: Word, q: Word) -> float:
    """Weighted Busemann cocycle: lim_{z -> xi} d_phi(q, z) - d_phi(p, z).

    Stabilizes once z passes the branch vertices plus m letters; the dangling
    suffix-rule windows are shared by both terms and cancel, so the value is
    convention-free and satisfies the cocycle identity exactly.
    """
    n0 = len(p) + len(q) + P.depth + 2
    prev = None
    for n in (n0, n0 + 1):
        z = xi.prefix(n)
        val = d_phi(P, p, z) - d_phi(P, q, z)
        if prev is not None and abs(val - prev) > 1e-9 * (1 + abs(val)):  # pragma: no cover
            raise AssertionError("weighted Busemann limit failed to stabilize")
        prev = val
    # lim d(q,z) - d(p,z): note the sign order of the definition
    return -prev


# --------------------------------------------------------------------------
# Holder certificates and the comparison bounds.


@dataclass(frozen=True)
class HolderCertificate:
    """|Phi(g1) - Phi(g2)| <= K * dist(g1,g2)^beta for synchronized pairs."""

    K: float
    beta: float
    L: float
    scale: float = 1.0

    def __post_init__(self):
        if self.K < 0 or self.L < 0 or not 0 < self.beta <= 1:
            raise ValueError("invalid certificate constants")


def holder_certificate(P: Potential) -> HolderCertificate:
    """Certified global Holder data for a depth-m table.

    Two geodesics through a common point whose windows differ at time s have
    forward confluence c+ <= s + m, hence dist(g^s g1, g^s g2) >= e^{-m}; the
    value gap is at most the table oscillation, giving K = osc * e^m with
    exponent 1.  L is the sup norm of the table.
    """
    K = P.oscillation * math.exp(P.depth)
    return HolderCertificate(K=K, beta=1.0, L=P.sup_abs)


def comparison_bounds(cert: HolderCertificate, r: float) -> tuple[float, float]:
    """The two closed-form comparison bounds for weighted lengths.

    D_hat(r) bounds the defect between weighted lengths of same-base geodesics
    with r-close endpoints; D(r) = 2*D_hat(2r) + 2*L*r allows both endpoints
    and base points to move by r.  Monotone nondecreasing in r.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    L = max(cert.L, cert.K)
    d_hat = L * (5.0 / cert.beta + r ** (1.0 + cert.beta))
    d_hat_2r = L * (5.0 / cert.beta + (2.0 * r) ** (1.0 + cert.beta))
    return d_hat, 2.0 * d_hat_2r + 2.0 * L * r


# --------------------------------------------------------------------------
# Geodesic averages: exhaustive over the window Markov chain.


@dataclass(frozen=True)
class AverageAudit:
    eps: float
    T: float | None
    min_cycle_mean: float
    witness: Word | None  # periodic word of a cycle with mean < eps, if any

    @property
    def ok(self) -> bool:
        return self.T is not None


def window_states(ab: Alphabet, m: int) -> list[Word]:
    return list(ab.reduced_words(m))


def window_graph(P: Potential) -> tuple[list[Word], list[list[int]], np.ndarray]:
    """Successor structure of m-windows: w -> w[1:] + t, with entry weights."""
    states = window_states(P.ab, P.depth)
    index = {w: i for i, w in enumerate(states)}
    succ: list[list[int]] = []
    for w in states:
        nxt = []
        for t in P.ab.letters:
            if t != inverse_letter(w[-1]):
                if P.depth == 1:
                    nxt.append(index[(t,)])
                else:
                    nxt.append(index[w[1:] + (t,)])
        succ.append(nxt)
    weights = np.array([P.table[w] for w in states])
    return states, succ, weights


def min_cycle_mean(P: Potential) -> tuple[float, Word]:
    """Karp's minimum cycle mean over the window graph (node-weighted).

    Returns the mean and a witness cycle as a periodic letter word.
    """
    states, succ, wts = window_graph(P)
    n = len(states)
    inf = math.inf
    # Karp over edge weights w(u -> v) = wts[v]; a cycle's edge mean equals
    # its node mean, and D[0] must be identically zero for the guarantee.
    D = np.full((n + 1, n), inf)
    parent = np.full((n + 1, n), -1, dtype=int)
    D[0, :] = 0.0
    for k in range(1, n + 1):
        for u in range(n):
            if D[k - 1, u] == inf:
                continue
            base = D[k - 1, u]
            for v in succ[u]:
                cand = base + wts[v]
                if cand < D[k, v]:
                    D[k, v] = cand
                    parent[k, v] = u
    best = inf
    best_v = -1
    for v in range(n):
        if D[n, v] == inf:
            continue
        worst = -inf
        for k in range(n):
            if D[k, v] < inf:
                worst = max(worst, (D[n, v] - D[k, v]) / (n - k))
        if worst < best:
            best = worst
            best_v = v
    # recover a cycle on the optimal walk
    path = [best_v]
    for k in range(n, 0, -1):
        path.append(int(parent[k, path[-1]]))
    path.reverse()
    seen: dict[int, int] = {}
    cycle: list[int] = []
    for pos, v in enumerate(path):
        if v in seen:
            cycle = path[seen[v] : pos]
            break
        seen[v] = pos
    witness = tuple(states[v][0] for v in cycle) if cycle else ()
    return float(best), witness


def geodesic_average_audit(P: Potential, p: Word, eps: float, max_len: int) -> AverageAudit:
    """Least T with weighted length >= s*eps - T along every ray to depth max_len.

    Rays correspond to walks on the finitely many m-window states, so the
    minimum growth profile is an exact dynamic program.  If some cycle has
    mean below eps no finite T can work; the witness ray is that cycle.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    mean, cyc = min_cycle_mean(P)
    if mean < eps - 1e-12:
        return AverageAudit(eps=eps, T=None, min_cycle_mean=mean, witness=cyc)
    _, succ, wts = window_graph(P)
    cur = wts.copy()
    t_needed = max(0.0, eps - float(wts.min()))  # s = 1 handled, s = 0 gives 0
    for s in range(2, max_len + 1):
        nxt = np.full_like(cur, math.inf)
        for u in range(len(cur)):
            for v in succ[u]:
                cand = cur[u] + wts[v]
                if cand < nxt[v]:
                    nxt[v] = cand
        cur = nxt
        t_needed = max(t_needed, s * eps - float(cur.min()))
    return AverageAudit(eps=eps, T=t_needed, min_cycle_mean=mean, witness=None)
