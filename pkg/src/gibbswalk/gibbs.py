"""Critical exponents, the Gibbs stream, and its quantitative audits.

The weighted Poincare series over the free group factors through the
no-backtrack window graph, so the critical exponent is the log spectral
radius of the transfer matrix and the boundary measure is an explicit
stationary Markov measure built from the Perron data.  All cylinder masses
are exact (up to float rounding); the weak-limit construction survives as a
truncated-series oracle for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cylfun import _sibling_extremes
from .potentials import Potential, d_phi, rho_phi, sym_potential, window_graph
from .stems import StemTable
from .words import (
    Alphabet,
    BoundaryWord,
    Cylinder,
    Word,
    cylinder_at_origin,
    inverse_letter,
)

PERRON_TOL = 1e-14


class UnsupportedRankError(ValueError):
    """Transfer structure is reducible (rank-1 free group)."""


class ConvergenceError(RuntimeError):
    pass


def _strongly_connected(succ: list[list[int]]) -> bool:
    n = len(succ)
    rev: list[list[int]] = [[] for _ in range(n)]
    for u, vs in enumerate(succ):
        for v in vs:
            rev[v].append(u)

    def reach(adj):
        seen = {0}
        stack = [0]
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == n

    return reach(succ) and reach(rev)


def transfer_matrix(P: Potential) -> tuple[list, list[list[int]], np.ndarray]:
    """Window states, successor lists, and M[u, v] = e^{-phi(v)} on edges."""
    states, succ, wts = window_graph(P)
    if not _strongly_connected(succ):
        raise UnsupportedRankError("transfer matrix is reducible; need free rank >= 2")
    n = len(states)
    M = np.zeros((n, n))
    ew = np.exp(-wts)
    for u, vs in enumerate(succ):
        for v in vs:
            M[u, v] = ew[v]
    return states, succ, M


def _power_iteration(M: np.ndarray, tol: float = PERRON_TOL) -> tuple[float, np.ndarray]:
    v = np.full(M.shape[0], 1.0 / M.shape[0])
    rho = 1.0
    for _ in range(200_000):
        w = M @ v
        rho = float(w.sum())
        w /= rho
        if float(np.abs(M @ w - rho * w).max()) <= tol * max(rho, 1.0):
            return rho, w
        v = w
    raise ConvergenceError("Perron iteration did not reach tolerance")


def critical_exponent(P: Potential, slope_check: tuple[int, int] | None = None) -> float:
    """Divergence abscissa of the weighted Poincare series: log Perron radius.

    With `slope_check = (n0, n1)` also verifies the growth rate of the shell
    sums against the spectral value and raises on disagreement beyond 1e-6.
    """
    _, _, M = transfer_matrix(P)
    rho, _ = _power_iteration(M)
    lam = math.log(rho)
    if slope_check is not None:
        n0, n1 = slope_check
        slope = shell_slope(P, n0, n1)
        if abs(slope - lam) > 1e-6:
            raise ConvergenceError(f"shell slope {slope} disagrees with spectral value {lam}")
    return lam


def shell_sums_log(P: Potential, n_max: int) -> np.ndarray:
    """log of W_n = sum over |g| = n of e^{-d_phi(e, g)}, n = 1..n_max."""
    states, succ, M = transfer_matrix(P)
    m = P.depth
    # suffix-rule factor carried by the final window of each word
    sigma = np.array([
        math.exp(-sum(P.window(w[m - j:]) for j in range(1, m))) for w in states
    ])
    out = np.empty(n_max)
    for n in range(1, min(m, n_max + 1)):
        out[n - 1] = math.log(sum(math.exp(-d_phi(P, (), g)) for g in P.ab.reduced_words(n)))
    if n_max < m:
        return out
    v = np.array([math.exp(-P.table[w]) for w in states])
    log_scale = 0.0
    for n in range(m, n_max + 1):
        out[n - 1] = math.log(float(v @ sigma)) + log_scale
        v = M.T @ v
        s = float(v.sum())
        v /= s
        log_scale += math.log(s)
    return out


def shell_slope(P: Potential, n0: int, n1: int) -> float:
    logs = shell_sums_log(P, n1)
    return (logs[n1 - 1] - logs[n0 - 1]) / (n1 - n0)


def poincare_series(P: Potential, lam: float, n_max: int, patterson_a: float = 0.0) -> float:
    """Truncated weighted Poincare series, optionally with the polynomial
    Patterson factor (1 + x)^a on each term (default off)."""
    logs = shell_sums_log(P, n_max)
    total = math.exp(-0.0)  # the identity term
    for n in range(1, n_max + 1):
        term = math.exp(logs[n - 1] - lam * n)
        if patterson_a:
            term *= (1.0 + n) ** patterson_a
        total += term
    return total


def normalize(P: Potential) -> Potential:
    """Shift the table so the critical exponent vanishes (Gibbs data unchanged)."""
    return P.shifted(critical_exponent(P))


# --------------------------------------------------------------------------


class GibbsStream:
    """The equivariant family of boundary measures attached to a potential.

    `potential` is the zero-pressure normalization of the input; `pressure`
    records the critical exponent that was subtracted.  Immutable after
    construction (caches only accumulate derived arrays); safe to share.
    """

    def __init__(self, potential: Potential, base: Word = ()):
        self.ab = potential.ab
        self.pressure = critical_exponent(potential)
        self.potential = potential.shifted(self.pressure)
        self.base = tuple(base)
        self.sym_defect = critical_exponent(sym_potential(potential)) - self.pressure
        self.states, self.succ, self.transfer = transfer_matrix(self.potential)
        self.rho, self.h_right = _power_iteration(self.transfer)
        _, self.h_left = _power_iteration(self.transfer.T)
        m = self.potential.depth
        tab_m = StemTable(self.ab, m)
        for i, w in enumerate(self.states):  # state order must match stem order
            assert tab_m.index_of(w) == i
        self._succ_state = np.array(
            [[self.succ[u][j] for j in range(len(self.succ[u]))] for u in range(len(self.states))],
            dtype=np.int64,
        )
        wts = np.array([self.potential.table[w] for w in self.states])
        self._phi_state = wts
        self._Z = float(np.exp(-wts) @ self.h_right)
        self._sigma_state = np.array([
            sum(self.potential.window(w[m - j:]) for j in range(1, m)) for w in self.states
        ])
        self._mass: dict[int, np.ndarray] = {}
        self._state_arr: dict[int, np.ndarray] = {}
        self._wsum: dict[int, np.ndarray] = {}

    # -- layered Markov arrays ------------------------------------------------

    @property
    def depth_m(self) -> int:
        return self.potential.depth

    def _layers(self, depth: int):
        """State index and full-window weight sum per stem, cached per depth."""
        m = self.depth_m
        if depth < m:
            raise ValueError("layers exist from depth m upward")
        if depth in self._state_arr:
            return self._state_arr[depth], self._wsum[depth]
        if depth == m:
            st = np.arange(len(self.states), dtype=np.int64)
            ws = self._phi_state.copy()
        else:
            st_prev, ws_prev = self._layers(depth - 1)
            st = self._succ_state[st_prev].ravel()
            ws = (ws_prev[:, None] + self._phi_state[st.reshape(len(st_prev), -1)]).ravel()
        self._state_arr[depth], self._wsum[depth] = st, ws
        return st, ws

    def mass_array(self, depth: int) -> np.ndarray:
        """Exact masses of all depth-n cylinders seen from the base point."""
        if depth < 1:
            raise ValueError("depth must be >= 1")
        m = self.depth_m
        if depth < m:
            deep = self.mass_array(m)
            block = (self.ab.n_letters - 1) ** (m - depth)
            return deep.reshape(-1, block).sum(axis=1)
        if depth not in self._mass:
            st, ws = self._layers(depth)
            self._mass[depth] = np.exp(-ws) * self.h_right[st] / self._Z
        return self._mass[depth]

    def dphi_array(self, depth: int) -> np.ndarray:
        """d_phi(base, stem) for every depth-n stem (suffix rule included)."""
        m = self.depth_m
        if depth < m:
            tab = StemTable(self.ab, depth)
            return np.array([d_phi(self.potential, (), s) for s in tab.stems()])
        st, ws = self._layers(depth)
        return ws + self._sigma_state[st]

    # -- measures of cylinders from arbitrary points ---------------------------

    def rho_phi_array(self, q: Word, depth: int) -> np.ndarray:
        """rho^Phi_xi(base, q) per depth-n stem (constant there); depth >= |q| + m."""
        q = tuple(q)
        m = self.depth_m
        if depth < len(q) + m:
            raise ValueError("depth too shallow for stabilization")
        tab = StemTable(self.ab, depth)
        P = self.potential
        if m == 1:
            phi = np.array([P.table[(s,)] for s in self.ab.letters])
            fwd = np.concatenate([[0.0], np.cumsum([phi[s] for s in q])])
            bwd = np.concatenate([[0.0], np.cumsum([phi[inverse_letter(s)] for s in reversed(q)])])[::-1]
            prof = bwd - fwd  # rho value when the branch with q happens at c
            return prof[tab.branch_depths(q)]
        out = np.empty(tab.size)
        for i, stem in enumerate(tab.stems()):
            out[i] = d_phi(P, q, stem) - d_phi(P, (), stem)
        return out

    def rn_derivative(self, p: Word, q: Word, xi: BoundaryWord) -> float:
        """d mu_q / d mu_p at xi: exp(-rho^Phi_xi(p, q)) for the normalized table."""
        return math.exp(-rho_phi(self.potential, xi, tuple(p), tuple(q)))

    def measure_from(self, q: Word, cylinders: list[Cylinder]) -> float:
        """mu_q of a disjoint union of based cylinders, by exact RN integration."""
        q = tuple(q)
        total = 0.0
        for c in cylinders:
            for oc in cylinder_at_origin(self.ab, c):
                depth = max(len(oc.stem), len(q) + self.depth_m)
                tab = StemTable(self.ab, depth)
                lo, hi = tab.prefix_range(tuple(oc.stem))
                rho = self.rho_phi_array(q, depth)[lo:hi]
                total += float(np.exp(-rho) @ self.mass_array(depth)[lo:hi])
        return total

    def cylinder_mass(self, q: Word, c: Cylinder) -> float:
        """Mass of the cylinder as seen from q (probability only at q = base)."""
        q = tuple(q)
        if q == self.base:
            out = 0.0
            for oc in cylinder_at_origin(self.ab, c):
                d = len(oc.stem)
                tab = StemTable(self.ab, d)
                lo, hi = tab.prefix_range(tuple(oc.stem))
                out += float(self.mass_array(d)[lo:hi].sum())
            return out
        return self.measure_from(q, [c])

    def total_mass_from(self, q: Word) -> float:
        return self.measure_from(q, [Cylinder((s,)) for s in self.ab.letters])

    def cylinder_mass_of_stem(self, stem: Word) -> float:
        stem = tuple(stem)
        tab = StemTable(self.ab, len(stem))
        return float(self.mass_array(len(stem))[tab.index_of(stem)])


def hausdorff_stream(ab: Alphabet, depth: int = 1) -> GibbsStream:
    """The Gibbs stream of the zero potential (uniform visual measure)."""
    return GibbsStream(Potential.zero(ab, depth))


# --------------------------------------------------------------------------
# Audits.


@dataclass(frozen=True)
class ShadowReport:
    rows: list  # (depth, ratio_min, ratio_max)
    lo: float
    hi: float

    @property
    def bound(self) -> float:
        return max(self.hi, 1.0 / self.lo)


def shadow_lemma_audit(S: GibbsStream, max_radius: int) -> ShadowReport:
    """mu(shadow of q) * e^{d_phi(base, q)} over all 1 <= |q| <= max_radius.

    With zero pressure the shadow bound says these ratios live in a fixed
    interval [1/C, C] independent of |q|; shadows are cylinders here.
    """
    rows = []
    lo, hi = math.inf, -math.inf
    for n in range(1, max_radius + 1):
        ratios = S.mass_array(n) * np.exp(S.dphi_array(n))
        rmin, rmax = float(ratios.min()), float(ratios.max())
        rows.append((n, rmin, rmax))
        lo, hi = min(lo, rmin), max(hi, rmax)
    return ShadowReport(rows=rows, lo=lo, hi=hi)


@dataclass(frozen=True)
class ShadowIntegralReport:
    rows: list  # (s, integral, scaled)
    lo: float
    hi: float


def shadow_integral_audit(S: GibbsStream, s_max: int) -> ShadowIntegralReport:
    """integral of e^{-d_phi(base, ray(s))} d(hausdorff) as exact cylinder sums.

    The integrand is constant on depth s+m-1 cylinders; the report scales by
    e^{lambda_0 s} which must stay inside a bounded interval.
    """
    ab = S.ab
    m = S.depth_m
    lam0 = math.log(ab.n_letters - 1)
    M = S.transfer
    v = np.array([math.exp(-S.potential.table[w]) for w in S.states])
    rows = []
    lo, hi = math.inf, -math.inf
    branching = ab.n_letters - 1
    for s in range(1, s_max + 1):
        # paths of s windows <-> stems of depth s+m-1, uniform measure weight
        unif = (1.0 / ab.n_letters) * branching ** (-(s + m - 2))
        integral = float(v.sum()) * unif
        scaled = integral * math.exp(lam0 * s)
        rows.append((s, integral, scaled))
        lo, hi = min(lo, scaled), max(hi, scaled)
        v = M.T @ v
    return ShadowIntegralReport(rows=rows, lo=lo, hi=hi)


def rn_holder_audit(S: GibbsStream, q: Word, eps: float) -> tuple[float, bool]:
    """Measured Holder constant of xi -> rho^Phi_xi(base, q) at scales below
    e^{-d(base,q)}, normalized by e^{eps * d}; exact over stem classes.

    Pairs agreeing past the branch with q share the stabilized value, so only
    the first m-1 scales can contribute (zero for depth-1 tables).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    q = tuple(q)
    n = len(q)
    m = S.depth_m
    depth = n + m
    rho = S.rho_phi_array(q, depth)
    d_emp = 0.0
    for j in range(n, depth):
        hi, lo = _sibling_extremes(S.ab, depth, rho, j)
        gap = float(np.maximum(hi - rho, rho - lo).max())
        if math.isfinite(gap):
            d_emp = max(d_emp, gap * math.exp(eps * j))
    d_emp *= math.exp(-eps * n)
    return d_emp, True


def rn_holder_sweep(S: GibbsStream, max_radius: int, eps: float, words_per_len: int = 4,
                    seed: int = 0) -> list[tuple[Word, float]]:
    import random as _random

    rng = _random.Random(seed)
    rows = []
    for n in range(1, max_radius + 1):
        picks = set()
        for _ in range(words_per_len):
            w = []
            for i in range(n):
                choices = [s for s in S.ab.letters if not w or s != inverse_letter(w[-1])]
                w.append(rng.choice(choices))
            picks.add(tuple(w))
        for q in sorted(picks):
            rows.append((q, rn_holder_audit(S, q, eps)[0]))
    return rows
